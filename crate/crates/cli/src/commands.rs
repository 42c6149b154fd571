use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map};

use kselect_core::bench::{
    emit_curves_csv, generate_blobs, run_comparison, run_scaling, write_report, BenchMethod,
    BenchReport, BlobSpec, ReportFormat,
};
use kselect_core::dataset::{load_csv, standardize, DataMatrix};
use kselect_core::kmeans::fit_kmeans;
use kselect_core::pipeline::estimate_k as run_pipeline;

use crate::settings::Resolved;
use crate::{BenchArgs, BlobArgs, CliError, CompareArgs, EstimateArgs, GenArgs, OUTPUT_DIR_ENV};

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::runtime(format!("cannot write {}: {e}", path.display()))
}

fn load_input(r: &Resolved) -> Result<(DataMatrix, PathBuf), CliError> {
    let path = r
        .input
        .clone()
        .ok_or_else(|| CliError::usage("no input file; pass --input or set \"input\" in the config"))?;
    let x = load_csv(&path, &r.csv)?;
    Ok((x, path))
}

fn parse_format(flag: Option<&str>, r: &Resolved) -> Result<ReportFormat, CliError> {
    flag.or(r.file.format.as_deref())
        .unwrap_or("json")
        .parse()
        .map_err(|e: kselect_core::Error| CliError::usage(e.to_string()))
}

fn parse_methods(flag: Option<&[String]>, r: &Resolved, default: &[BenchMethod]) -> Result<Vec<BenchMethod>, CliError> {
    let Some(names) = flag.or(r.file.methods.as_deref()) else {
        return Ok(default.to_vec());
    };
    let mut out = Vec::new();
    for name in names {
        let m: BenchMethod = name
            .parse()
            .map_err(|e: kselect_core::Error| CliError::usage(e.to_string()))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("no methods selected"));
    }
    Ok(out)
}

pub fn estimate_k(args: EstimateArgs) -> Result<(), CliError> {
    let r = Resolved::new(&args.input, &args.estimator)?;
    let (x, _) = load_input(&r)?;
    let report = run_pipeline(&x, &r.estimate)?;

    let mut estimates = Map::new();
    let mut warnings = Vec::new();
    for e in &report.estimates {
        estimates.insert(e.method.name().into(), json!(e.k));
        warnings.extend(e.warnings.iter().map(|w| format!("{}: {w}", e.method.name())));
    }
    let mut out = json!({
        "k_final": report.k_final,
        "estimates": estimates,
        "weights": {
            "density": report.weights[0],
            "local_structure": report.weights[1],
            "ccr_coi": report.weights[2],
            "gap": report.weights[3],
        },
        "n_rows": report.n_rows,
        "n_cols": report.n_cols,
        "seed": report.seed,
        "derived_seeds": report.seeds,
        "ccr_coi_k_range": [report.ccr_coi_k_range.first(), report.ccr_coi_k_range.last()],
        "gap_k_range": [report.gap_k_range.first(), report.gap_k_range.last()],
        "standardized": report.standardization.is_some(),
        "warnings": warnings,
    });

    if args.cluster {
        let (data, params) = if r.estimate.standardize {
            let (z, p) = standardize(&x)?;
            (z, Some(p))
        } else {
            (x.clone(), None)
        };
        let fit = fit_kmeans(&data, report.k_final, &r.kmeans)?;
        let centroids = match &params {
            Some(p) => {
                let flat: Vec<f64> = fit.centroids.iter().flatten().copied().collect();
                let c = p.invert(&DataMatrix::new(fit.k, x.n_cols(), flat)?)?;
                c.rows().map(<[f64]>::to_vec).collect()
            }
            None => fit.centroids.clone(),
        };
        out["clustering"] = json!({
            "k": fit.k,
            "cluster_sizes": fit.cluster_sizes(),
            "centroids": centroids,
            "dispersion": fit.dispersion,
            "iterations_run": fit.iterations_run,
        });
    }
    if args.diagnostics {
        out["diagnostics"] = serde_json::to_value(&report.estimates)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        if let Some(p) = &report.standardization {
            out["standardization"] = json!(p);
        }
    }

    let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::runtime(e.to_string()))?;
    println!("{text}");
    if let Some(path) = &args.output {
        let mut w = create(path)?;
        writeln!(w, "{text}").and_then(|_| w.flush()).map_err(io_err(path))?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

fn print_summary(report: &BenchReport) {
    println!(
        "{} ({} rows x {} cols)",
        report.dataset_id, report.n_rows, report.n_cols
    );
    println!(
        "{:<22} {:>4} {:>10} {:>10} {:>11} {:>14}",
        "method", "k", "sil_full", "sil_cond", "seconds", "distance_evals"
    );
    for row in &report.rows {
        let k = row.selected_k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<22} {:>4} {:>10} {:>10} {:>11.4} {:>14}",
            row.method.name(),
            k,
            fmt_opt(row.silhouette_full_quality),
            fmt_opt(row.silhouette_condensed_quality),
            row.elapsed_seconds,
            row.distance_eval_count
        );
        if let Some(e) = &row.error {
            println!("  error: {e}");
        }
    }
}

fn write_reports(reports: &[BenchReport], format: ReportFormat, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    write_report(reports, format, &mut w)?;
    w.flush().map_err(io_err(path))
}

fn extension(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Json => "json",
        ReportFormat::Csv => "csv",
    }
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let r = Resolved::new(&args.input, &args.estimator)?;
    let format = parse_format(args.format.as_deref(), &r)?;
    let default = [
        BenchMethod::Proposed,
        BenchMethod::Wcss,
        BenchMethod::Dbi,
        BenchMethod::SilhouetteFull,
    ];
    let methods = parse_methods(args.methods.as_deref(), &r, &default)?;
    let cfg = r.bench_config(args.trials, args.no_warmup)?;
    let (x, path) = load_input(&r)?;
    let id = args.dataset_id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into())
    });

    let report = run_comparison(&x, &methods, &id, &cfg)?;
    let out = args
        .output
        .clone()
        .or(r.file.output.clone())
        .unwrap_or_else(|| output_dir().join(format!("compare_report.{}", extension(format))));
    write_reports(std::slice::from_ref(&report), format, &out)?;
    if let Some(curves) = &args.curves {
        emit_curves_csv(&report.curves, curves)?;
    }
    print_summary(&report);
    println!("report written to {}", out.display());
    Ok(())
}

fn blob_spec(b: &BlobArgs, n_per: usize, seed: u64) -> BlobSpec {
    BlobSpec {
        n_per_cluster: n_per,
        d: b.d,
        k_true: b.k,
        center_spread: b.spread,
        cluster_sd: b.sd,
        seed,
    }
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let r = Resolved::new(&Default::default(), &args.estimator)?;
    let format = parse_format(args.format.as_deref(), &r)?;
    let methods = parse_methods(args.methods.as_deref(), &r, &BenchMethod::ALL)?;
    let cfg = r.bench_config(args.trials, args.no_warmup)?;
    let sizes = args.sizes.clone().unwrap_or(vec![1000, 2000]);
    if sizes.is_empty() || sizes.iter().any(|&n| n < args.blobs.k.max(3)) {
        return Err(CliError::usage(format!(
            "every size must be at least max(3, k) = {}",
            args.blobs.k.max(3)
        )));
    }
    let spec = blob_spec(&args.blobs, 1, r.estimate.seed);
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;

    let reports = run_scaling(&sizes, &spec, &methods, &cfg)?;
    let out = args
        .output
        .clone()
        .or(r.file.output.clone())
        .unwrap_or_else(|| output_dir().join(format!("bench_report.{}", extension(format))));
    write_reports(&reports, format, &out)?;
    for report in &reports {
        print_summary(report);
        println!();
    }
    println!("report written to {}", out.display());
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    let spec = blob_spec(&args.blobs, args.n_per, args.seed);
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let (x, labels) = generate_blobs(&spec)?;

    let path = args.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
            PathBuf::from(dir).join(format!(
                "blobs_k{}_d{}_n{}_seed{}.csv",
                spec.k_true,
                spec.d,
                x.n_rows(),
                spec.seed
            ))
        })
    });
    let mut w: Box<dyn Write> = match &path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let shown = path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let err = io_err(&shown);
    for (row, label) in x.rows().zip(&labels) {
        let mut line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        if args.with_labels {
            line.push(',');
            line.push_str(&label.to_string());
        }
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_extensions() {
        assert_eq!(extension(ReportFormat::Json), "json");
        assert_eq!(extension(ReportFormat::Csv), "csv");
    }

    #[test]
    fn missing_values_print_as_dash() {
        assert_eq!(fmt_opt(None), "-");
        assert_eq!(fmt_opt(Some(0.5)), "0.5000");
    }

    // keeps the method-name table in the help text honest
    #[test]
    fn help_method_names_parse() {
        for name in ["proposed", "wcss", "dbi", "silhouette", "silhouette-condensed"] {
            assert!(name.parse::<BenchMethod>().is_ok(), "{name}");
        }
    }
}

mod common;

use std::io::Write;

use common::random_matrix;
use kselect_core::dataset::{
    load_csv, process_in_batches, sample_rows, standardize, CsvOptions, StandardizationParams,
};
use kselect_core::{DataMatrix, Error};
use proptest::prelude::*;

#[test]
fn standardized_moments_by_direct_summation() {
    let x = random_matrix(50, 3, 8);
    let (z, params) = standardize(&x).unwrap();
    for j in 0..3 {
        let col: Vec<f64> = (0..50).map(|i| z.get(i, j)).collect();
        let mean = col.iter().sum::<f64>() / 50.0;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50.0).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((sd - 1.0).abs() < 1e-9);

        let raw: Vec<f64> = (0..50).map(|i| x.get(i, j)).collect();
        let m = raw.iter().sum::<f64>() / 50.0;
        assert!((params.means[j] - m).abs() < 1e-12);
    }
}

#[test]
fn params_serialize_as_two_arrays() {
    let x = DataMatrix::from_rows(&[[1.0, 5.0], [3.0, 5.0]]).unwrap();
    let (_, p) = standardize(&x).unwrap();
    let json = serde_json::to_value(&p).unwrap();
    assert_eq!(json, serde_json::json!({"means": [2.0, 5.0], "stddevs": [1.0, 0.0]}));
}

#[test]
fn equal_batch_means_equal_the_global_mean() {
    let x = random_matrix(60, 4, 2);
    let global = x.values().iter().sum::<f64>() / x.values().len() as f64;
    for b in [1, 5, 12, 20, 30, 60] {
        let m = process_in_batches(&x, b, |batch| {
            batch.values().iter().sum::<f64>() / batch.values().len() as f64
        })
        .unwrap();
        assert!((m - global).abs() < 1e-12, "b = {b}");
    }
}

#[test]
fn csv_files_load_from_disk() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "a;b;c\n1;2;3\n4;5;6").unwrap();
    let opts = CsvOptions {
        delimiter: b';',
        has_header: true,
        columns: Some(vec![2, 0]),
    };
    let x = load_csv(f.path(), &opts).unwrap();
    assert_eq!(x.n_rows(), 2);
    assert_eq!(x.row(1), &[6.0, 4.0]);

    let missing = load_csv("/definitely/not/here.csv", &CsvOptions::default()).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));
    assert!(missing.to_string().contains("/definitely/not/here.csv"));
}

fn sorted_rows(x: &DataMatrix) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = x.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
    rows.sort();
    rows
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardize_round_trips(
        pts in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40),
    ) {
        let x = DataMatrix::from_rows(&pts).unwrap();
        let (z, p) = standardize(&x).unwrap();
        let back = p.invert(&z).unwrap();
        for i in 0..x.n_rows() {
            for j in 0..3 {
                if p.stddevs[j] > 0.0 {
                    let (a, b) = (x.get(i, j), back.get(i, j));
                    prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
                } else {
                    prop_assert_eq!(z.get(i, j), 0.0);
                }
            }
        }
        prop_assert_eq!(StandardizationParams::fit(&x), p);
    }

    #[test]
    fn samples_are_sub_multisets(n in 1usize..60, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let x = random_matrix(n, 2, seed);
        let m = ((n as f64 * frac) as usize).max(1);
        let s = sample_rows(&x, m, seed).unwrap();
        prop_assert_eq!(s.n_rows(), m);
        let all = sorted_rows(&x);
        let mut pool = all.clone();
        for r in sorted_rows(&s) {
            let pos = pool.iter().position(|p| *p == r);
            prop_assert!(pos.is_some());
            pool.remove(pos.unwrap());
        }
        prop_assert_eq!(sample_rows(&x, m, seed).unwrap(), s);
    }
}

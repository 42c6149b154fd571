//! Dense data matrices, CSV ingestion, z-score standardization, row sampling
//! and batch aggregation.

use std::fs::File;
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Batch size used when none is given.
pub const DEFAULT_BATCH_SIZE: usize = 1000;

/// An `n_rows x n_cols` matrix of finite reals stored row-major. Rows are
/// samples, columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "{} values do not fill a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n_cols,
                column: pos % n_cols,
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::Ragged {
                    row: i,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.n_cols];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n_rows as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.n_cols, values)
    }

    /// Contiguous row slice `[range.start, range.end)` as an owned matrix.
    pub fn slice_rows(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.n_rows {
            return Err(Error::InvalidArgument(format!(
                "row range {range:?} invalid for {} rows",
                self.n_rows
            )));
        }
        let values = self.values[range.start * self.n_cols..range.end * self.n_cols].to_vec();
        Ok(Self {
            n_rows: range.len(),
            n_cols: self.n_cols,
            values,
        })
    }

    /// Per-column `(min, max)`.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.n_cols];
        for row in self.rows() {
            for (b, &v) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bounds
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Zero-based column indices to keep; `None` keeps every column.
    pub columns: Option<Vec<usize>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            columns: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, options)
}

/// Parses delimited numeric text. Row and column numbers in errors are
/// 1-based and count the header line when there is one.
pub fn parse_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut n_rows = 0usize;
    let mut width: Option<usize> = None;
    for (line_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row_number = line_idx + 1;
        if options.has_header && line_idx == 0 {
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Ragged {
                    row: row_number,
                    expected: w,
                    found: record.len(),
                })
            }
            _ => {}
        }
        let mut push = |col: usize| -> Result<()> {
            let field = record.get(col).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "column {} requested but row {row_number} has {} fields",
                    col + 1,
                    record.len()
                ))
            })?;
            let v: f64 = field.trim().parse().map_err(|_| Error::NonNumeric {
                row: row_number,
                column: col + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: row_number,
                    column: col + 1,
                    value: field.to_string(),
                });
            }
            values.push(v);
            Ok(())
        };
        match &options.columns {
            Some(cols) => cols.iter().try_for_each(|&c| push(c))?,
            None => (0..record.len()).try_for_each(&mut push)?,
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Empty);
    }
    let n_cols = values.len() / n_rows;
    DataMatrix::new(n_rows, n_cols, values)
}

/// Per-column location and scale used by [`standardize`]. Standard deviations
/// use the population convention (divide by n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

impl StandardizationParams {
    pub fn fit(x: &DataMatrix) -> Self {
        let means = x.column_means();
        let mut var = vec![0.0; x.n_cols()];
        for row in x.rows() {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let n = x.n_rows() as f64;
        let stddevs = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Self { means, stddevs }
    }

    fn check(&self, x: &DataMatrix) -> Result<()> {
        if x.n_cols() != self.means.len() {
            return Err(Error::Dimension(format!(
                "parameters cover {} columns, matrix has {}",
                self.means.len(),
                x.n_cols()
            )));
        }
        Ok(())
    }

    /// Zero-variance columns map to zero.
    pub fn apply(&self, x: &DataMatrix) -> Result<DataMatrix> {
        self.check(x)?;
        let d = x.n_cols();
        let values = x
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let j = idx % d;
                if self.stddevs[j] > 0.0 {
                    (v - self.means[j]) / self.stddevs[j]
                } else {
                    0.0
                }
            })
            .collect();
        DataMatrix::new(x.n_rows(), d, values)
    }

    /// Inverse of [`apply`](Self::apply); zero-variance columns come back as their mean.
    pub fn invert(&self, z: &DataMatrix) -> Result<DataMatrix> {
        self.check(z)?;
        let d = z.n_cols();
        let values = z
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let j = idx % d;
                v * self.stddevs[j] + self.means[j]
            })
            .collect();
        DataMatrix::new(z.n_rows(), d, values)
    }
}

/// Z-score standardization: every column gets mean 0 and, unless constant,
/// population standard deviation 1.
pub fn standardize(x: &DataMatrix) -> Result<(DataMatrix, StandardizationParams)> {
    if x.n_rows() < 2 {
        return Err(Error::InvalidArgument(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let params = StandardizationParams::fit(x);
    let z = params.apply(x)?;
    Ok((z, params))
}

/// Split of `n` rows into `T = ceil(n / b)` contiguous batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub n_rows: usize,
    pub batch_size: usize,
    pub n_batches: usize,
}

impl BatchPlan {
    pub fn new(n_rows: usize, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > n_rows {
            return Err(Error::InvalidArgument(format!(
                "batch size must lie in [1, {n_rows}], got {batch_size}"
            )));
        }
        Ok(Self {
            n_rows,
            batch_size,
            n_batches: n_rows.div_ceil(batch_size),
        })
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.n_batches)
            .map(|i| i * self.batch_size..((i + 1) * self.batch_size).min(self.n_rows))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchAggregation {
    /// Plain mean over batch results; a short final batch counts as much as a full one.
    #[default]
    Unweighted,
    /// Mean weighted by batch row count.
    SizeWeighted,
}

/// Applies `func` to each contiguous batch of `batch_size` rows and returns the
/// mean of the per-batch results. Batches are visited in row order.
pub fn process_in_batches<F>(x: &DataMatrix, batch_size: usize, func: F) -> Result<f64>
where
    F: FnMut(&DataMatrix) -> f64,
{
    process_in_batches_with(x, batch_size, BatchAggregation::Unweighted, func)
}

pub fn process_in_batches_with<F>(
    x: &DataMatrix,
    batch_size: usize,
    aggregation: BatchAggregation,
    mut func: F,
) -> Result<f64>
where
    F: FnMut(&DataMatrix) -> f64,
{
    let plan = BatchPlan::new(x.n_rows(), batch_size)?;
    let mut total = 0.0;
    let mut weight = 0.0;
    for range in plan.ranges() {
        let len = range.len() as f64;
        let batch = x.slice_rows(range)?;
        let r = func(&batch);
        match aggregation {
            BatchAggregation::Unweighted => {
                total += r;
                weight += 1.0;
            }
            BatchAggregation::SizeWeighted => {
                total += r * len;
                weight += len;
            }
        }
    }
    Ok(total / weight)
}

/// Indices of `m` distinct rows drawn uniformly without replacement.
pub fn sample_indices(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "sample size must lie in [1, {n}], got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n, m).into_vec())
}

pub fn sample_rows(x: &DataMatrix, m: usize, seed: u64) -> Result<DataMatrix> {
    let idx = sample_indices(x.n_rows(), m, seed)?;
    x.select_rows(&idx)
}

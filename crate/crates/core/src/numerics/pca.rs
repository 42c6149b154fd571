use super::{symmetric_eigen_jacobi, SquareMatrix};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

/// Scores of the column-centred data on its leading principal axis.
///
/// The axis sign is fixed so that its largest-magnitude component is
/// positive, which makes the output independent of row order.
pub fn pca_project_1d(x: &DataMatrix) -> Result<Vec<f64>> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least 2 rows".into()));
    }
    let d = x.n_cols();
    let first = x.row(0);
    if x.rows().all(|r| r == first) {
        return Err(Error::Degenerate(
            "all rows identical; no principal axis".into(),
        ));
    }
    let means = x.column_means();

    let mut cov = SquareMatrix::zeros(d);
    for row in x.rows() {
        for i in 0..d {
            let ci = row[i] - means[i];
            for j in i..d {
                let v = cov.get(i, j) + ci * (row[j] - means[j]);
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / n as f64;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }

    let (_, vectors) = symmetric_eigen_jacobi(&cov)?;
    let mut axis = vectors[d - 1].clone();
    let lead = axis
        .iter()
        .copied()
        .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
    if lead < 0.0 {
        axis.iter_mut().for_each(|v| *v = -*v);
    }

    Ok(x
        .rows()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&axis)
                .map(|((v, m), a)| (v - m) * a)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn collinear_points_are_equally_spaced() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        let p = pca_project_1d(&x).unwrap();
        assert!((p[1] - p[0] - (p[2] - p[1])).abs() < 1e-12);
        // total variance = 2/3 + 2/3
        assert!((variance(&p) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_column_is_centred_identity() {
        let x = DataMatrix::from_rows(&[[1.0], [4.0], [7.0], [0.0]]).unwrap();
        let p = pca_project_1d(&x).unwrap();
        let expected = [-2.0, 1.0, 4.0, -3.0];
        let sign = p[2].signum();
        for (a, b) in p.iter().zip(expected) {
            assert!((a * sign - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_rows_error() {
        let x = DataMatrix::from_rows(&[[2.0, 3.0]; 5]).unwrap();
        assert!(matches!(pca_project_1d(&x), Err(Error::Degenerate(_))));
    }
}

//! Eigenvalues of real symmetric matrices.
//!
//! Two solvers: cyclic Jacobi rotations (also yields eigenvectors) and
//! Householder tridiagonalization followed by implicit-shift QL. Jacobi is the
//! reference; the tridiagonal path costs far less on the graph Laplacians
//! built from a few hundred samples.

use serde::{Deserialize, Serialize};

use super::SquareMatrix;
use crate::error::{Error, Result};

/// Off-diagonal Frobenius tolerance for Jacobi, relative to `max(1, |M|_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;
const QL_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSolver {
    #[default]
    Jacobi,
    TridiagonalQl,
}

/// Ascending eigenvalues and the gaps between neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub gaps: Vec<f64>,
}

impl EigenSpectrum {
    pub fn from_unsorted(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let gaps = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
        Self { eigenvalues, gaps }
    }
}

fn check_symmetric(m: &SquareMatrix) -> Result<()> {
    if m.size() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let scale = m.frobenius_sq().sqrt().max(1.0);
    let asym = m.asymmetry();
    if asym > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// Eigenvalues by cyclic Jacobi, sorted ascending.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<EigenSpectrum> {
    symmetric_eigenvalues_with(m, EigenSolver::Jacobi)
}

pub fn symmetric_eigenvalues_with(m: &SquareMatrix, solver: EigenSolver) -> Result<EigenSpectrum> {
    check_symmetric(m)?;
    let values = match solver {
        EigenSolver::Jacobi => jacobi(m, false)?.0,
        EigenSolver::TridiagonalQl => tridiagonal_ql(m)?,
    };
    Ok(EigenSpectrum::from_unsorted(values))
}

/// Full decomposition by cyclic Jacobi. Returns `(eigenvalues, eigenvectors)`
/// sorted ascending by eigenvalue; `eigenvectors[i]` pairs with `eigenvalues[i]`.
pub fn symmetric_eigen_jacobi(m: &SquareMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    check_symmetric(m)?;
    let (values, vecs) = jacobi(m, true)?;
    let v = vecs.expect("vectors requested");
    let n = m.size();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vecs = order
        .iter()
        .map(|&col| (0..n).map(|r| v.get(r, col)).collect())
        .collect();
    Ok((sorted_values, sorted_vecs))
}

fn off_diagonal_norm(a: &SquareMatrix) -> f64 {
    let n = a.size();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = a.get(i, j);
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

fn jacobi(m: &SquareMatrix, with_vectors: bool) -> Result<(Vec<f64>, Option<SquareMatrix>)> {
    let n = m.size();
    let mut a = m.clone();
    // symmetrize exactly so rotations see a symmetric input
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = with_vectors.then(|| SquareMatrix::from_diagonal(&vec![1.0; n]));
    let threshold = JACOBI_TOLERANCE * a.frobenius_sq().sqrt().max(1.0);

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A stays symmetric, so rotate rows p and q and mirror them
                // into the columns.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    let np = c * apk - s * aqk;
                    let nq = s * apk + c * aqk;
                    a.set(p, k, np);
                    a.set(q, k, nq);
                    a.set(k, p, np);
                    a.set(k, q, nq);
                }
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }
    Ok(((0..n).map(|i| a.get(i, i)).collect(), v))
}

/// Householder reduction to tridiagonal form, then implicit QL.
fn tridiagonal_ql(m: &SquareMatrix) -> Result<Vec<f64>> {
    let n = m.size();
    let (mut d, mut e) = householder_tridiagonal(m);
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence {
                    sweeps: iter,
                    off_norm: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(d)
}

/// Returns the diagonal and the `n - 1` subdiagonal entries.
fn householder_tridiagonal(m: &SquareMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.size();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail_sq: f64 = (lo + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        d[k] = a[k][k];
        if tail_sq == 0.0 {
            e[k] = a[lo][k];
            continue;
        }
        let x0 = a[lo][k];
        let norm = (x0 * x0 + tail_sq).sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        e[k] = alpha;

        // v = (x - alpha e1) / |x - alpha e1|
        v[lo] = x0 - alpha;
        for i in lo + 1..n {
            v[i] = a[i][k];
        }
        let vnorm = (v[lo] * v[lo] + tail_sq).sqrt();
        for vi in &mut v[lo..n] {
            *vi /= vnorm;
        }

        // p = A22 v, K = v' p, w = p - K v
        for i in lo..n {
            let row = &a[i];
            p[i] = (lo..n).map(|j| row[j] * v[j]).sum();
        }
        let kk: f64 = (lo..n).map(|i| v[i] * p[i]).sum();
        for i in lo..n {
            p[i] -= kk * v[i];
        }
        // A22 -= 2 v w' + 2 w v'
        for i in lo..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[i];
            for j in lo..n {
                row[j] -= 2.0 * (vi * p[j] + wi * v[j]);
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[n - 2][n - 2];
        e[n - 2] = a[n - 1][n - 2];
    }
    d[n - 1] = a[n - 1][n - 1];
    (d, e)
}

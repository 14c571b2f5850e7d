//! Dense symmetric-matrix kernel: Jacobi eigendecomposition, Moore-Penrose
//! pseudoinverse, traces and quadratic forms.
//!
//! Everything in this crate runs through real symmetric matrices (information
//! matrices of designs and their duals), so the kernel is deliberately small:
//! no general decompositions, no sparse storage. Matrices up to a few hundred
//! rows are the intended workload.

use thiserror::Error;

/// Maximum number of cyclic sweeps before the eigensolver reports failure.
const MAX_SWEEPS: usize = 100;

/// Sweep convergence: stop once the off-diagonal norm drops below this
/// multiple of the Frobenius norm of the input.
const OFF_DIAG_TOL: f64 = 1e-12;

/// Relative eigenvalue cutoff used by [`pinv_default`].
pub const DEFAULT_PINV_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (pathological input)")]
    NonConvergence { sweeps: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
}

/// Dense real symmetric matrix.
///
/// Both triangles are stored and kept bit-identical: all constructors write
/// each off-diagonal value to `(i, j)` and `(j, i)` from a single computed
/// number, so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "SymMatrix order must be at least 1");
        SymMatrix {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SymMatrix::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.order + i] = v;
        }
        m
    }

    /// Builds the matrix from `f`, evaluated once per unordered index pair.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(order);
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                m.data[i * order + j] = v;
                m.data[j * order + i] = v;
            }
        }
        m
    }

    /// Builds from full row data, rejecting rows that are not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        assert!(n >= 1, "SymMatrix order must be at least 1");
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(SymMatrix { order: n, data })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    /// Sets `(i, j)` and `(j, i)` to the same value.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.order + j] = v;
        self.data[j * self.order + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Sum of all entries, i.e. `1' M 1`.
    pub fn grand_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }
}

/// Eigendecomposition of a symmetric matrix: `values[l]` sorted descending,
/// `vectors[l]` the matching orthonormal eigenvector.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Converges when the off-diagonal norm falls below `1e-12` times the
/// Frobenius norm of the input; gives up after 100 sweeps, which only happens
/// for pathological input.
pub fn eigen_sym(m: &SymMatrix) -> Result<Eigen, LinalgError> {
    let n = m.order;
    let mut a = m.data.clone();
    // v holds the accumulated rotations; column l is eigenvector l.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = OFF_DIAG_TOL * m.frobenius_norm();

    let mut converged = false;
    for sweep in 1..=MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotation is below roundoff; zero the entry and move on.
                let g = 100.0 * apq.abs();
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e12 {
                    // Avoid overflow in theta^2; first-order expansion.
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_p = aip - s * (aiq + aip * tau);
                    let new_q = aiq + s * (aip - aiq * tau);
                    a[i * n + p] = new_p;
                    a[p * n + i] = new_p;
                    a[i * n + q] = new_q;
                    a[q * n + i] = new_q;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip - s * (viq + vip * tau);
                    v[i * n + q] = viq + s * (vip - viq * tau);
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NonConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].partial_cmp(&a[x * n + x]).unwrap());
    let values = order.iter().map(|&l| a[l * n + l]).collect();
    let vectors = order
        .iter()
        .map(|&l| (0..n).map(|i| v[i * n + l]).collect())
        .collect();
    Ok(Eigen { values, vectors })
}

/// Moore-Penrose pseudoinverse via the spectral decomposition.
///
/// Eigenvalues with magnitude at most `tol` times the largest magnitude are
/// treated as exactly zero.
pub fn pinv(m: &SymMatrix, tol: f64) -> Result<SymMatrix, LinalgError> {
    let eig = eigen_sym(m)?;
    let lam_max = eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if lam_max == 0.0 {
        return Ok(SymMatrix::zeros(m.order));
    }
    let cutoff = tol * lam_max;
    let inv: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| if l.abs() <= cutoff { 0.0 } else { 1.0 / l })
        .collect();
    Ok(SymMatrix::from_fn(m.order, |i, j| {
        (0..m.order)
            .map(|l| inv[l] * eig.vectors[l][i] * eig.vectors[l][j])
            .sum()
    }))
}

/// [`pinv`] with the crate-wide relative cutoff of `1e-9`.
pub fn pinv_default(m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    pinv(m, DEFAULT_PINV_TOL)
}

/// Trace of the pseudoinverse without forming it: the sum of reciprocals of
/// the eigenvalues whose magnitude exceeds `tol` times the largest.
pub fn trace_pinv(m: &SymMatrix, tol: f64) -> Result<f64, LinalgError> {
    let eig = eigen_sym(m)?;
    let lam_max = eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if lam_max == 0.0 {
        return Ok(0.0);
    }
    let cutoff = tol * lam_max;
    Ok(eig
        .values
        .iter()
        .filter(|l| l.abs() > cutoff)
        .map(|l| 1.0 / l)
        .sum())
}

/// Number of eigenvalues with magnitude above `tol` times the largest.
pub fn rank(m: &SymMatrix, tol: f64) -> Result<usize, LinalgError> {
    let eig = eigen_sym(m)?;
    let lam_max = eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if lam_max == 0.0 {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|l| l.abs() > tol * lam_max).count())
}

/// `x' M x`.
pub fn quad_form(m: &SymMatrix, x: &[f64]) -> Result<f64, LinalgError> {
    if x.len() != m.order {
        return Err(LinalgError::DimensionMismatch {
            expected: m.order,
            got: x.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..m.order {
        let row = m.row(i);
        let mut s = 0.0;
        for j in 0..m.order {
            s += row[j] * x[j];
        }
        acc += x[i] * s;
    }
    Ok(acc)
}

pub fn trace(m: &SymMatrix) -> f64 {
    m.trace()
}

/// `tr(A B)` for symmetric `A`, `B` of the same order.
pub fn trace_product(a: &SymMatrix, b: &SymMatrix) -> Result<f64, LinalgError> {
    if a.order != b.order {
        return Err(LinalgError::DimensionMismatch {
            expected: a.order,
            got: b.order,
        });
    }
    Ok(a.data.iter().zip(b.data.iter()).map(|(x, y)| x * y).sum())
}

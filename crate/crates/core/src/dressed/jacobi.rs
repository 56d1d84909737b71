//! Cyclic Jacobi eigensolver for real symmetric 3×3 matrices.
//!
//! Kept deliberately separate from the trigonometric root formulas so that
//! it can serve as an independent check on them.

use super::{frobenius_norm, DressedError, Matrix3};

const MAX_SWEEPS: usize = 64;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues (descending) and the matching unit eigenvectors.
///
/// `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [[f64; 3]; 3],
}

impl SymEigen {
    /// Rebuilds `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix3 {
        let mut m = [[0.0; 3]; 3];
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += lambda * v[i] * v[j];
                }
            }
        }
        m
    }
}

fn max_off_diagonal(a: &Matrix3) -> f64 {
    a[0][1].abs().max(a[0][2].abs()).max(a[1][2].abs())
}

/// Diagonalizes a symmetric matrix by cyclic Jacobi rotations.
///
/// Iteration stops once every off-diagonal element is below
/// `1e-12 · ‖H‖_F`. Only the upper triangle is read.
#[allow(clippy::needless_range_loop)]
pub fn eigen_oracle(matrix: &Matrix3) -> Result<SymEigen, DressedError> {
    let mut a = *matrix;
    for i in 0..3 {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    let tol = OFF_DIAGONAL_TOL * frobenius_norm(&a);
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if max_off_diagonal(&a) <= tol {
            converged = true;
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            // A ← Jᵀ A J with J the (p, q) plane rotation.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            a[p][q] = 0.0;
            a[q][p] = 0.0;

            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    if !converged {
        return Err(DressedError::NoConvergence(MAX_SWEEPS));
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a[k][k];
        vectors[slot] = [v[0][k], v[1][k], v[2][k]];
    }
    Ok(SymEigen { values, vectors })
}

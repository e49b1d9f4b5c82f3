//! Dense symmetric linear algebra used by the factor and adequacy stages.
//!
//! Storage and LU/Cholesky factorizations come from `nalgebra`; the
//! symmetric eigensolver is a cyclic Jacobi sweep so that results are
//! deterministic and independent of BLAS/LAPACK builds.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative off-diagonal threshold for Jacobi convergence.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over every upper-triangular pair, annihilating `a[p][q]` with a
/// plane rotation, until the off-diagonal Frobenius norm drops below
/// `JACOBI_TOL * ||A||_F`. Input is symmetrized as `(A + Aᵀ)/2` first.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Parameter(format!(
            "eigen decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm();
    let threshold = JACOBI_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence {
                routine: "jacobi",
                iterations: sweeps,
                delta: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // signum(0.0) is 1.0, so theta == 0 gives a 45 degree turn
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Descending by value; equal values keep their diagonal position.
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

// Applies Jᵀ·M·J and V·J for the rotation J in the (p, q) plane.
fn rotate(m: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    // pin the annihilated pair
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Natural log of the determinant of a symmetric positive-definite matrix.
pub fn ln_det_spd(a: &DMatrix<f64>) -> Result<f64> {
    let chol = Cholesky::new(a.clone())
        .ok_or_else(|| Error::Singular("Cholesky factorization failed (det <= 0)".into()))?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular("non-positive pivot in Cholesky factor".into()));
        }
        acc += d.ln();
    }
    Ok(2.0 * acc)
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn inverse_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(a.clone())
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular("inverse has non-finite entries".into()));
    }
    Ok((&inv + inv.transpose()) * 0.5)
}

/// 2-norm condition number of a symmetric positive-definite matrix.
pub fn condition_number_spd(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Max-norm of `A·v − λ·v`.
pub fn eigen_residual(a: &DMatrix<f64>, value: f64, vector: &DVector<f64>) -> f64 {
    (a * vector - vector * value).amax()
}

/// Builds an `n×m` matrix from row slices.
pub fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_input() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 2.0]));
        let e = jacobi_eigen(&a).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let e = jacobi_eigen(&a).unwrap();
        assert!((e.values[0] - 1.6).abs() < 1e-14);
        assert!((e.values[1] - 0.4).abs() < 1e-14);
        let v0 = e.vectors.column(0).into_owned();
        assert!((v0[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(eigen_residual(&a, e.values[0], &v0) < 1e-12);
    }

    #[test]
    fn jacobi_zero_matrix() {
        let a = DMatrix::<f64>::zeros(3, 3);
        let e = jacobi_eigen(&a).unwrap();
        assert!(e.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, 1.0, -2.0, 2.0, 1.0, 2.0, 0.0, 1.0, -2.0, 0.0, 3.0, -2.0, 2.0, 1.0, -2.0, -1.0,
            ],
        );
        let e = jacobi_eigen(&a).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(e.values.clone()));
        let back = &e.vectors * d * e.vectors.transpose();
        assert!((back - &a).amax() < 1e-12);
        let vtv = e.vectors.transpose() * &e.vectors;
        assert!((vtv - DMatrix::identity(4, 4)).amax() < 1e-12);
        for w in e.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn ln_det_of_correlation() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        assert!((ln_det_spd(&a).unwrap() - 0.64f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(ln_det_spd(&a), Err(Error::Singular(_))));
        assert!(matches!(inverse_spd(&a), Err(Error::Singular(_))));
    }
}

//! Dense complex helpers on top of nalgebra.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CVector<T> = DVector<Complex<T>>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type RMatrix<T> = DMatrix<T>;

/// Condition estimate above which factorizations log a warning.
pub const CONDITION_WARNING: f64 = 1e10;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `exp(j * theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn to_complex<T: Real>(m: &RMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Real part of `w^T A w*`, the quadratic form used throughout for radiated
/// power. Equals `w^H A w` when `A` is real symmetric.
pub fn transpose_quad<T: Real>(w: &CVector<T>, a: &CMatrix<T>) -> T {
    let aw = a * w.conjugate();
    w.dot(&aw).re
}

/// Same as [`transpose_quad`] for a real matrix.
pub fn transpose_quad_real<T: Real>(w: &CVector<T>, a: &RMatrix<T>) -> T {
    let n = w.len();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        let mut row = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            row += w[j].conj() * a[(i, j)];
        }
        acc += w[i] * row;
    }
    acc.re
}

/// `|w^T h|^2`.
#[inline]
pub fn transpose_gain<T: Real>(w: &CVector<T>, h: &CVector<T>) -> T {
    w.dot(h).norm_sqr()
}

/// Cholesky factor of a Hermitian positive-definite matrix, optionally with
/// diagonal loading.
#[derive(Clone, Debug)]
pub struct SpdFactor<T: Real> {
    chol: Cholesky<Complex<T>, Dyn>,
    condition: T,
}

impl<T: Real> SpdFactor<T> {
    pub fn new(a: &CMatrix<T>, loading: T, context: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "factorization requires a square matrix",
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        let mut m = a.clone();
        if loading != T::zero() {
            for i in 0..m.nrows() {
                m[(i, i)] += Complex::new(loading, T::zero());
            }
        }
        let Some(chol) = Cholesky::new(m.clone()) else {
            return Err(Error::Singular {
                context: context.to_string(),
                condition: hermitian_condition(&m).as_f64(),
            });
        };
        let diag = chol.l_dirty().diagonal();
        let mut lo = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
        let mut hi = T::zero();
        for d in diag.iter() {
            let v = d.re;
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        if lo <= T::zero() || !lo.is_finite() {
            return Err(Error::Singular {
                context: context.to_string(),
                condition: f64::INFINITY,
            });
        }
        let ratio = hi / lo;
        let condition = ratio * ratio;
        if condition.as_f64() > CONDITION_WARNING {
            log::debug!("{context}: condition estimate {:.3e}", condition.as_f64());
        }
        Ok(Self { chol, condition })
    }

    pub fn from_real(a: &RMatrix<T>, loading: T, context: &str) -> Result<Self> {
        Self::new(&to_complex(a), loading, context)
    }

    /// Cheap condition estimate from the Cholesky diagonal (a lower bound).
    pub fn condition_estimate(&self) -> T {
        self.condition
    }

    pub fn solve(&self, b: &CVector<T>) -> CVector<T> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &CMatrix<T>) -> CMatrix<T> {
        self.chol.solve(b)
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; eigenvector columns follow the same order.
pub fn hermitian_eig_desc<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Spectral condition number of a Hermitian matrix (infinite when not definite).
pub fn hermitian_condition<T: Real>(a: &CMatrix<T>) -> T {
    let eig = SymmetricEigen::new(a.clone());
    let mut lo = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    let mut hi = T::zero();
    for v in eig.eigenvalues.iter() {
        let v = v.abs();
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if eig.eigenvalues.iter().any(|v| *v <= T::zero()) || lo == T::zero() {
        return T::lit(f64::INFINITY);
    }
    hi / lo
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue_sym<T: Real>(a: &RMatrix<T>) -> T {
    let eig = SymmetricEigen::new(a.clone());
    eig.eigenvalues.iter().fold(T::lit(f64::INFINITY), |acc, &v| acc.min(v))
}

/// Ratio of largest to smallest singular value of a general complex matrix.
pub fn general_condition<T: Real>(a: &CMatrix<T>) -> T {
    let sv = a.clone().singular_values();
    let hi = sv.iter().fold(T::zero(), |acc, &v| acc.max(v));
    let lo = sv.iter().fold(T::lit(f64::INFINITY), |acc, &v| acc.min(v));
    if lo == T::zero() {
        T::lit(f64::INFINITY)
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_sorted_descending() {
        let a = CMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(5.0, 0.0),
            cplx(3.0, 0.0),
        ]));
        let (vals, vecs) = hermitian_eig_desc(&a);
        assert_eq!(vals, vec![5.0, 3.0, 1.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_quad_matches_real_variant() {
        let w = CVector::<f64>::from_vec(vec![cplx(1.0, 2.0), cplx(-0.5, 0.3)]);
        let z = RMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let a = transpose_quad(&w, &to_complex(&z));
        let b = transpose_quad_real(&w, &z);
        assert!((a - b).abs() < 1e-12);
        // equals w^H Z w for real symmetric Z
        let c = w.dotc(&(to_complex(&z) * &w)).re;
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn singular_factor_reports_condition() {
        let a = RMatrix::<f64>::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match SpdFactor::from_real(&a, 0.0, "test") {
            Err(Error::Singular { condition, .. }) => assert!(condition > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(SpdFactor::from_real(&a, 1e-3, "loaded").is_ok());
    }
}

//! Reference solution of the interference-nulling gain problem that avoids
//! the eigen-decomposition route: a Householder QR of the conjugated
//! interferers gives the feasible subspace, then the generalized Rayleigh
//! quotient is solved through an explicitly inverted Cholesky factor.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, RMatrix};
use crate::scalar::Real;

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Full unitary `Q` and numerical rank of `A` via Householder QR with column pivoting.
fn householder_qr<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, usize) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut r = a.clone();
    let mut q = CMatrix::<T>::identity(m, m);
    let steps = m.min(n);
    let mut diag = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut best = k;
        let mut best_norm = T::zero();
        for j in k..n {
            let mut s = T::zero();
            for i in k..m {
                s += r[(i, j)].norm_sqr();
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        r.swap_columns(k, best);
        let norm = best_norm.sqrt();
        diag.push(norm);
        if norm == T::zero() {
            break;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm_sqr().sqrt() > T::zero() {
            x0 / Complex::new(x0.norm_sqr().sqrt(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -phase * Complex::new(norm, T::zero());
        let mut v = vec![zero::<T>(); m];
        for i in k..m {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vv: T = v.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if vv == T::zero() {
            continue;
        }
        let scale = Complex::new(T::lit(2.0) / vv, T::zero());
        // R <- (I - 2 v v^H / v^H v) R
        for j in 0..n {
            let mut s = zero::<T>();
            for i in k..m {
                s += v[i].conj() * r[(i, j)];
            }
            s *= scale;
            for i in k..m {
                r[(i, j)] -= v[i] * s;
            }
        }
        // Q <- Q (I - 2 v v^H / v^H v)
        for i in 0..m {
            let mut s = zero::<T>();
            for l in k..m {
                s += q[(i, l)] * v[l];
            }
            s *= scale;
            for l in k..m {
                q[(i, l)] -= s * v[l].conj();
            }
        }
    }
    let lead = diag.first().copied().unwrap_or_else(T::zero);
    let tol = T::rank_tolerance().sqrt() * lead;
    let rank = if lead > T::zero() {
        diag.iter().take_while(|&&d| d > tol).count()
    } else {
        0
    };
    (q, rank)
}

/// Lower-triangular `L` with `B = L L^H`, or `None` when `B` is not positive definite.
fn cholesky_lower<T: Real>(b: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = b.nrows();
    let mut l = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex::new(d, T::zero());
        for i in (j + 1)..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / Complex::new(d, T::zero());
        }
    }
    Some(l)
}

fn invert_lower<T: Real>(l: &CMatrix<T>) -> CMatrix<T> {
    let n = l.nrows();
    let mut inv = CMatrix::<T>::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col {
                Complex::new(T::one(), T::zero())
            } else {
                zero::<T>()
            };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Largest `|w^T h|^2 / (w^T Z w^*)` subject to `h_i^T w = 0` for every
/// interferer, together with a maximizer normalized to `w^H Z w = 1`.
pub fn oracle_max_gain<T: Real>(
    h: &CVector<T>,
    interferers: &[CVector<T>],
    z: &RMatrix<T>,
) -> Result<(T, CVector<T>)> {
    let m = h.len();
    if z.nrows() != m || z.ncols() != m {
        return Err(Error::DimensionMismatch {
            context: "impedance matrix vs channel length",
            expected: m,
            actual: z.nrows(),
        });
    }
    let (q, rank) = if interferers.is_empty() {
        (CMatrix::<T>::identity(m, m), 0)
    } else {
        let mut a = CMatrix::<T>::zeros(m, interferers.len());
        for (j, hi) in interferers.iter().enumerate() {
            if hi.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "interferer channel length",
                    expected: m,
                    actual: hi.len(),
                });
            }
            for i in 0..m {
                a[(i, j)] = hi[i].conj();
            }
        }
        householder_qr(&a)
    };
    let k = m - rank;
    if k == 0 {
        return Err(Error::Infeasible("no feasible direction remains".into()));
    }
    let qp = q.columns(rank, k).clone_owned();

    // g = Qp^T h, B = Qp^T Z conj(Qp)
    let mut g = CVector::<T>::zeros(k);
    for a in 0..k {
        let mut s = zero::<T>();
        for i in 0..m {
            s += qp[(i, a)] * h[i];
        }
        g[a] = s;
    }
    let hn = h.norm();
    if !(g.norm() > T::rank_tolerance() * hn) {
        return Err(Error::Infeasible(
            "target channel lies in the interference space".into(),
        ));
    }
    let mut b = CMatrix::<T>::zeros(k, k);
    for a in 0..k {
        for c in 0..k {
            let mut s = zero::<T>();
            for i in 0..m {
                for j in 0..m {
                    s += qp[(i, a)] * z[(i, j)] * qp[(j, c)].conj();
                }
            }
            b[(a, c)] = s;
        }
    }
    let l = cholesky_lower(&b).ok_or_else(|| Error::Singular {
        context: "projected impedance matrix in oracle".into(),
        condition: f64::INFINITY,
    })?;
    let linv = invert_lower(&l);
    // The pencil (g g^H, B) is rank one, so its top eigenpair is explicit:
    // lambda = |L^{-1} g|^2 with eigenvector y = L^{-H} L^{-1} g.
    let v = &linv * &g;
    let gain = v.norm_squared();
    let y = linv.adjoint() * v;
    let c = y.conjugate();
    let w = qp * c;
    let mut den = T::zero();
    for i in 0..m {
        let mut s = zero::<T>();
        for j in 0..m {
            s += w[j].conj() * z[(i, j)];
        }
        den += (w[i] * s).re;
    }
    let w = w / Complex::new(den.sqrt(), T::zero());
    Ok((gain, w))
}

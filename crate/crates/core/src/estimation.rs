//! Uplink pilot model and linear MMSE channel estimators.
//!
//! The received block `Y_c = sum_u (C^T h_u) s_u^T + N` is vectorized column
//! by column, so `vec(Y_c) = S~ h + n` with `S~ = [s_1 (x) C^T, ..., s_U (x) C^T]`
//! and `h` the users' channels stacked in order.

use rand::Rng;

use crate::channel::{complex_gaussian, CovarianceSet};
use crate::error::{Error, Result};
use crate::linalg::{cis, cplx, CMatrix, CVector, SpdFactor};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotKind {
    /// Rows of the `tau`-point DFT; requires `tau >= U`.
    Orthogonal,
    /// Independent unit-modulus symbols with uniform phase.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PilotBook<T: Real> {
    /// `U x tau`; row `u` is `s_u^T`.
    pub sequences: CMatrix<T>,
}

impl<T: Real> PilotBook<T> {
    pub fn users(&self) -> usize {
        self.sequences.nrows()
    }

    pub fn length(&self) -> usize {
        self.sequences.ncols()
    }

    pub fn sequence(&self, u: usize) -> CVector<T> {
        self.sequences.row(u).transpose()
    }

    /// `[s_1 (x) A, ..., s_U (x) A]` for an `M x M` block `A`.
    fn stack_with(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let m = a.nrows();
        let (users, tau) = (self.users(), self.length());
        let mut out = CMatrix::zeros(tau * m, users * m);
        for u in 0..users {
            for t in 0..tau {
                let block = a * self.sequences[(u, t)];
                out.view_mut((t * m, u * m), (m, m)).copy_from(&block);
            }
        }
        out
    }

    /// Pilot operator `S` that ignores field coupling.
    pub fn stacked(&self, m: usize) -> CMatrix<T> {
        self.stack_with(&CMatrix::identity(m, m))
    }

    /// Pilot operator `S~` with the coupling matrix embedded.
    pub fn stacked_coupled(&self, c: &CMatrix<T>) -> CMatrix<T> {
        self.stack_with(&c.transpose())
    }
}

pub fn make_pilots<T: Real, R: Rng + ?Sized>(
    users: usize,
    length: usize,
    kind: PilotKind,
    rng: &mut R,
) -> Result<PilotBook<T>> {
    if users == 0 || length == 0 {
        return Err(Error::invalid("pilot book needs at least one user and one symbol"));
    }
    let sequences = match kind {
        PilotKind::Orthogonal => {
            if length < users {
                return Err(Error::invalid(format!(
                    "orthogonal pilots need length >= users ({length} < {users})"
                )));
            }
            let tau = T::from_count(length);
            CMatrix::from_fn(users, length, |u, t| {
                let k = T::from_count((u * t) % length);
                cis(-(T::two_pi() * k / tau))
            })
        }
        PilotKind::Random => {
            let mut s = CMatrix::zeros(users, length);
            for u in 0..users {
                for t in 0..length {
                    s[(u, t)] = cis(T::two_pi() * T::unit_uniform(rng));
                }
            }
            s
        }
    };
    Ok(PilotBook { sequences })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedBlock<T: Real> {
    /// `M x tau`.
    pub y_mat: CMatrix<T>,
    /// Column-major `vec(Y_c)`.
    pub y: CVector<T>,
    pub noise_var: T,
}

fn vectorize<T: Real>(y: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(y.as_slice())
}

/// Synthesizes `Y_c = sum_u (C^T h_u) s_u^T + N` with `N ~ CN(0, noise_var)`.
pub fn synth_uplink<T: Real, R: Rng + ?Sized>(
    channels: &[CVector<T>],
    pilots: &PilotBook<T>,
    c: &CMatrix<T>,
    noise_var: T,
    rng: &mut R,
) -> Result<ReceivedBlock<T>> {
    if channels.len() != pilots.users() {
        return Err(Error::DimensionMismatch {
            context: "channels vs pilot users",
            expected: pilots.users(),
            actual: channels.len(),
        });
    }
    if noise_var < T::zero() {
        return Err(Error::invalid("noise variance must be non-negative"));
    }
    let m = c.nrows();
    let tau = pilots.length();
    let mut y = CMatrix::zeros(m, tau);
    for (u, h) in channels.iter().enumerate() {
        if h.len() != m {
            return Err(Error::DimensionMismatch {
                context: "channel length vs coupling matrix",
                expected: m,
                actual: h.len(),
            });
        }
        let hc = c.tr_mul(h);
        y += &hc * pilots.sequences.row(u);
    }
    if noise_var > T::zero() {
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, noise_var);
        }
    }
    Ok(ReceivedBlock {
        y: vectorize(&y),
        y_mat: y,
        noise_var,
    })
}

/// A linear estimator `h_hat = E y` over `U` users with `M` antennas each.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEstimator<T: Real> {
    pub matrix: CMatrix<T>,
    users: usize,
    antennas: usize,
}

impl<T: Real> LinearEstimator<T> {
    pub fn estimate_stacked(&self, y: &CVector<T>) -> Result<CVector<T>> {
        if y.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "received vector length",
                expected: self.matrix.ncols(),
                actual: y.len(),
            });
        }
        Ok(&self.matrix * y)
    }

    /// Per-user channel estimates.
    pub fn estimate(&self, y: &CVector<T>) -> Result<Vec<CVector<T>>> {
        let h = self.estimate_stacked(y)?;
        let m = self.antennas;
        Ok((0..self.users)
            .map(|u| h.rows(u * m, m).clone_owned())
            .collect())
    }
}

/// `R S^H (S R S^H + noise_var I)^{-1}` for an arbitrary pilot operator `S`.
pub fn mmse_estimator<T: Real>(
    cov: &CovarianceSet<T>,
    s: &CMatrix<T>,
    noise_var: T,
) -> Result<LinearEstimator<T>> {
    let r = &cov.block;
    if s.ncols() != r.nrows() {
        return Err(Error::DimensionMismatch {
            context: "pilot operator columns vs covariance size",
            expected: r.nrows(),
            actual: s.ncols(),
        });
    }
    if noise_var < T::zero() {
        return Err(Error::invalid("noise variance must be non-negative"));
    }
    let sr = s * r;
    let mut gram = &sr * s.adjoint();
    // symmetrize against round-off so the Hermitian factorization applies
    gram = (&gram + gram.adjoint()) * cplx(T::lit(0.5), T::zero());
    let factor = SpdFactor::new(&gram, noise_var, "estimator Gram term").map_err(|e| match e {
        Error::Singular { condition, .. } if noise_var == T::zero() => Error::Singular {
            context: "noise-free Gram term is singular; use a positive noise variance".into(),
            condition,
        },
        other => other,
    })?;
    // E^H = G^{-1} S R since G and R are Hermitian.
    let e_h = factor.solve_matrix(&sr);
    Ok(LinearEstimator {
        matrix: e_h.adjoint(),
        users: cov.users(),
        antennas: cov.antennas(),
    })
}

/// Field-coupling-aware estimator built on `S~`.
pub fn fca_estimator<T: Real>(
    cov: &CovarianceSet<T>,
    pilots: &PilotBook<T>,
    c: &CMatrix<T>,
    noise_var: T,
) -> Result<LinearEstimator<T>> {
    check_users(cov, pilots)?;
    mmse_estimator(cov, &pilots.stacked_coupled(c), noise_var)
}

/// Conventional estimator that assumes no field coupling.
pub fn trad_estimator<T: Real>(
    cov: &CovarianceSet<T>,
    pilots: &PilotBook<T>,
    noise_var: T,
) -> Result<LinearEstimator<T>> {
    check_users(cov, pilots)?;
    mmse_estimator(cov, &pilots.stacked(cov.antennas()), noise_var)
}

fn check_users<T: Real>(cov: &CovarianceSet<T>, pilots: &PilotBook<T>) -> Result<()> {
    if cov.users() != pilots.users() {
        return Err(Error::DimensionMismatch {
            context: "covariance users vs pilot users",
            expected: pilots.users(),
            actual: cov.users(),
        });
    }
    Ok(())
}

/// `10 log10(mean_u ||h_hat_u - h_u||^2 / ||h_u||^2)`; a perfect estimate
/// yields negative infinity.
pub fn normalized_error<T: Real>(estimates: &[CVector<T>], truths: &[CVector<T>]) -> Result<T> {
    if estimates.len() != truths.len() || truths.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "estimate count vs truth count",
            expected: truths.len(),
            actual: estimates.len(),
        });
    }
    let mut acc = T::zero();
    for (est, truth) in estimates.iter().zip(truths) {
        let p = truth.norm_squared();
        if !(p > T::zero()) {
            return Err(Error::invalid("reference channel has zero norm"));
        }
        if est.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                context: "estimate length",
                expected: truth.len(),
                actual: est.len(),
            });
        }
        acc += (est - truth).norm_squared() / p;
    }
    let mean = acc / T::from_count(truths.len());
    if mean == T::zero() {
        return Ok(T::lit(f64::NEG_INFINITY));
    }
    Ok(T::lit(10.0) * mean.log10())
}

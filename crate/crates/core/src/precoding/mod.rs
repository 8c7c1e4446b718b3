//! Downlink precoders, power normalization and gain metrics.
//!
//! Channels are stacked as the columns of an `M x U` matrix `H`. The received
//! amplitude of user `u` under weights `w` is `h_u^T w` (plain transpose), so
//! nulling constraints read `h_i^T w_u = 0`, not `h_i^H w_u = 0`.

mod insp;
pub mod oracle;

pub use insp::{insp, rinsp, NullSpaceBasis};
pub use oracle::oracle_max_gain;

use crate::error::{Error, Result};
use crate::linalg::{cplx, transpose_gain, transpose_quad_real, CMatrix, CVector, RMatrix, SpdFactor};
use crate::scalar::Real;

/// Which quadratic form a precoder is normalized against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `w^H Z w = 1`.
    Z,
    /// `w^H Z_R w = 1`.
    ZR,
    /// `w^H w = 1`.
    Unit,
}

/// Normalization target together with its matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerConstraint<T: Real> {
    Unit,
    Impedance(RMatrix<T>),
    Regularized(RMatrix<T>),
}

impl<T: Real> PowerConstraint<T> {
    pub fn mode(&self) -> NormMode {
        match self {
            PowerConstraint::Unit => NormMode::Unit,
            PowerConstraint::Impedance(_) => NormMode::Z,
            PowerConstraint::Regularized(_) => NormMode::ZR,
        }
    }

    /// The matrix of the quadratic form, materializing `I` for [`PowerConstraint::Unit`].
    pub fn matrix(&self, m: usize) -> RMatrix<T> {
        match self {
            PowerConstraint::Unit => RMatrix::identity(m, m),
            PowerConstraint::Impedance(z) | PowerConstraint::Regularized(z) => z.clone(),
        }
    }

    pub fn normalize(&self, w: &CVector<T>) -> Result<CVector<T>> {
        match self {
            PowerConstraint::Unit => normalize_power(w, &RMatrix::identity(w.len(), w.len())),
            PowerConstraint::Impedance(z) | PowerConstraint::Regularized(z) => normalize_power(w, z),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Precoder<T: Real> {
    /// One weight vector per user, in user order.
    pub weights: Vec<CVector<T>>,
    pub norm_mode: NormMode,
    /// Per-user power budget `rho_u`.
    pub power_budget: Vec<T>,
}

impl<T: Real> Precoder<T> {
    fn from_normalized(weights: Vec<CVector<T>>, mode: NormMode) -> Self {
        let power_budget = vec![T::one(); weights.len()];
        Self {
            weights,
            norm_mode: mode,
            power_budget,
        }
    }

    pub fn users(&self) -> usize {
        self.weights.len()
    }

    /// Weights as the columns of an `M x U` matrix.
    pub fn matrix(&self) -> CMatrix<T> {
        CMatrix::from_columns(&self.weights)
    }

    /// Scales every weight by `sqrt(rho_u)`.
    pub fn with_power_budget(mut self, budget: Vec<T>) -> Result<Self> {
        if budget.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "power budget per user",
                expected: self.weights.len(),
                actual: budget.len(),
            });
        }
        if budget.iter().any(|p| *p < T::zero()) {
            return Err(Error::invalid("power budget must be non-negative"));
        }
        for (w, p) in self.weights.iter_mut().zip(&budget) {
            *w *= cplx(p.sqrt(), T::zero());
        }
        self.power_budget = budget;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    Mrt,
    Zf,
    Sp,
    Insp,
    Rinsp,
}

impl PrecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            PrecoderKind::Mrt => "mrt",
            PrecoderKind::Zf => "zf",
            PrecoderKind::Sp => "sp",
            PrecoderKind::Insp => "insp",
            PrecoderKind::Rinsp => "rinsp",
        }
    }
}

impl std::fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrt" => Ok(PrecoderKind::Mrt),
            "zf" => Ok(PrecoderKind::Zf),
            "sp" => Ok(PrecoderKind::Sp),
            "insp" => Ok(PrecoderKind::Insp),
            "rinsp" => Ok(PrecoderKind::Rinsp),
            other => Err(Error::Config(format!("unknown precoder `{other}`"))),
        }
    }
}

/// Array matrices a precoder may need.
#[derive(Clone, Copy, Debug)]
pub struct ArrayMatrices<'a, T: Real> {
    pub z: &'a RMatrix<T>,
    /// Loss-regularized impedance; when present it is also the normalization target.
    pub z_r: Option<&'a RMatrix<T>>,
}

impl<'a, T: Real> ArrayMatrices<'a, T> {
    pub fn constraint(&self) -> PowerConstraint<T> {
        match self.z_r {
            Some(zr) => PowerConstraint::Regularized(zr.clone()),
            None => PowerConstraint::Impedance(self.z.clone()),
        }
    }
}

/// Builds all user weights for `kind`. SP and INSP are designed against `Z`,
/// RINSP against `Z_R` (falling back to `Z` when no loss is configured).
pub fn build_precoder<T: Real>(
    kind: PrecoderKind,
    h: &CMatrix<T>,
    mats: ArrayMatrices<'_, T>,
) -> Result<Precoder<T>> {
    let constraint = mats.constraint();
    match kind {
        PrecoderKind::Mrt => mrt(h, &constraint),
        PrecoderKind::Zf => zf(h, &constraint),
        PrecoderKind::Sp => sp_precoder(h, mats.z, &constraint),
        PrecoderKind::Insp => insp_precoder(h, mats.z, &constraint),
        PrecoderKind::Rinsp => insp_precoder(h, mats.z_r.unwrap_or(mats.z), &constraint),
    }
}

fn check_channels<T: Real>(h: &CMatrix<T>) -> Result<()> {
    if h.ncols() == 0 || h.nrows() == 0 {
        return Err(Error::invalid("channel matrix is empty"));
    }
    for (u, col) in h.column_iter().enumerate() {
        if col.norm_squared() == T::zero() {
            return Err(Error::invalid(format!("channel of user {u} is zero")));
        }
    }
    Ok(())
}

/// Maximum-ratio transmission: `w_u ∝ h_u^*`.
pub fn mrt<T: Real>(h: &CMatrix<T>, constraint: &PowerConstraint<T>) -> Result<Precoder<T>> {
    check_channels(h)?;
    let weights = h
        .column_iter()
        .map(|col| constraint.normalize(&col.conjugate()))
        .collect::<Result<_>>()?;
    Ok(Precoder::from_normalized(weights, constraint.mode()))
}

/// Zero-forcing: columns of `H^* (H^T H^*)^{-1}`, so that `H^T W = I`.
pub fn zf<T: Real>(h: &CMatrix<T>, constraint: &PowerConstraint<T>) -> Result<Precoder<T>> {
    check_channels(h)?;
    let users = h.ncols();
    if users > h.nrows() {
        return Err(Error::RankDeficient {
            users: dependent_users(h),
        });
    }
    let deficient = dependent_users(h);
    if !deficient.is_empty() {
        return Err(Error::RankDeficient { users: deficient });
    }
    // G = H^T H^* is Hermitian; W^H = G^{-1} H^T.
    let ht = h.transpose();
    let gram = &ht * h.conjugate();
    let factor = SpdFactor::new(&gram, T::zero(), "zero-forcing Gram matrix").map_err(|_| {
        Error::RankDeficient {
            users: (0..users).collect(),
        }
    })?;
    let w = factor.solve_matrix(&ht).adjoint();
    let weights = w
        .column_iter()
        .map(|col| constraint.normalize(&col.clone_owned()))
        .collect::<Result<_>>()?;
    Ok(Precoder::from_normalized(weights, constraint.mode()))
}

/// Users whose channel lies (numerically) in the span of earlier users'.
fn dependent_users<T: Real>(h: &CMatrix<T>) -> Vec<usize> {
    let tol = T::rank_tolerance().sqrt();
    let mut basis: Vec<CVector<T>> = Vec::new();
    let mut out = Vec::new();
    for (u, col) in h.column_iter().enumerate() {
        let mut r = col.clone_owned();
        for q in &basis {
            let c = q.dotc(&r);
            r -= q * c;
        }
        let n = r.norm();
        if n <= tol * col.norm() {
            out.push(u);
        } else {
            basis.push(r / cplx(n, T::zero()));
        }
    }
    out
}

/// Superdirective weights `gamma Z^{-1} h^*` with
/// `gamma = sqrt(2 rho / (h^H (R_rad Z)^{-1} h))`.
///
/// With this coefficient the radiated power `(1/2) w^T (R_rad Z) w^*` comes
/// out as `rho * R_rad^2`, not `rho`; sweeps normalize with
/// [`normalize_power`] instead.
pub fn sp<T: Real>(h: &CVector<T>, z: &RMatrix<T>, rho: T, r_rad: T) -> Result<CVector<T>> {
    if !(r_rad > T::zero()) {
        return Err(Error::invalid("radiation resistance must be positive"));
    }
    if rho < T::zero() {
        return Err(Error::invalid("power budget must be non-negative"));
    }
    let x = sp_direction(h, z)?;
    let quad = h.dotc(&x).re / r_rad;
    if !(quad > T::zero()) {
        return Err(Error::invalid("channel is zero"));
    }
    let gamma = (T::lit(2.0) * rho / quad).sqrt();
    Ok(x.conjugate() * cplx(gamma, T::zero()))
}

/// `Z^{-1} h` (the conjugate of the unnormalized SP direction).
fn sp_direction<T: Real>(h: &CVector<T>, z: &RMatrix<T>) -> Result<CVector<T>> {
    if h.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            context: "channel vs impedance matrix",
            expected: z.nrows(),
            actual: h.len(),
        });
    }
    let factor = SpdFactor::from_real(z, T::zero(), "impedance matrix in SP")?;
    Ok(factor.solve(h))
}

/// SP for every user, designed with `z` and normalized by `constraint`.
pub fn sp_precoder<T: Real>(
    h: &CMatrix<T>,
    z: &RMatrix<T>,
    constraint: &PowerConstraint<T>,
) -> Result<Precoder<T>> {
    check_channels(h)?;
    let factor = SpdFactor::from_real(z, T::zero(), "impedance matrix in SP")?;
    let weights = h
        .column_iter()
        .map(|col| constraint.normalize(&factor.solve(&col.clone_owned()).conjugate()))
        .collect::<Result<_>>()?;
    Ok(Precoder::from_normalized(weights, constraint.mode()))
}

/// INSP for every user, designed with `design` and normalized by `constraint`.
pub fn insp_precoder<T: Real>(
    h: &CMatrix<T>,
    design: &RMatrix<T>,
    constraint: &PowerConstraint<T>,
) -> Result<Precoder<T>> {
    check_channels(h)?;
    let weights = (0..h.ncols())
        .map(|u| constraint.normalize(&insp(h, u, design)?))
        .collect::<Result<_>>()?;
    Ok(Precoder::from_normalized(weights, constraint.mode()))
}

fn nonzero<T: Real>(w: &CVector<T>) -> Result<()> {
    if w.iter().all(|c| c.re == T::zero() && c.im == T::zero()) {
        return Err(Error::invalid("weight vector is zero"));
    }
    Ok(())
}

/// `|w^T h|^2 / (w^T A w^*)` for a real symmetric `A` (`Z` or `Z_R`).
pub fn power_gain<T: Real>(w: &CVector<T>, h: &CVector<T>, a: &RMatrix<T>) -> Result<T> {
    nonzero(w)?;
    if w.len() != h.len() || a.nrows() != w.len() {
        return Err(Error::DimensionMismatch {
            context: "power gain operands",
            expected: w.len(),
            actual: h.len().max(a.nrows()),
        });
    }
    Ok(transpose_gain(w, h) / transpose_quad_real(w, a))
}

/// `w^T R_rad Z w^* / (w^T R_rad Z w^* + r_loss w^T w^*)`.
pub fn radiation_efficiency<T: Real>(w: &CVector<T>, z: &RMatrix<T>, r_loss: T, r_rad: T) -> Result<T> {
    nonzero(w)?;
    if !(r_rad > T::zero()) {
        return Err(Error::invalid("radiation resistance must be positive"));
    }
    let rad = r_rad * transpose_quad_real(w, z);
    let loss = r_loss * w.norm_squared();
    Ok(rad / (rad + loss))
}

/// `w / sqrt(w^H A w)`.
pub fn normalize_power<T: Real>(w: &CVector<T>, a: &RMatrix<T>) -> Result<CVector<T>> {
    nonzero(w)?;
    if a.nrows() != w.len() {
        return Err(Error::DimensionMismatch {
            context: "weights vs normalization matrix",
            expected: a.nrows(),
            actual: w.len(),
        });
    }
    let p = transpose_quad_real(w, a);
    if !(p > T::zero()) {
        return Err(Error::Singular {
            context: "normalization matrix is not positive definite".into(),
            condition: f64::INFINITY,
        });
    }
    Ok(w * cplx(T::one() / p.sqrt(), T::zero()))
}

/// Radiated power `(1/2) w^T (R_rad Z) w^*`.
pub fn radiated_power<T: Real>(w: &CVector<T>, z: &RMatrix<T>, r_rad: T) -> T {
    T::lit(0.5) * r_rad * transpose_quad_real(w, z)
}

/// Largest nulling residual `max_{i != u} |h_i^T w_u| / (|h_i| |w_u|)`.
pub fn nulling_residual<T: Real>(h: &CMatrix<T>, weights: &[CVector<T>]) -> T {
    let mut worst = T::zero();
    for (u, w) in weights.iter().enumerate() {
        for (i, hi) in h.column_iter().enumerate() {
            if i == u {
                continue;
            }
            let r = hi.dot(w).norm_sqr().sqrt() / (hi.norm() * w.norm());
            if r > worst {
                worst = r;
            }
        }
    }
    worst
}

//! Multipath channel generation, coupling distortion and covariance assembly.

use nalgebra::Complex;
use rand::Rng;

use crate::em_array::{steering_with_kd, ArrayConfig};
use crate::error::{Error, Result};
use crate::linalg::{cplx, CMatrix, CVector};
use crate::scalar::Real;

/// Prefactor applied to the sum over paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathNormalization {
    /// `1/P`.
    #[default]
    InversePaths,
    /// `1/sqrt(P)`, which keeps the mean channel power independent of `P`.
    InverseSqrtPaths,
}

impl PathNormalization {
    fn factor<T: Real>(self, paths: usize) -> T {
        let p = T::from_count(paths);
        match self {
            PathNormalization::InversePaths => T::one() / p,
            PathNormalization::InverseSqrtPaths => T::one() / p.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipathSpec<T: Real> {
    /// `(theta, phi)` of every path, radians.
    pub angles: Vec<(T, T)>,
    /// Variance of each complex path gain.
    pub gain_variance: T,
    /// Deterministic path gains overriding the random draw.
    pub fixed_gains: Option<Vec<Complex<T>>>,
    pub normalization: PathNormalization,
}

impl<T: Real> MultipathSpec<T> {
    pub fn random(angles: Vec<(T, T)>, gain_variance: T) -> Self {
        Self {
            angles,
            gain_variance,
            fixed_gains: None,
            normalization: PathNormalization::InversePaths,
        }
    }

    pub fn fixed(angles: Vec<(T, T)>, gains: Vec<Complex<T>>) -> Self {
        Self {
            angles,
            gain_variance: T::one(),
            fixed_gains: Some(gains),
            normalization: PathNormalization::InversePaths,
        }
    }

    /// Paths in the horizontal plane at the given azimuths.
    pub fn planar(azimuths: &[T], gain_variance: T) -> Self {
        Self::random(
            azimuths.iter().map(|&phi| (T::frac_pi_2(), phi)).collect(),
            gain_variance,
        )
    }

    pub fn with_normalization(mut self, normalization: PathNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn num_paths(&self) -> usize {
        self.angles.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles.is_empty() {
            return Err(Error::invalid("multipath spec needs at least one path"));
        }
        match &self.fixed_gains {
            Some(g) if g.len() != self.angles.len() => Err(Error::DimensionMismatch {
                context: "fixed gains vs path count",
                expected: self.angles.len(),
                actual: g.len(),
            }),
            None if !(self.gain_variance > T::zero()) => Err(Error::invalid(format!(
                "gain variance must be positive, got {}",
                self.gain_variance
            ))),
            _ => Ok(()),
        }
    }
}

/// One draw of path gains together with the geometry that produced them.
/// Re-evaluating it at another frequency keeps angles and gains fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRealization<T: Real> {
    pub angles: Vec<(T, T)>,
    pub gains: Vec<Complex<T>>,
    pub normalization: PathNormalization,
}

impl<T: Real> PathRealization<T> {
    /// Channel vector for `m` elements with electrical spacing `kd`.
    pub fn channel_with_kd(&self, m: usize, kd: T) -> CVector<T> {
        let scale: T = self.normalization.factor(self.angles.len());
        let mut h = CVector::zeros(m);
        for (&(theta, phi), g) in self.angles.iter().zip(&self.gains) {
            h += steering_with_kd(m, kd, theta, phi) * *g;
        }
        h * cplx(scale, T::zero())
    }

    pub fn channel(&self, cfg: &ArrayConfig<T>) -> CVector<T> {
        self.channel_with_kd(cfg.num_antennas(), cfg.electrical_spacing())
    }
}

/// Circularly symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let s = (variance / T::lit(2.0)).sqrt();
    cplx(T::std_normal(rng) * s, T::std_normal(rng) * s)
}

pub fn draw_paths<T: Real, R: Rng + ?Sized>(
    spec: &MultipathSpec<T>,
    rng: &mut R,
) -> Result<PathRealization<T>> {
    spec.validate()?;
    let gains = match &spec.fixed_gains {
        Some(g) => g.clone(),
        None => (0..spec.num_paths())
            .map(|_| complex_gaussian(rng, spec.gain_variance))
            .collect(),
    };
    Ok(PathRealization {
        angles: spec.angles.clone(),
        gains,
        normalization: spec.normalization,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T: Real> {
    pub user_id: usize,
    /// Channel without field coupling.
    pub h: CVector<T>,
    /// `C^T h`, once a coupling matrix has been applied.
    pub h_c: Option<CVector<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn with_coupling(mut self, c: &CMatrix<T>) -> Result<Self> {
        self.h_c = Some(apply_coupling(c, &self.h)?);
        Ok(self)
    }
}

/// `h = f(P) * sum_p e(theta_p, phi_p) alpha_p` with `f` the configured prefactor.
pub fn draw_channel<T: Real, R: Rng + ?Sized>(
    spec: &MultipathSpec<T>,
    cfg: &ArrayConfig<T>,
    user_id: usize,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    let paths = draw_paths(spec, rng)?;
    Ok(ChannelRealization {
        user_id,
        h: paths.channel(cfg),
        h_c: None,
    })
}

/// `C^T h`: a plain transpose, not the conjugate transpose.
pub fn apply_coupling<T: Real>(c: &CMatrix<T>, h: &CVector<T>) -> Result<CVector<T>> {
    if c.nrows() != h.len() || !c.is_square() {
        return Err(Error::DimensionMismatch {
            context: "coupling matrix vs channel",
            expected: c.nrows(),
            actual: h.len(),
        });
    }
    Ok(c.tr_mul(h))
}

/// Covariance of a channel with independent random path gains:
/// `f(P)^2 delta^2 sum_p e_p e_p^H`.
pub fn analytic_covariance<T: Real>(spec: &MultipathSpec<T>, cfg: &ArrayConfig<T>) -> Result<CMatrix<T>> {
    spec.validate()?;
    if spec.fixed_gains.is_some() {
        return Err(Error::invalid(
            "covariance is undefined for deterministic path gains",
        ));
    }
    let m = cfg.num_antennas();
    let kd = cfg.electrical_spacing();
    let f: T = spec.normalization.factor(spec.num_paths());
    let scale = f * f * spec.gain_variance;
    let mut r = CMatrix::zeros(m, m);
    for &(theta, phi) in &spec.angles {
        let e = steering_with_kd(m, kd, theta, phi);
        r += &e * e.adjoint();
    }
    Ok(r * cplx(scale, T::zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSet<T: Real> {
    pub per_user: Vec<CMatrix<T>>,
    pub block: CMatrix<T>,
}

impl<T: Real> CovarianceSet<T> {
    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    pub fn antennas(&self) -> usize {
        self.per_user.first().map_or(0, |r| r.nrows())
    }
}

/// Block-diagonal assembly `diag(R_1, ..., R_U)` in user order.
pub fn block_covariance<T: Real>(per_user: Vec<CMatrix<T>>) -> Result<CovarianceSet<T>> {
    let m = per_user
        .first()
        .ok_or_else(|| Error::invalid("no covariance blocks"))?
        .nrows();
    for r in &per_user {
        if r.nrows() != m || r.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "covariance block size",
                expected: m,
                actual: r.nrows().max(r.ncols()),
            });
        }
    }
    let n = m * per_user.len();
    let mut block = CMatrix::zeros(n, n);
    for (u, r) in per_user.iter().enumerate() {
        block.view_mut((u * m, u * m), (m, m)).copy_from(r);
    }
    Ok(CovarianceSet { per_user, block })
}

//! Uniform linear array geometry, steering vectors, the isotropic impedance
//! matrix and directivity evaluation.
//!
//! Angles follow the physics convention: `theta` is measured from the z-axis
//! and `phi` is the azimuth in the xy-plane. The array lies on the x-axis with
//! the first element at the origin, so users in the horizontal plane sit at
//! `theta = pi/2`. Steering phases use the negative exponent
//! `exp(-j 2 pi (m-1) d cos(phi) sin(theta))`; directivity is unaffected by a
//! global conjugation of that convention.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    cis, hermitian_condition, to_complex, transpose_gain, transpose_quad_real, CMatrix, CVector,
    RMatrix, SpdFactor, CONDITION_WARNING,
};
use crate::scalar::Real;

/// Radiation resistance of a half-wave dipole, in ohms.
pub const DIPOLE_RADIATION_RESISTANCE: f64 = 73.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayConfig<T: Real> {
    num_antennas: usize,
    /// Element spacing in wavelengths at the carrier.
    spacing: T,
    carrier_freq: Option<T>,
}

impl<T: Real> ArrayConfig<T> {
    pub fn new(num_antennas: usize, spacing: T) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::invalid("array needs at least one antenna"));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
        }
        Ok(Self {
            num_antennas,
            spacing,
            carrier_freq: None,
        })
    }

    pub fn with_carrier(mut self, carrier_freq: T) -> Result<Self> {
        if !(carrier_freq > T::zero()) || !carrier_freq.is_finite() {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {carrier_freq}"
            )));
        }
        self.carrier_freq = Some(carrier_freq);
        Ok(self)
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn carrier_freq(&self) -> Option<T> {
        self.carrier_freq
    }

    /// Position of every element along x, in wavelengths.
    pub fn positions(&self) -> Vec<T> {
        (0..self.num_antennas)
            .map(|m| T::from_count(m) * self.spacing)
            .collect()
    }

    /// Electrical spacing `k d = 2 pi d / lambda`.
    pub fn electrical_spacing(&self) -> T {
        T::two_pi() * self.spacing
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringVector<T: Real> {
    pub entries: CVector<T>,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> SteeringVector<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Steering vector for an array whose per-element phase step is
/// `k d cos(phi) sin(theta)` with `k d` given explicitly.
pub(crate) fn steering_with_kd<T: Real>(m: usize, kd: T, theta: T, phi: T) -> CVector<T> {
    let step = kd * phi.cos() * theta.sin();
    CVector::from_iterator(m, (0..m).map(|i| cis(-(T::from_count(i) * step))))
}

pub fn steering_vector<T: Real>(cfg: &ArrayConfig<T>, theta: T, phi: T) -> SteeringVector<T> {
    SteeringVector {
        entries: steering_with_kd(cfg.num_antennas, cfg.electrical_spacing(), theta, phi),
        theta,
        phi,
    }
}

/// Steering vector for a user in the horizontal plane.
pub fn planar_steering<T: Real>(cfg: &ArrayConfig<T>, phi: T) -> SteeringVector<T> {
    steering_vector(cfg, T::frac_pi_2(), phi)
}

/// Sinc impedance matrix for `m` isotropic elements at electrical spacing `kd`.
pub(crate) fn sinc_impedance<T: Real>(m: usize, kd: T) -> RMatrix<T> {
    RMatrix::from_fn(m, m, |i, j| {
        if i == j {
            T::one()
        } else {
            let x = kd * (T::from_count(j) - T::from_count(i));
            x.sin() / x
        }
    })
}

/// Normalized impedance matrix of the isotropic ULA: unit diagonal and
/// `sin(kd (n-m)) / (kd (n-m))` elsewhere.
pub fn impedance_matrix<T: Real>(cfg: &ArrayConfig<T>) -> RMatrix<T> {
    sinc_impedance(cfg.num_antennas, cfg.electrical_spacing())
}

/// `Z + (r_loss / R_rad) I`, the impedance seen once ohmic loss is included.
pub fn regularized_impedance<T: Real>(z: &RMatrix<T>, r_loss: T, r_rad: T) -> Result<RMatrix<T>> {
    if !(r_rad > T::zero()) {
        return Err(Error::invalid(format!(
            "radiation resistance must be positive, got {r_rad}"
        )));
    }
    if r_loss < T::zero() {
        return Err(Error::invalid(format!(
            "loss resistance must be non-negative, got {r_loss}"
        )));
    }
    let mut out = z.clone();
    let ratio = r_loss / r_rad;
    for i in 0..out.nrows() {
        out[(i, i)] += ratio;
    }
    Ok(out)
}

/// Physical description of a thin wire dipole element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleSpec<T: Real> {
    /// meters
    pub length: T,
    /// meters
    pub radius: T,
    /// Hz
    pub frequency: T,
    /// S/m
    pub conductivity: T,
    /// H/m
    pub permeability: T,
}

impl<T: Real> DipoleSpec<T> {
    /// 85 mm copper dipole of radius 0.75 mm operated at 1.6 GHz.
    pub fn copper_1p6ghz() -> Self {
        Self {
            length: T::lit(0.085),
            radius: T::lit(0.75e-3),
            frequency: T::lit(1.6e9),
            conductivity: T::lit(5.8e7),
            permeability: T::lit(4.0e-7) * T::pi(),
        }
    }

    pub fn at_frequency(self, frequency: T) -> Self {
        Self { frequency, ..self }
    }

    pub fn loss_resistance(&self) -> Result<T> {
        dipole_loss_resistance(
            self.length,
            self.radius,
            self.frequency,
            self.conductivity,
            self.permeability,
        )
    }
}

/// Ohmic loss resistance of a dipole, `(L / (4 pi r)) sqrt(pi f mu / sigma)`.
pub fn dipole_loss_resistance<T: Real>(
    length: T,
    radius: T,
    frequency: T,
    conductivity: T,
    permeability: T,
) -> Result<T> {
    for (name, v) in [
        ("length", length),
        ("radius", radius),
        ("frequency", frequency),
        ("conductivity", conductivity),
        ("permeability", permeability),
    ] {
        if !(v > T::zero()) {
            return Err(Error::invalid(format!("dipole {name} must be positive, got {v}")));
        }
    }
    let four = T::lit(4.0);
    Ok(length / (four * T::pi() * radius) * (T::pi() * frequency * permeability / conductivity).sqrt())
}

/// The electromagnetic environment of the array.
#[derive(Clone, Debug)]
pub struct CouplingModel<T: Real> {
    pub z: RMatrix<T>,
    pub z_r: RMatrix<T>,
    pub c: CMatrix<T>,
    pub r_rad: T,
    pub r_loss: T,
}

impl<T: Real> CouplingModel<T> {
    pub fn new(cfg: &ArrayConfig<T>, c: CMatrix<T>, r_rad: T, r_loss: T) -> Result<Self> {
        let m = cfg.num_antennas();
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "field coupling matrix",
                expected: m,
                actual: if c.nrows() != m { c.nrows() } else { c.ncols() },
            });
        }
        let z = impedance_matrix(cfg);
        let z_r = regularized_impedance(&z, r_loss, r_rad)?;
        let cond = hermitian_condition(&to_complex(&z));
        if cond.as_f64() > CONDITION_WARNING {
            log::warn!(
                "impedance matrix for M={m}, d={} is ill-conditioned (cond {:.3e})",
                cfg.spacing(),
                cond.as_f64()
            );
        }
        Ok(Self {
            z,
            z_r,
            c,
            r_rad,
            r_loss,
        })
    }

    /// Lossless model with no field coupling distortion.
    pub fn ideal(cfg: &ArrayConfig<T>) -> Result<Self> {
        let m = cfg.num_antennas();
        Self::new(
            cfg,
            CMatrix::identity(m, m),
            T::lit(DIPOLE_RADIATION_RESISTANCE),
            T::zero(),
        )
    }

    /// Converts coupled weights `C a` back to excitations `a`.
    pub fn excitation_from_coupled(&self, w_bar: &CVector<T>) -> Result<CVector<T>> {
        self.c.clone().lu().solve(w_bar).ok_or_else(|| Error::Singular {
            context: "field coupling matrix".into(),
            condition: f64::INFINITY,
        })
    }
}

/// `e^H Z^{-1} e`, the largest directivity reachable towards `e`.
pub fn max_directivity<T: Real>(z: &RMatrix<T>, e: &SteeringVector<T>) -> Result<T> {
    max_directivity_loaded(z, e, T::zero())
}

/// [`max_directivity`] with diagonal loading `delta` added to `Z`.
pub fn max_directivity_loaded<T: Real>(
    z: &RMatrix<T>,
    e: &SteeringVector<T>,
    delta: T,
) -> Result<T> {
    if z.nrows() != e.len() {
        return Err(Error::DimensionMismatch {
            context: "impedance vs steering vector",
            expected: z.nrows(),
            actual: e.len(),
        });
    }
    let factor = SpdFactor::from_real(z, delta, "impedance matrix in max_directivity")?;
    let x = factor.solve(&e.entries);
    Ok(e.entries.dotc(&x).re)
}

/// Directivity of coupled weights `w_bar` towards `(theta, phi)`:
/// `|w_bar^T e|^2 / (w_bar^T Z w_bar^*)`.
pub fn directivity<T: Real>(
    w_bar: &CVector<T>,
    z: &RMatrix<T>,
    cfg: &ArrayConfig<T>,
    theta: T,
    phi: T,
) -> Result<T> {
    let e = steering_vector(cfg, theta, phi);
    directivity_towards(w_bar, z, &e.entries)
}

pub(crate) fn directivity_towards<T: Real>(
    w_bar: &CVector<T>,
    z: &RMatrix<T>,
    e: &CVector<T>,
) -> Result<T> {
    if w_bar.len() != z.nrows() || e.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            context: "weights vs impedance matrix",
            expected: z.nrows(),
            actual: w_bar.len(),
        });
    }
    let denom = transpose_quad_real(w_bar, z);
    if !(denom > T::zero()) || w_bar.iter().all(|c| *c == Complex::new(T::zero(), T::zero())) {
        return Err(Error::invalid("directivity of a zero weight vector"));
    }
    Ok(transpose_gain(w_bar, e) / denom)
}

/// Directivity over an azimuth grid in the horizontal plane. Rows keep the
/// order of `phi_grid`.
pub fn directivity_pattern<T: Real>(
    w_bar: &CVector<T>,
    z: &RMatrix<T>,
    cfg: &ArrayConfig<T>,
    phi_grid: &[T],
) -> Result<Vec<(T, T)>> {
    if phi_grid.is_empty() {
        return Err(Error::invalid("pattern grid is empty"));
    }
    phi_grid
        .iter()
        .map(|&phi| Ok((phi, directivity(w_bar, z, cfg, T::frac_pi_2(), phi)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, min_eigenvalue_sym};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg(m: usize, d: f64) -> ArrayConfig<f64> {
        ArrayConfig::new(m, d).unwrap()
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let e = steering_vector(&cfg(4, 0.25), FRAC_PI_2, FRAC_PI_2);
        for v in e.entries.iter() {
            assert!((v - cplx(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn endfire_quarter_wave_steering() {
        let e = steering_vector(&cfg(2, 0.25), FRAC_PI_2, 0.0);
        assert!((e.entries[0] - cplx(1.0, 0.0)).norm() < 1e-15);
        // exp(-j pi/2) = -j
        assert!((e.entries[1] - cplx(0.0, -1.0)).norm() < 1e-15);
        let single = steering_vector(&cfg(1, 0.3), 0.7, 1.1);
        assert_eq!(single.entries.len(), 1);
        assert_eq!(single.entries[0], cplx(1.0, 0.0));
    }

    #[test]
    fn steering_entries_unit_modulus() {
        let e = steering_vector(&cfg(9, 0.17), 1.0, 0.4);
        assert!(e.entries.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn half_wave_impedance_is_identity() {
        for m in [2, 3, 8] {
            let z = impedance_matrix(&cfg(m, 0.5));
            assert!((z - RMatrix::identity(m, m)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn quarter_wave_off_diagonal() {
        let z = impedance_matrix(&cfg(2, 0.25));
        assert!((z[(0, 1)] - 2.0 / PI).abs() < 1e-15);
        assert!((z[(0, 1)] - std::f64::consts::FRAC_2_PI).abs() < 1e-12);
        assert_eq!(z[(0, 1)], z[(1, 0)]);
    }

    #[test]
    fn impedance_positive_definite_over_range() {
        // larger arrays at tighter spacing are positive definite only in exact arithmetic
        for (m, d) in [(2, 0.05), (5, 0.1), (8, 0.2), (16, 0.3), (32, 0.4), (32, 0.5)] {
            let z = impedance_matrix(&cfg(m, d));
            assert!(min_eigenvalue_sym(&z) > 0.0, "M={m} d={d}");
        }
    }

    #[test]
    fn regularized_impedance_adds_loss_ratio() {
        let z = impedance_matrix(&cfg(3, 0.25));
        assert_eq!(regularized_impedance(&z, 0.0, 73.0).unwrap(), z);
        let two = regularized_impedance(&RMatrix::<f64>::identity(2, 2), 73.0, 73.0).unwrap();
        assert_eq!(two, RMatrix::identity(2, 2) * 2.0);
        assert!(regularized_impedance(&z, 1.0, 0.0).is_err());
        assert!(regularized_impedance(&z, -1.0, 73.0).is_err());
    }

    #[test]
    fn dipole_loss_regression() {
        // Hand evaluation: 0.085 / (4 pi 0.75e-3) * sqrt(pi * 1.6e9 * 4 pi 1e-7 / 5.8e7)
        let r = DipoleSpec::<f64>::copper_1p6ghz().loss_resistance().unwrap();
        let lead = 0.085 / (4.0 * PI * 0.75e-3);
        let skin = (PI * 1.6e9 * 4.0e-7 * PI / 5.8e7).sqrt();
        assert!((r - lead * skin).abs() < 1e-15);
        assert!((r - 0.094_118_210_500_9).abs() < 1e-12);

        let base = DipoleSpec::<f64>::copper_1p6ghz();
        let quad = DipoleSpec {
            conductivity: base.conductivity * 4.0,
            ..base
        };
        let ratio = quad.loss_resistance().unwrap() / r;
        assert!((ratio - 0.5).abs() < 1e-12);

        let tiny = DipoleSpec { length: 1e-12, ..base };
        assert!(tiny.loss_resistance().unwrap() < 1e-9);
        assert!(DipoleSpec { radius: 0.0, ..base }.loss_resistance().is_err());
    }

    #[test]
    fn copper_dipole_regularization() {
        let z = impedance_matrix(&cfg(2, 0.25));
        let r_loss = DipoleSpec::<f64>::copper_1p6ghz().loss_resistance().unwrap();
        let zr = regularized_impedance(&z, r_loss, 73.0).unwrap();
        assert!((zr[(0, 0)] - 1.0 - r_loss / 73.0).abs() < 1e-15);
        assert_eq!(zr[(0, 1)], z[(0, 1)]);
    }

    #[test]
    fn max_directivity_half_wave_is_m() {
        let c = cfg(6, 0.5);
        let z = impedance_matrix(&c);
        for phi in [0.0, 0.3, 1.2, 2.9] {
            let e = planar_steering(&c, phi);
            assert!((max_directivity(&z, &e).unwrap() - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn two_element_endfire_approaches_four() {
        let mut prev = 0.0;
        for d in [0.4, 0.2, 0.1, 0.05, 0.02] {
            let c = cfg(2, d);
            let v = max_directivity(&impedance_matrix(&c), &planar_steering(&c, 0.0)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!((prev - 4.0).abs() < 0.01, "{prev}");
    }

    #[test]
    fn max_directivity_monotone_in_spacing() {
        let mut prev = 0.0;
        for d in [0.5, 0.4, 0.3, 0.2, 0.1] {
            let c = cfg(5, d);
            let v = max_directivity(&impedance_matrix(&c), &planar_steering(&c, 0.0)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn matched_filter_directivity() {
        let c = cfg(7, 0.5);
        let z = impedance_matrix(&c);
        let e = planar_steering(&c, 0.8);
        let w = e.entries.conjugate();
        let d = directivity(&w, &z, &c, FRAC_PI_2, 0.8).unwrap();
        assert!((d - 7.0).abs() < 1e-10);
    }

    #[test]
    fn optimal_weights_attain_max_directivity() {
        let c = cfg(6, 0.2);
        let z = impedance_matrix(&c);
        let e = planar_steering(&c, 0.3);
        let w = SpdFactor::from_real(&z, 0.0, "t").unwrap().solve(&e.entries.conjugate());
        let d = directivity(&w, &z, &c, FRAC_PI_2, 0.3).unwrap();
        let dmax = max_directivity(&z, &e).unwrap();
        assert!((d - dmax).abs() / dmax < 1e-9);
    }

    #[test]
    fn random_weights_never_beat_max() {
        let c = cfg(6, 0.2);
        let z = impedance_matrix(&c);
        let e = planar_steering(&c, 0.3);
        let dmax = max_directivity(&z, &e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w = CVector::from_fn(6, |_, _| {
                cplx(f64::std_normal(&mut rng), f64::std_normal(&mut rng))
            });
            let d = directivity(&w, &z, &c, FRAC_PI_2, 0.3).unwrap();
            assert!(d <= dmax + 1e-8);
        }
    }

    #[test]
    fn zero_weights_rejected() {
        let c = cfg(3, 0.25);
        let z = impedance_matrix(&c);
        assert!(directivity(&CVector::zeros(3), &z, &c, FRAC_PI_2, 0.0).is_err());
    }

    #[test]
    fn pattern_rows_follow_grid() {
        let c = cfg(8, 0.5);
        let z = impedance_matrix(&c);
        let phi0 = 1.2;
        let e = planar_steering(&c, phi0);
        let w = SpdFactor::from_real(&z, 0.0, "t").unwrap().solve(&e.entries.conjugate());
        let grid: Vec<f64> = (0..=180).map(|k| (k as f64).to_radians()).collect();
        let pat = directivity_pattern(&w, &z, &c, &grid).unwrap();
        assert_eq!(pat.len(), grid.len());
        for (row, g) in pat.iter().zip(&grid) {
            assert_eq!(row.0, *g);
        }
        let (best, _) = pat
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, r)| if r.1 > acc.1 { (i, r.1) } else { acc });
        let nearest = grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - phi0).abs().partial_cmp(&(b.1 - phi0).abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, nearest);

        let single = directivity_pattern(&w, &z, &c, &[phi0]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(directivity_pattern(&w, &z, &c, &[]).is_err());
    }

    #[test]
    fn uniform_pattern_symmetric_about_pi() {
        let c = cfg(5, 0.5);
        let z = impedance_matrix(&c);
        let w = CVector::from_element(5, cplx(1.0, 0.0));
        for k in 1..30 {
            let delta = k as f64 * 0.05;
            let a = directivity(&w, &z, &c, FRAC_PI_2, PI - delta).unwrap();
            let b = directivity(&w, &z, &c, FRAC_PI_2, PI + delta).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_smoke() {
        let c = ArrayConfig::<f32>::new(4, 0.5).unwrap();
        let z = impedance_matrix(&c);
        let e = planar_steering(&c, 0.2);
        let d = max_directivity(&z, &e).unwrap();
        assert!((d - 4.0).abs() < 1e-4);
    }
}

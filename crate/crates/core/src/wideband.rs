//! Frequency-dependent array models and per-subcarrier precoding.
//!
//! Spacing is given in carrier wavelengths and pinned in meters at the
//! carrier: `d_m = d * c / f_c`. At frequency `f` the electrical spacing is
//! therefore `2 pi d f / f_c`.

use rayon::prelude::*;

use crate::em_array::{regularized_impedance, sinc_impedance, steering_with_kd, ArrayConfig, DipoleSpec, SteeringVector};
use crate::error::{Error, Result};
use crate::linalg::{transpose_gain, transpose_quad_real, CMatrix, CVector, RMatrix};
use crate::precoding::{insp_precoder, power_gain, PowerConstraint, Precoder};
use crate::scalar::Real;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierGrid<T: Real> {
    carrier: T,
    frequencies: Vec<T>,
}

impl<T: Real> SubcarrierGrid<T> {
    pub fn new(carrier: T, frequencies: Vec<T>) -> Result<Self> {
        if !(carrier > T::zero()) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if frequencies.is_empty() {
            return Err(Error::invalid("subcarrier grid is empty"));
        }
        if frequencies.iter().any(|f| !(*f > T::zero())) {
            return Err(Error::invalid("subcarrier frequencies must be positive"));
        }
        if frequencies.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::invalid("subcarrier frequencies must be strictly increasing"));
        }
        Ok(Self { carrier, frequencies })
    }

    /// `n` equally spaced subcarriers covering `carrier * (1 +/- half_span)`.
    pub fn symmetric(carrier: T, half_span: T, n: usize) -> Result<Self> {
        if n == 1 {
            return Self::new(carrier, vec![carrier]);
        }
        if !(half_span > T::zero()) || half_span >= T::one() {
            return Err(Error::invalid("relative half span must lie in (0, 1)"));
        }
        let lo = carrier * (T::one() - half_span);
        let step = T::lit(2.0) * carrier * half_span / T::from_count(n - 1);
        Self::new(carrier, (0..n).map(|i| lo + step * T::from_count(i)).collect())
    }

    pub fn carrier(&self) -> T {
        self.carrier
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn bandwidth(&self) -> T {
        self.frequencies[self.frequencies.len() - 1] - self.frequencies[0]
    }
}

fn carrier_of<T: Real>(cfg: &ArrayConfig<T>) -> Result<T> {
    cfg.carrier_freq()
        .ok_or_else(|| Error::invalid("array configuration has no carrier frequency"))
}

/// Physical element spacing in meters.
pub fn spacing_meters<T: Real>(cfg: &ArrayConfig<T>) -> Result<T> {
    Ok(cfg.spacing() * T::lit(SPEED_OF_LIGHT) / carrier_of(cfg)?)
}

/// Electrical spacing `k d_m` at frequency `f`.
pub fn kd_at_freq<T: Real>(cfg: &ArrayConfig<T>, f: T) -> Result<T> {
    if !(f > T::zero()) {
        return Err(Error::invalid("frequency must be positive"));
    }
    Ok(T::two_pi() * f / T::lit(SPEED_OF_LIGHT) * spacing_meters(cfg)?)
}

pub fn z_at_freq<T: Real>(cfg: &ArrayConfig<T>, f: T) -> Result<RMatrix<T>> {
    Ok(sinc_impedance(cfg.num_antennas(), kd_at_freq(cfg, f)?))
}

/// Horizontal-plane steering vector at frequency `f`.
pub fn steering_at_freq<T: Real>(cfg: &ArrayConfig<T>, f: T, phi: T) -> Result<SteeringVector<T>> {
    let theta = T::frac_pi_2();
    Ok(SteeringVector {
        entries: steering_with_kd(cfg.num_antennas(), kd_at_freq(cfg, f)?, theta, phi),
        theta,
        phi,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum WidebandMode<T: Real> {
    Insp,
    /// Loss-aware design; the dipole's loss resistance is re-evaluated at each subcarrier.
    Rinsp { dipole: DipoleSpec<T>, r_rad: T },
}

/// Per-subcarrier channels, weights and impedance matrices.
#[derive(Clone, Debug)]
pub struct WidebandPlan<T: Real> {
    pub grid: SubcarrierGrid<T>,
    /// `M x U` channel matrix per subcarrier.
    pub channels: Vec<CMatrix<T>>,
    pub precoders: Vec<Precoder<T>>,
    pub impedances: Vec<RMatrix<T>>,
    /// Matrices the weights are normalized against (`Z(f)` or `Z_R(f)`).
    pub constraints: Vec<RMatrix<T>>,
}

fn design_matrix<T: Real>(cfg: &ArrayConfig<T>, f: T, mode: &WidebandMode<T>) -> Result<(RMatrix<T>, RMatrix<T>)> {
    let z = z_at_freq(cfg, f)?;
    let design = match mode {
        WidebandMode::Insp => z.clone(),
        WidebandMode::Rinsp { dipole, r_rad } => {
            let r_loss = dipole.at_frequency(f).loss_resistance()?;
            regularized_impedance(&z, r_loss, *r_rad)?
        }
    };
    Ok((z, design))
}

fn at_frequency<T: Real>(f: T, e: Error) -> Error {
    Error::AtFrequency {
        frequency: f.as_f64(),
        source: Box::new(e),
    }
}

fn check_channels<T: Real>(cfg: &ArrayConfig<T>, channels: &[CMatrix<T>], grid: &SubcarrierGrid<T>) -> Result<()> {
    if channels.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "channel matrices per subcarrier",
            expected: grid.len(),
            actual: channels.len(),
        });
    }
    let users = channels[0].ncols();
    for h in channels {
        if h.nrows() != cfg.num_antennas() || h.ncols() != users {
            return Err(Error::DimensionMismatch {
                context: "per-subcarrier channel shape",
                expected: cfg.num_antennas(),
                actual: h.nrows(),
            });
        }
    }
    Ok(())
}

/// Solves each subcarrier independently; together the per-frequency optima
/// maximize the summed objective since the problem separates over frequency.
pub fn wideband_precode<T: Real>(
    cfg: &ArrayConfig<T>,
    grid: &SubcarrierGrid<T>,
    channels: &[CMatrix<T>],
    mode: &WidebandMode<T>,
) -> Result<WidebandPlan<T>> {
    check_channels(cfg, channels, grid)?;
    let per_freq: Vec<(RMatrix<T>, RMatrix<T>, Precoder<T>)> = grid
        .frequencies()
        .par_iter()
        .zip(channels.par_iter())
        .map(|(&f, h)| {
            let (z, design) = design_matrix(cfg, f, mode).map_err(|e| at_frequency(f, e))?;
            let constraint = match mode {
                WidebandMode::Insp => PowerConstraint::Impedance(design.clone()),
                WidebandMode::Rinsp { .. } => PowerConstraint::Regularized(design.clone()),
            };
            let p = insp_precoder(h, &design, &constraint).map_err(|e| at_frequency(f, e))?;
            Ok((z, design, p))
        })
        .collect::<Result<_>>()?;
    let mut plan = WidebandPlan {
        grid: grid.clone(),
        channels: channels.to_vec(),
        precoders: Vec::with_capacity(grid.len()),
        impedances: Vec::with_capacity(grid.len()),
        constraints: Vec::with_capacity(grid.len()),
    };
    for (z, design, p) in per_freq {
        plan.impedances.push(z);
        plan.constraints.push(design);
        plan.precoders.push(p);
    }
    Ok(plan)
}

/// Applies one set of weights, designed at the carrier from `carrier_channels`,
/// to every subcarrier (renormalized per subcarrier).
pub fn narrowband_plan<T: Real>(
    cfg: &ArrayConfig<T>,
    grid: &SubcarrierGrid<T>,
    channels: &[CMatrix<T>],
    carrier_channels: &CMatrix<T>,
    mode: &WidebandMode<T>,
) -> Result<WidebandPlan<T>> {
    check_channels(cfg, channels, grid)?;
    let fc = carrier_of(cfg)?;
    let (_, design_c) = design_matrix(cfg, fc, mode)?;
    let base = insp_precoder(carrier_channels, &design_c, &PowerConstraint::Impedance(design_c.clone()))
        .map_err(|e| at_frequency(fc, e))?;
    let mut plan = WidebandPlan {
        grid: grid.clone(),
        channels: channels.to_vec(),
        precoders: Vec::with_capacity(grid.len()),
        impedances: Vec::with_capacity(grid.len()),
        constraints: Vec::with_capacity(grid.len()),
    };
    for &f in grid.frequencies() {
        let (z, design) = design_matrix(cfg, f, mode)?;
        let constraint = match mode {
            WidebandMode::Insp => PowerConstraint::Impedance(design.clone()),
            WidebandMode::Rinsp { .. } => PowerConstraint::Regularized(design.clone()),
        };
        let weights = base
            .weights
            .iter()
            .map(|w| constraint.normalize(w))
            .collect::<Result<Vec<_>>>()?;
        plan.precoders.push(Precoder {
            weights,
            norm_mode: constraint.mode(),
            power_budget: base.power_budget.clone(),
        });
        plan.impedances.push(z);
        plan.constraints.push(design);
    }
    Ok(plan)
}

/// Summed per-subcarrier gain of user `u`, the objective of the wideband design.
pub fn plan_objective<T: Real>(plan: &WidebandPlan<T>, u: usize) -> Result<T> {
    let mut acc = T::zero();
    for ((h, p), z) in plan.channels.iter().zip(&plan.precoders).zip(&plan.constraints) {
        acc += power_gain(&p.weights[u], &h.column(u).clone_owned(), z)?;
    }
    Ok(acc)
}

/// Closed-form half-power offset `f_c - f_l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPowerOffset<T: Real> {
    /// `f_c (1 - cos(sqrt(4 pi) / (2M)))`.
    pub exact: T,
    /// `pi f_c / (2 M^2)`.
    pub asymptote: T,
}

pub fn predicted_half_power_offset<T: Real>(m: usize, carrier: T) -> Result<HalfPowerOffset<T>> {
    if m < 2 {
        return Err(Error::invalid("half-power law needs at least two antennas"));
    }
    let mm = T::from_count(m);
    let arg = (T::lit(4.0) * T::pi()).sqrt() / (T::lit(2.0) * mm);
    Ok(HalfPowerOffset {
        exact: carrier * (T::one() - arg.cos()),
        asymptote: T::pi() * carrier / (T::lit(2.0) * mm * mm),
    })
}

/// How fixed carrier weights are evaluated off the carrier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandModel {
    /// Only the steering vector follows frequency; the power normalization
    /// stays at the carrier's `Z`.
    #[default]
    BeamSplit,
    /// Both `e(f)` and `Z(f)` follow frequency.
    FullDispersion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams<T: Real> {
    /// Lowest scanned frequency as a fraction of the carrier.
    pub low_ratio: T,
    pub points: usize,
    pub model: BandModel,
}

impl<T: Real> Default for ScanParams<T> {
    fn default() -> Self {
        Self {
            low_ratio: T::lit(0.9),
            points: 401,
            model: BandModel::BeamSplit,
        }
    }
}

/// Endfire directivity of the carrier-optimal weights across a scan of
/// `[low_ratio f_c, f_c]`, as `(f, D(f))` rows in increasing frequency.
pub fn fixed_weight_scan<T: Real>(cfg: &ArrayConfig<T>, scan: &ScanParams<T>) -> Result<Vec<(T, T)>> {
    let fc = carrier_of(cfg)?;
    if scan.points < 2 || !(scan.low_ratio > T::zero()) || scan.low_ratio >= T::one() {
        return Err(Error::invalid("scan needs >= 2 points and a low ratio in (0, 1)"));
    }
    let z_c = z_at_freq(cfg, fc)?;
    let e_c = steering_at_freq(cfg, fc, T::zero())?;
    let factor = crate::linalg::SpdFactor::from_real(&z_c, T::zero(), "carrier impedance")?;
    let w: CVector<T> = factor.solve(&e_c.entries).conjugate();
    let lo = fc * scan.low_ratio;
    let step = (fc - lo) / T::from_count(scan.points - 1);
    (0..scan.points)
        .map(|i| {
            let f = if i + 1 == scan.points { fc } else { lo + step * T::from_count(i) };
            let e = steering_at_freq(cfg, f, T::zero())?;
            let denom = match scan.model {
                BandModel::BeamSplit => transpose_quad_real(&w, &z_c),
                BandModel::FullDispersion => transpose_quad_real(&w, &z_at_freq(cfg, f)?),
            };
            Ok((f, transpose_gain(&w, &e.entries) / denom))
        })
        .collect()
}

/// `f_c - f_l` where `f_l` is the highest scanned frequency below the carrier
/// at which the directivity of the carrier-optimal endfire weights falls to
/// half its carrier value (linear interpolation between grid points).
pub fn measured_half_power_offset<T: Real>(cfg: &ArrayConfig<T>, scan: &ScanParams<T>) -> Result<T> {
    let rows = fixed_weight_scan(cfg, scan)?;
    let (fc, d0) = rows[rows.len() - 1];
    let half = d0 / T::lit(2.0);
    for i in (0..rows.len() - 1).rev() {
        let (f0, y0) = rows[i];
        if y0 <= half {
            let (f1, y1) = rows[i + 1];
            let t = (half - y0) / (y1 - y0);
            let fl = f0 + t * (f1 - f0);
            return Ok(fc - fl);
        }
    }
    Err(Error::invalid(format!(
        "directivity never falls 3 dB within the scan; lower low_ratio below {}",
        scan.low_ratio
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_paths, MultipathSpec};
    use crate::em_array::{impedance_matrix, max_directivity, planar_steering};
    use crate::precoding::{insp, nulling_residual};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg(m: usize, d: f64) -> ArrayConfig<f64> {
        ArrayConfig::new(m, d).unwrap().with_carrier(10e9).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SubcarrierGrid::new(10e9, vec![9e9, 10e9, 11e9]).is_ok());
        assert!(SubcarrierGrid::new(10e9, vec![9e9, 9e9]).is_err());
        assert!(SubcarrierGrid::new(10e9, vec![-1.0]).is_err());
        assert!(SubcarrierGrid::<f64>::new(10e9, vec![]).is_err());
        let g = SubcarrierGrid::<f64>::symmetric(10e9, 0.06, 5).unwrap();
        let expected = [9.4e9, 9.7e9, 10e9, 10.3e9, 10.6e9];
        for (a, b) in g.frequencies().iter().zip(expected) {
            assert!((a - b).abs() < 1.0);
        }
        assert!((g.bandwidth() - 1.2e9).abs() < 1.0);
        assert_eq!(SubcarrierGrid::symmetric(10e9, 0.06, 1).unwrap().len(), 1);
    }

    #[test]
    fn impedance_at_carrier_and_half_wave() {
        let c = cfg(6, 0.25);
        assert!((z_at_freq(&c, 10e9).unwrap() - impedance_matrix(&c)).abs().max() < 1e-15);
        // d_m = lambda/2 at twice the carrier
        let z = z_at_freq(&c, 20e9).unwrap();
        assert!((z - RMatrix::identity(6, 6)).abs().max() < 1e-12);
        let f = 13.7e9;
        let kd = 2.0 * PI * f / SPEED_OF_LIGHT * spacing_meters(&c).unwrap();
        assert!((z_at_freq(&c, f).unwrap()[(0, 1)] - kd.sin() / kd).abs() < 1e-15);
        assert!(z_at_freq(&ArrayConfig::new(4, 0.25).unwrap(), 1e9).is_err());
    }

    #[test]
    fn steering_follows_frequency() {
        let c = cfg(5, 0.3);
        let base = planar_steering(&c, 0.7);
        let at = steering_at_freq(&c, 10e9, 0.7).unwrap();
        assert!((base.entries - at.entries).norm() < 1e-12);
        let e1 = steering_at_freq(&c, 10e9, 0.0).unwrap();
        let e2 = steering_at_freq(&c, 20e9, 0.0).unwrap();
        let step1 = (e1.entries[1] / e1.entries[0]).arg();
        let step2 = (e2.entries[1] / e2.entries[0]).arg();
        let doubled = (2.0 * step1 + PI).rem_euclid(2.0 * PI) - PI;
        assert!((step2 - doubled).abs() < 1e-12);
    }

    #[test]
    fn steering_decorrelation_small_offsets() {
        // |e(f_c)^H e(f)| / M = |sin(M x / 2) / (M sin(x / 2))| with x = kd (f/f_c - 1)
        let m = 16;
        let c = cfg(m, 0.25);
        let ec = steering_at_freq(&c, 10e9, 0.0).unwrap().entries;
        for rel in [0.001, 0.005, 0.01, 0.02] {
            let f = 10e9 * (1.0 - rel);
            let e = steering_at_freq(&c, f, 0.0).unwrap().entries;
            let corr = ec.dotc(&e).norm() / m as f64;
            let x = 2.0 * PI * 0.25 * rel;
            let expected = ((m as f64 * x / 2.0).sin() / (m as f64 * (x / 2.0).sin())).abs();
            assert!((corr - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn predicted_offsets() {
        let p = predicted_half_power_offset(10, 1.0f64).unwrap();
        assert!((p.exact - (1.0 - ((4.0 * PI).sqrt() / 20.0).cos())).abs() < 1e-15);
        assert!((p.exact - 0.0157).abs() < 1e-4);
        assert!((p.asymptote - PI / 200.0).abs() < 1e-15);
        let big = predicted_half_power_offset(64, 1.0f64).unwrap();
        assert!((big.asymptote / big.exact - 1.0).abs() < 1e-3);
        let a = predicted_half_power_offset(12, 3.0f64).unwrap().asymptote;
        let b = predicted_half_power_offset(24, 3.0f64).unwrap().asymptote;
        assert!((b / a - 0.25).abs() < 1e-15);
        assert!(predicted_half_power_offset(1, 1.0f64).is_err());
    }

    #[test]
    fn carrier_directivity_is_maximal() {
        let c = cfg(8, 0.25);
        let rows = fixed_weight_scan(&c, &ScanParams::default()).unwrap();
        let dmax = max_directivity(&impedance_matrix(&c), &planar_steering(&c, 0.0)).unwrap();
        let (f, d) = rows[rows.len() - 1];
        assert_eq!(f, 10e9);
        assert!((d - dmax).abs() / dmax < 1e-9);
        // non-increasing away from the carrier while in the main lobe
        let half = d / 2.0;
        for w in rows.windows(2).rev() {
            if w[1].1 < half {
                break;
            }
            assert!(w[0].1 <= w[1].1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn measured_offset_near_prediction() {
        for m in [8, 16, 24] {
            let c = cfg(m, 0.25);
            let meas = measured_half_power_offset(&c, &ScanParams::default()).unwrap();
            let pred = predicted_half_power_offset(m, 10e9).unwrap().exact;
            assert!((meas / pred - 1.0).abs() < 0.3, "M={m}: {meas} vs {pred}");
        }
    }

    #[test]
    fn measured_offset_stable_under_wider_scan() {
        let c = cfg(8, 0.25);
        let a = measured_half_power_offset(&c, &ScanParams::default()).unwrap();
        let wide = ScanParams {
            low_ratio: 0.8,
            points: 801,
            model: BandModel::BeamSplit,
        };
        let b = measured_half_power_offset(&c, &wide).unwrap();
        assert!((a - b).abs() / a < 1e-3, "{a} {b}");
    }

    #[test]
    fn narrow_scan_reports_error() {
        let c = cfg(8, 0.25);
        let tight = ScanParams {
            low_ratio: 0.999,
            points: 11,
            model: BandModel::BeamSplit,
        };
        assert!(measured_half_power_offset(&c, &tight).is_err());
    }

    #[test]
    fn reoptimized_weights_hold_directivity() {
        let c = cfg(8, 0.25);
        let offset = measured_half_power_offset(&c, &ScanParams::default()).unwrap();
        let d0 = max_directivity(&impedance_matrix(&c), &planar_steering(&c, 0.0)).unwrap();
        // ten times beyond the narrowband half-power point
        let f = 10e9 - 10.0 * offset;
        let d = max_directivity(&z_at_freq(&c, f).unwrap(), &steering_at_freq(&c, f, 0.0).unwrap()).unwrap();
        assert!(d > 0.5 * d0, "{d} vs {d0}");
    }

    fn shared_channels(c: &ArrayConfig<f64>, grid: &SubcarrierGrid<f64>, users: usize, seed: u64) -> (Vec<CMatrix<f64>>, CMatrix<f64>) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let paths: Vec<_> = (0..users)
            .map(|_| {
                let az: Vec<f64> = (0..4).map(|_| PI * r.random::<f64>()).collect();
                draw_paths(&MultipathSpec::planar(&az, 1.0), &mut r).unwrap()
            })
            .collect();
        let at = |f: f64| {
            let kd = kd_at_freq(c, f).unwrap();
            CMatrix::from_columns(&paths.iter().map(|p| p.channel_with_kd(c.num_antennas(), kd)).collect::<Vec<_>>())
        };
        (grid.frequencies().iter().map(|&f| at(f)).collect(), at(10e9))
    }

    #[test]
    fn single_subcarrier_equals_insp() {
        let c = cfg(8, 0.25);
        let grid = SubcarrierGrid::new(10e9, vec![10e9]).unwrap();
        let (hs, hc) = shared_channels(&c, &grid, 3, 1);
        let plan = wideband_precode(&c, &grid, &hs, &WidebandMode::Insp).unwrap();
        let z = impedance_matrix(&c);
        for u in 0..3 {
            let w = insp(&hc, u, &z).unwrap();
            assert!((&plan.precoders[0].weights[u] - &w).norm() < 1e-8 * w.norm());
        }
    }

    #[test]
    fn wideband_plan_nulls_and_separates() {
        let c = cfg(10, 0.25);
        let grid = SubcarrierGrid::symmetric(10e9, 0.06, 5).unwrap();
        let (hs, hc) = shared_channels(&c, &grid, 4, 2);
        let plan = wideband_precode(&c, &grid, &hs, &WidebandMode::Insp).unwrap();
        assert_eq!(plan.precoders.len(), 5);
        assert_eq!(plan.impedances.len(), 5);
        for (h, p) in plan.channels.iter().zip(&plan.precoders) {
            assert!(nulling_residual(h, &p.weights) < 1e-8);
        }
        let narrow = narrowband_plan(&c, &grid, &hs, &hc, &WidebandMode::Insp).unwrap();
        for u in 0..4 {
            let wide_obj = plan_objective(&plan, u).unwrap();
            let narrow_obj = plan_objective(&narrow, u).unwrap();
            assert!(wide_obj >= narrow_obj * (1.0 - 1e-9));
            // sum of independent per-frequency optima
            let mut sum = 0.0;
            for (i, &f) in grid.frequencies().iter().enumerate() {
                let h = &hs[i];
                let others: Vec<_> = (0..4).filter(|&j| j != u).map(|j| h.column(j).clone_owned()).collect();
                let (g, _) = crate::precoding::oracle_max_gain(&h.column(u).clone_owned(), &others, &z_at_freq(&c, f).unwrap()).unwrap();
                sum += g;
            }
            assert!((wide_obj - sum).abs() / sum < 1e-6);
        }
    }

    #[test]
    fn rinsp_mode_uses_regularized_matrix() {
        let c = cfg(6, 0.25).with_carrier(1.6e9).unwrap();
        let grid = SubcarrierGrid::symmetric(1.6e9, 0.05, 3).unwrap();
        let (hs, _) = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            let p = draw_paths(&MultipathSpec::planar(&[0.1, 0.2, 2.0, 3.0], 1.0), &mut r).unwrap();
            let q = draw_paths(&MultipathSpec::planar(&[1.1, 2.6, 0.3, 1.5], 1.0), &mut r).unwrap();
            let hs: Vec<CMatrix<f64>> = grid
                .frequencies()
                .iter()
                .map(|&f| {
                    let kd = kd_at_freq(&c, f).unwrap();
                    CMatrix::from_columns(&[p.channel_with_kd(6, kd), q.channel_with_kd(6, kd)])
                })
                .collect();
            (hs, ())
        };
        let mode = WidebandMode::Rinsp {
            dipole: DipoleSpec::copper_1p6ghz(),
            r_rad: 73.0,
        };
        let plan = wideband_precode(&c, &grid, &hs, &mode).unwrap();
        for (p, zr) in plan.precoders.iter().zip(&plan.constraints) {
            for w in &p.weights {
                assert!((transpose_quad_real(w, zr) - 1.0).abs() < 1e-10);
            }
        }
        assert!(plan.constraints[0][(0, 0)] > 1.0);
        assert!(plan.constraints[2][(0, 0)] > plan.constraints[0][(0, 0)]);
    }

    #[test]
    fn errors_carry_frequency() {
        let c = cfg(4, 0.25);
        let grid = SubcarrierGrid::new(10e9, vec![9.9e9, 10e9]).unwrap();
        let h = CMatrix::from_element(4, 5, crate::linalg::cplx(1.0, 0.0));
        let err = wideband_precode(&c, &grid, &[h.clone(), h], &WidebandMode::Insp).unwrap_err();
        assert!(matches!(err, Error::AtFrequency { .. }), "{err}");
        assert!(err.is_numerical());
    }
}

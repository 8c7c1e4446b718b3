//! Seeded Monte-Carlo sweeps.
//!
//! Trial `t` draws from a ChaCha8 stream keyed by `(seed, t, attempt)`, so
//! results do not depend on how trials are scheduled across threads. Trials
//! run in parallel and are reduced sequentially in trial order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{analytic_covariance, block_covariance, complex_gaussian, draw_paths, MultipathSpec, PathRealization};
use crate::coupling::{load_coupling_matrix, synth_coupling_matrix, DEFAULT_CONDITION_CEILING};
use crate::em_array::{
    directivity_pattern, dipole_loss_resistance, impedance_matrix, planar_steering, regularized_impedance, ArrayConfig,
    DipoleSpec,
};
use crate::error::{Error, Result};
use crate::estimation::{fca_estimator, make_pilots, normalized_error, synth_uplink, trad_estimator};
use crate::linalg::{cplx, CMatrix, CVector, RMatrix};
use crate::precoding::{build_precoder, power_gain, ArrayMatrices};
use crate::wideband::{kd_at_freq, narrowband_plan, wideband_precode, SubcarrierGrid, WidebandMode, WidebandPlan};

use super::config::{ChannelNormalization, CouplingSource, FrequencyCorrelation, LossSettings, ScenarioConfig};
use super::metrics::{downlink_snr_to_noise, spectral_efficiency, summarize};
use super::table::{ResultMeta, ResultRow, ResultTable};

/// Attempts per trial before a persistently infeasible draw becomes an error.
pub const MAX_REDRAWS: u32 = 64;

pub const METRIC_SE: &str = "se_bps_hz";
pub const METRIC_GAIN: &str = "power_gain";
pub const METRIC_NMSE: &str = "nmse_db";
pub const METRIC_DIRECTIVITY: &str = "directivity";

/// RNG for attempt `attempt` of trial `trial`.
pub fn trial_rng(seed: u64, trial: usize, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((attempt as u64) << 40) | trial as u64);
    rng
}

fn array_of(cfg: &ScenarioConfig, antennas: usize) -> Result<ArrayConfig<f64>> {
    ArrayConfig::new(antennas, cfg.array.spacing)?.with_carrier(cfg.array.carrier_hz)
}

fn dipole_of(loss: &LossSettings, frequency: f64) -> DipoleSpec<f64> {
    DipoleSpec {
        length: loss.length_m,
        radius: loss.radius_m,
        frequency,
        conductivity: loss.conductivity,
        permeability: loss.permeability,
    }
}

/// Ohmic loss resistance of the configured dipole at the carrier.
pub fn loss_resistance(cfg: &ScenarioConfig) -> Result<Option<f64>> {
    cfg.loss
        .as_ref()
        .map(|l| {
            dipole_loss_resistance(l.length_m, l.radius_m, cfg.array.carrier_hz, l.conductivity, l.permeability)
        })
        .transpose()
}

fn regularized(cfg: &ScenarioConfig, z: &RMatrix<f64>) -> Result<Option<RMatrix<f64>>> {
    match (&cfg.loss, loss_resistance(cfg)?) {
        (Some(l), Some(r_loss)) => Ok(Some(regularized_impedance(z, r_loss, l.r_rad)?)),
        _ => Ok(None),
    }
}

fn draw_sector_paths<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    sector: [f64; 2],
    rng: &mut R,
) -> Result<PathRealization<f64>> {
    let (lo, hi) = (sector[0].to_radians(), sector[1].to_radians());
    let az: Vec<f64> = (0..cfg.paths).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let spec = MultipathSpec::planar(&az, cfg.gain_variance).with_normalization(cfg.path_normalization);
    draw_paths(&spec, rng)
}

fn normalize_channel(cfg: &ScenarioConfig, mut h: CVector<f64>) -> CVector<f64> {
    if cfg.channel_normalization == ChannelNormalization::UnitPower {
        let p = h.norm_squared();
        if p > 0.0 {
            h *= cplx((h.len() as f64 / p).sqrt(), 0.0);
        }
    }
    h
}

fn is_degenerate(e: &Error) -> bool {
    match e {
        Error::Infeasible(_) | Error::RankDeficient { .. } => true,
        Error::AtFrequency { source, .. } => is_degenerate(source),
        _ => false,
    }
}

/// Runs `trial` for every index in parallel, retrying degenerate draws with
/// fresh attempts. Returns per-trial values in trial order and the number of
/// redraws.
fn run_trials<F>(cfg: &ScenarioConfig, trial: F) -> Result<(Vec<Vec<f64>>, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    let outcomes: Vec<Result<(Vec<f64>, u64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            for attempt in 0..MAX_REDRAWS {
                let mut rng = trial_rng(cfg.seed, t, attempt);
                match trial(&mut rng) {
                    Ok(v) => return Ok((v, attempt as u64)),
                    Err(e) if is_degenerate(&e) => {
                        log::debug!("trial {t} attempt {attempt}: {e}; redrawing");
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Infeasible(format!(
                "trial {t} stayed degenerate after {MAX_REDRAWS} draws"
            )))
        })
        .collect();
    let mut values = Vec::with_capacity(cfg.trials);
    let mut redraws = 0;
    for o in outcomes {
        let (v, r) = o?;
        redraws += r;
        values.push(v);
    }
    Ok((values, redraws))
}

fn column(values: &[Vec<f64>], k: usize) -> Vec<f64> {
    values.iter().map(|v| v[k]).collect()
}

fn meta(kind: &str, cfg: &ScenarioConfig, redraws: u64) -> ResultMeta {
    ResultMeta {
        sweep: kind.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        trials: cfg.trials,
        version: env!("CARGO_PKG_VERSION").to_string(),
        redraws,
    }
}

fn row(sweep: f64, label: &str, metric: &str, values: &[f64]) -> ResultRow {
    let s = summarize(values);
    ResultRow {
        sweep,
        label: label.to_string(),
        metric: metric.to_string(),
        mean: s.mean,
        stderr: s.stderr,
        trials: s.count,
    }
}

fn coupling_matrix(cfg: &ScenarioConfig, array: &ArrayConfig<f64>) -> Result<CMatrix<f64>> {
    let m = array.num_antennas();
    match &cfg.coupling {
        CouplingSource::Identity => Ok(CMatrix::identity(m, m)),
        CouplingSource::File { path } => load_coupling_matrix(path, Some(m), DEFAULT_CONDITION_CEILING),
        CouplingSource::Synthetic { strength, seed } => synth_coupling_matrix(array, *strength, *seed),
    }
}

/// Normalized estimation error of the coupling-aware and the conventional
/// MMSE estimators versus pilot SNR (`tau / noise`).
pub fn run_estimation_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let array = array_of(cfg, cfg.array.antennas)?;
    if cfg.coupling == CouplingSource::Identity {
        log::warn!("estimation sweep without field coupling: both estimators coincide");
    }
    let c = coupling_matrix(cfg, &array)?;
    let users = cfg.users;
    let tau = cfg.estimation.pilot_length.unwrap_or(users);
    let mut pilot_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pilot_rng.set_stream(u64::MAX);
    let pilots = make_pilots(users, tau, cfg.estimation.pilot_kind, &mut pilot_rng)?;
    let [lo, hi] = cfg.estimation.angle_range_deg;
    let noises: Vec<f64> = cfg.snr_db.iter().map(|s| tau as f64 / 10f64.powf(s / 10.0)).collect();

    let (values, redraws) = run_trials(cfg, |rng| {
        let mut hs = Vec::with_capacity(users);
        let mut covs = Vec::with_capacity(users);
        for _ in 0..users {
            let az: Vec<f64> = (0..cfg.paths)
                .map(|_| (lo + (hi - lo) * rng.random::<f64>()).to_radians())
                .collect();
            let spec = MultipathSpec::planar(&az, cfg.gain_variance).with_normalization(cfg.path_normalization);
            hs.push(draw_paths(&spec, rng)?.channel(&array));
            covs.push(analytic_covariance(&spec, &array)?);
        }
        let cov = block_covariance(covs)?;
        let clean = synth_uplink(&hs, &pilots, &c, 0.0, rng)?;
        let unit_noise = CVector::from_fn(clean.y.len(), |_, _| complex_gaussian(rng, 1.0));
        let mut out = Vec::with_capacity(2 * noises.len());
        for &noise in &noises {
            let y = &clean.y + &unit_noise * cplx(noise.sqrt(), 0.0);
            let fca = fca_estimator(&cov, &pilots, &c, noise)?;
            let trad = trad_estimator(&cov, &pilots, noise)?;
            out.push(normalized_error(&fca.estimate(&y)?, &hs)?);
            out.push(normalized_error(&trad.estimate(&y)?, &hs)?);
        }
        Ok(out)
    })?;

    let mut rows = Vec::new();
    for (i, &snr) in cfg.snr_db.iter().enumerate() {
        rows.push(row(snr, "fca", METRIC_NMSE, &column(&values, 2 * i)));
        rows.push(row(snr, "traditional", METRIC_NMSE, &column(&values, 2 * i + 1)));
    }
    Ok(ResultTable::new(meta("estimation", cfg, redraws), rows))
}

/// Array, impedance and optional loss-regularized impedance for one size.
type SizedArray = (ArrayConfig<f64>, RMatrix<f64>, Option<RMatrix<f64>>);

/// Mean single-user power gain of each configured precoder versus array size.
pub fn run_gain_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.users != 1 {
        return Err(Error::Config("gain sweep requires exactly one user".into()));
    }
    let counts = cfg
        .gain_sweep
        .as_ref()
        .map(|g| g.antenna_counts.clone())
        .unwrap_or_else(|| vec![cfg.array.antennas]);
    let sector = cfg.effective_sectors()[0];
    let arrays: Vec<SizedArray> = counts
        .iter()
        .map(|&m| {
            let a = array_of(cfg, m)?;
            let z = impedance_matrix(&a);
            let zr = regularized(cfg, &z)?;
            Ok((a, z, zr))
        })
        .collect::<Result<_>>()?;
    let kinds = &cfg.precoders;

    let (values, redraws) = run_trials(cfg, |rng| {
        let paths = draw_sector_paths(cfg, sector, rng)?;
        let mut out = Vec::with_capacity(arrays.len() * kinds.len());
        for (a, z, zr) in &arrays {
            let h = normalize_channel(cfg, paths.channel(a));
            let hm = CMatrix::from_columns(std::slice::from_ref(&h));
            let mats = ArrayMatrices { z, z_r: zr.as_ref() };
            let target = zr.as_ref().unwrap_or(z);
            for &k in kinds {
                let p = build_precoder(k, &hm, mats)?;
                out.push(power_gain(&p.weights[0], &h, target)?);
            }
        }
        Ok(out)
    })?;

    let mut rows = Vec::new();
    for (i, &m) in counts.iter().enumerate() {
        for (j, k) in kinds.iter().enumerate() {
            rows.push(row(m as f64, k.label(), METRIC_GAIN, &column(&values, i * kinds.len() + j)));
        }
    }
    Ok(ResultTable::new(meta("gain", cfg, redraws), rows))
}

fn draw_multiuser<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    sectors: &[[f64; 2]],
    rng: &mut R,
) -> Result<Vec<PathRealization<f64>>> {
    sectors.iter().map(|&s| draw_sector_paths(cfg, s, rng)).collect()
}

/// Mean sum spectral efficiency of each configured precoder versus SNR.
pub fn run_se_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let array = array_of(cfg, cfg.array.antennas)?;
    let z = impedance_matrix(&array);
    let zr = regularized(cfg, &z)?;
    let mats = ArrayMatrices { z: &z, z_r: zr.as_ref() };
    let sectors = cfg.effective_sectors();
    let noises: Vec<f64> = cfg
        .snr_db
        .iter()
        .map(|&s| downlink_snr_to_noise(s, cfg.users))
        .collect::<Result<_>>()?;
    let kinds = &cfg.precoders;

    let (values, redraws) = run_trials(cfg, |rng| {
        let paths = draw_multiuser(cfg, &sectors, rng)?;
        let cols: Vec<_> = paths.iter().map(|p| normalize_channel(cfg, p.channel(&array))).collect();
        let h = CMatrix::from_columns(&cols);
        let precoders = kinds
            .iter()
            .map(|&k| build_precoder(k, &h, mats))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(kinds.len() * noises.len());
        for p in &precoders {
            for &noise in &noises {
                out.push(spectral_efficiency(&h, &p.weights, noise, cfg.interference)?);
            }
        }
        Ok(out)
    })?;

    let mut rows = Vec::new();
    for (j, k) in kinds.iter().enumerate() {
        for (i, &snr) in cfg.snr_db.iter().enumerate() {
            rows.push(row(snr, k.label(), METRIC_SE, &column(&values, j * noises.len() + i)));
        }
    }
    Ok(ResultTable::new(meta("se", cfg, redraws), rows))
}

fn wideband_se(plan: &WidebandPlan<f64>, noise: f64, scale: &[f64], cfg: &ScenarioConfig) -> Result<f64> {
    let mut total = 0.0;
    for (i, (h, p)) in plan.channels.iter().zip(&plan.precoders).enumerate() {
        let s = scale.get(i).copied().unwrap_or(1.0);
        total += spectral_efficiency(h, &p.weights, noise * s, cfg.interference)?;
    }
    Ok(total)
}

/// Summed per-subcarrier spectral efficiency of per-subcarrier INSP weights
/// (`wideband`) and of carrier weights reused on every subcarrier (`narrowband`).
/// With loss settings present both use the loss-aware design.
pub fn run_wideband_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let wb = cfg
        .wideband
        .as_ref()
        .ok_or_else(|| Error::Config("wideband sweep requires a `wideband` section".into()))?;
    let array = array_of(cfg, cfg.array.antennas)?;
    let fc = cfg.array.carrier_hz;
    let grid = SubcarrierGrid::new(fc, wb.frequencies_hz.clone())?;
    let mode = match &cfg.loss {
        Some(l) => WidebandMode::Rinsp {
            dipole: dipole_of(l, fc),
            r_rad: l.r_rad,
        },
        None => WidebandMode::Insp,
    };
    let m = array.num_antennas();
    let kds: Vec<f64> = grid.frequencies().iter().map(|&f| kd_at_freq(&array, f)).collect::<Result<_>>()?;
    let kd_c = kd_at_freq(&array, fc)?;
    let nearest = grid
        .frequencies()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - fc).abs().total_cmp(&(b.1 - fc).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let sectors = cfg.effective_sectors();
    let noises: Vec<f64> = cfg
        .snr_db
        .iter()
        .map(|&s| downlink_snr_to_noise(s, cfg.users))
        .collect::<Result<_>>()?;

    let (values, redraws) = run_trials(cfg, |rng| {
        let base = draw_multiuser(cfg, &sectors, rng)?;
        let at = |paths: &[PathRealization<f64>], kd: f64| {
            CMatrix::from_columns(&paths.iter().map(|p| p.channel_with_kd(m, kd)).collect::<Vec<_>>())
        };
        let (channels, carrier) = match wb.correlation {
            FrequencyCorrelation::Shared => (kds.iter().map(|&kd| at(&base, kd)).collect::<Vec<_>>(), at(&base, kd_c)),
            FrequencyCorrelation::Independent => {
                let mut chans = Vec::with_capacity(kds.len());
                for (i, &kd) in kds.iter().enumerate() {
                    if i == 0 {
                        chans.push(at(&base, kd));
                    } else {
                        chans.push(at(&draw_multiuser(cfg, &sectors, rng)?, kd));
                    }
                }
                let carrier = chans[nearest].clone();
                (chans, carrier)
            }
        };
        let wide = wideband_precode(&array, &grid, &channels, &mode)?;
        let narrow = narrowband_plan(&array, &grid, &channels, &carrier, &mode)?;
        let mut out = Vec::with_capacity(2 * noises.len());
        for &noise in &noises {
            out.push(wideband_se(&wide, noise, &wb.noise_scale, cfg)?);
            out.push(wideband_se(&narrow, noise, &wb.noise_scale, cfg)?);
        }
        Ok(out)
    })?;

    let mut rows = Vec::new();
    for (i, &snr) in cfg.snr_db.iter().enumerate() {
        rows.push(row(snr, "wideband", METRIC_SE, &column(&values, 2 * i)));
        rows.push(row(snr, "narrowband", METRIC_SE, &column(&values, 2 * i + 1)));
    }
    Ok(ResultTable::new(meta("wideband", cfg, redraws), rows))
}

/// Horizontal-plane directivity of the target user's weights for each
/// configured precoder, with one line-of-sight path per user.
pub fn render_pattern(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let pat = cfg
        .pattern
        .as_ref()
        .ok_or_else(|| Error::Config("pattern rendering requires a `pattern` section".into()))?;
    let array = array_of(cfg, cfg.array.antennas)?;
    let z = impedance_matrix(&array);
    let zr = regularized(cfg, &z)?;
    let mats = ArrayMatrices { z: &z, z_r: zr.as_ref() };
    let cols: Vec<_> = pat
        .azimuths_deg
        .iter()
        .map(|a| planar_steering(&array, a.to_radians()).entries)
        .collect();
    let h = CMatrix::from_columns(&cols);
    let n = pat.grid_points;
    let grid_deg: Vec<f64> = (0..n).map(|i| 180.0 * i as f64 / (n - 1) as f64).collect();
    let grid: Vec<f64> = grid_deg.iter().map(|d| d.to_radians()).collect();
    let mut rows = Vec::new();
    for &k in &cfg.precoders {
        let p = build_precoder(k, &h, mats)?;
        let pattern = directivity_pattern(&p.weights[pat.target_user], &z, &array, &grid)?;
        for (deg, (_, d)) in grid_deg.iter().zip(pattern) {
            rows.push(ResultRow {
                sweep: *deg,
                label: k.label().to_string(),
                metric: METRIC_DIRECTIVITY.to_string(),
                mean: d,
                stderr: 0.0,
                trials: 1,
            });
        }
    }
    Ok(ResultTable::new(meta("pattern", cfg, 0), rows))
}

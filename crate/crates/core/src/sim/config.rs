//! Scenario configuration shared by all sweeps.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::PathNormalization;
use crate::error::{Error, Result};
use crate::estimation::PilotKind;
use crate::precoding::PrecoderKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySettings {
    pub antennas: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
}

/// Dipole element used to derive the ohmic loss resistance at the carrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSettings {
    #[serde(default = "default_dipole_length")]
    pub length_m: f64,
    #[serde(default = "default_dipole_radius")]
    pub radius_m: f64,
    #[serde(default = "default_conductivity")]
    pub conductivity: f64,
    #[serde(default = "default_permeability")]
    pub permeability: f64,
    #[serde(default = "default_r_rad")]
    pub r_rad: f64,
}

impl Default for LossSettings {
    fn default() -> Self {
        Self {
            length_m: default_dipole_length(),
            radius_m: default_dipole_radius(),
            conductivity: default_conductivity(),
            permeability: default_permeability(),
            r_rad: default_r_rad(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSource {
    #[default]
    Identity,
    File { path: PathBuf },
    Synthetic { strength: f64, seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// `sum_{j != u} |h_u^T a_j|^2`.
    #[default]
    Physical,
    /// `sum_{j != u} |h_j^T a_j|^2`: the printed form of the metric, kept for replication.
    Literal,
}

/// Optional per-realization rescaling of each user's channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelNormalization {
    #[default]
    None,
    /// `|h|^2 = M` for every draw.
    UnitPower,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyCorrelation {
    /// Same path angles and gains on every subcarrier.
    #[default]
    Shared,
    /// Fresh paths per subcarrier.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidebandSettings {
    pub frequencies_hz: Vec<f64>,
    #[serde(default)]
    pub correlation: FrequencyCorrelation,
    /// Per-subcarrier multiplier on the noise variance; empty means all ones.
    #[serde(default)]
    pub noise_scale: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSettings {
    /// Pilot length; defaults to the number of users.
    #[serde(default)]
    pub pilot_length: Option<usize>,
    #[serde(default = "default_pilot_kind")]
    pub pilot_kind: PilotKind,
    /// Range of path azimuths in degrees.
    #[serde(default = "default_full_range")]
    pub angle_range_deg: [f64; 2],
}

impl Default for EstimationSettings {
    fn default() -> Self {
        Self {
            pilot_length: None,
            pilot_kind: default_pilot_kind(),
            angle_range_deg: default_full_range(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSweepSettings {
    pub antenna_counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSettings {
    /// One line-of-sight azimuth per user, degrees.
    pub azimuths_deg: Vec<f64>,
    #[serde(default)]
    pub target_user: usize,
    #[serde(default = "default_pattern_points")]
    pub grid_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub array: ArraySettings,
    pub users: usize,
    /// Azimuth sector `[lo, hi]` in degrees per user; empty selects the
    /// default endfire layout.
    #[serde(default)]
    pub sectors: Vec<[f64; 2]>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_gain_variance")]
    pub gain_variance: f64,
    #[serde(default)]
    pub path_normalization: PathNormalization,
    #[serde(default)]
    pub channel_normalization: ChannelNormalization,
    #[serde(default = "default_precoders")]
    pub precoders: Vec<PrecoderKind>,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub loss: Option<LossSettings>,
    #[serde(default)]
    pub coupling: CouplingSource,
    #[serde(default)]
    pub interference: InterferenceMode,
    #[serde(default)]
    pub wideband: Option<WidebandSettings>,
    #[serde(default)]
    pub estimation: EstimationSettings,
    #[serde(default)]
    pub gain_sweep: Option<GainSweepSettings>,
    #[serde(default)]
    pub pattern: Option<PatternSettings>,
}

fn default_carrier() -> f64 {
    1.6e9
}
fn default_dipole_length() -> f64 {
    0.085
}
fn default_dipole_radius() -> f64 {
    0.75e-3
}
fn default_conductivity() -> f64 {
    5.8e7
}
fn default_permeability() -> f64 {
    4.0e-7 * std::f64::consts::PI
}
fn default_r_rad() -> f64 {
    crate::em_array::DIPOLE_RADIATION_RESISTANCE
}
fn default_paths() -> usize {
    4
}
fn default_gain_variance() -> f64 {
    1.0
}
fn default_precoders() -> Vec<PrecoderKind> {
    vec![PrecoderKind::Mrt, PrecoderKind::Zf, PrecoderKind::Sp, PrecoderKind::Insp]
}
fn default_snr() -> Vec<f64> {
    vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
}
fn default_trials() -> usize {
    1000
}
fn default_pilot_kind() -> PilotKind {
    PilotKind::Orthogonal
}
fn default_full_range() -> [f64; 2] {
    [0.0, 180.0]
}
fn default_pattern_points() -> usize {
    721
}

/// Sectors `[10(i-1), 10i]` for the first half of the users and
/// `[140 + 10(i-1), 140 + 10i]` for the rest (degrees).
pub fn endfire_sectors(users: usize) -> Vec<[f64; 2]> {
    let first = users.div_ceil(2);
    (0..users)
        .map(|u| {
            if u < first {
                [10.0 * u as f64, 10.0 * (u + 1) as f64]
            } else {
                let i = (u - first) as f64;
                [140.0 + 10.0 * i, 150.0 + 10.0 * i]
            }
        })
        .collect()
}

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: &[&str] = &[
    "estimation",
    "gain",
    "pattern",
    "se",
    "aperture",
    "aperture_baseline",
    "loss",
    "wideband",
];

impl ScenarioConfig {
    fn base(antennas: usize, spacing: f64, users: usize) -> Self {
        Self {
            name: String::new(),
            array: ArraySettings {
                antennas,
                spacing,
                carrier_hz: default_carrier(),
            },
            users,
            sectors: Vec::new(),
            paths: default_paths(),
            gain_variance: default_gain_variance(),
            path_normalization: PathNormalization::default(),
            channel_normalization: ChannelNormalization::None,
            precoders: default_precoders(),
            snr_db: default_snr(),
            trials: default_trials(),
            seed: 1,
            loss: None,
            coupling: CouplingSource::Identity,
            interference: InterferenceMode::Physical,
            wideband: None,
            estimation: EstimationSettings::default(),
            gain_sweep: None,
            pattern: None,
        }
    }

    /// Built-in scenarios mirroring the reference experiments.
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = match name {
            "estimation" => {
                let mut c = Self::base(8, 0.2, 5);
                c.coupling = CouplingSource::Synthetic { strength: 0.3, seed: 7 };
                c.snr_db = vec![0.0, 5.0, 10.0, 15.0, 20.0];
                c.trials = 2000;
                c.precoders = Vec::new();
                c
            }
            "gain" => {
                let mut c = Self::base(20, 0.25, 1);
                c.sectors = vec![[0.0, 20.0]];
                c.channel_normalization = ChannelNormalization::UnitPower;
                c.precoders = vec![PrecoderKind::Mrt, PrecoderKind::Sp];
                c.gain_sweep = Some(GainSweepSettings {
                    antenna_counts: vec![4, 8, 12, 16, 20],
                });
                c
            }
            "pattern" => {
                let mut c = Self::base(20, 0.25, 6);
                c.precoders = vec![PrecoderKind::Zf, PrecoderKind::Insp];
                c.pattern = Some(PatternSettings {
                    azimuths_deg: vec![3.0, 18.0, 30.0, 79.0, 156.0, 119.0],
                    target_user: 0,
                    grid_points: default_pattern_points(),
                });
                c.trials = 1;
                c
            }
            "se" => Self::base(20, 0.25, 8),
            "aperture" => {
                let mut c = Self::base(18, 0.25, 8);
                c.precoders = vec![PrecoderKind::Insp];
                c
            }
            "aperture_baseline" => {
                let mut c = Self::base(18, 0.5, 8);
                c.precoders = vec![PrecoderKind::Zf, PrecoderKind::Mrt];
                c
            }
            "loss" => {
                let mut c = Self::base(20, 0.25, 8);
                c.loss = Some(LossSettings::default());
                c.precoders = vec![PrecoderKind::Mrt, PrecoderKind::Zf, PrecoderKind::Insp, PrecoderKind::Rinsp];
                c
            }
            "wideband" => {
                let mut c = Self::base(20, 0.25, 8);
                c.array.carrier_hz = 10e9;
                c.precoders = vec![PrecoderKind::Insp];
                c.wideband = Some(WidebandSettings {
                    frequencies_hz: vec![9.4e9, 9.7e9, 10e9, 10.3e9, 10.6e9],
                    correlation: FrequencyCorrelation::Shared,
                    noise_scale: Vec::new(),
                });
                c.trials = 500;
                c
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset `{other}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        c.name = name.to_string();
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Sectors in effect, falling back to the endfire layout.
    pub fn effective_sectors(&self) -> Vec<[f64; 2]> {
        if self.sectors.is_empty() {
            endfire_sectors(self.users)
        } else {
            self.sectors.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.users == 0 {
            return bad("users must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.array.antennas == 0 {
            return bad("array.antennas must be at least 1".into());
        }
        if !(self.array.spacing > 0.0) || !self.array.spacing.is_finite() {
            return bad("array.spacing must be positive".into());
        }
        if !(self.array.carrier_hz > 0.0) {
            return bad("array.carrier_hz must be positive".into());
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if !(self.gain_variance > 0.0) {
            return bad("gain_variance must be positive".into());
        }
        if !self.sectors.is_empty() && self.sectors.len() != self.users {
            return bad(format!(
                "{} sectors given for {} users",
                self.sectors.len(),
                self.users
            ));
        }
        for s in &self.sectors {
            if !(0.0..=180.0).contains(&s[0]) || !(0.0..=180.0).contains(&s[1]) || s[0] > s[1] {
                return bad(format!("sector {s:?} must satisfy 0 <= lo <= hi <= 180"));
            }
        }
        let r = self.estimation.angle_range_deg;
        if !(0.0..=180.0).contains(&r[0]) || !(0.0..=180.0).contains(&r[1]) || r[0] > r[1] {
            return bad(format!("estimation.angle_range_deg {r:?} must lie within [0, 180]"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db entries must be finite".into());
        }
        if let Some(l) = &self.loss {
            if !(l.r_rad > 0.0) || !(l.length_m > 0.0) || !(l.radius_m > 0.0) || !(l.conductivity > 0.0) || !(l.permeability > 0.0) {
                return bad("loss parameters must be positive".into());
            }
        }
        if let CouplingSource::Synthetic { strength, .. } = self.coupling {
            if !(strength >= 0.0) {
                return bad("coupling strength must be non-negative".into());
            }
        }
        if let Some(w) = &self.wideband {
            if w.frequencies_hz.is_empty() {
                return bad("wideband.frequencies_hz is empty".into());
            }
            if !w.noise_scale.is_empty() && w.noise_scale.len() != w.frequencies_hz.len() {
                return bad("wideband.noise_scale must match the subcarrier count".into());
            }
            if w.noise_scale.iter().any(|s| !(*s > 0.0)) {
                return bad("wideband.noise_scale entries must be positive".into());
            }
        }
        if let Some(g) = &self.gain_sweep {
            if g.antenna_counts.is_empty() || g.antenna_counts.contains(&0) {
                return bad("gain_sweep.antenna_counts must be non-empty and positive".into());
            }
        }
        if let Some(p) = &self.pattern {
            if p.azimuths_deg.len() != self.users {
                return bad("pattern.azimuths_deg needs one angle per user".into());
            }
            if p.target_user >= self.users {
                return bad("pattern.target_user out of range".into());
            }
            if p.grid_points < 2 {
                return bad("pattern.grid_points must be at least 2".into());
            }
            if p.azimuths_deg.iter().any(|a| !(0.0..=180.0).contains(a)) {
                return bad("pattern azimuths must lie within [0, 180]".into());
            }
        }
        if let Some(n) = self.estimation.pilot_length {
            if n == 0 {
                return bad("estimation.pilot_length must be positive".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endfire_layout() {
        let s = endfire_sectors(8);
        assert_eq!(s[0], [0.0, 10.0]);
        assert_eq!(s[3], [30.0, 40.0]);
        assert_eq!(s[4], [140.0, 150.0]);
        assert_eq!(s[7], [170.0, 180.0]);
        assert_eq!(endfire_sectors(1), vec![[0.0, 10.0]]);
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let c = ScenarioConfig::preset(name).unwrap();
            c.validate().unwrap();
            let back = ScenarioConfig::from_json(&c.to_json_pretty()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
        assert!(ScenarioConfig::preset("nope").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"array": {"antennas": 4, "spacing": 0.25}, "users": 1, "bogus": 3}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::Config(_))));
        let nested = r#"{"array": {"antennas": 4, "spacing": 0.25, "extra": 1}, "users": 1}"#;
        assert!(ScenarioConfig::from_json(nested).is_err());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let text = r#"{"array": {"antennas": 4, "spacing": 0.25}, "users": 2,
                       "coupling": {"kind": "synthetic", "strength": 0.3, "seed": 7}}"#;
        let c = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(c.paths, 4);
        assert_eq!(c.trials, 1000);
        assert_eq!(c.effective_sectors().len(), 2);
        assert_eq!(c.coupling, CouplingSource::Synthetic { strength: 0.3, seed: 7 });
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ScenarioConfig::preset("se").unwrap();
        c.sectors = vec![[170.0, 190.0]; 8];
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::preset("se").unwrap();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::preset("se").unwrap();
        c.users = 0;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::preset("se").unwrap();
        c.sectors = vec![[0.0, 10.0]];
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::preset("se").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}

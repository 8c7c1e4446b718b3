//! Experiment harness: scenario configuration, seeded sweeps, result tables
//! and plots.

pub mod config;
pub mod metrics;
pub mod plot;
pub mod sweeps;
pub mod table;

pub use config::{
    endfire_sectors, ArraySettings, ChannelNormalization, CouplingSource, EstimationSettings, FrequencyCorrelation,
    GainSweepSettings, InterferenceMode, LossSettings, PatternSettings, ScenarioConfig, WidebandSettings, PRESETS,
};
pub use metrics::{downlink_snr_to_noise, spectral_efficiency, summarize, Summary};
pub use plot::{render_svg, write_svg};
pub use sweeps::{
    render_pattern, run_estimation_sweep, run_gain_sweep, run_se_sweep, run_wideband_sweep, trial_rng,
    METRIC_DIRECTIVITY, METRIC_GAIN, METRIC_NMSE, METRIC_SE,
};
pub use table::{ResultMeta, ResultRow, ResultTable, CSV_HEADER};

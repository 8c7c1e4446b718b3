use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use superdirective::sim::{
    render_pattern, run_estimation_sweep, run_gain_sweep, run_se_sweep, run_wideband_sweep, write_svg, ResultTable,
    ScenarioConfig,
};
use superdirective::Error;

#[derive(Parser)]
#[command(name = "superdirective", version, about = "Superdirective array precoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Directivity pattern of the target user's weights.
    Pattern(Common),
    /// Channel estimation error versus pilot SNR.
    EstimateSweep(Common),
    /// Single-user power gain versus array size.
    GainSweep(Common),
    /// Sum spectral efficiency versus SNR.
    SeSweep(Common),
    /// Wideband versus carrier-only precoding across subcarriers.
    WidebandSweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON). Defaults to the subcommand's built-in scenario.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name (estimation, gain, pattern, se, aperture,
    /// aperture_baseline, loss, wideband).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    plot: bool,
    /// Print the effective scenario as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

struct Sweep {
    kind: &'static str,
    default_preset: &'static str,
    run: fn(&ScenarioConfig) -> superdirective::Result<ResultTable>,
    x_label: &'static str,
    y_label: &'static str,
}

impl Command {
    fn split(&self) -> (&Common, Sweep) {
        match self {
            Command::Pattern(c) => (
                c,
                Sweep {
                    kind: "pattern",
                    default_preset: "pattern",
                    run: render_pattern,
                    x_label: "azimuth (deg)",
                    y_label: "directivity",
                },
            ),
            Command::EstimateSweep(c) => (
                c,
                Sweep {
                    kind: "estimation",
                    default_preset: "estimation",
                    run: run_estimation_sweep,
                    x_label: "pilot SNR (dB)",
                    y_label: "normalized error (dB)",
                },
            ),
            Command::GainSweep(c) => (
                c,
                Sweep {
                    kind: "gain",
                    default_preset: "gain",
                    run: run_gain_sweep,
                    x_label: "antennas",
                    y_label: "power gain",
                },
            ),
            Command::SeSweep(c) => (
                c,
                Sweep {
                    kind: "se",
                    default_preset: "se",
                    run: run_se_sweep,
                    x_label: "SNR (dB)",
                    y_label: "spectral efficiency (bit/s/Hz)",
                },
            ),
            Command::WidebandSweep(c) => (
                c,
                Sweep {
                    kind: "wideband",
                    default_preset: "wideband",
                    run: run_wideband_sweep,
                    x_label: "SNR (dB)",
                    y_label: "summed spectral efficiency (bit/s/Hz)",
                },
            ),
        }
    }
}

fn scenario(args: &Common, sweep: &Sweep) -> superdirective::Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => ScenarioConfig::preset(name)?,
        (None, None) => ScenarioConfig::preset(sweep.default_preset)?,
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> superdirective::Result<()> {
    let (args, sweep) = cli.command.split();
    let cfg = scenario(args, &sweep)?;
    if args.print_config {
        println!("{}", cfg.to_json_pretty());
        return Ok(());
    }
    info!("running {} sweep, {} trials, seed {}", sweep.kind, cfg.trials, cfg.seed);
    let table = (sweep.run)(&cfg)?;
    if table.meta.redraws > 0 {
        info!("{} degenerate draws were redrawn", table.meta.redraws);
    }
    let stem = if cfg.name.is_empty() { sweep.kind.to_string() } else { cfg.name.clone() };
    let csv = table.write(&args.out, &stem)?;
    println!("{}", csv.display());
    if args.plot {
        let svg = args.out.join(format!("{stem}.svg"));
        write_svg(&table, &svg, &stem, sweep.x_label, sweep.y_label)?;
        println!("{}", svg.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

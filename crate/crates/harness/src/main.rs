use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use skitter_core::blob::{BlobConfig, BlobDetector};
use skitter_core::imu::{TrackMode, GAIN_SEED};
use skitter_core::ir;
use skitter_core::mission::{run_mission, NavVariant};
use skitter_core::rng::rng_from_seed;
use skitter_core::scenario::Scenario;
use skitter_core::{CameraModel, Pose};

use skitter_harness::explore_study::{run_exploration_study, ExploreSpec};
use skitter_harness::imu_bench::{run_dead_reckon_bench, run_imu_replay, DeadReckonSpec};
use skitter_harness::report::{self, MissionArtifact};
use skitter_harness::thermal_study::{run_thermal_nav_study, ThermalSpec};

#[derive(Parser)]
#[command(
    name = "skitter",
    version,
    about = "Batch experiment runner for the skitter search simulator"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config for the selected subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial count override.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory (defaults to out/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the five exploration strategies over 24 simulated hours.
    Explore,
    /// Evaluate thermal-source approach navigation over seeded trials.
    ThermalNav {
        /// Navigation variant; overrides the config when given.
        #[arg(long, value_enum)]
        nav: Option<NavArg>,
    },
    /// Benchmark calibrated dead reckoning on synthetic walks.
    ImuBench,
    /// Replay a recorded IMU CSV into a dead-reckoned track.
    ImuReplay {
        /// IMU samples CSV: t,ax,ay,az,qw,qx,qy,qz.
        #[arg(long)]
        input: PathBuf,
        /// Optional reference track CSV: t,x,y,z.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Speed gain applied to the acceleration variance.
        #[arg(long, default_value_t = GAIN_SEED)]
        gain: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Planar)]
        mode: ModeArg,
    },
    /// Run one full mission from a scenario file (requires --config).
    Mission,
    /// Render one IR camera frame from a pose in a scenario world.
    RenderIr {
        /// Simulation time of the frame, seconds.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        /// Camera x; defaults to the scenario's start position.
        #[arg(long)]
        x: Option<f64>,
        /// Camera y; defaults to the scenario's start position.
        #[arg(long)]
        y: Option<f64>,
        /// Camera heading, degrees.
        #[arg(long, default_value_t = 90.0)]
        yaw: f64,
    },
    /// Detect the dominant blob in a frame CSV; prints JSON to stdout.
    BlobDetect {
        /// 32x32 frame CSV as written by render-ir.
        #[arg(long)]
        input: PathBuf,
    },
    /// Re-render the plots for a stored summary JSON.
    Plot {
        #[arg(long)]
        summary: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NavArg {
    Tracking,
    Onboard,
}

impl From<NavArg> for NavVariant {
    fn from(v: NavArg) -> Self {
        match v {
            NavArg::Tracking => NavVariant::Tracking,
            NavArg::Onboard => NavVariant::Onboard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Planar,
    Spatial,
}

impl From<ModeArg> for TrackMode {
    fn from(v: ModeArg) -> Self {
        match v {
            ModeArg::Planar => TrackMode::Planar,
            ModeArg::Spatial => TrackMode::Spatial,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": format!("{e:#}") })
            );
            ExitCode::FAILURE
        }
    }
}

fn load_spec<T: DeserializeOwned + Default>(config: Option<&Path>) -> Result<T> {
    match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
        }
        None => Ok(T::default()),
    }
}

fn out_dir(global: &GlobalArgs, default: &str) -> PathBuf {
    global
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(default))
}

fn print_written(written: &[PathBuf]) {
    for path in written {
        println!("wrote {}", path.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Explore => {
            let mut spec: ExploreSpec = load_spec(cli.global.config.as_deref())?;
            if let Some(seed) = cli.global.seed {
                spec.base_seed = seed;
            }
            if let Some(trials) = cli.global.trials {
                spec.trials = trials;
            }
            let summary = run_exploration_study(&spec)?;
            for s in &summary.strategies {
                println!(
                    "{:<12} coverage {:6.2}%  found {}/{}  mean search {}",
                    s.label,
                    s.mean_final_coverage_pct,
                    s.search.found,
                    s.search.trials,
                    s.search
                        .mean_time_s
                        .map_or("n/a".to_string(), |t| format!("{:.1} min", t / 60.0)),
                );
            }
            if let Some(m) = summary.levy_mean_search_min {
                println!(
                    "levy mean search {:.1} min (reference {:.0} min)",
                    m, summary.levy_reference_search_min
                );
            }
            print_written(&report::write_explore_study(
                &out_dir(&cli.global, "explore"),
                &summary,
            )?);
        }
        Command::ThermalNav { nav } => {
            let mut spec: ThermalSpec = load_spec(cli.global.config.as_deref())?;
            if let Some(nav) = nav {
                spec.nav_variant = nav.into();
            }
            if let Some(seed) = cli.global.seed {
                spec.base_seed = seed;
            }
            if let Some(trials) = cli.global.trials {
                spec.trials = trials;
            }
            let summary = run_thermal_nav_study(&spec)?;
            println!(
                "success {}/{} ({:.1}%)  mean nav time {}  mean speed {}",
                summary.n_success,
                summary.trials.len(),
                100.0 * summary.success_rate,
                summary
                    .mean_nav_time_s
                    .map_or("n/a".to_string(), |t| format!("{t:.1} s")),
                summary
                    .mean_speed_mps
                    .map_or("n/a".to_string(), |v| format!("{:.1} cm/s", 100.0 * v)),
            );
            print_written(&report::write_thermal_study(
                &out_dir(&cli.global, "thermal_nav"),
                &summary,
            )?);
        }
        Command::ImuBench => {
            let mut spec: DeadReckonSpec = load_spec(cli.global.config.as_deref())?;
            if let Some(seed) = cli.global.seed {
                spec.base_seed = seed;
            }
            if let Some(trials) = cli.global.trials {
                spec.trials = trials;
            }
            let summary = run_dead_reckon_bench(&spec)?;
            for (name, stats) in [("planar", &summary.planar), ("spatial", &summary.spatial)] {
                println!(
                    "{name:<8} mean error {:.2} m ({:.2}%)  worst {:.2} m ({:.2}%)",
                    stats.mean_final_error_m,
                    stats.mean_final_error_pct,
                    stats.max_final_error_m,
                    stats.max_final_error_pct,
                );
            }
            print_written(&report::write_imu_bench(
                &out_dir(&cli.global, "imu_bench"),
                &summary,
            )?);
        }
        Command::ImuReplay {
            input,
            reference,
            gain,
            mode,
        } => {
            let dir = out_dir(&cli.global, "replay");
            let report = run_imu_replay(&input, reference.as_deref(), gain, mode.into(), &dir)?;
            println!(
                "replayed {} samples, traveled {:.2} m, final error {}",
                report.sample_count,
                report.traveled_m,
                match (report.final_error_m, report.final_error_pct) {
                    (Some(m), Some(pct)) => format!("{m:.2} m ({pct:.1}%)"),
                    _ => "n/a (no reference)".to_string(),
                },
            );
            println!("wrote {}", dir.join("positions.csv").display());
            print_written(&report::write_replay(&dir, &report)?);
        }
        Command::Mission => {
            let path = cli
                .global
                .config
                .as_deref()
                .context("mission requires --config <scenario.toml>")?;
            let scenario = Scenario::load(path)?;
            let seed = cli.global.seed.unwrap_or(1);
            let mission_report = run_mission(&scenario.mission, &scenario.world, seed)?;
            println!(
                "outcome {:?} at t={:.1} s ({} phase events, {} arrivals)",
                mission_report.outcome,
                mission_report.end_t_s,
                mission_report.events.len(),
                mission_report.arrivals.len(),
            );
            let artifact =
                MissionArtifact::new(seed, scenario.mission, scenario.world, mission_report);
            print_written(&report::write_mission(
                &out_dir(&cli.global, "mission"),
                &artifact,
            )?);
        }
        Command::RenderIr { time, x, y, yaw } => {
            let path = cli
                .global
                .config
                .as_deref()
                .context("render-ir requires --config <scenario.toml>")?;
            let scenario = Scenario::load(path)?;
            let pose = Pose::new(
                x.unwrap_or(scenario.mission.start_x_m),
                y.unwrap_or(scenario.mission.start_y_m),
                yaw,
            );
            let mut rng = rng_from_seed(cli.global.seed.unwrap_or(1));
            let cam: CameraModel = scenario.mission.camera;
            let frame = ir::render_ir(&scenario.world, &pose, &cam, time, &mut rng);
            let dir = out_dir(&cli.global, "render");
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            let csv_path = dir.join("frame.csv");
            let pgm_path = dir.join("frame.pgm");
            ir::write_csv_path(&frame, &csv_path)?;
            ir::write_pgm_path(&frame, &pgm_path)?;
            let (lo, hi) = frame.min_max();
            println!("rendered frame at t={time:.1} s, range {lo:.2}..{hi:.2} C");
            println!("wrote {}", csv_path.display());
            println!("wrote {}", pgm_path.display());
        }
        Command::BlobDetect { input } => {
            let frame: skitter_core::IrImage = ir::read_csv_path(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let detector = BlobDetector::new(BlobConfig::default());
            let blob = detector.detect(&frame);
            println!("{}", serde_json::json!({ "blob": blob }));
        }
        Command::Plot { summary } => {
            let dir = cli
                .global
                .out
                .clone()
                .or_else(|| summary.parent().map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            print_written(&report::emit_plots(&summary, &dir)?);
        }
    }
    Ok(())
}

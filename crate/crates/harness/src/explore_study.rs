//! Long-horizon exploration study: five walking strategies, seeded trials,
//! hourly coverage checkpoints and first-passage search times against a
//! fixed circular target.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use skitter_core::explore::{next_destination, wall_redirect, Destination};
use skitter_core::locomotion::{
    apply_stimulus, goto_point, step_natural, StimCommand, GOTO_DIST_M, GOTO_THETA_DEG,
};
use skitter_core::rng::rng_from_seed;
use skitter_core::{Arena, CoverageGrid, MotionParams, Pose, Strategy, WalkState};

use crate::stats;

/// Baseline mean search time for the Levy strategy from earlier published
/// field measurements, minutes; reported next to simulated values.
pub const LEVY_REFERENCE_SEARCH_MIN: f64 = 221.0;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study spec: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Natural,
    FixedLength,
    LevyWalk,
    UniformDistribution,
    BrownianWalk,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Natural,
        StrategyKind::FixedLength,
        StrategyKind::LevyWalk,
        StrategyKind::UniformDistribution,
        StrategyKind::BrownianWalk,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Natural => "natural",
            StrategyKind::FixedLength => "fixed_length",
            StrategyKind::LevyWalk => "levy",
            StrategyKind::UniformDistribution => "uniform",
            StrategyKind::BrownianWalk => "brownian",
        }
    }

    /// Destination law; `None` walks naturally without stimulation.
    pub fn strategy(self) -> Option<Strategy> {
        match self {
            StrategyKind::Natural => None,
            StrategyKind::FixedLength => Some(Strategy::fixed_length()),
            StrategyKind::LevyWalk => Some(Strategy::levy_walk()),
            StrategyKind::UniformDistribution => Some(Strategy::uniform()),
            StrategyKind::BrownianWalk => Some(Strategy::brownian()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreSpec {
    pub arena_width_m: f64,
    pub arena_height_m: f64,
    pub start_x_m: f64,
    pub start_y_m: f64,
    pub duration_s: f64,
    pub dt_s: f64,
    /// Coverage checkpoint spacing, seconds.
    pub checkpoint_s: f64,
    /// Half-width of the square body footprint marked into the grid.
    pub footprint_radius_m: f64,
    pub coverage_cell_m: f64,
    pub target_x_m: f64,
    pub target_y_m: f64,
    pub target_radius_m: f64,
    /// Trajectory decimation period for plots, seconds.
    pub path_sample_s: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub motion: MotionParams,
}

impl Default for ExploreSpec {
    fn default() -> Self {
        ExploreSpec {
            arena_width_m: 20.0,
            arena_height_m: 20.0,
            start_x_m: 0.5,
            start_y_m: 0.5,
            duration_s: 86_400.0,
            dt_s: 0.1,
            checkpoint_s: 3_600.0,
            footprint_radius_m: 0.03,
            coverage_cell_m: CoverageGrid::DEFAULT_CELL_SIZE_M,
            target_x_m: 14.0,
            target_y_m: 5.5,
            target_radius_m: 0.5,
            path_sample_s: 60.0,
            trials: 20,
            base_seed: 1,
            motion: MotionParams::default(),
        }
    }
}

impl ExploreSpec {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.trials == 0 {
            return Err(StudyError::BadSpec("trials must be >= 1".into()));
        }
        if !(self.duration_s > 0.0) || !(self.dt_s > 0.0) || !(self.checkpoint_s > 0.0) {
            return Err(StudyError::BadSpec("timings must be positive".into()));
        }
        let arena = Arena::new(self.arena_width_m, self.arena_height_m)
            .map_err(|e| StudyError::BadSpec(e.to_string()))?;
        if !arena.contains(self.start_x_m, self.start_y_m) {
            return Err(StudyError::BadSpec("start outside the arena".into()));
        }
        if !arena.contains(self.target_x_m, self.target_y_m) {
            return Err(StudyError::BadSpec("target outside the arena".into()));
        }
        if !(self.target_radius_m > 0.0) {
            return Err(StudyError::BadSpec("target radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub t_s: f64,
    pub coverage_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreTrial {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub coverage: Vec<CoveragePoint>,
    pub final_coverage_pct: f64,
    /// First time the body center entered the target circle, if ever.
    pub search_time_s: Option<f64>,
    /// Decimated trajectory for plotting.
    pub path: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub trials: usize,
    pub found: usize,
    pub mean_time_s: Option<f64>,
    pub sd_time_s: Option<f64>,
    pub median_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub label: String,
    pub mean_final_coverage_pct: f64,
    pub sd_final_coverage_pct: Option<f64>,
    /// Pointwise mean of the per-trial coverage curves.
    pub mean_coverage: Vec<CoveragePoint>,
    pub search: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreSummary {
    /// Artifact discriminator for the plot command.
    pub kind: String,
    pub spec: ExploreSpec,
    pub strategies: Vec<StrategySummary>,
    /// Simulated Levy mean search time next to the published baseline.
    pub levy_mean_search_min: Option<f64>,
    pub levy_reference_search_min: f64,
    pub trials: Vec<ExploreTrial>,
}

/// One seeded trial. The target is a passive detector: crossing into its
/// radius records the first-passage time and the walk continues, so the
/// same run yields both the coverage curve and the search time.
pub fn run_explore_trial(spec: &ExploreSpec, kind: StrategyKind, seed: u64) -> ExploreTrial {
    let arena = Arena::new(spec.arena_width_m, spec.arena_height_m).expect("spec validated");
    let mut rng = rng_from_seed(seed);
    let mut pose = Pose::new(spec.start_x_m, spec.start_y_m, rng.gen_range(0.0..360.0));
    let mut walk = WalkState::start(&spec.motion, &mut rng);
    let mut grid = CoverageGrid::new(&arena, spec.coverage_cell_m).expect("spec validated");
    grid.set_footprint_radius(spec.footprint_radius_m);

    let strategy = kind.strategy();
    let mut dest: Option<Destination> = None;
    let mut t = 0.0;
    let mut search_time = None;
    let mut coverage = Vec::new();
    let mut next_cp = spec.checkpoint_s;
    let mut path = vec![[pose.x, pose.y]];
    let mut next_path_t = spec.path_sample_s;

    let pct = |g: &CoverageGrid| 100.0 * g.visited_count() as f64 / g.cell_count() as f64;
    let in_target = |p: &Pose| {
        p.distance_to(spec.target_x_m, spec.target_y_m) <= spec.target_radius_m
    };

    grid.mark_coverage(&pose).expect("start inside arena");
    if in_target(&pose) {
        search_time = Some(0.0);
    }

    while t < spec.duration_s - 1e-9 {
        let step_s = match &strategy {
            None => {
                // Stationary intervals advance the clock in one event step.
                let dt = match walk.stop_remaining_s() {
                    Some(rem) => rem.min(spec.duration_s - t),
                    None => spec.dt_s,
                };
                step_natural(&mut walk, &mut pose, &arena, &spec.motion, &mut rng, dt);
                dt
            }
            Some(s) => {
                if let Some(rd) = wall_redirect(&pose, &arena) {
                    dest = Some(rd);
                }
                let mut cmd = StimCommand::None;
                for _ in 0..64 {
                    let d = *dest
                        .get_or_insert_with(|| next_destination(s, &pose, &arena, &mut rng));
                    cmd = goto_point(&pose, d.x, d.y, GOTO_THETA_DEG, GOTO_DIST_M);
                    if cmd == StimCommand::Arrived {
                        dest = None;
                    } else {
                        break;
                    }
                }
                apply_stimulus(
                    &mut pose,
                    &mut walk,
                    cmd,
                    &arena,
                    &spec.motion,
                    &mut rng,
                    spec.dt_s,
                );
                spec.dt_s
            }
        };
        t += step_s;
        grid.mark_coverage(&pose).expect("pose clamped to arena");
        if search_time.is_none() && in_target(&pose) {
            search_time = Some(t);
        }
        while next_cp <= t + 1e-9 && next_cp <= spec.duration_s + 1e-9 {
            coverage.push(CoveragePoint {
                t_s: next_cp,
                coverage_pct: pct(&grid),
            });
            next_cp += spec.checkpoint_s;
        }
        if t + 1e-9 >= next_path_t {
            path.push([pose.x, pose.y]);
            next_path_t += spec.path_sample_s;
        }
    }

    ExploreTrial {
        strategy: kind,
        seed,
        final_coverage_pct: pct(&grid),
        coverage,
        search_time_s: search_time,
        path,
    }
}

/// Aggregate per-trial records; pure so results can be re-derived from the
/// stored records at any time.
pub fn summarize(spec: &ExploreSpec, trials: &[ExploreTrial]) -> ExploreSummary {
    let strategies = StrategyKind::ALL
        .iter()
        .map(|&kind| {
            let mine: Vec<&ExploreTrial> = trials.iter().filter(|t| t.strategy == kind).collect();
            let finals: Vec<f64> = mine.iter().map(|t| t.final_coverage_pct).collect();
            let n_points = mine.iter().map(|t| t.coverage.len()).min().unwrap_or(0);
            let mean_coverage = (0..n_points)
                .map(|i| CoveragePoint {
                    t_s: mine[0].coverage[i].t_s,
                    coverage_pct: mine.iter().map(|t| t.coverage[i].coverage_pct).sum::<f64>()
                        / mine.len() as f64,
                })
                .collect();
            let times: Vec<f64> = mine.iter().filter_map(|t| t.search_time_s).collect();
            StrategySummary {
                strategy: kind,
                label: kind.label().to_string(),
                mean_final_coverage_pct: stats::mean(&finals).unwrap_or(0.0),
                sd_final_coverage_pct: stats::sample_sd(&finals),
                mean_coverage,
                search: SearchStats {
                    trials: mine.len(),
                    found: times.len(),
                    mean_time_s: stats::mean(&times),
                    sd_time_s: stats::sample_sd(&times),
                    median_time_s: stats::median(&times),
                },
            }
        })
        .collect::<Vec<_>>();
    let levy_mean_search_min = strategies
        .iter()
        .find(|s| s.strategy == StrategyKind::LevyWalk)
        .and_then(|s| s.search.mean_time_s)
        .map(|s| s / 60.0);
    ExploreSummary {
        kind: "exploration".to_string(),
        spec: spec.clone(),
        strategies,
        levy_mean_search_min,
        levy_reference_search_min: LEVY_REFERENCE_SEARCH_MIN,
        trials: trials.to_vec(),
    }
}

/// Run every strategy for `spec.trials` seeds (seed = base_seed + index),
/// in parallel, merging in job order for reproducibility.
pub fn run_exploration_study(spec: &ExploreSpec) -> Result<ExploreSummary, StudyError> {
    spec.validate()?;
    let jobs: Vec<(StrategyKind, u64)> = StrategyKind::ALL
        .iter()
        .flat_map(|&k| (0..spec.trials).map(move |i| (k, spec.base_seed + i as u64)))
        .collect();
    let trials: Vec<ExploreTrial> = jobs
        .par_iter()
        .map(|&(kind, seed)| run_explore_trial(spec, kind, seed))
        .collect();
    let summary = summarize(spec, &trials);
    // Aggregates must be recomputable from the stored per-trial records.
    let stored: Vec<ExploreTrial> =
        serde_json::from_str(&serde_json::to_string(&trials).expect("serializable"))
            .expect("round trip");
    let recomputed = summarize(spec, &stored);
    assert_eq!(
        serde_json::to_string(&summary).expect("serializable"),
        serde_json::to_string(&recomputed).expect("serializable"),
        "summary must be recomputable from per-trial records"
    );
    Ok(summary)
}

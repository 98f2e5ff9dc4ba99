//! Thermal-source navigation study: seeded approach-evaluation missions
//! against a single warm source a fixed distance from the start.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use skitter_core::mission::{
    run_mission, MissionConfig, MissionReport, NavVariant, Outcome,
};
use skitter_core::world::{Arena, SourceKind, ThermalSource, World};

use crate::explore_study::StudyError;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSpec {
    pub arena_width_m: f64,
    pub arena_height_m: f64,
    pub ambient_c: f64,
    pub start_x_m: f64,
    pub start_y_m: f64,
    pub source_x_m: f64,
    pub source_y_m: f64,
    pub source_radius_m: f64,
    pub source_temp_c: f64,
    pub nav_variant: NavVariant,
    /// Whole-trial budget; the approach clock inside it is 180 s.
    pub budget_s: f64,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for ThermalSpec {
    fn default() -> Self {
        ThermalSpec {
            arena_width_m: 4.8,
            arena_height_m: 6.6,
            ambient_c: 25.0,
            start_x_m: 0.0,
            start_y_m: 0.1,
            source_x_m: 2.4,
            source_y_m: 3.3,
            source_radius_m: 0.3,
            source_temp_c: 35.0,
            nav_variant: NavVariant::Tracking,
            budget_s: 600.0,
            trials: 30,
            base_seed: 1,
        }
    }
}

impl ThermalSpec {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.trials == 0 {
            return Err(StudyError::BadSpec("trials must be >= 1".into()));
        }
        let arena = Arena::new(self.arena_width_m, self.arena_height_m)
            .map_err(|e| StudyError::BadSpec(e.to_string()))?;
        for (x, y, what) in [
            (self.start_x_m, self.start_y_m, "start"),
            (self.source_x_m, self.source_y_m, "source"),
        ] {
            if !arena.contains(x, y) {
                return Err(StudyError::BadSpec(format!("{what} outside the arena")));
            }
        }
        Ok(())
    }

    pub fn world(&self) -> World {
        World {
            arena: Arena::new(self.arena_width_m, self.arena_height_m).expect("validated"),
            ambient_c: self.ambient_c,
            sources: vec![ThermalSource {
                kind: SourceKind::Oven,
                x: self.source_x_m,
                y: self.source_y_m,
                radius_m: self.source_radius_m,
                surface_temp_c: self.source_temp_c,
                active_s: None,
            }],
        }
    }

    pub fn mission_config(&self) -> MissionConfig {
        MissionConfig {
            nav_variant: self.nav_variant,
            budget_s: self.budget_s,
            start_x_m: self.start_x_m,
            start_y_m: self.start_y_m,
            start_yaw_deg: None,
            ..MissionConfig::approach_eval()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalTrial {
    pub seed: u64,
    pub outcome: Outcome,
    pub success: bool,
    pub activation_t_s: Option<f64>,
    /// Time from camera activation to reaching the success radius.
    pub nav_time_s: Option<f64>,
    /// Mean linear speed between activation and arrival at the source.
    pub mean_speed_mps: Option<f64>,
    /// Distance to the source at each estimated-destination arrival.
    pub arrival_dists_m: Vec<f64>,
    pub overshoot: bool,
    /// Classification threshold reached by the time of the second arrival.
    pub phase3_by_second_arrival: bool,
    pub final_dist_m: Option<f64>,
    pub trajectory: Vec<[f64; 2]>,
    pub arrivals_xy: Vec<[f64; 2]>,
}

fn path_speed(report: &MissionReport, from_t: f64, to_t: f64) -> Option<f64> {
    let pts: Vec<_> = report
        .trajectory
        .iter()
        .filter(|p| p.t_s >= from_t - 1e-9 && p.t_s <= to_t + 1e-9)
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let dist: f64 = pts
        .windows(2)
        .map(|w| ((w[1].x_m - w[0].x_m).powi(2) + (w[1].y_m - w[0].y_m).powi(2)).sqrt())
        .sum();
    let span = pts.last().unwrap().t_s - pts[0].t_s;
    (span > 0.0).then(|| dist / span)
}

pub fn trial_from_report(seed: u64, report: &MissionReport) -> ThermalTrial {
    let success = report.outcome == Outcome::ReachedSource;
    let nav_time_s = match (report.activation_t_s, report.success_t_s) {
        (Some(a), Some(s)) => Some(s - a),
        _ => None,
    };
    let mean_speed_mps = match (report.activation_t_s, report.success_t_s) {
        (Some(a), Some(s)) => path_speed(report, a, s),
        _ => None,
    };
    let phase3_by_second_arrival = matches!(report.arrivals_before_phase3, Some(n) if n <= 2)
        && report.phase3_first_t_s.is_some();
    ThermalTrial {
        seed,
        outcome: report.outcome,
        success,
        activation_t_s: report.activation_t_s,
        nav_time_s,
        mean_speed_mps,
        arrival_dists_m: report
            .arrivals
            .iter()
            .filter_map(|a| a.dist_to_source_m)
            .collect(),
        overshoot: report.overshoot,
        phase3_by_second_arrival,
        final_dist_m: report.final_dist_to_source_m,
        trajectory: report.trajectory.iter().map(|p| [p.x_m, p.y_m]).collect(),
        arrivals_xy: report.arrivals.iter().map(|a| [a.x_m, a.y_m]).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSummary {
    /// Artifact discriminator for the plot command.
    pub kind: String,
    pub spec: ThermalSpec,
    pub success_rate: f64,
    pub n_success: usize,
    pub mean_nav_time_s: Option<f64>,
    pub sd_nav_time_s: Option<f64>,
    pub mean_speed_mps: Option<f64>,
    /// Mean distance to the source after the 1st, 2nd, ... estimated
    /// arrival, over successful trials.
    pub mean_arrival_dists_m: Vec<f64>,
    /// Fraction of successful trials that either tagged an overshoot or
    /// reached the classification threshold by the second arrival.
    pub overshoot_or_phase3_rate: Option<f64>,
    pub trials: Vec<ThermalTrial>,
}

pub fn summarize(spec: &ThermalSpec, trials: &[ThermalTrial]) -> ThermalSummary {
    let succ: Vec<&ThermalTrial> = trials.iter().filter(|t| t.success).collect();
    let nav_times: Vec<f64> = succ.iter().filter_map(|t| t.nav_time_s).collect();
    let speeds: Vec<f64> = succ.iter().filter_map(|t| t.mean_speed_mps).collect();
    let max_arrivals = succ.iter().map(|t| t.arrival_dists_m.len()).max().unwrap_or(0);
    let mean_arrival_dists_m = (0..max_arrivals)
        .map(|i| {
            let at_i: Vec<f64> = succ
                .iter()
                .filter_map(|t| t.arrival_dists_m.get(i).copied())
                .collect();
            stats::mean(&at_i).unwrap_or(f64::NAN)
        })
        .collect();
    let tagged = succ
        .iter()
        .filter(|t| t.overshoot || t.phase3_by_second_arrival)
        .count();
    ThermalSummary {
        kind: "thermal_nav".to_string(),
        spec: spec.clone(),
        success_rate: if trials.is_empty() {
            0.0
        } else {
            succ.len() as f64 / trials.len() as f64
        },
        n_success: succ.len(),
        mean_nav_time_s: stats::mean(&nav_times),
        sd_nav_time_s: stats::sample_sd(&nav_times),
        mean_speed_mps: stats::mean(&speeds),
        mean_arrival_dists_m,
        overshoot_or_phase3_rate: if succ.is_empty() {
            None
        } else {
            Some(tagged as f64 / succ.len() as f64)
        },
        trials: trials.to_vec(),
    }
}

pub fn run_thermal_nav_study(spec: &ThermalSpec) -> Result<ThermalSummary, StudyError> {
    spec.validate()?;
    let cfg = spec.mission_config();
    cfg.validate()
        .map_err(|e| StudyError::BadSpec(e.to_string()))?;
    let world = spec.world();
    let trials: Vec<ThermalTrial> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let seed = spec.base_seed + i as u64;
            let report = run_mission(&cfg, &world, seed).expect("config validated");
            trial_from_report(seed, &report)
        })
        .collect();
    let summary = summarize(spec, &trials);
    let stored: Vec<ThermalTrial> =
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

#[cfg(test)]
mod tests {
    use super::*;
    use skitter_core::mission::MissionMode;

    #[test]
    fn small_study_runs_and_reproduces() {
        let spec = ThermalSpec {
            trials: 3,
            budget_s: 400.0,
            ..ThermalSpec::default()
        };
        let a = run_thermal_nav_study(&spec).unwrap();
        let b = run_thermal_nav_study(&spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.trials.len(), 3);
        for t in &a.trials {
            if t.success {
                assert!(t.nav_time_s.unwrap() <= 180.0 + 1e-9);
                assert!(!t.trajectory.is_empty());
            }
        }
    }

    #[test]
    fn mission_mode_is_approach_eval() {
        let spec = ThermalSpec::default();
        assert_eq!(spec.mission_config().mode, MissionMode::ApproachEval);
    }

    #[test]
    fn zero_trials_is_rejected() {
        let spec = ThermalSpec {
            trials: 0,
            ..ThermalSpec::default()
        };
        assert!(run_thermal_nav_study(&spec).is_err());
    }
}

//! Three-phase search mission: stochastic exploration until a thermal band
//! trigger, source approach (reference-tracked or camera-only), and
//! threshold classification, with recapture sweeps and give-up reversion.
//!
//! The mission runs a 0.1 s control tick with camera frames at 1 Hz. All
//! randomness flows through one seeded generator, so a (config, world,
//! seed) triple reproduces a run exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{deg_to_rad, wrap_deg};
use crate::blob::{estimate_target, mirror_column, pixel_to_angle, Blob, BlobConfig, BlobDetector};
use crate::explore::{next_destination, wall_redirect, Destination, Strategy};
use crate::imu::{DeadReckonState, GaitSynth, SpeedEstimator, TrackMode, GAIN_SEED, IMU_RATE_HZ};
use crate::ir::{band_fraction, in_band_count, render_ir, window_band_count, CameraModel, IrImage, IR_WIDTH};
use crate::locomotion::{
    apply_stimulus, goto_point, MotionParams, StimCommand, WalkState, GOTO_DIST_M, GOTO_THETA_DEG,
};
use crate::rng::{rng_from_seed, SimRng};
use crate::world::{Pose, World};

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("column bands must partition 1..={IR_WIDTH}: {0}")]
    BadBands(String),
    #[error("invalid mission config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Explore,
    Approach,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Indoor,
    Outdoor,
}

/// Where the approach controller gets its pose: an external reference
/// tracker (simulated as ground truth) or the onboard camera/IMU stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavVariant {
    Tracking,
    Onboard,
}

/// Full search runs the whole phase graph to classification; approach
/// evaluation starts in the approach phase and measures time-to-source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionMode {
    FullSearch,
    ApproachEval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Human,
    NotHuman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Classification fired and judged human.
    Human,
    /// Classification fired and judged not human.
    NotHuman,
    /// Budget exhausted while still searching.
    NotFound,
    /// Approach evaluation: reached the success radius.
    ReachedSource,
    /// Approach evaluation: approach time limit expired.
    TimedOut,
    /// Approach evaluation: recapture exhausted.
    GaveUp,
    /// Approach evaluation: the source never activated the camera trigger.
    NeverActivated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionReason {
    Start,
    BandTrigger,
    Phase3Trigger,
    LostSource,
    ApproachTimeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub t_s: f64,
    pub phase: Phase,
    pub reason: TransitionReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub t_s: f64,
    pub agent_x_m: f64,
    pub agent_y_m: f64,
    pub target_x_m: f64,
    pub target_y_m: f64,
    pub column: usize,
    pub image_angle_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRecord {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub dist_to_source_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionFrame {
    pub t_s: f64,
    pub from: Phase,
    pub to: Phase,
    pub in_band_px: usize,
    pub blob: Option<Blob>,
    pub pixels: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    pub outcome: Outcome,
    pub end_t_s: f64,
    pub events: Vec<PhaseEvent>,
    pub estimates: Vec<EstimateRecord>,
    pub arrivals: Vec<ArrivalRecord>,
    pub give_ups: usize,
    pub overshoot: bool,
    pub activation_t_s: Option<f64>,
    pub success_t_s: Option<f64>,
    pub phase3_first_t_s: Option<f64>,
    pub arrivals_before_phase3: Option<usize>,
    pub final_dist_to_source_m: Option<f64>,
    pub transition_frames: Vec<TransitionFrame>,
    /// True pose sampled at 1 Hz.
    pub trajectory: Vec<TrajPoint>,
    /// Dead-reckoned pose at 1 Hz; empty for the tracking variant.
    pub dr_trajectory: Vec<TrajPoint>,
}

/// All thresholds and timings of a mission. Field defaults describe the
/// indoor configuration; `outdoor()` and `approach_eval()` adjust them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub environment: Environment,
    pub nav_variant: NavVariant,
    pub mode: MissionMode,
    pub band_lo_c: f64,
    pub band_hi_c: f64,
    /// Phase I -> II trigger, in-band pixels (indoor).
    pub phase2_trigger_px: usize,
    /// Phase II -> III trigger, in-band pixels (indoor).
    pub phase3_trigger_px: usize,
    /// Outdoor trigger: total in-band pixels required.
    pub outdoor_total_px: usize,
    /// Outdoor trigger: in-band pixels required in the window centered on
    /// the detected blob.
    pub outdoor_center_px: usize,
    /// Half-width of that center window (2 -> 5x5).
    pub center_window_half: usize,
    /// Multiplier on the outdoor counts when used as the Phase III rule.
    pub outdoor_phase3_multiplier: f64,
    /// Fraction of in-band pixels (exclusive) gating target estimation.
    pub activation_fraction: f64,
    /// Assumed range of each target estimate, meters.
    pub approach_step_m: f64,
    /// Shuttle offset when the source is lost on arrival, meters.
    pub aux_step_m: f64,
    pub arrival_radius_m: f64,
    pub success_radius_m: f64,
    /// Approach time limit, counted from activation, seconds.
    pub phase2_limit_s: f64,
    /// Whole-mission budget, seconds.
    pub budget_s: f64,
    pub dt_s: f64,
    /// Consecutive blob-less frames before recapture starts.
    pub miss_limit: usize,
    /// How long a camera turn command is held before reverting to
    /// acceleration, seconds.
    pub turn_slice_s: f64,
    pub left_band: (usize, usize),
    pub accel_band: (usize, usize),
    pub right_band: (usize, usize),
    /// Destination law for the exploration phase; `None` walks naturally.
    pub strategy: Option<Strategy>,
    /// Give up on a destination after this long, seconds.
    pub dest_timeout_s: f64,
    pub start_x_m: f64,
    pub start_y_m: f64,
    /// Fixed initial heading; `None` draws one uniformly.
    pub start_yaw_deg: Option<f64>,
    pub camera: CameraModel,
    pub motion: MotionParams,
    pub blob: BlobConfig,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig::indoor()
    }
}

impl MissionConfig {
    pub fn indoor() -> Self {
        MissionConfig {
            environment: Environment::Indoor,
            nav_variant: NavVariant::Tracking,
            mode: MissionMode::FullSearch,
            band_lo_c: 28.0,
            band_hi_c: 38.0,
            phase2_trigger_px: 8,
            phase3_trigger_px: 50,
            outdoor_total_px: 25,
            outdoor_center_px: 12,
            center_window_half: 2,
            outdoor_phase3_multiplier: 1.0,
            activation_fraction: 0.002,
            approach_step_m: 1.5,
            aux_step_m: 0.2,
            arrival_radius_m: 0.2,
            success_radius_m: 0.5,
            phase2_limit_s: 180.0,
            budget_s: 1800.0,
            dt_s: 0.1,
            miss_limit: 2,
            turn_slice_s: 0.35,
            left_band: (1, 10),
            accel_band: (11, 22),
            right_band: (23, 32),
            strategy: Some(Strategy::levy_walk()),
            dest_timeout_s: 240.0,
            start_x_m: 0.5,
            start_y_m: 0.5,
            start_yaw_deg: None,
            camera: CameraModel::default(),
            motion: MotionParams::default(),
            blob: BlobConfig::default(),
        }
    }

    pub fn outdoor() -> Self {
        MissionConfig {
            environment: Environment::Outdoor,
            nav_variant: NavVariant::Onboard,
            band_lo_c: 29.0,
            band_hi_c: 35.0,
            ..MissionConfig::indoor()
        }
    }

    /// Thermal-source approach evaluation: start already in the approach
    /// phase, walk naturally until the camera activates, then navigate.
    pub fn approach_eval() -> Self {
        MissionConfig {
            mode: MissionMode::ApproachEval,
            strategy: None,
            budget_s: 600.0,
            ..MissionConfig::indoor()
        }
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let (l, a, r) = (self.left_band, self.accel_band, self.right_band);
        if l.0 != 1 || l.1 + 1 != a.0 || a.1 + 1 != r.0 || r.1 != IR_WIDTH || l.0 > l.1 || a.0 > a.1 || r.0 > r.1
        {
            return Err(MissionError::BadBands(format!("{l:?} {a:?} {r:?}")));
        }
        if self.phase2_trigger_px == 0
            || self.phase3_trigger_px == 0
            || self.outdoor_total_px == 0
            || self.outdoor_center_px == 0
        {
            return Err(MissionError::BadConfig("triggers must be positive".into()));
        }
        if self.band_lo_c >= self.band_hi_c {
            return Err(MissionError::BadConfig("empty temperature band".into()));
        }
        if self.dt_s <= 0.0 || self.budget_s <= 0.0 || self.phase2_limit_s <= 0.0 {
            return Err(MissionError::BadConfig("timings must be positive".into()));
        }
        if self.arrival_radius_m <= 0.0 || self.success_radius_m <= 0.0 || self.approach_step_m <= 0.0
        {
            return Err(MissionError::BadConfig("radii must be positive".into()));
        }
        Ok(())
    }
}

/// Camera steering command for a blob column: left band turns left, center
/// band accelerates, right band turns right.
pub fn band_command(cfg: &MissionConfig, u: usize) -> StimCommand {
    debug_assert!((1..=IR_WIDTH).contains(&u));
    if u >= cfg.left_band.0 && u <= cfg.left_band.1 {
        StimCommand::TurnLeft
    } else if u >= cfg.accel_band.0 && u <= cfg.accel_band.1 {
        StimCommand::Accelerate
    } else {
        StimCommand::TurnRight
    }
}

fn outdoor_criterion(
    cfg: &MissionConfig,
    img: &IrImage,
    detector: &BlobDetector,
    total_needed: usize,
    center_needed: usize,
) -> bool {
    if in_band_count(img, cfg.band_lo_c, cfg.band_hi_c) < total_needed {
        return false;
    }
    let Some(blob) = detector.detect(img) else {
        return false;
    };
    window_band_count(
        img,
        blob.v,
        blob.u,
        cfg.center_window_half,
        cfg.band_lo_c,
        cfg.band_hi_c,
    ) >= center_needed
}

/// Exploration trigger: does this frame warrant switching to the approach
/// phase?
pub fn phase2_trigger(cfg: &MissionConfig, img: &IrImage, detector: &BlobDetector) -> bool {
    match cfg.environment {
        Environment::Indoor => {
            in_band_count(img, cfg.band_lo_c, cfg.band_hi_c) >= cfg.phase2_trigger_px
        }
        Environment::Outdoor => outdoor_criterion(
            cfg,
            img,
            detector,
            cfg.outdoor_total_px,
            cfg.outdoor_center_px,
        ),
    }
}

fn phase3_criterion(cfg: &MissionConfig, img: &IrImage, detector: &BlobDetector) -> bool {
    match cfg.environment {
        Environment::Indoor => {
            in_band_count(img, cfg.band_lo_c, cfg.band_hi_c) >= cfg.phase3_trigger_px
        }
        Environment::Outdoor => {
            let scale = |px: usize| (px as f64 * cfg.outdoor_phase3_multiplier).ceil() as usize;
            outdoor_criterion(
                cfg,
                img,
                detector,
                scale(cfg.outdoor_total_px),
                scale(cfg.outdoor_center_px),
            )
        }
    }
}

/// Threshold classifier standing in for a learned model: judges the frame
/// that triggered the classification phase.
pub fn phase3_classify(
    cfg: &MissionConfig,
    img: &IrImage,
    detector: &BlobDetector,
) -> Classification {
    if phase3_criterion(cfg, img, detector) {
        Classification::Human
    } else {
        Classification::NotHuman
    }
}

/// True when consecutive events only use the legal phase edges:
/// Explore -> Approach, Approach -> Classify, Approach -> Explore.
pub fn validate_phase_graph(events: &[PhaseEvent]) -> bool {
    events.windows(2).all(|w| {
        matches!(
            (w[0].phase, w[1].phase),
            (Phase::Explore, Phase::Approach)
                | (Phase::Approach, Phase::Classify)
                | (Phase::Approach, Phase::Explore)
        )
    })
}

#[derive(Debug, Clone, Copy)]
enum RecaptureStage {
    BackTurn,
    SweepRight,
    SweepLeft,
}

#[derive(Debug, Clone, Copy)]
struct Recapture {
    stage: RecaptureStage,
    /// World bearing at which the blob was last seen.
    center_yaw_deg: f64,
    /// Current yaw offset from that bearing; bounded by +-90 per stage.
    offset_deg: f64,
    failed_reacquisitions: usize,
}

#[derive(Debug, Clone, Copy)]
struct LastSeen {
    u: usize,
    yaw_deg: f64,
}

#[derive(Debug, Clone, Copy)]
struct Shuttle {
    a: Destination,
    b: Destination,
    toward_b: bool,
}

struct Mission<'a> {
    cfg: &'a MissionConfig,
    world: &'a World,
    rng: SimRng,
    detector: BlobDetector,
    pose: Pose,
    walk: WalkState,
    phase: Phase,
    t: f64,
    frame_idx: u64,
    outcome: Option<Outcome>,

    explore_dest: Option<Destination>,
    dest_deadline: f64,

    activation_t: Option<f64>,
    nav_dest: Option<Destination>,
    awaiting_estimate: bool,
    arrived_since_estimate: bool,
    shuttle: Option<Shuttle>,

    held_cmd: StimCommand,
    held_until: f64,
    miss_count: usize,
    last_seen: Option<LastSeen>,
    recapture: Option<Recapture>,

    gait: GaitSynth,
    speed_est: SpeedEstimator,
    dr: DeadReckonState,

    events: Vec<PhaseEvent>,
    estimates: Vec<EstimateRecord>,
    arrivals: Vec<ArrivalRecord>,
    give_ups: usize,
    overshoot: bool,
    success_t: Option<f64>,
    phase3_first_t: Option<f64>,
    arrivals_before_phase3: Option<usize>,
    transition_frames: Vec<TransitionFrame>,
    trajectory: Vec<TrajPoint>,
    dr_trajectory: Vec<TrajPoint>,
}

impl<'a> Mission<'a> {
    fn new(cfg: &'a MissionConfig, world: &'a World, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let yaw = cfg.start_yaw_deg.unwrap_or_else(|| {
            use rand::Rng;
            rng.gen_range(0.0..360.0)
        });
        let pose = Pose::new(cfg.start_x_m, cfg.start_y_m, yaw);
        let walk = WalkState::start(&cfg.motion, &mut rng);
        let start_phase = match cfg.mode {
            MissionMode::FullSearch => Phase::Explore,
            MissionMode::ApproachEval => Phase::Approach,
        };
        Mission {
            cfg,
            world,
            rng,
            detector: BlobDetector::new(cfg.blob),
            pose,
            walk,
            phase: start_phase,
            t: 0.0,
            frame_idx: 0,
            outcome: None,
            explore_dest: None,
            dest_deadline: 0.0,
            activation_t: None,
            nav_dest: None,
            awaiting_estimate: start_phase == Phase::Approach,
            arrived_since_estimate: false,
            shuttle: None,
            held_cmd: StimCommand::Accelerate,
            held_until: 0.0,
            miss_count: 0,
            last_seen: None,
            recapture: None,
            gait: GaitSynth::new(GAIN_SEED, 6.0),
            speed_est: SpeedEstimator::new(GAIN_SEED),
            dr: DeadReckonState::at(cfg.start_x_m, cfg.start_y_m, 0.0),
            events: vec![PhaseEvent {
                t_s: 0.0,
                phase: start_phase,
                reason: TransitionReason::Start,
            }],
            estimates: Vec::new(),
            arrivals: Vec::new(),
            give_ups: 0,
            overshoot: false,
            success_t: None,
            phase3_first_t: None,
            arrivals_before_phase3: None,
            transition_frames: Vec::new(),
            trajectory: Vec::new(),
            dr_trajectory: Vec::new(),
        }
    }

    /// Pose the navigation layer believes: ground truth for the tracking
    /// variant, dead-reckoned position (with IMU yaw) for onboard.
    fn nav_pose(&self) -> Pose {
        match self.cfg.nav_variant {
            NavVariant::Tracking => self.pose,
            NavVariant::Onboard => Pose {
                x: self.dr.x,
                y: self.dr.y,
                ..self.pose
            },
        }
    }

    fn nearest_source_dist(&self) -> Option<f64> {
        self.world
            .active_sources(self.t)
            .map(|s| self.pose.distance_to(s.x, s.y))
            .min_by(|a, b| a.partial_cmp(b).expect("finite distances"))
    }

    fn record_transition(&mut self, to: Phase, reason: TransitionReason, img: Option<&IrImage>) {
        let from = self.phase;
        self.phase = to;
        self.events.push(PhaseEvent {
            t_s: self.t,
            phase: to,
            reason,
        });
        if let Some(img) = img {
            self.transition_frames.push(TransitionFrame {
                t_s: self.t,
                from,
                to,
                in_band_px: in_band_count(img, self.cfg.band_lo_c, self.cfg.band_hi_c),
                blob: self.detector.detect(img),
                pixels: img.rows().iter().map(|r| r.to_vec()).collect(),
            });
        }
    }

    fn scene_bearing_deg(&self, u: usize) -> f64 {
        pixel_to_angle::<f64>(mirror_column(u)).expect("column in range") - 45.0
    }

    /// Try to produce a fresh target estimate from an activated frame.
    fn try_estimate(&mut self, img: &IrImage) -> bool {
        if band_fraction(img, self.cfg.band_lo_c, self.cfg.band_hi_c) <= self.cfg.activation_fraction
        {
            return false;
        }
        self.activation_t.get_or_insert(self.t);
        let Some(blob) = self.detector.detect(img) else {
            return false;
        };
        let alpha = pixel_to_angle::<f64>(mirror_column(blob.u)).expect("column in range");
        let est = estimate_target(&self.pose, alpha, self.cfg.approach_step_m);
        self.estimates.push(EstimateRecord {
            t_s: self.t,
            agent_x_m: self.pose.x,
            agent_y_m: self.pose.y,
            target_x_m: est.x_m,
            target_y_m: est.y_m,
            column: blob.u,
            image_angle_deg: alpha,
        });
        if self.estimates.len() == 3 {
            if let Some(src) = self
                .world
                .active_sources(self.t)
                .min_by(|a, b| {
                    let da = self.pose.distance_to(a.x, a.y);
                    let db = self.pose.distance_to(b.x, b.y);
                    da.partial_cmp(&db).expect("finite distances")
                })
            {
                let ray = deg_to_rad(est.bearing_deg);
                let along = (src.x - self.pose.x) * ray.cos() + (src.y - self.pose.y) * ray.sin();
                if along > 0.0 && self.cfg.approach_step_m > along {
                    self.overshoot = true;
                }
            }
        }
        self.last_seen = Some(LastSeen {
            u: blob.u,
            yaw_deg: self.pose.yaw_deg,
        });
        self.nav_dest = Some(Destination {
            x: est.x_m,
            y: est.y_m,
        });
        self.awaiting_estimate = false;
        self.arrived_since_estimate = false;
        self.shuttle = None;
        true
    }

    fn reset_approach_state(&mut self) {
        self.activation_t = None;
        self.nav_dest = None;
        self.awaiting_estimate = false;
        self.arrived_since_estimate = false;
        self.shuttle = None;
        self.miss_count = 0;
        self.last_seen = None;
        self.recapture = None;
        self.explore_dest = None;
    }

    fn give_up(&mut self, reason: TransitionReason, img: Option<&IrImage>) {
        self.give_ups += 1;
        match self.cfg.mode {
            MissionMode::FullSearch => {
                self.record_transition(Phase::Explore, reason, img);
                self.reset_approach_state();
            }
            MissionMode::ApproachEval => {
                self.outcome = Some(match reason {
                    TransitionReason::ApproachTimeout => Outcome::TimedOut,
                    _ => Outcome::GaveUp,
                });
            }
        }
    }

    fn frame_explore(&mut self, img: &IrImage) {
        if !phase2_trigger(self.cfg, img, &self.detector) {
            return;
        }
        self.record_transition(Phase::Approach, TransitionReason::BandTrigger, Some(img));
        self.explore_dest = None;
        self.awaiting_estimate = true;
        self.arrived_since_estimate = false;
        self.activation_t = None;
        match self.cfg.nav_variant {
            NavVariant::Tracking => {
                self.try_estimate(img);
                // A triggering frame always counts as activation even when
                // the detector misses.
                self.activation_t.get_or_insert(self.t);
            }
            NavVariant::Onboard => {
                self.activation_t = Some(self.t);
                self.miss_count = 0;
                self.recapture = None;
                if let Some(blob) = self.detector.detect(img) {
                    self.last_seen = Some(LastSeen {
                        u: blob.u,
                        yaw_deg: self.pose.yaw_deg,
                    });
                    self.hold_band_command(blob.u);
                } else {
                    self.last_seen = None;
                    self.held_cmd = StimCommand::Accelerate;
                    self.held_until = self.next_frame_t();
                }
            }
        }
    }

    fn next_frame_t(&self) -> f64 {
        self.frame_idx as f64 * self.cfg.camera.frame_period_s()
    }

    fn hold_band_command(&mut self, u: usize) {
        let cmd = band_command(self.cfg, u);
        self.held_cmd = cmd;
        self.held_until = match cmd {
            StimCommand::TurnLeft | StimCommand::TurnRight => self.t + self.cfg.turn_slice_s,
            _ => self.next_frame_t(),
        };
    }

    fn frame_approach(&mut self, img: &IrImage) {
        if phase3_criterion(self.cfg, img, &self.detector) {
            if self.phase3_first_t.is_none() {
                self.phase3_first_t = Some(self.t);
                self.arrivals_before_phase3 = Some(self.arrivals.len());
            }
            if self.cfg.mode == MissionMode::FullSearch {
                self.record_transition(Phase::Classify, TransitionReason::Phase3Trigger, Some(img));
                let class = phase3_classify(self.cfg, img, &self.detector);
                self.outcome = Some(match class {
                    Classification::Human => Outcome::Human,
                    Classification::NotHuman => Outcome::NotHuman,
                });
                return;
            }
        }
        match self.cfg.nav_variant {
            NavVariant::Tracking => {
                if self.awaiting_estimate && !self.try_estimate(img) {
                    // Keep the activation clock honest even without a blob.
                    if band_fraction(img, self.cfg.band_lo_c, self.cfg.band_hi_c)
                        > self.cfg.activation_fraction
                    {
                        self.activation_t.get_or_insert(self.t);
                    }
                    if self.arrived_since_estimate && self.shuttle.is_none() {
                        let here = Destination {
                            x: self.pose.x,
                            y: self.pose.y,
                        };
                        let r = deg_to_rad(self.pose.yaw_deg);
                        let (ax, ay) = self.world.arena.clamp(
                            self.pose.x + self.cfg.aux_step_m * r.cos(),
                            self.pose.y + self.cfg.aux_step_m * r.sin(),
                        );
                        self.shuttle = Some(Shuttle {
                            a: here,
                            b: Destination { x: ax, y: ay },
                            toward_b: true,
                        });
                    }
                }
            }
            NavVariant::Onboard => {
                if let Some(blob) = self.detector.detect(img) {
                    self.activation_t.get_or_insert(self.t);
                    self.miss_count = 0;
                    self.recapture = None;
                    self.last_seen = Some(LastSeen {
                        u: blob.u,
                        yaw_deg: self.pose.yaw_deg,
                    });
                    self.hold_band_command(blob.u);
                } else {
                    self.miss_count += 1;
                    if let Some(rec) = &mut self.recapture {
                        rec.failed_reacquisitions += 1;
                    } else if self.miss_count >= self.cfg.miss_limit {
                        match self.last_seen {
                            Some(seen) => {
                                let center =
                                    wrap_deg(seen.yaw_deg + self.scene_bearing_deg(seen.u));
                                self.recapture = Some(Recapture {
                                    stage: RecaptureStage::BackTurn,
                                    center_yaw_deg: center,
                                    offset_deg: 0.0,
                                    failed_reacquisitions: 1,
                                });
                            }
                            None => self.give_up(TransitionReason::LostSource, Some(img)),
                        }
                    } else {
                        self.held_cmd = StimCommand::Accelerate;
                        self.held_until = self.next_frame_t();
                    }
                }
            }
        }
    }

    /// One bounded recapture turn. The controller clamps each slice so the
    /// accumulated sweep never exceeds 90 degrees per stage.
    fn recapture_tick(&mut self) {
        let Some(mut rec) = self.recapture else {
            return;
        };
        let sampled = self.cfg.motion.sample_omega_stim(&mut self.rng) * self.cfg.dt_s;
        match rec.stage {
            RecaptureStage::BackTurn => {
                let err = wrap_deg(rec.center_yaw_deg - self.pose.yaw_deg);
                if err.abs() < 1e-9 {
                    rec.stage = RecaptureStage::SweepRight;
                } else {
                    let step = err.abs().min(sampled) * err.signum();
                    self.pose.turn(step);
                    if wrap_deg(rec.center_yaw_deg - self.pose.yaw_deg).abs() < 1e-9 {
                        rec.stage = RecaptureStage::SweepRight;
                    }
                }
                self.recapture = Some(rec);
            }
            RecaptureStage::SweepRight => {
                let remaining = rec.offset_deg + 90.0;
                let step = sampled.min(remaining).max(0.0);
                rec.offset_deg -= step;
                self.pose.turn(-step);
                debug_assert!(rec.offset_deg >= -90.0 - 1e-9, "sweep exceeded 90 degrees");
                if rec.offset_deg <= -90.0 + 1e-9 {
                    rec.stage = RecaptureStage::SweepLeft;
                }
                self.recapture = Some(rec);
            }
            RecaptureStage::SweepLeft => {
                let remaining = 90.0 - rec.offset_deg;
                let step = sampled.min(remaining).max(0.0);
                rec.offset_deg += step;
                self.pose.turn(step);
                debug_assert!(rec.offset_deg <= 90.0 + 1e-9, "sweep exceeded 90 degrees");
                if rec.offset_deg >= 90.0 - 1e-9 {
                    self.recapture = None;
                    self.give_up(TransitionReason::LostSource, None);
                } else {
                    self.recapture = Some(rec);
                }
            }
        }
    }

    fn explore_command(&mut self) -> StimCommand {
        let Some(strategy) = &self.cfg.strategy else {
            return StimCommand::None;
        };
        let nav = self.nav_pose();
        if let Some(rd) = wall_redirect(&self.pose, &self.world.arena) {
            self.explore_dest = Some(Destination {
                x: nav.x + (rd.x - self.pose.x),
                y: nav.y + (rd.y - self.pose.y),
            });
            self.dest_deadline = self.t + self.cfg.dest_timeout_s;
        }
        if self.explore_dest.is_some() && self.t > self.dest_deadline {
            self.explore_dest = None;
        }
        let dest = match self.explore_dest {
            Some(d) => d,
            None => {
                let d = next_destination(strategy, &nav, &self.world.arena, &mut self.rng);
                self.explore_dest = Some(d);
                self.dest_deadline = self.t + self.cfg.dest_timeout_s;
                d
            }
        };
        match goto_point(&nav, dest.x, dest.y, GOTO_THETA_DEG, GOTO_DIST_M) {
            StimCommand::Arrived => {
                self.explore_dest = None;
                StimCommand::None
            }
            cmd => cmd,
        }
    }

    fn approach_command(&mut self) -> StimCommand {
        match self.cfg.nav_variant {
            NavVariant::Tracking => {
                if let Some(sh) = self.shuttle {
                    let target = if sh.toward_b { sh.b } else { sh.a };
                    let nav = self.nav_pose();
                    return match goto_point(
                        &nav,
                        target.x,
                        target.y,
                        GOTO_THETA_DEG,
                        self.cfg.arrival_radius_m,
                    ) {
                        StimCommand::Arrived => {
                            self.shuttle = Some(Shuttle {
                                toward_b: !sh.toward_b,
                                ..sh
                            });
                            StimCommand::None
                        }
                        cmd => cmd,
                    };
                }
                if let Some(dest) = self.nav_dest {
                    let nav = self.nav_pose();
                    return match goto_point(
                        &nav,
                        dest.x,
                        dest.y,
                        GOTO_THETA_DEG,
                        self.cfg.arrival_radius_m,
                    ) {
                        StimCommand::Arrived => {
                            self.arrivals.push(ArrivalRecord {
                                t_s: self.t,
                                x_m: self.pose.x,
                                y_m: self.pose.y,
                                dist_to_source_m: self.nearest_source_dist(),
                            });
                            self.nav_dest = None;
                            self.awaiting_estimate = true;
                            self.arrived_since_estimate = true;
                            StimCommand::None
                        }
                        cmd => cmd,
                    };
                }
                StimCommand::None
            }
            NavVariant::Onboard => {
                if self.recapture.is_some() {
                    self.recapture_tick();
                    return StimCommand::Arrived; // handled; no further motion
                }
                if self.t < self.held_until {
                    self.held_cmd
                } else {
                    StimCommand::Accelerate
                }
            }
        }
    }

    fn update_dead_reckoning(&mut self, moved_m: f64) {
        let steps = (IMU_RATE_HZ * self.cfg.dt_s).round() as usize;
        let dt = 1.0 / IMU_RATE_HZ;
        let speed = moved_m / self.cfg.dt_s;
        for k in 0..steps {
            let t_imu = self.t + (k as f64 + 1.0) * dt;
            let sample = self
                .gait
                .sample(t_imu, speed, self.pose.yaw_deg, 0.0, &mut self.rng);
            let v = self.speed_est.push(sample);
            self.dr
                .integrate(v, &sample.orientation, dt, TrackMode::Planar);
        }
    }

    fn run(mut self) -> MissionReport {
        let period = self.cfg.camera.frame_period_s();
        let mut next_traj_t = 0.0;
        while self.t <= self.cfg.budget_s + 1e-9 {
            if self.t + 1e-9 >= self.frame_idx as f64 * period {
                let img = render_ir(
                    self.world,
                    &self.pose,
                    &self.cfg.camera,
                    self.t,
                    &mut self.rng,
                );
                self.frame_idx += 1;
                match self.phase {
                    Phase::Explore => self.frame_explore(&img),
                    Phase::Approach => self.frame_approach(&img),
                    Phase::Classify => {}
                }
            }
            if self.t + 1e-9 >= next_traj_t {
                self.trajectory.push(TrajPoint {
                    t_s: self.t,
                    x_m: self.pose.x,
                    y_m: self.pose.y,
                    yaw_deg: self.pose.yaw_deg,
                });
                if self.cfg.nav_variant == NavVariant::Onboard {
                    self.dr_trajectory.push(TrajPoint {
                        t_s: self.t,
                        x_m: self.dr.x,
                        y_m: self.dr.y,
                        yaw_deg: self.pose.yaw_deg,
                    });
                }
                next_traj_t += 1.0;
            }
            if self.outcome.is_some() {
                break;
            }
            if self.phase == Phase::Approach {
                if let Some(t0) = self.activation_t {
                    if self.t - t0 >= self.cfg.phase2_limit_s {
                        self.give_up(TransitionReason::ApproachTimeout, None);
                    }
                }
            }
            if self.outcome.is_some() {
                break;
            }

            let cmd = match self.phase {
                Phase::Explore => self.explore_command(),
                Phase::Approach => self.approach_command(),
                Phase::Classify => StimCommand::None,
            };
            let before = self.pose;
            if cmd != StimCommand::Arrived {
                apply_stimulus(
                    &mut self.pose,
                    &mut self.walk,
                    cmd,
                    &self.world.arena,
                    &self.cfg.motion,
                    &mut self.rng,
                    self.cfg.dt_s,
                );
            }
            if self.cfg.nav_variant == NavVariant::Onboard {
                let moved = before.distance_to(self.pose.x, self.pose.y);
                self.update_dead_reckoning(moved);
            }
            if self.cfg.mode == MissionMode::ApproachEval && self.success_t.is_none() {
                if let Some(d) = self.nearest_source_dist() {
                    if d <= self.cfg.success_radius_m {
                        self.success_t = Some(self.t + self.cfg.dt_s);
                        self.outcome = Some(Outcome::ReachedSource);
                    }
                }
            }
            self.t += self.cfg.dt_s;
        }

        let outcome = self.outcome.unwrap_or(match self.cfg.mode {
            MissionMode::FullSearch => Outcome::NotFound,
            MissionMode::ApproachEval => {
                if self.activation_t.is_none() {
                    Outcome::NeverActivated
                } else {
                    Outcome::TimedOut
                }
            }
        });
        MissionReport {
            outcome,
            end_t_s: self.t,
            events: self.events,
            estimates: self.estimates,
            arrivals: self.arrivals,
            give_ups: self.give_ups,
            overshoot: self.overshoot,
            activation_t_s: self.activation_t,
            success_t_s: self.success_t,
            phase3_first_t_s: self.phase3_first_t,
            arrivals_before_phase3: self.arrivals_before_phase3,
            final_dist_to_source_m: self
                .world
                .active_sources(self.t)
                .map(|s| self.pose.distance_to(s.x, s.y))
                .min_by(|a, b| a.partial_cmp(b).expect("finite distances")),
            transition_frames: self.transition_frames,
            trajectory: self.trajectory,
            dr_trajectory: self.dr_trajectory,
        }
    }
}

/// Run one mission to completion.
pub fn run_mission(
    cfg: &MissionConfig,
    world: &World,
    seed: u64,
) -> Result<MissionReport, MissionError> {
    cfg.validate()?;
    if !world.arena.contains(cfg.start_x_m, cfg.start_y_m) {
        return Err(MissionError::BadConfig(format!(
            "start ({}, {}) outside the arena",
            cfg.start_x_m, cfg.start_y_m
        )));
    }
    Ok(Mission::new(cfg, world, seed).run())
}

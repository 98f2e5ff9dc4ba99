//! Simulation library for insect-scale search agents that locate warm
//! targets with a low-resolution thermal camera.
//!
//! The crate models the full onboard stack of a walking centimeter-scale
//! agent: gait statistics and stimulated locomotion, stochastic exploration
//! strategies, a synthetic 32x32 infrared camera, scale-space blob detection
//! with target position estimation, accelerometer-variance dead reckoning,
//! and the three-phase search mission that ties them together.
//!
//! All randomness flows through explicitly seeded generators, so any run is
//! reproducible bit for bit from its seed. Numeric kernels are generic over
//! the scalar type (`f32` or `f64`); the aliases at the crate root pin the
//! default `f64` instantiations used by the simulator.

pub mod angles;
pub mod blob;
pub mod distrib;
pub mod explore;
pub mod imu;
pub mod ir;
pub mod locomotion;
pub mod mission;
pub mod num;
pub mod rng;
pub mod scenario;
pub mod world;

pub use num::Scalar;
pub use rng::SimRng;

/// Default scalar type for the concrete simulator.
pub type Real = f64;

pub type Pose = world::Pose<Real>;
pub type Arena = world::Arena<Real>;
pub type CoverageGrid = world::CoverageGrid<Real>;
pub type MotionParams = locomotion::MotionParams<Real>;
pub type WalkState = locomotion::WalkState<Real>;
pub type Strategy = explore::Strategy<Real>;
pub type IrImage = ir::IrImage<Real>;
pub type CameraModel = ir::CameraModel<Real>;
pub type BlobDetector = blob::BlobDetector<Real>;
pub type TargetEstimate = blob::TargetEstimate<Real>;
pub type Quat = imu::Quat<Real>;
pub type ImuSample = imu::ImuSample<Real>;
pub type SpeedEstimator = imu::SpeedEstimator<Real>;

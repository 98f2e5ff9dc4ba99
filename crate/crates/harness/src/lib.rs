//! Batch experiment runner for the skitter simulator: seeded exploration
//! and thermal-navigation studies, dead-reckoning benchmarks and replays,
//! plus deterministic JSON/CSV/SVG artifact emission.

pub mod explore_study;
pub mod imu_bench;
pub mod report;
pub mod stats;
pub mod svg;
pub mod thermal_study;

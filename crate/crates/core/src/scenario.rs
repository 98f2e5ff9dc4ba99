//! TOML scenario files: arena geometry, thermal sources and a mission
//! configuration in one document, validated on load.
//!
//! ```toml
//! ambient_c = 25.0
//!
//! [arena]
//! width_m = 4.8
//! height_m = 6.6
//!
//! [[sources]]
//! kind = "human"
//! x = 2.4
//! y = 5.0
//! radius_m = 0.25
//! surface_temp_c = 33.0
//!
//! [mission]
//! budget_s = 1800.0
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::mission::MissionConfig;
use crate::world::{Arena, ThermalSource, World};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArenaSpec {
    width_m: f64,
    height_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    arena: ArenaSpec,
    #[serde(default = "default_ambient")]
    ambient_c: f64,
    #[serde(default)]
    sources: Vec<ThermalSource>,
    #[serde(default)]
    mission: MissionConfig,
}

fn default_ambient() -> f64 {
    25.0
}

/// A fully validated scenario: the world to simulate and the mission to run
/// in it. Camera, motion and detector settings live inside the mission
/// config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub world: World,
    pub mission: MissionConfig,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        let arena = Arena::new(file.arena.width_m, file.arena.height_m)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        for (i, s) in file.sources.iter().enumerate() {
            if !arena.contains(s.x, s.y) {
                return Err(ScenarioError::Invalid(format!(
                    "source {i} at ({}, {}) lies outside the {} x {} arena",
                    s.x, s.y, arena.width_m, arena.height_m
                )));
            }
            if !(s.radius_m > 0.0) || !s.surface_temp_c.is_finite() {
                return Err(ScenarioError::Invalid(format!(
                    "source {i} needs a positive radius and finite temperature"
                )));
            }
            if let Some((a, b)) = s.active_s {
                if !(a <= b) {
                    return Err(ScenarioError::Invalid(format!(
                        "source {i} active window is reversed: {a} > {b}"
                    )));
                }
            }
        }
        if !file.ambient_c.is_finite() {
            return Err(ScenarioError::Invalid("ambient_c must be finite".into()));
        }
        file.mission
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if !arena.contains(file.mission.start_x_m, file.mission.start_y_m) {
            return Err(ScenarioError::Invalid(format!(
                "mission start ({}, {}) lies outside the arena",
                file.mission.start_x_m, file.mission.start_y_m
            )));
        }
        Ok(Scenario {
            world: World {
                arena,
                ambient_c: file.ambient_c,
                sources: file.sources,
            },
            mission: file.mission,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Scenario::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::{Environment, NavVariant};
    use crate::world::SourceKind;

    const MINIMAL: &str = "\n[arena]\nwidth_m = 4.8\nheight_m = 6.6\n";

    #[test]
    fn minimal_scenario_uses_defaults() {
        let sc = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(sc.world.ambient_c, 25.0);
        assert!(sc.world.sources.is_empty());
        assert_eq!(sc.mission.environment, Environment::Indoor);
        assert_eq!(sc.mission.camera.noise_sd_c, 0.3);
    }

    #[test]
    fn full_scenario_parses() {
        let text = r#"
ambient_c = 24.0

[arena]
width_m = 20.0
height_m = 20.0

[[sources]]
kind = "oven"
x = 10.0
y = 6.0
radius_m = 0.3
surface_temp_c = 35.0

[[sources]]
kind = "transient_air"
x = 3.0
y = 3.0
radius_m = 0.5
surface_temp_c = 32.0
active_s = [10.5, 11.4]

[mission]
environment = "outdoor"
nav_variant = "onboard"
budget_s = 900.0
start_x_m = 1.0
start_y_m = 1.0

[mission.camera]
noise_sd_c = 0.25

[mission.blob]
threshold_sigmas = 2.5
"#;
        let sc = Scenario::from_toml_str(text).unwrap();
        assert_eq!(sc.world.sources.len(), 2);
        assert_eq!(sc.world.sources[0].kind, SourceKind::Oven);
        assert_eq!(sc.world.sources[1].active_s, Some((10.5, 11.4)));
        assert_eq!(sc.mission.environment, Environment::Outdoor);
        assert_eq!(sc.mission.nav_variant, NavVariant::Onboard);
        assert_eq!(sc.mission.camera.noise_sd_c, 0.25);
        assert_eq!(sc.mission.blob.threshold_sigmas, 2.5);
        assert_eq!(sc.mission.band_lo_c, 28.0, "defaults still apply");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = "\n[arena]\nwidth_m = 1.0\nheight_m = 1.0\nwall_material = \"steel\"\n";
        assert!(Scenario::from_toml_str(text).is_err());
        let text2 = format!("{MINIMAL}[mission]\nphase_four_trigger = 3\n");
        assert!(Scenario::from_toml_str(&text2).is_err());
    }

    #[test]
    fn out_of_arena_source_is_rejected() {
        let text = format!(
            "{MINIMAL}[[sources]]\nkind = \"human\"\nx = 9.0\ny = 1.0\nradius_m = 0.25\nsurface_temp_c = 33.0\n"
        );
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)));
    }

    #[test]
    fn reversed_active_window_is_rejected() {
        let text = format!(
            "{MINIMAL}[[sources]]\nkind = \"transient_air\"\nx = 1.0\ny = 1.0\nradius_m = 0.5\nsurface_temp_c = 32.0\nactive_s = [5.0, 4.0]\n"
        );
        assert!(Scenario::from_toml_str(&text).is_err());
    }

    #[test]
    fn load_reads_a_file() {
        let dir = std::env::temp_dir().join("skitter-scenario-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("min.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        let sc = Scenario::load(&path).unwrap();
        assert_eq!(sc.world.arena.width_m, 4.8);
        std::fs::remove_file(&path).ok();
    }
}

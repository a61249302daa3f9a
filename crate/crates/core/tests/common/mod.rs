#![allow(dead_code)]

use std::path::PathBuf;

use liwave::config::PotentialConfig;
use liwave::potentials::CollisionSystem;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load(name: &str) -> (PotentialConfig, CollisionSystem) {
    let cfg = PotentialConfig::load(&config_path(name)).expect("config loads");
    let system = cfg.system().expect("valid system");
    (cfg, system)
}

/// Difference of two phase shifts modulo π.
pub fn phase_diff(a: f64, b: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let d = (a - b).rem_euclid(pi);
    if d > pi / 2.0 {
        d - pi
    } else {
        d
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

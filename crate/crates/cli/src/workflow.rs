//! Workflow file: the paths and knobs shared by the composite commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use liwave::config::read_json;
use liwave::fringes::{SimulationConfig, DEFAULT_PRESSURES};
use liwave::refraction::MEASURED_U;
use liwave::thermal::DEFAULT_NODES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamSettings {
    pub u_mean: f64,
    pub fwhm_fraction: f64,
    pub nodes: usize,
}

impl Default for BeamSettings {
    fn default() -> Self {
        Self { u_mean: MEASURED_U, fwhm_fraction: 0.25, nodes: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanSettings {
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { u_min: 700.0, u_max: 3300.0, points: liwave::refraction::DEFAULT_SCAN_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkflowConfig {
    /// Potentials compared in `table1`.
    pub table_potentials: Vec<PathBuf>,
    /// Potentials overlaid in the figure tables.
    pub figure_potentials: Vec<PathBuf>,
    /// Potential used by `endtoend`.
    pub potential: PathBuf,
    /// Cell geometry; the built-in default when absent.
    pub geometry: Option<PathBuf>,
    pub beam: BeamSettings,
    pub scan: ScanSettings,
    pub target_nodes: usize,
    pub seed: u64,
    /// Gauge pressures in Pa.
    pub pressures: Vec<f64>,
    pub trials: usize,
    pub simulation: SimulationConfig,
    pub output_dir: PathBuf,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        let c = |name: &str| PathBuf::from("configs").join(name);
        Self {
            table_potentials: vec![c("li_ar_bc.json"), c("li_kr_bc.json"), c("li_xe_bc.json")],
            figure_potentials: vec![c("li_xe_bc.json"), c("li_xe_c6.json")],
            potential: c("li_xe_bc.json"),
            geometry: None,
            beam: BeamSettings::default(),
            scan: ScanSettings::default(),
            target_nodes: DEFAULT_NODES,
            seed: 1,
            pressures: DEFAULT_PRESSURES.to_vec(),
            trials: 20,
            simulation: SimulationConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl WorkflowConfig {
    /// Load a workflow file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> liwave::Result<Self> {
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.table_potentials.iter_mut().for_each(fix);
        cfg.figure_potentials.iter_mut().for_each(fix);
        fix(&mut cfg.potential);
        if let Some(g) = cfg.geometry.as_mut() {
            fix(g);
        }
        fix(&mut cfg.output_dir);
        Ok(cfg)
    }
}

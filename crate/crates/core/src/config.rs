//! JSON configuration files: potential definitions with unit tags.
//!
//! ```json
//! {
//!   "pair": "Li7-Xe",
//!   "variant": "BuckinghamCorner",
//!   "params": { "A": 9.93, "b": 0.959, "C6": 470, "C8": 47000, "r_m": 9.9 },
//!   "units": { "energy": "hartree", "length": "bohr" },
//!   "provenance": "..."
//! }
//! ```
//!
//! Dispersion coefficients C_n carry units of energy·length^n, `b` is an
//! inverse length. Everything is converted to SI on load.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::constants::{species_mass, AMU, ANGSTROM, BOHR, HARTREE, K_B, WAVENUMBER};
use crate::error::{Error, Result};
use crate::potentials::{CollisionSystem, PotentialSpec};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    std::fs::write(path, text + "\n").map_err(|source| Error::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    #[serde(default = "joule")]
    pub energy: String,
    #[serde(default = "meter")]
    pub length: String,
}

fn joule() -> String {
    "J".into()
}
fn meter() -> String {
    "m".into()
}

impl Default for Units {
    fn default() -> Self {
        Self { energy: joule(), length: meter() }
    }
}

pub fn energy_unit(tag: &str) -> Result<f64> {
    Ok(match tag.to_ascii_lowercase().as_str() {
        "j" | "joule" => 1.0,
        "hartree" | "au" | "eh" => HARTREE,
        "cm-1" | "cm^-1" | "wavenumber" => WAVENUMBER,
        "k" | "kelvin" => K_B,
        "ev" => 1.602_176_634e-19,
        "mev" => 1.602_176_634e-22,
        other => return Err(Error::Config(format!("unknown energy unit '{other}'"))),
    })
}

pub fn length_unit(tag: &str) -> Result<f64> {
    Ok(match tag.to_ascii_lowercase().as_str() {
        "m" | "meter" => 1.0,
        "bohr" | "au" | "a0" => BOHR,
        "angstrom" | "a" | "å" => ANGSTROM,
        "nm" => 1e-9,
        other => return Err(Error::Config(format!("unknown length unit '{other}'"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassesU {
    pub projectile: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub pair: String,
    pub variant: String,
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_well_depth: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses_u: Option<MassesU>,
    #[serde(default)]
    pub provenance: String,
}

impl PotentialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    fn param(&self, names: &[&str]) -> Result<f64> {
        names
            .iter()
            .find_map(|n| self.params.get(*n).copied())
            .ok_or_else(|| Error::Config(format!("{} potential needs parameter '{}'", self.variant, names[0])))
    }

    fn optional(&self, names: &[&str]) -> f64 {
        names.iter().find_map(|n| self.params.get(*n).copied()).unwrap_or(0.0)
    }

    /// Potential in SI units.
    pub fn spec(&self) -> Result<PotentialSpec> {
        let e = energy_unit(&self.units.energy)?;
        let l = length_unit(&self.units.length)?;
        let cn = |n: i32| e * l.powi(n);
        let spec = match self.variant.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "lennardjones" | "lj" => PotentialSpec::LennardJones {
                epsilon: self.param(&["epsilon"])? * e,
                r_m: self.param(&["r_m", "rm"])? * l,
            },
            "buckinghamcorner" | "bc" => PotentialSpec::BuckinghamCorner {
                a: self.param(&["A", "a"])? * e,
                b: self.param(&["b"])? / l,
                c6: self.param(&["C6", "c6"])? * cn(6),
                c8: self.optional(&["C8", "c8"]) * cn(8),
                r_m: self.param(&["r_m", "rm"])? * l,
            },
            "dispersion" => PotentialSpec::Dispersion {
                c6: self.param(&["C6", "c6"])? * cn(6),
                c8: self.optional(&["C8", "c8"]) * cn(8),
                c10: self.optional(&["C10", "c10"]) * cn(10),
                r_cut: self.param(&["r_cut"])? * l,
            },
            "squarewell" => PotentialSpec::SquareWell {
                depth: self.param(&["depth"])? * e,
                radius: self.param(&["radius"])? * l,
            },
            other => return Err(Error::Config(format!("unknown potential variant '{other}'"))),
        };
        spec.validated()
    }

    /// Target species named after the dash in `pair`, e.g. "Li7-Xe" → "xe".
    pub fn target_species(&self) -> Option<String> {
        self.pair.split('-').nth(1).map(|s| s.trim().to_ascii_lowercase())
    }

    pub fn system(&self) -> Result<CollisionSystem> {
        let (mp, mt) = match &self.masses_u {
            Some(m) => (m.projectile * AMU, m.target * AMU),
            None => {
                let mut parts = self.pair.split('-').map(str::trim);
                let p = parts.next().unwrap_or_default();
                let t = parts.next().unwrap_or_default();
                let lookup = |s: &str| {
                    species_mass(s).ok_or_else(|| Error::Config(format!("unknown species '{s}' in pair '{}'", self.pair)))
                };
                (lookup(p)?, lookup(t)?)
            }
        };
        CollisionSystem::new(mp, mt, self.spec()?)
    }

    /// Reference well depth in joules, if the file documents one.
    pub fn reference_depth(&self) -> Result<Option<f64>> {
        self.reference_well_depth.as_ref().map(|q| Ok(q.value * energy_unit(&q.unit)?)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion_on_load() {
        let text = r#"{"pair":"Li7-Xe","variant":"Dispersion",
            "params":{"C6":2.0,"r_cut":3.0},
            "units":{"energy":"hartree","length":"bohr"},"provenance":"test"}"#;
        let cfg: PotentialConfig = serde_json::from_str(text).unwrap();
        match cfg.spec().unwrap() {
            PotentialSpec::Dispersion { c6, c8, r_cut, .. } => {
                assert!((c6 / (2.0 * HARTREE * BOHR.powi(6)) - 1.0).abs() < 1e-14);
                assert_eq!(c8, 0.0);
                assert!((r_cut / (3.0 * BOHR) - 1.0).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.target_species().as_deref(), Some("xe"));
        assert!(cfg.system().unwrap().mu > 0.0);
    }

    #[test]
    fn bad_configs() {
        let missing: PotentialConfig =
            serde_json::from_str(r#"{"pair":"Li7-Xe","variant":"LennardJones","params":{"epsilon":1}}"#).unwrap();
        assert!(missing.spec().is_err());
        let unit: PotentialConfig = serde_json::from_str(
            r#"{"pair":"Li7-Xe","variant":"LennardJones","params":{"epsilon":1,"r_m":1},"units":{"energy":"furlong"}}"#,
        )
        .unwrap();
        assert!(unit.spec().is_err());
        let species: PotentialConfig = serde_json::from_str(
            r#"{"pair":"Li7-Zz","variant":"LennardJones","params":{"epsilon":1,"r_m":1}}"#,
        )
        .unwrap();
        assert!(species.system().is_err());
    }
}

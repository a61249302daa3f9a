//! Gas cell: molecular-flow pressure correction, ideal-gas density and
//! effective interaction length.
//!
//! Conductances use the Knudsen free-molecular results. A long round pipe
//! has `C = (v̄/4)·(πd²/4)·(4d/3L)`. A rectangular slit channel uses the
//! aperture conductance `v̄A/4` times a transmission probability
//! `W = 1/(1 + 3BL/16A)` (B = perimeter). That reduces to Knudsen's
//! `(4/3)·v̄A²/(BL)` for long channels and to the bare aperture as L → 0.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::read_json;
use crate::constants::K_B;
use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre_on;
use crate::thermal::TargetGasSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitChannel {
    pub width: f64,
    pub height: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub diameter: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub inner_length: f64,
    pub slit_channels: Vec<SlitChannel>,
    pub pipe: Pipe,
    pub temperature: f64,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub p_meas: f64,
    pub p_cell: f64,
    pub n_gas: f64,
    pub species: String,
}

/// Mean molecular speed `sqrt(8kT/πm)`.
pub fn mean_speed(mass: f64, temperature: f64) -> f64 {
    (8.0 * K_B * temperature / (PI * mass)).sqrt()
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be positive and finite, got {x}"))
    }
}

pub fn conductance_pipe(diameter: f64, length: f64, gas: &TargetGasSpec, temperature: f64) -> Result<f64> {
    check_positive("pipe diameter", diameter)?;
    check_positive("pipe length", length)?;
    check_positive("temperature", temperature)?;
    let vbar = mean_speed(gas.m_target, temperature);
    Ok(vbar / 4.0 * (PI * diameter * diameter / 4.0) * (4.0 * diameter / (3.0 * length)))
}

pub fn conductance_slit(width: f64, height: f64, length: f64, gas: &TargetGasSpec, temperature: f64) -> Result<f64> {
    check_positive("slit width", width)?;
    check_positive("slit height", height)?;
    check_positive("slit length", length)?;
    check_positive("temperature", temperature)?;
    let vbar = mean_speed(gas.m_target, temperature);
    let area = width * height;
    let perimeter = 2.0 * (width + height);
    let transmission = 1.0 / (1.0 + 3.0 * perimeter * length / (16.0 * area));
    Ok(vbar / 4.0 * area * transmission)
}

/// `p_cell/p_meas = C_pipe/(C_pipe + C_slits)` from the two conductances.
pub fn ratio_from_conductances(c_pipe: f64, c_slits: f64) -> Result<f64> {
    if !(c_pipe > 0.0) || !(c_slits >= 0.0) {
        return domain(format!("bad conductances: pipe {c_pipe}, slits {c_slits}"));
    }
    Ok(c_pipe / (c_pipe + c_slits))
}

impl CellGeometry {
    pub fn load(path: &Path) -> Result<Self> {
        read_json::<Self>(path)?.validated()
    }

    /// Illustrative geometry with 300 µm slits, tuned to the measured
    /// 0.90 pressure ratio and 66.5 mm effective length.
    pub fn default_geometry() -> Self {
        let slit = SlitChannel { width: 300e-6, height: 10e-3, length: 16.5e-3 };
        Self {
            inner_length: 50.0e-3,
            slit_channels: vec![slit, slit],
            pipe: Pipe { diameter: 16e-3, length: 1.77 },
            temperature: crate::constants::ROOM_TEMPERATURE,
            provenance: "reverse-engineered: slit height, slit length, inner length and pipe length \
                         chosen to give a 0.90 pressure ratio and 66.5 mm effective length"
                .into(),
        }
    }

    pub fn validated(self) -> Result<Self> {
        check_positive("inner length", self.inner_length)?;
        check_positive("temperature", self.temperature)?;
        check_positive("pipe diameter", self.pipe.diameter)?;
        check_positive("pipe length", self.pipe.length)?;
        for s in &self.slit_channels {
            check_positive("slit width", s.width)?;
            check_positive("slit height", s.height)?;
            check_positive("slit length", s.length)?;
        }
        Ok(self)
    }

    pub fn slit_conductance(&self, gas: &TargetGasSpec) -> Result<f64> {
        self.slit_channels
            .iter()
            .map(|s| conductance_slit(s.width, s.height, s.length, gas, self.temperature))
            .sum()
    }
}

pub fn pressure_correction(geom: &CellGeometry, gas: &TargetGasSpec) -> Result<f64> {
    let c_pipe = conductance_pipe(geom.pipe.diameter, geom.pipe.length, gas, geom.temperature)?;
    ratio_from_conductances(c_pipe, geom.slit_conductance(gas)?)
}

/// `inner + Σ slit/2`: the density is flat inside and falls linearly to
/// zero across each slit channel.
pub fn effective_length(geom: &CellGeometry) -> f64 {
    geom.inner_length + geom.slit_channels.iter().map(|s| s.length).sum::<f64>() / 2.0
}

/// Normalized density profile along the beam axis, z = 0 at the entrance
/// of the first slit channel. The first half of the channels ramp up, the
/// rest ramp down.
pub fn density_profile(geom: &CellGeometry, z: f64) -> f64 {
    let n_in = geom.slit_channels.len().div_ceil(2);
    let mut edge = 0.0;
    for (i, s) in geom.slit_channels.iter().enumerate() {
        if i == n_in {
            if z < edge + geom.inner_length {
                return if z >= edge { 1.0 } else { 0.0 };
            }
            edge += geom.inner_length;
        }
        if z >= edge && z < edge + s.length {
            let frac = (z - edge) / s.length;
            return if i < n_in { frac } else { 1.0 - frac };
        }
        edge += s.length;
    }
    if geom.slit_channels.len() == n_in && z >= edge && z < edge + geom.inner_length {
        return 1.0;
    }
    0.0
}

/// Effective length by piecewise Gauss–Legendre integration of the profile.
pub fn effective_length_numeric(geom: &CellGeometry) -> f64 {
    let n_in = geom.slit_channels.len().div_ceil(2);
    let mut pieces: Vec<f64> = geom.slit_channels[..n_in].iter().map(|s| s.length).collect();
    pieces.push(geom.inner_length);
    pieces.extend(geom.slit_channels[n_in..].iter().map(|s| s.length));
    let mut total = 0.0;
    let mut edge = 0.0;
    for len in pieces {
        for (x, w) in gauss_legendre_on(4, edge, edge + len) {
            total += w * density_profile(geom, x);
        }
        edge += len;
    }
    total
}

pub fn density(p_meas: f64, geom: &CellGeometry, gas: &TargetGasSpec) -> Result<GasState> {
    if !(p_meas >= 0.0) || !p_meas.is_finite() {
        return domain(format!("pressure must be non-negative, got {p_meas}"));
    }
    let ratio = pressure_correction(geom, gas)?;
    let p_cell = ratio * p_meas;
    Ok(GasState { p_meas, p_cell, n_gas: p_cell / (K_B * geom.temperature), species: gas.species.clone() })
}

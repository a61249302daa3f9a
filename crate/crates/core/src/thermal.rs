//! Velocity averaging: Maxwell–Boltzmann target gas and the beam's
//! velocity spread, both via Gauss–Legendre rules on truncated supports.

use serde::{Deserialize, Serialize};

use crate::constants::{species_mass, K_B, LI7_MASS, ROOM_TEMPERATURE};
use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre_on;

pub const DEFAULT_NODES: usize = 48;
/// FWHM of a Gaussian in units of its standard deviation, 2√(2 ln 2).
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;
const SUPPORT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetGasSpec {
    pub species: String,
    pub m_target: f64,
    pub temperature: f64,
}

impl TargetGasSpec {
    pub fn new(species: impl Into<String>, m_target: f64, temperature: f64) -> Result<Self> {
        if !(m_target > 0.0 && m_target.is_finite()) {
            return domain("target mass must be positive");
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return domain(format!("temperature must be non-negative, got {temperature}"));
        }
        Ok(Self { species: species.into(), m_target, temperature })
    }

    /// Named rare gas at room temperature.
    pub fn named(species: &str) -> Result<Self> {
        let m = species_mass(species).ok_or_else(|| crate::Error::Config(format!("unknown species {species}")))?;
        Self::new(species.to_ascii_lowercase(), m, ROOM_TEMPERATURE)
    }

    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.species.clone(), self.m_target, temperature)
    }

    /// Most probable speed √(2k_BT/m).
    pub fn thermal_speed(&self) -> f64 {
        (2.0 * K_B * self.temperature / self.m_target).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub m_projectile: f64,
    pub u_mean: f64,
    pub fwhm_fraction: f64,
}

impl BeamSpec {
    pub fn new(m_projectile: f64, u_mean: f64, fwhm_fraction: f64) -> Result<Self> {
        if !(m_projectile > 0.0 && u_mean > 0.0 && u_mean.is_finite()) {
            return domain("beam mass and mean velocity must be positive");
        }
        if !(0.0..1.0).contains(&fwhm_fraction) {
            return domain(format!("fwhm fraction {fwhm_fraction} outside [0, 1)"));
        }
        Ok(Self { m_projectile, u_mean, fwhm_fraction })
    }

    /// ⁷Li beam with the usual 25% FWHM spread.
    pub fn lithium(u_mean: f64) -> Result<Self> {
        Self::new(LI7_MASS, u_mean, 0.25)
    }

    pub fn monochromatic(&self) -> Self {
        Self { fwhm_fraction: 0.0, ..*self }
    }
}

/// One quadrature node: speed (m/s) and normalized weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub v: f64,
    pub weight: f64,
}

/// Nodes carrying less than this fraction of the total weight are dropped:
/// they cannot move an average at any tolerance we use, and near v_r = 0
/// they would ask the radial solver for k → 0 amplitudes.
const NEGLIGIBLE_WEIGHT: f64 = 1e-12;

fn normalized(raw: Vec<(f64, f64)>) -> Vec<Node> {
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    let raw: Vec<_> = raw.into_iter().filter(|(_, w)| *w > NEGLIGIBLE_WEIGHT * total).collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    raw.into_iter()
        .map(|(v, w)| Node { v, weight: w / total })
        .collect()
}

/// Nodes for the relative speed between a projectile moving at `beam_v`
/// and an isotropic Maxwell–Boltzmann target:
/// P(v_r) ∝ (v_r/v)·[exp(−(v_r−v)²/v_th²) − exp(−(v_r+v)²/v_th²)].
pub fn relative_speed_nodes(beam_v: f64, gas: &TargetGasSpec, n_nodes: usize) -> Result<Vec<Node>> {
    if n_nodes < 2 {
        return domain(format!("need at least 2 nodes, got {n_nodes}"));
    }
    if !(beam_v > 0.0 && beam_v.is_finite()) {
        return domain("beam velocity must be positive");
    }
    let vth = gas.thermal_speed();
    if vth == 0.0 {
        return Ok(vec![Node { v: beam_v, weight: 1.0 }]);
    }
    let sigma = vth / std::f64::consts::SQRT_2;
    let lo = (beam_v - SUPPORT_SIGMAS * sigma).max(0.0);
    let hi = beam_v + SUPPORT_SIGMAS * sigma;
    let raw = gauss_legendre_on(n_nodes, lo, hi)
        .into_iter()
        .map(|(vr, w)| {
            let a = ((vr - beam_v) / vth).powi(2);
            let b = ((vr + beam_v) / vth).powi(2);
            // e^{-a} − e^{-b} = e^{-a}·(1 − e^{a−b}) without cancellation.
            let density = (vr / beam_v) * (-a).exp() * (-((a - b).exp_m1()));
            (vr, w * density)
        })
        .collect();
    Ok(normalized(raw))
}

/// Nodes for the beam distribution P(v) ∝ v³·exp(−(v−u)²/(2s²)),
/// s = u·fwhm/2.3548.
pub fn beam_nodes(beam: &BeamSpec, n_nodes: usize) -> Result<Vec<Node>> {
    if n_nodes < 2 {
        return domain(format!("need at least 2 nodes, got {n_nodes}"));
    }
    let u = beam.u_mean;
    let s = u * beam.fwhm_fraction / FWHM_PER_SIGMA;
    if s == 0.0 {
        return Ok(vec![Node { v: u, weight: 1.0 }]);
    }
    let lo = (u - SUPPORT_SIGMAS * s).max(0.0);
    let hi = u + SUPPORT_SIGMAS * s;
    let raw = gauss_legendre_on(n_nodes, lo, hi)
        .into_iter()
        .map(|(v, w)| (v, w * v.powi(3) * (-(v - u).powi(2) / (2.0 * s * s)).exp()))
        .collect();
    Ok(normalized(raw))
}

/// Weighted mean of `f` over nodes, summed in node order.
pub fn average<F: FnMut(f64) -> Result<f64>>(nodes: &[Node], mut f: F) -> Result<f64> {
    let mut acc = 0.0;
    for n in nodes {
        acc += n.weight * f(n.v)?;
    }
    Ok(acc)
}

/// Relative change of an averaged quantity when the node count doubles:
/// |A(2N) − A(N)| / |A(N)|.
pub fn doubled_node_check<F: FnMut(usize) -> Result<f64>>(n_nodes: usize, mut averaged: F) -> Result<f64> {
    let a = averaged(n_nodes)?;
    let b = averaged(2 * n_nodes)?;
    Ok(((b - a) / a).abs())
}

//! Complex index of refraction per unit gas density, cross sections and
//! glory scans.
//!
//! With a target gas at temperature T the index is
//!
//! ```text
//! (n − 1)/n_gas = 2π·m_p/(μ·k_lab²) · ⟨f(k_rel, 0)⟩
//! ```
//!
//! where ⟨·⟩ runs over the relative-speed distribution. The weighting makes
//! the attenuation 2·Im(n−1)·k_lab equal n_gas·⟨σ·v_rel⟩/v, and it reduces to
//! 2π·f/(k_lab·k_rel) for a stationary target.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{domain, Error, Result};
use crate::potentials::CollisionSystem;
use crate::scattering::{build_table, forward_amplitude, ForwardAmplitude, ScatteringPolicy};
use crate::thermal::{beam_nodes, relative_speed_nodes, BeamSpec, TargetGasSpec, DEFAULT_NODES};

/// Exponent of the u^(−7/5) decrease of (n−1) with velocity.
pub const VELOCITY_EXPONENT: f64 = 1.4;
pub const DEFAULT_SCAN_POINTS: usize = 60;

/// Anything that can supply f(k, 0) for a relative wavevector.
pub trait AmplitudeSource {
    fn amplitude(&mut self, k_rel: f64) -> Result<ForwardAmplitude>;
}

/// Builds a full phase-shift table for every request.
pub struct DirectAmplitude {
    system: CollisionSystem,
    policy: ScatteringPolicy,
}

impl DirectAmplitude {
    pub fn new(system: CollisionSystem, policy: ScatteringPolicy) -> Self {
        Self { system, policy }
    }
}

impl AmplitudeSource for DirectAmplitude {
    fn amplitude(&mut self, k_rel: f64) -> Result<ForwardAmplitude> {
        forward_amplitude(&build_table(&self.system, k_rel, &self.policy)?)
    }
}

/// Cubic interpolation of f(k) on a fixed logarithmic grid in k, filled
/// lazily. Requests below `k_floor` fall through to direct evaluation.
pub struct InterpolatedAmplitude {
    direct: DirectAmplitude,
    log_ratio: f64,
    k_ref: f64,
    k_floor: f64,
    cache: HashMap<i64, (f64, f64)>,
}

impl InterpolatedAmplitude {
    /// `ratio_step` is the relative spacing of the k grid (0.02 = 2%).
    pub fn new(system: CollisionSystem, policy: ScatteringPolicy, ratio_step: f64) -> Self {
        // Grid anchored at the wavevector of 1 m/s relative speed so that
        // nodes do not depend on query order.
        let k_ref = system.mu / HBAR;
        Self {
            direct: DirectAmplitude::new(system, policy),
            log_ratio: (1.0 + ratio_step).ln(),
            k_ref,
            k_floor: 150.0 * k_ref,
            cache: HashMap::new(),
        }
    }

    fn node(&mut self, i: i64) -> Result<(f64, f64)> {
        if let Some(&v) = self.cache.get(&i) {
            return Ok(v);
        }
        let k = self.k_ref * (i as f64 * self.log_ratio).exp();
        let f = self.direct.amplitude(k)?;
        self.cache.insert(i, (f.f_re, f.f_im));
        Ok((f.f_re, f.f_im))
    }

    pub fn evaluated_nodes(&self) -> usize {
        self.cache.len()
    }
}

impl AmplitudeSource for InterpolatedAmplitude {
    fn amplitude(&mut self, k_rel: f64) -> Result<ForwardAmplitude> {
        if k_rel < self.k_floor {
            return self.direct.amplitude(k_rel);
        }
        let x = (k_rel / self.k_ref).ln() / self.log_ratio;
        let i0 = x.floor() as i64;
        let t = x - i0 as f64;
        // Four-point Lagrange weights on nodes i0−1 .. i0+2.
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        let (mut re, mut im) = (0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            let (r, m) = self.node(i0 - 1 + j as i64)?;
            re += wj * r;
            im += wj * m;
        }
        Ok(ForwardAmplitude { k_rel, f_re: re, f_im: im })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPolicy {
    pub scattering: ScatteringPolicy,
    pub target_nodes: usize,
    /// Outer average over the beam velocity distribution when set.
    pub beam_nodes: Option<usize>,
}

impl Default for IndexPolicy {
    fn default() -> Self {
        Self { scattering: ScatteringPolicy::survey(), target_nodes: DEFAULT_NODES, beam_nodes: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub u_mean: f64,
    pub re_per_density: f64,
    pub im_per_density: f64,
    pub rho: f64,
    pub k_lab: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im_err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_err: Option<f64>,
}

impl IndexResult {
    /// Result from given Re/Im per density; ρ is derived.
    pub fn from_parts(u_mean: f64, k_lab: f64, re: f64, im: f64) -> Self {
        Self {
            u_mean,
            re_per_density: re,
            im_per_density: im,
            rho: re / im,
            k_lab,
            re_err: None,
            im_err: None,
            rho_err: None,
        }
    }
}

/// Measured index of refraction for lithium at u = 1075 m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredReference {
    pub species: &'static str,
    pub re_per_density: f64,
    pub re_err: f64,
    pub im_per_density: f64,
    pub im_err: f64,
    pub rho: f64,
    pub rho_err: f64,
}

pub const MEASURED_U: f64 = 1075.0;

pub const MEASURED_AT_1075: [MeasuredReference; 3] = [
    MeasuredReference { species: "argon", re_per_density: 1.20e-29, re_err: 0.11e-29, im_per_density: 2.11e-29, im_err: 0.06e-29, rho: 0.56, rho_err: 0.05 },
    MeasuredReference { species: "krypton", re_per_density: 1.57e-29, re_err: 0.10e-29, im_per_density: 1.99e-29, im_err: 0.07e-29, rho: 0.78, rho_err: 0.04 },
    MeasuredReference { species: "xenon", re_per_density: 1.82e-29, re_err: 0.07e-29, im_per_density: 2.40e-29, im_err: 0.06e-29, rho: 0.70, rho_err: 0.03 },
];

/// Laboratory wavevector m_p·u/ħ.
pub fn k_lab(m_projectile: f64, u: f64) -> f64 {
    m_projectile * u / HBAR
}

/// (n−1)/n_gas at a single beam speed, target-averaged.
fn index_at_speed<S: AmplitudeSource>(
    source: &mut S,
    system: &CollisionSystem,
    v: f64,
    gas: &TargetGasSpec,
    nodes: usize,
) -> Result<(f64, f64)> {
    let kl = k_lab(system.m_projectile, v);
    let pref = 2.0 * std::f64::consts::PI * system.m_projectile / (system.mu * kl * kl);
    let (mut re, mut im) = (0.0, 0.0);
    for node in relative_speed_nodes(v, gas, nodes)? {
        let f = source.amplitude(system.mu * node.v / HBAR)?;
        re += node.weight * f.f_re;
        im += node.weight * f.f_im;
    }
    Ok((pref * re, pref * im))
}

/// Index per density using the given amplitude source.
pub fn index_with_source<S: AmplitudeSource>(
    source: &mut S,
    system: &CollisionSystem,
    beam: &BeamSpec,
    gas: &TargetGasSpec,
    policy: &IndexPolicy,
) -> Result<IndexResult> {
    if (beam.m_projectile - system.m_projectile).abs() > 1e-9 * system.m_projectile
        || (gas.m_target - system.m_target).abs() > 1e-9 * system.m_target
    {
        return domain("beam/gas masses disagree with the collision system");
    }
    let u = beam.u_mean;
    let kl = k_lab(system.m_projectile, u);
    let (re, im) = match policy.beam_nodes {
        Some(n) if beam.fwhm_fraction > 0.0 => {
            // Average the phase per unit length, (n−1)·k, over the beam.
            let (mut re, mut im) = (0.0, 0.0);
            for b in beam_nodes(beam, n)? {
                let (r, i) = index_at_speed(source, system, b.v, gas, policy.target_nodes)?;
                let kb = k_lab(system.m_projectile, b.v);
                re += b.weight * r * kb;
                im += b.weight * i * kb;
            }
            (re / kl, im / kl)
        }
        _ => index_at_speed(source, system, u, gas, policy.target_nodes)?,
    };
    Ok(IndexResult::from_parts(u, kl, re, im))
}

/// Index per density with direct phase-shift tables for every node.
pub fn index_per_density(
    system: &CollisionSystem,
    beam: &BeamSpec,
    gas: &TargetGasSpec,
    policy: &IndexPolicy,
) -> Result<IndexResult> {
    let mut source = DirectAmplitude::new(*system, policy.scattering);
    index_with_source(&mut source, system, beam, gas, policy)
}

/// Doubling the target nodes must change Re and Im by less than this.
pub const NODE_TOLERANCE: f64 = 1e-4;
/// Upper limit for [`index_converged`].
pub const MAX_TARGET_NODES: usize = 1536;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergedIndex {
    pub result: IndexResult,
    /// Node count of the reported result.
    pub target_nodes: usize,
    /// Relative change of Re/Im (larger of the two) on the last doubling.
    pub change: f64,
}

/// Index with the target node count doubled, starting from
/// `policy.target_nodes`, until Re and Im both change by less than
/// `tolerance`. Deep wells put a fast ripple on f(k) that the default
/// node count does not average out.
pub fn index_converged<S: AmplitudeSource>(
    source: &mut S,
    system: &CollisionSystem,
    beam: &BeamSpec,
    gas: &TargetGasSpec,
    policy: &IndexPolicy,
    tolerance: f64,
) -> Result<ConvergedIndex> {
    let mut n = policy.target_nodes;
    let mut prev = index_with_source(source, system, beam, gas, policy)?;
    let mut change = f64::INFINITY;
    while 2 * n <= MAX_TARGET_NODES {
        let next = index_with_source(source, system, beam, gas, &IndexPolicy { target_nodes: 2 * n, ..*policy })?;
        change = ((next.re_per_density - prev.re_per_density) / prev.re_per_density)
            .abs()
            .max(((next.im_per_density - prev.im_per_density) / prev.im_per_density).abs());
        if change < tolerance {
            return Ok(ConvergedIndex { result: prev, target_nodes: n, change });
        }
        n *= 2;
        prev = next;
    }
    Err(Error::NotConverged(format!(
        "thermal average at {n} nodes, last change {change:e} > {tolerance:e}"
    )))
}

/// Effective cross section 2·Im(n−1)/n_gas·k_lab (m²).
pub fn sigma_eff(result: &IndexResult) -> f64 {
    2.0 * result.im_per_density * result.k_lab
}

/// Logarithmically spaced velocities from `lo` to `hi` inclusive.
pub fn log_velocity_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return domain(format!("bad velocity grid [{lo}, {hi}] with {n} points"));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub u: f64,
    /// u^{7/5}·Re(n−1)/n_gas
    pub re_scaled: f64,
    /// u^{7/5}·Im(n−1)/n_gas
    pub im_scaled: f64,
    pub rho: f64,
    pub sigma: f64,
    pub re_per_density: f64,
    pub im_per_density: f64,
}

impl ScanRow {
    fn from_result(r: &IndexResult) -> Self {
        let s = r.u_mean.powf(VELOCITY_EXPONENT);
        Self {
            u: r.u_mean,
            re_scaled: s * r.re_per_density,
            im_scaled: s * r.im_per_density,
            rho: r.rho,
            sigma: sigma_eff(r),
            re_per_density: r.re_per_density,
            im_per_density: r.im_per_density,
        }
    }
}

/// Index versus beam velocity on a log grid. Amplitudes come from a shared
/// interpolation grid in k (2% spacing) so that neighbouring velocities
/// reuse phase-shift tables.
pub fn glory_scan(
    system: &CollisionSystem,
    gas: &TargetGasSpec,
    beam_fwhm: f64,
    u_min: f64,
    u_max: f64,
    n_points: usize,
    policy: &IndexPolicy,
) -> Result<Vec<ScanRow>> {
    let mut source = InterpolatedAmplitude::new(*system, policy.scattering, 0.02);
    glory_scan_with_source(&mut source, system, gas, beam_fwhm, u_min, u_max, n_points, policy)
}

#[allow(clippy::too_many_arguments)]
pub fn glory_scan_with_source<S: AmplitudeSource>(
    source: &mut S,
    system: &CollisionSystem,
    gas: &TargetGasSpec,
    beam_fwhm: f64,
    u_min: f64,
    u_max: f64,
    n_points: usize,
    policy: &IndexPolicy,
) -> Result<Vec<ScanRow>> {
    log_velocity_grid(u_min, u_max, n_points)?
        .into_iter()
        .map(|u| {
            let beam = BeamSpec::new(system.m_projectile, u, beam_fwhm)?;
            let r = index_with_source(source, system, &beam, gas, policy)?;
            Ok(ScanRow::from_result(&r))
        })
        .collect()
}

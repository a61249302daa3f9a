//! Elastic phase shifts and the complex forward scattering amplitude.
//!
//! Phase shifts come from Numerov integration of the radial equation
//!
//! ```text
//! u''(r) = [U(r) + l(l+1)/r² − k²]·u(r),   U = 2μV/ħ²
//! ```
//!
//! matched to Riccati–Bessel functions at two outer radii. They are
//! defined modulo π. Beyond the crossover `(l+½) > 4·k·r_m` the
//! dispersion-tail (eikonal Born) expression is used instead.

pub mod bessel;
mod numerov;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{domain, Result};
use crate::potentials::CollisionSystem;

pub use numerov::{NumericPhase, RadialSolver};

/// Numerical controls for the phase-shift engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPolicy {
    /// Convergence target for |Δδ| between successive refinements.
    pub tolerance: f64,
    /// Initial step is the shortest local wavelength divided by this.
    pub steps_per_wavelength: f64,
    /// Maximum number of step halvings after the initial grid.
    pub max_refinements: u32,
    /// Match where |V|/E drops below this.
    pub match_threshold: f64,
    /// WKB decay integral ∫κ dr required between the start radius and the
    /// inner turning point.
    pub decay_integral: f64,
    /// Crossover to the dispersion tail at (l+½) > factor·k·r_m.
    pub crossover_factor: f64,
    /// Table terminates after this many consecutive |δ_l| below `tail_zero`.
    pub tail_zero: f64,
    pub tail_run: u32,
}

impl Default for ScatteringPolicy {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            steps_per_wavelength: 20.0,
            max_refinements: 6,
            match_threshold: 1e-8,
            decay_integral: 30.0,
            crossover_factor: 4.0,
            tail_zero: 1e-8,
            tail_run: 5,
        }
    }
}

impl ScatteringPolicy {
    /// Looser controls for velocity scans and thermal averages, where
    /// thousands of tables are built. Phase errors stay far below what
    /// moves ρ or σ at the 1e−4 level.
    pub fn survey() -> Self {
        Self {
            tolerance: 1e-6,
            match_threshold: 1e-6,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMethod {
    Numeric,
    BornTail,
}

impl std::fmt::Display for PhaseMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Numeric => "numeric",
            Self::BornTail => "born_tail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShift {
    pub l: u32,
    pub delta: f64,
    pub method: PhaseMethod,
}

/// Phase shifts δ_0..δ_lmax at one relative wavevector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftTable {
    pub k_rel: f64,
    pub shifts: Vec<PhaseShift>,
}

impl PhaseShiftTable {
    /// Builds a table from raw δ values (all tagged numeric), for tests and
    /// externally supplied shifts.
    pub fn from_deltas(k_rel: f64, deltas: &[f64]) -> Result<Self> {
        let table = Self {
            k_rel,
            shifts: deltas
                .iter()
                .enumerate()
                .map(|(l, &delta)| PhaseShift { l: l as u32, delta, method: PhaseMethod::Numeric })
                .collect(),
        };
        table.validate()?;
        Ok(table)
    }

    pub fn l_max(&self) -> u32 {
        self.shifts.last().map_or(0, |s| s.l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_rel > 0.0 && self.k_rel.is_finite()) {
            return domain("table wavevector must be positive");
        }
        for (i, s) in self.shifts.iter().enumerate() {
            if s.l as usize != i {
                return domain(format!("non-contiguous l at position {i}"));
            }
            if !s.delta.is_finite() {
                return domain(format!("non-finite phase shift at l = {}", s.l));
            }
        }
        Ok(())
    }
}

/// f(k, 0) split into real and imaginary parts (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardAmplitude {
    pub k_rel: f64,
    pub f_re: f64,
    pub f_im: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// δ_l from numerical integration of the radial equation.
pub fn phase_shift_numeric(
    system: &CollisionSystem,
    k_rel: f64,
    l: u32,
    policy: &ScatteringPolicy,
) -> Result<f64> {
    let mut solver = RadialSolver::new(system, k_rel, policy)?;
    Ok(solver.phase_shift(l)?.delta)
}

/// Dispersion-tail phase shift
/// δ_l = (μ/ħ²k)·Σ_n C_n·I_n·b^{1−n}, b = (l+½)/k,
/// with I_6 = 3π/16, I_8 = 5π/32, I_10 = 35π/256. For a pure C6 tail this is
/// 3π·μ·C6·k⁴ / (16·ħ²·(l+½)⁵).
pub fn phase_shift_born_tail(system: &CollisionSystem, k_rel: f64, l: u32) -> Result<f64> {
    if !(k_rel > 0.0 && k_rel.is_finite()) {
        return domain("k_rel must be positive");
    }
    let b = (l as f64 + 0.5) / k_rel;
    if b < 2.0 * system.potential.range_scale() {
        return domain(format!(
            "dispersion tail invalid at l = {l}: impact parameter {b:e} m inside 2·r_m"
        ));
    }
    Ok(born_tail_unchecked(system, k_rel, l))
}

pub(crate) fn born_tail_unchecked(system: &CollisionSystem, k_rel: f64, l: u32) -> f64 {
    use std::f64::consts::PI;
    let (c6, c8, c10) = system.potential.dispersion_coefficients();
    let lh = l as f64 + 0.5;
    let b = lh / k_rel;
    let b2 = b * b;
    let pref = system.mu / (HBAR * HBAR * k_rel);
    let c6_term = 3.0 * PI * system.mu * c6 * k_rel.powi(4) / (16.0 * HBAR * HBAR * lh.powi(5));
    let higher = (5.0 * PI / 32.0) * c8 / (b2 * b2 * b2 * b) + (35.0 * PI / 256.0) * c10 / (b2.powi(4) * b);
    c6_term + pref * higher
}

/// Smallest l at which the dispersion tail takes over. The lowest partial
/// waves are always integrated: at very low k the tail formula says nothing
/// about the short-range s-, p- and d-wave shifts.
pub fn crossover_l(system: &CollisionSystem, k_rel: f64, policy: &ScatteringPolicy) -> u32 {
    let x = policy.crossover_factor * k_rel * system.potential.range_scale() - 0.5;
    ((x.floor() + 1.0).max(0.0) as u32).max(MIN_NUMERIC_WAVES)
}

const MIN_NUMERIC_WAVES: u32 = 3;

/// Numeric shifts up to the crossover, dispersion tail beyond, stopping
/// once `tail_run` consecutive |δ_l| fall below `tail_zero`.
pub fn build_table(
    system: &CollisionSystem,
    k_rel: f64,
    policy: &ScatteringPolicy,
) -> Result<PhaseShiftTable> {
    if !(k_rel > 0.0 && k_rel.is_finite()) {
        return domain("k_rel must be positive");
    }
    let l_cross = crossover_l(system, k_rel, policy);
    let mut solver = RadialSolver::new(system, k_rel, policy)?;
    let mut shifts = Vec::new();
    let mut small_run = 0;
    let mut l = 0u32;
    loop {
        let (delta, method) = if l < l_cross {
            (solver.phase_shift(l)?.delta, PhaseMethod::Numeric)
        } else {
            (born_tail_unchecked(system, k_rel, l), PhaseMethod::BornTail)
        };
        shifts.push(PhaseShift { l, delta, method });
        if delta.abs() < policy.tail_zero {
            small_run += 1;
            if small_run >= policy.tail_run {
                break;
            }
        } else {
            small_run = 0;
        }
        l += 1;
    }
    Ok(PhaseShiftTable { k_rel, shifts })
}

/// f(k,0) = (1/2ik)·Σ_l (2l+1)(e^{2iδ_l} − 1), summed in ascending l.
pub fn forward_amplitude(table: &PhaseShiftTable) -> Result<ForwardAmplitude> {
    table.validate()?;
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for s in &table.shifts {
        let w = (2 * s.l + 1) as f64;
        let sn = s.delta.sin();
        re.add(w * (2.0 * s.delta).sin());
        im.add(w * 2.0 * sn * sn);
    }
    let k2 = 2.0 * table.k_rel;
    Ok(ForwardAmplitude { k_rel: table.k_rel, f_re: re.value() / k2, f_im: im.value() / k2 })
}

/// σ = (4π/k²)·Σ_l (2l+1)·sin²δ_l.
pub fn total_cross_section(table: &PhaseShiftTable) -> Result<f64> {
    table.validate()?;
    let mut acc = CompensatedSum::default();
    for s in &table.shifts {
        let sn = s.delta.sin();
        acc.add((2 * s.l + 1) as f64 * sn * sn);
    }
    Ok(4.0 * std::f64::consts::PI / (table.k_rel * table.k_rel) * acc.value())
}

/// Relative wavevector μ·v/ħ.
pub fn wavevector(mass: f64, speed: f64) -> f64 {
    mass * speed / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn amplitude_trivial_cases() {
        let t = PhaseShiftTable::from_deltas(2.0, &[0.0; 5]).unwrap();
        let f = forward_amplitude(&t).unwrap();
        assert_eq!((f.f_re, f.f_im), (0.0, 0.0));

        let t = PhaseShiftTable::from_deltas(2.0, &[PI / 2.0, 0.0, 0.0]).unwrap();
        let f = forward_amplitude(&t).unwrap();
        assert!(f.f_re.abs() < 1e-15);
        assert!((f.f_im - 0.5).abs() < 1e-15);
        let s = total_cross_section(&t).unwrap();
        assert!((s - 4.0 * PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_table_rejected() {
        assert!(PhaseShiftTable::from_deltas(1.0, &[0.1, f64::NAN]).is_err());
        assert!(PhaseShiftTable::from_deltas(0.0, &[0.1]).is_err());
        let mut t = PhaseShiftTable::from_deltas(1.0, &[0.1, 0.2]).unwrap();
        t.shifts[1].l = 3;
        assert!(forward_amplitude(&t).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-30);
    }
}

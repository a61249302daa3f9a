use std::f64::consts::PI;

use crate::constants::HBAR;
use crate::error::{domain, Error, Result};
use crate::potentials::{CollisionSystem, PotentialSpec};
use crate::quadrature::gauss_legendre_on;

use super::bessel::{riccati_j, riccati_n};
use super::ScatteringPolicy;

/// One converged numeric phase shift with its integration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPhase {
    pub l: u32,
    /// δ_l in (−π/2, π/2], Richardson-extrapolated and tail-corrected.
    pub delta: f64,
    /// Refinement level of the finest grid used (step = h0 / 2^level).
    pub level: u32,
    pub step: f64,
    pub r_match: f64,
    /// First-order contribution of the potential beyond the matching radius.
    pub tail_correction: f64,
    /// |Δδ| between the last two extrapolated estimates.
    pub change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Start {
    Wall,
    Origin,
    Power,
    Wkb,
}

/// Radial integrator for one collision system at fixed k. Potential values
/// are cached per refinement level and shared between partial waves.
pub struct RadialSolver {
    pot: PotentialSpec,
    k: f64,
    k2: f64,
    /// 2μ/ħ², converts energies to 1/m².
    u_scale: f64,
    energy: f64,
    policy: ScatteringPolicy,
    anchor: f64,
    h0: f64,
    /// Potential discontinuity: (radius, U(r−), U(r+)).
    jump: Option<(f64, f64, f64)>,
    compact: bool,
    r_quiet: f64,
    levels: Vec<Vec<f64>>,
    start_level: u32,
}

fn wrap(d: f64) -> f64 {
    let mut x = d % PI;
    if x > PI / 2.0 {
        x -= PI;
    } else if x <= -PI / 2.0 {
        x += PI;
    }
    x
}

impl RadialSolver {
    pub fn new(system: &CollisionSystem, k: f64, policy: &ScatteringPolicy) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return domain("k_rel must be positive");
        }
        let pot = system.potential;
        let u_scale = 2.0 * system.mu / (HBAR * HBAR);
        let k2 = k * k;
        let energy = k2 / u_scale;

        let depth = match pot {
            PotentialSpec::LennardJones { .. } | PotentialSpec::BuckinghamCorner { .. } => {
                pot.well_parameters()?.0
            }
            PotentialSpec::Dispersion { r_cut, .. } => -pot.value(r_cut),
            PotentialSpec::SquareWell { depth, .. } => depth,
        }
        .max(0.0);
        let k_local = (k2 + u_scale * depth).sqrt();
        let mut h0 = 2.0 * PI / k_local / policy.steps_per_wavelength;

        let compact = pot.compact_support().is_some();
        let r_quiet = match pot.compact_support() {
            Some(r) => r,
            None => quiet_radius(&pot, policy.match_threshold * energy),
        };

        let mut solver = Self {
            pot,
            k,
            k2,
            u_scale,
            energy,
            policy: *policy,
            anchor: 0.0,
            h0,
            jump: None,
            compact,
            r_quiet,
            levels: Vec::new(),
            start_level: 0,
        };

        match pot {
            PotentialSpec::Dispersion { r_cut, .. } => solver.anchor = r_cut,
            PotentialSpec::SquareWell { depth, radius } => {
                let n = (radius / h0).ceil().max(4.0);
                h0 = radius / n;
                solver.anchor = 0.0;
                solver.jump = Some((radius, -u_scale * depth, 0.0));
            }
            _ => {
                let (r_s, _) = solver.start_radius(0)?;
                solver.anchor = r_s;
                // Keep h²g/12 small at the deepest start point.
                let g0 = solver.g_exact(0, r_s);
                if g0 > 0.0 {
                    h0 = h0.min(1.0 / g0.sqrt());
                }
            }
        }
        solver.h0 = h0;
        Ok(solver)
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn g_exact(&self, l: u32, r: f64) -> f64 {
        let cent = if l == 0 { 0.0 } else { (l as f64) * (l as f64 + 1.0) / (r * r) };
        self.u_scale * self.pot.value(r) + cent - self.k2
    }

    /// Start radius and start type for partial wave l.
    fn start_radius(&self, l: u32) -> Result<(f64, Start)> {
        let r_scale = self.pot.range_scale();
        let (r_lo, floor_start) = match self.pot {
            PotentialSpec::Dispersion { r_cut, .. } => (r_cut, Start::Wall),
            PotentialSpec::SquareWell { .. } => {
                if l == 0 {
                    return Ok((0.0, Start::Origin));
                }
                (1e-6 * r_scale, Start::Power)
            }
            _ => (0.02 * r_scale, Start::Wkb),
        };
        let r_far = (self.r_quiet.max(r_scale) * 4.0).max(3.0 * (l as f64 + 0.5) / self.k);
        // Innermost classically allowed point.
        let mut r = r_lo * (1.0 + 1e-12);
        if self.g_exact(l, r) < 0.0 {
            return Ok((r_lo, floor_start));
        }
        let ratio = 1.002;
        let mut prev = r;
        while self.g_exact(l, r) >= 0.0 {
            prev = r;
            r *= ratio;
            if r > r_far {
                return Err(Error::NumericFailure {
                    l,
                    diagnostics: format!("no classically allowed region below {r_far:e} m"),
                });
            }
        }
        let (mut a, mut b) = (prev, r);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.g_exact(l, m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let r_turn = a;
        // Walk inward until the WKB decay integral is large enough.
        let mut r = r_turn;
        let mut integral = 0.0;
        let mut kappa = 0.0_f64;
        while integral < self.policy.decay_integral {
            let dr = (0.01 * r).min(0.25 / kappa.max(1e-300));
            let r_next = r - dr;
            if r_next <= r_lo {
                return Ok((r_lo, floor_start));
            }
            let kn = self.g_exact(l, r_next).max(0.0).sqrt();
            integral += 0.5 * (kappa + kn) * dr;
            kappa = kn;
            r = r_next;
        }
        let kind = if floor_start == Start::Power { Start::Power } else { Start::Wkb };
        Ok((r, kind))
    }

    fn ensure_level(&mut self, level: u32, n: usize) {
        while self.levels.len() <= level as usize {
            self.levels.push(Vec::new());
        }
        let h = self.h0 / f64::powi(2.0, level as i32);
        let (anchor, scale, pot) = (self.anchor, self.u_scale, self.pot);
        let grid = &mut self.levels[level as usize];
        let wall = matches!(pot, PotentialSpec::Dispersion { .. });
        for j in grid.len()..=n {
            let r = anchor + j as f64 * h;
            let v = if j == 0 && wall { 0.0 } else if r > 0.0 { scale * pot.value(r) } else { scale * pot.value(1e-300) };
            grid.push(v);
        }
    }

    /// Single-grid δ_l at the given refinement level (before Richardson).
    fn integrate(&mut self, l: u32, level: u32, start: (f64, Start)) -> Result<(f64, f64, f64)> {
        let h = self.h0 / f64::powi(2.0, level as i32);
        let lambda = 2.0 * PI / self.k;
        let b = (l as f64 + 0.5) / self.k;
        let r1_target = if self.compact {
            (self.r_quiet + lambda / 8.0).max(1.05 * b + lambda)
        } else {
            self.r_quiet.max(1.05 * b + lambda)
        };
        let n1 = ((r1_target - self.anchor) / h).ceil() as usize;
        let n2 = n1 + ((lambda / (4.0 * h)).round() as usize).max(2);
        self.ensure_level(level, n2 + 1);

        let (r_s, kind) = start;
        let mut js = match kind {
            Start::Wall | Start::Origin => 0,
            _ => ((r_s - self.anchor) / h).floor().max(0.0) as usize,
        };
        if kind == Start::Power && js == 0 {
            js = 1;
        }
        if js + 2 >= n1 {
            return Err(Error::NumericFailure { l, diagnostics: "start radius beyond matching radius".into() });
        }
        let jump_idx = self
            .jump
            .map(|(a, lo, hi)| (((a - self.anchor) / h).round() as usize, lo, hi));

        let grid = &self.levels[level as usize];
        let anchor = self.anchor;
        let k2 = self.k2;
        let ll = (l as f64) * (l as f64 + 1.0);
        let h2 = h * h / 12.0;
        let g_at = |j: usize| -> f64 {
            let r = anchor + j as f64 * h;
            let cent = if l == 0 { 0.0 } else { ll / (r * r) };
            grid[j] + cent - k2
        };

        let r0 = anchor + js as f64 * h;
        let r1 = r0 + h;
        let (u0, u1) = match kind {
            Start::Wall | Start::Origin => (0.0, 1.0),
            Start::Power => (1.0, (r1 / r0).powi(l as i32 + 1)),
            Start::Wkb => {
                let ka = g_at(js).max(0.0).sqrt();
                let kb = g_at(js + 1).max(0.0).sqrt();
                if ka > 0.0 && kb > 0.0 {
                    (1.0, (ka / kb).sqrt() * (0.5 * h * (ka + kb)).exp())
                } else {
                    (1.0, 1.0 + h * ka)
                }
            }
        };

        let f_at = |g: f64| 1.0 - h2 * g;
        let hh = h * h;
        // Summed (Henrici) form: carry d = w_j − w_{j−1} and update it by
        // h²·g·u, which keeps roundoff growth linear in the step count.
        // The plain three-term form is used at the first step and next to
        // a potential discontinuity, where w is redefined.
        let near_jump = |j: usize| jump_idx.is_some_and(|(jb, _, _)| j + 1 >= jb && j <= jb + 1);
        let (mut w_carry, mut d_carry) = (0.0, 0.0);
        let mut u_prev = u0;
        let mut u_cur = u1;
        let mut w_prev = if u0 == 0.0 { 0.0 } else { f_at(g_at(js)) * u0 };
        let mut u_prev2 = 0.0;
        let mut u_m1 = 0.0;
        let mut u_m2 = 0.0;
        for j in (js + 1)..n2 {
            let mut g = g_at(j);
            let mut extra = 0.0;
            if let Some((jb, lo, hi)) = jump_idx {
                if j == jb && j >= js + 2 {
                    let du = hi - lo;
                    g += 0.5 * (lo + hi) - grid[j];
                    let du_dr = (3.0 * u_cur - 4.0 * u_prev + u_prev2) / (2.0 * h);
                    extra = h * h * h / 12.0 * du * du_dr;
                }
            }
            let f = f_at(g);
            let (w_cur, d) = if j == js + 1 || near_jump(j) {
                let w = f * u_cur;
                (w, w - w_prev)
            } else {
                (w_carry, d_carry)
            };
            let d_next = d + hh * g * u_cur + extra;
            let w_next = w_cur + d_next;
            // At the discontinuity u'' is one-sided: U(a−) seen from the
            // left, U(a+) from the right.
            let mut g_next = g_at(j + 1);
            let mut f_behind = f;
            if let Some((jb, lo, hi)) = jump_idx {
                if j + 1 == jb {
                    g_next += lo - grid[jb];
                }
                if j == jb {
                    f_behind = f_at(g_at(j) + hi - grid[jb]);
                }
            }
            let u_next = w_next / f_at(g_next);
            u_prev2 = u_prev;
            u_prev = u_cur;
            u_cur = u_next;
            w_prev = f_behind * u_prev;
            w_carry = w_next;
            d_carry = d_next;
            if u_cur.abs() > 1e200 {
                let s = 1e-200;
                u_cur *= s;
                u_prev *= s;
                u_prev2 *= s;
                w_prev *= s;
                w_carry *= s;
                d_carry *= s;
                u_m1 *= s;
            }
            if j + 1 == n1 {
                u_m1 = u_cur;
            }
            if j + 1 == n2 {
                u_m2 = u_cur;
            }
        }
        if !(u_m1.is_finite() && u_m2.is_finite()) || (u_m1 == 0.0 && u_m2 == 0.0) {
            return Err(Error::NumericFailure { l, diagnostics: format!("non-finite solution at level {level}") });
        }
        let ra = anchor + n1 as f64 * h;
        let rb = anchor + n2 as f64 * h;
        let (xa, xb) = (self.k * ra, self.k * rb);
        let num = u_m2 * riccati_j(l, xa) - u_m1 * riccati_j(l, xb);
        let den = u_m2 * riccati_n(l, xa) - u_m1 * riccati_n(l, xb);
        let delta = if den == 0.0 { PI / 2.0 } else { (num / den).atan() };
        let tail = if self.compact { 0.0 } else { self.tail_correction(b, 0.5 * (ra + rb)) };
        Ok((delta, tail, ra))
    }

    /// −(1/2k)·∫_{r0}^∞ U(r)·r/√(r²−b²) dr, the first-order phase picked up
    /// beyond the matching radius.
    fn tail_correction(&self, b: f64, r0: f64) -> f64 {
        let mut acc = 0.0;
        for (s, w) in gauss_legendre_on(32, 0.0, 1.0) {
            let r = r0 / s;
            let q = b * s / r0;
            acc += w * self.u_scale * self.pot.value(r) * r0 / (s * s) / (1.0 - q * q).sqrt();
        }
        -acc / (2.0 * self.k)
    }

    /// Converged δ_l: the grid is halved repeatedly, each pair of levels is
    /// Richardson-extrapolated (Numerov error ∝ h⁴), and the result is
    /// accepted once two successive extrapolants differ by less than the
    /// tolerance.
    pub fn phase_shift(&mut self, l: u32) -> Result<NumericPhase> {
        let start = self.start_radius(l)?;
        let cap = self.policy.max_refinements;
        let first = self.start_level.saturating_sub(2).min(cap.saturating_sub(2));
        let (d0, _, _) = self.integrate(l, first, start)?;
        let (mut prev_d, _, _) = self.integrate(l, first + 1, start)?;
        let mut prev_rich = wrap(prev_d + wrap(prev_d - d0) / 15.0);
        let mut trace = Vec::new();
        for level in first + 2..=cap {
            let (d, tail, r_match) = self.integrate(l, level, start)?;
            let rich = wrap(d + wrap(d - prev_d) / 15.0);
            let change = wrap(rich - prev_rich).abs();
            trace.push(change);
            if change < self.policy.tolerance {
                self.start_level = level;
                return Ok(NumericPhase {
                    l,
                    delta: wrap(rich + tail),
                    level,
                    step: self.h0 / f64::powi(2.0, level as i32),
                    r_match,
                    tail_correction: tail,
                    change,
                });
            }
            prev_d = d;
            prev_rich = rich;
        }
        Err(Error::NumericFailure {
            l,
            diagnostics: format!(
                "no convergence to {:e} after {cap} refinements (k = {:e} 1/m, h0 = {:e} m, changes {:?})",
                self.policy.tolerance, self.k, self.h0, trace
            ),
        })
    }
}

/// Radius beyond which |V| stays below `threshold` (J).
fn quiet_radius(pot: &PotentialSpec, threshold: f64) -> f64 {
    let mut lo = pot.range_scale();
    if pot.value(lo).abs() <= threshold {
        return lo;
    }
    let mut hi = lo;
    while pot.value(hi).abs() > threshold {
        lo = hi;
        hi *= 1.5;
    }
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if pot.value(m).abs() > threshold {
            lo = m;
        } else {
            hi = m;
        }
    }
    hi
}

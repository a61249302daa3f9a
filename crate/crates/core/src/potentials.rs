//! Interatomic potential models for one alkali–rare-gas pair.
//!
//! Every variant is evaluated in SI units (meters in, joules out). The
//! Buckingham–Corner form used here is
//!
//! ```text
//! V(r) = A·exp(−b·r) − D(r)·(C6/r⁶ + C8/r⁸)
//! D(r) = exp(−4·(r_m/r − 1)³)   for r < r_m
//!      = 1                      for r ≥ r_m
//! ```
//!
//! `Dispersion` is the pure long-range expansion −C6/r⁶ − C8/r⁸ − C10/r¹⁰
//! regularized by a hard wall at `r_cut`. `SquareWell` is a piecewise
//! constant model kept for analytic checks of the scattering engine.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum PotentialSpec {
    LennardJones {
        epsilon: f64,
        r_m: f64,
    },
    BuckinghamCorner {
        a: f64,
        b: f64,
        c6: f64,
        c8: f64,
        r_m: f64,
    },
    Dispersion {
        c6: f64,
        c8: f64,
        c10: f64,
        r_cut: f64,
    },
    /// V = −depth for r < radius, 0 beyond.
    SquareWell {
        depth: f64,
        radius: f64,
    },
}

impl PotentialSpec {
    pub fn lennard_jones(epsilon: f64, r_m: f64) -> Result<Self> {
        Self::LennardJones { epsilon, r_m }.validated()
    }

    pub fn dispersion(c6: f64, c8: f64, c10: f64, r_cut: f64) -> Result<Self> {
        Self::Dispersion { c6, c8, c10, r_cut }.validated()
    }

    /// Hard sphere of radius `a`: a dispersion model with every coefficient zero.
    pub fn hard_sphere(a: f64) -> Result<Self> {
        Self::dispersion(0.0, 0.0, 0.0, a)
    }

    pub fn validated(self) -> Result<Self> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let ok = match self {
            Self::LennardJones { epsilon, r_m } => pos(epsilon) && pos(r_m),
            Self::BuckinghamCorner { a, b, c6, c8, r_m } => {
                nonneg(a) && nonneg(b) && pos(c6) && nonneg(c8) && pos(r_m)
            }
            // C6 = 0 is allowed so the hard sphere fits in this variant.
            Self::Dispersion { c6, c8, c10, r_cut } => {
                nonneg(c6) && nonneg(c8) && nonneg(c10) && pos(r_cut)
            }
            Self::SquareWell { depth, radius } => depth.is_finite() && pos(radius),
        };
        if ok {
            Ok(self)
        } else {
            domain(format!("invalid potential parameters: {self:?}"))
        }
    }

    /// V(r) in joules. Returns `+∞` inside a hard wall.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !r.is_finite() || r <= 0.0 {
            return domain(format!("potential evaluated at r = {r}"));
        }
        Ok(self.value(r))
    }

    /// Unchecked evaluation for hot loops; the caller guarantees r > 0.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::LennardJones { epsilon, r_m } => {
                let s6 = (r_m / r).powi(6);
                epsilon * (s6 * s6 - 2.0 * s6)
            }
            Self::BuckinghamCorner { a, b, c6, c8, r_m } => {
                let r2 = r * r;
                let r6 = r2 * r2 * r2;
                let attr = c6 / r6 + c8 / (r6 * r2);
                a * (-b * r).exp() - damping(r, r_m) * attr
            }
            Self::Dispersion { c6, c8, c10, r_cut } => {
                if r < r_cut {
                    return f64::INFINITY;
                }
                let r2 = r * r;
                let r6 = r2 * r2 * r2;
                -(c6 + (c8 + c10 / r2) / r2) / r6
            }
            Self::SquareWell { depth, radius } => {
                if r < radius {
                    -depth
                } else {
                    0.0
                }
            }
        }
    }

    /// dV/dr, used for locating the well minimum.
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            Self::LennardJones { epsilon, r_m } => {
                let s6 = (r_m / r).powi(6);
                -12.0 * epsilon * (s6 * s6 - s6) / r
            }
            Self::BuckinghamCorner { a, b, c6, c8, r_m } => {
                let r2 = r * r;
                let r6 = r2 * r2 * r2;
                let attr = c6 / r6 + c8 / (r6 * r2);
                let dattr = -6.0 * c6 / (r6 * r) - 8.0 * c8 / (r6 * r2 * r);
                let d = damping(r, r_m);
                let dd = if r < r_m {
                    let x = r_m / r - 1.0;
                    d * 12.0 * x * x * r_m / (r * r)
                } else {
                    0.0
                };
                -a * b * (-b * r).exp() - dd * attr - d * dattr
            }
            Self::Dispersion { c6, c8, c10, .. } => {
                let r2 = r * r;
                let r6 = r2 * r2 * r2;
                (6.0 * c6 + (8.0 * c8 + 10.0 * c10 / r2) / r2) / (r6 * r)
            }
            Self::SquareWell { .. } => 0.0,
        }
    }

    /// Long-range dispersion coefficients (C6, C8, C10) governing the tail.
    pub fn dispersion_coefficients(&self) -> (f64, f64, f64) {
        match *self {
            Self::LennardJones { epsilon, r_m } => (2.0 * epsilon * r_m.powi(6), 0.0, 0.0),
            Self::BuckinghamCorner { c6, c8, .. } => (c6, c8, 0.0),
            Self::Dispersion { c6, c8, c10, .. } => (c6, c8, c10),
            Self::SquareWell { .. } => (0.0, 0.0, 0.0),
        }
    }

    /// Characteristic range: well position, or the wall/edge radius for
    /// models without a smooth minimum.
    pub fn range_scale(&self) -> f64 {
        match *self {
            Self::LennardJones { r_m, .. } | Self::BuckinghamCorner { r_m, .. } => r_m,
            Self::Dispersion { r_cut, .. } => r_cut,
            Self::SquareWell { radius, .. } => radius,
        }
    }

    /// Hard-wall radius if the model has one.
    pub fn hard_wall(&self) -> Option<f64> {
        match *self {
            Self::Dispersion { r_cut, .. } => Some(r_cut),
            _ => None,
        }
    }

    /// Radius beyond which the potential vanishes identically.
    pub fn compact_support(&self) -> Option<f64> {
        match *self {
            Self::SquareWell { radius, .. } => Some(radius),
            Self::Dispersion { c6, c8, c10, r_cut } if c6 == 0.0 && c8 == 0.0 && c10 == 0.0 => {
                Some(r_cut)
            }
            _ => None,
        }
    }

    /// Well depth and position of the minimum.
    pub fn well_parameters(&self) -> Result<(f64, f64)> {
        match *self {
            Self::LennardJones { epsilon, r_m } => Ok((epsilon, r_m)),
            Self::Dispersion { .. } | Self::SquareWell { .. } => Err(Error::NoMinimum),
            Self::BuckinghamCorner { r_m, .. } => {
                let r_min = self.locate_minimum(0.2 * r_m, 5.0 * r_m)?;
                Ok((-self.value(r_min), r_min))
            }
        }
    }

    /// Finds the minimum in [lo, hi] by scanning for a sign change of dV/dr
    /// and bisecting on it.
    fn locate_minimum(&self, lo: f64, hi: f64) -> Result<f64> {
        const SCAN: usize = 2000;
        let ratio = (hi / lo).powf(1.0 / SCAN as f64);
        let mut best: Option<(f64, f64, f64)> = None;
        let mut r0 = lo;
        let mut d0 = self.derivative(r0);
        for _ in 0..SCAN {
            let r1 = r0 * ratio;
            let d1 = self.derivative(r1);
            if d0 < 0.0 && d1 >= 0.0 {
                let v = self.value(0.5 * (r0 + r1));
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((r0, r1, v));
                }
            }
            r0 = r1;
            d0 = d1;
        }
        let (mut a, mut b, _) = best.ok_or(Error::NoMinimum)?;
        while (b - a) > 1e-13 * b {
            let m = 0.5 * (a + b);
            if self.derivative(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[inline]
fn damping(r: f64, r_m: f64) -> f64 {
    if r < r_m {
        let x = r_m / r - 1.0;
        (-4.0 * x * x * x).exp()
    } else {
        1.0
    }
}

/// Masses and potential for one projectile–target pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionSystem {
    pub m_projectile: f64,
    pub m_target: f64,
    pub mu: f64,
    pub potential: PotentialSpec,
}

impl CollisionSystem {
    pub fn new(m_projectile: f64, m_target: f64, potential: PotentialSpec) -> Result<Self> {
        if !(m_projectile > 0.0 && m_target > 0.0) || !m_projectile.is_finite() || !m_target.is_finite() {
            return domain("masses must be positive");
        }
        let potential = potential.validated()?;
        Ok(Self {
            m_projectile,
            m_target,
            mu: m_projectile * m_target / (m_projectile + m_target),
            potential,
        })
    }

    /// Same potential with an explicit reduced mass; used for reduced-unit studies.
    pub fn with_reduced_mass(mu: f64, potential: PotentialSpec) -> Result<Self> {
        Self::new(2.0 * mu, 2.0 * mu, potential)
    }
}

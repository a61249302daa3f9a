//! Synthetic interferometer data: the empty/gas/empty three-sweep protocol
//! plus a background record, with piezo nonlinearity, phase drift and
//! Poisson counting noise.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cell::{density, effective_length, CellGeometry};
use crate::config::{read_json, write_json};
use crate::error::{domain, Error, Result};
use crate::refraction::IndexResult;
use crate::thermal::TargetGasSpec;

pub const RUN_SCHEMA_VERSION: u32 = 1;
pub const SWEEP_LABELS: [&str; 3] = ["empty-1", "gas", "empty-2"];

/// Phase along a sweep is `a + b·n + c·n²` for channel n. Channels run
/// from `first_channel` upward; the default centres them on the sweep so
/// that `a` is the mid-sweep phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_points: usize,
    pub first_channel: i64,
    /// Counting time per channel in seconds.
    pub dwell: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { n_points: 300, first_channel: -150, dwell: 0.3, a: 0.4, b: 0.063, c: 1.0e-5 }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 10 {
            return domain(format!("sweep needs at least 10 points, got {}", self.n_points));
        }
        if !(self.dwell > 0.0) || !self.dwell.is_finite() {
            return domain(format!("dwell must be positive, got {}", self.dwell));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite()) {
            return domain("phase coefficients must be finite");
        }
        Ok(())
    }

    /// Phase at sample `i` of the sweep.
    pub fn phase(&self, i: usize) -> f64 {
        let x = (self.first_channel + i as i64) as f64;
        self.a + self.b * x + self.c * x * x
    }
}

/// Empty-cell signal levels, in counts per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeTruth {
    pub i_b: f64,
    pub i_0: f64,
    pub visibility: f64,
}

impl Default for FringeTruth {
    /// Plausible magnitudes, not measured values.
    fn default() -> Self {
        Self { i_b: 50.0, i_0: 1.0e4, visibility: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub truth: FringeTruth,
    pub sweep: SweepConfig,
    /// Uniform bound on the per-run linear drift rate, rad per sweep.
    pub drift_rate: f64,
    /// Standard deviation of an additional random-walk phase step between
    /// sweeps. Unlike the linear drift it does not cancel in the estimator.
    #[serde(default)]
    pub drift_jitter: f64,
    /// |ψ_upper|/|ψ_lower| amplitude ratio of the two arms; 1 is balanced.
    #[serde(default = "one")]
    pub arm_ratio: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            truth: FringeTruth::default(),
            sweep: SweepConfig::default(),
            drift_rate: 0.1,
            drift_jitter: 0.0,
            arm_ratio: 1.0,
        }
    }
}

/// Phase shift and amplitude transmission produced by the gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasEffect {
    pub phi: f64,
    pub t: f64,
}

impl GasEffect {
    pub const NONE: GasEffect = GasEffect { phi: 0.0, t: 1.0 };
}

/// `φ = Re(n−1)·k·L`, `t = exp(−Im(n−1)·k·L)` with `n − 1 = index·n_gas`.
pub fn gas_effect(index: &IndexResult, n_gas: f64, length: f64, k_lab: f64) -> Result<GasEffect> {
    if !(n_gas >= 0.0) || !(length > 0.0) || !(k_lab > 0.0) {
        return domain(format!("bad gas-effect inputs: n_gas {n_gas}, L {length}, k {k_lab}"));
    }
    let kl = n_gas * k_lab * length;
    Ok(GasEffect { phi: index.re_per_density * kl, t: (-index.im_per_density * kl).exp() })
}

/// Mean intensity and visibility of the gas sweep. The gas attenuates the
/// lower arm amplitude by t; the coherent term scales as t, so
/// `I0'·V' = t·I0·V` for any arm ratio.
pub fn attenuated_fringe(truth: &FringeTruth, t: f64, arm_ratio: f64) -> (f64, f64) {
    let r2 = arm_ratio * arm_ratio;
    let i0 = truth.i_0 * (t * t + r2) / (1.0 + r2);
    let v = truth.visibility * t * truth.i_0 / i0;
    (i0, v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub label: String,
    pub first_channel: i64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTruth {
    pub phi: f64,
    pub t: f64,
    /// Initial phases of the three sweeps before the gas shift.
    pub a: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_gas: Option<f64>,
}

/// On-disk run record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub schema_version: u32,
    pub config: SimulationConfig,
    pub scans: Vec<Vec<u64>>,
    pub background: Vec<u64>,
    /// Gauge pressure in Pa.
    pub p_meas: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<RunTruth>,
}

impl ExperimentRun {
    pub fn load(path: &Path) -> Result<Self> {
        let run: Self = read_json(path)?;
        run.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(run)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scans.len() != 3 {
            return domain(format!("run needs 3 sweeps, found {}", self.scans.len()));
        }
        let n = self.scans[0].len();
        if n < 10 || self.scans.iter().any(|s| s.len() != n) {
            return domain("sweeps must share a length of at least 10 channels");
        }
        if n != self.config.sweep.n_points {
            return domain(format!("sweeps hold {n} channels but the config declares {}", self.config.sweep.n_points));
        }
        if self.background.is_empty() {
            return domain("background record is empty");
        }
        if !(self.p_meas >= 0.0) || !self.p_meas.is_finite() {
            return domain(format!("bad pressure {}", self.p_meas));
        }
        Ok(())
    }

    pub fn sweep(&self, j: usize) -> FringeScan {
        FringeScan {
            label: SWEEP_LABELS[j].into(),
            first_channel: self.config.sweep.first_channel,
            counts: self.scans[j].clone(),
        }
    }

    /// Background rate in counts per second from the flagged-beam record.
    pub fn background_rate(&self) -> f64 {
        let mean = self.background.iter().sum::<u64>() as f64 / self.background.len() as f64;
        mean / self.config.sweep.dwell
    }
}

/// Expected counts per channel for one sweep.
pub fn expected_counts(sweep: &SweepConfig, i_b: f64, i_0: f64, visibility: f64) -> Result<Vec<f64>> {
    sweep.validate()?;
    (0..sweep.n_points)
        .map(|n| {
            let lam = sweep.dwell * (i_b + i_0 * (1.0 + visibility * sweep.phase(n).cos()));
            if lam >= 0.0 && lam.is_finite() {
                Ok(lam)
            } else {
                domain(format!("negative or non-finite expected count {lam} at channel {n}"))
            }
        })
        .collect()
}

fn draw(rng: &mut ChaCha8Rng, lambda: &[f64]) -> Vec<u64> {
    lambda
        .iter()
        .map(|&lam| if lam == 0.0 { 0 } else { Poisson::new(lam).expect("positive rate").sample(rng) as u64 })
        .collect()
}

/// Random-number stream for run `index` under a top-level seed: ChaCha8
/// keyed by the seed, with the run index selecting the stream.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulate one empty/gas/empty run plus background.
pub fn simulate_run(config: &SimulationConfig, effect: GasEffect, p_meas: f64, rng: &mut ChaCha8Rng) -> Result<ExperimentRun> {
    let truth = config.truth;
    if !(0.0..=1.0).contains(&truth.visibility) || !(truth.i_0 > 0.0) || !(truth.i_b >= 0.0) {
        return domain(format!("bad fringe truth {truth:?}"));
    }
    if !(effect.t > 0.0 && effect.t <= 1.0) || !effect.phi.is_finite() {
        return domain(format!("bad gas effect {effect:?}"));
    }
    if !(config.arm_ratio > 0.0) || !(config.drift_rate >= 0.0) || !(config.drift_jitter >= 0.0) {
        return domain("arm ratio must be positive and drift parameters non-negative");
    }
    config.sweep.validate()?;

    let rate = if config.drift_rate > 0.0 { rng.gen_range(-config.drift_rate..=config.drift_rate) } else { 0.0 };
    let mut a = [0.0; 3];
    for (j, aj) in a.iter_mut().enumerate() {
        let jitter = if config.drift_jitter > 0.0 {
            config.drift_jitter * rng.sample::<f64, _>(rand_distr::StandardNormal)
        } else {
            0.0
        };
        *aj = config.sweep.a + rate * j as f64 + jitter;
    }

    let (i0_gas, v_gas) = attenuated_fringe(&truth, effect.t, config.arm_ratio);
    let mut scans = Vec::with_capacity(3);
    for (j, &aj) in a.iter().enumerate() {
        let (sweep, i0, v) = if j == 1 {
            (SweepConfig { a: aj + effect.phi, ..config.sweep }, i0_gas, v_gas)
        } else {
            (SweepConfig { a: aj, ..config.sweep }, truth.i_0, truth.visibility)
        };
        scans.push(draw(rng, &expected_counts(&sweep, truth.i_b, i0, v)?));
    }
    let background = draw(rng, &vec![config.sweep.dwell * truth.i_b; config.sweep.n_points]);
    Ok(ExperimentRun {
        schema_version: RUN_SCHEMA_VERSION,
        config: config.clone(),
        scans,
        background,
        p_meas,
        truth: Some(RunTruth { phi: effect.phi, t: effect.t, a, n_gas: None }),
    })
}

/// Default gauge pressures of a density series, in Pa.
pub const DEFAULT_PRESSURES: [f64; 5] = [5.0e-3, 1.0e-2, 1.5e-2, 2.0e-2, 2.5e-2];

/// Simulate one run per gauge pressure. Run `i` draws from stream
/// `stream_base + i` of the seed.
pub fn simulate_series(
    config: &SimulationConfig,
    index: &IndexResult,
    geom: &CellGeometry,
    gas: &TargetGasSpec,
    pressures: &[f64],
    seed: u64,
    stream_base: u64,
) -> Result<Vec<ExperimentRun>> {
    let length = effective_length(geom);
    pressures
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let state = density(p, geom, gas)?;
            let effect = gas_effect(index, state.n_gas, length, index.k_lab)?;
            let mut run = simulate_run(config, effect, p, &mut run_rng(seed, stream_base + i as u64))?;
            if let Some(t) = run.truth.as_mut() {
                t.n_gas = Some(state.n_gas);
            }
            Ok(run)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{HBAR, K_B, LI7_MASS, MBAR};

    #[test]
    fn gas_effect_values() {
        let k = LI7_MASS * 1075.0 / HBAR;
        let xe = IndexResult::from_parts(1075.0, k, 1.82e-29, 2.40e-29);
        let none = gas_effect(&xe, 0.0, 0.0665, k).unwrap();
        assert_eq!((none.phi, none.t), (0.0, 1.0));
        // n = 1e-2 Pa / (k_B·298 K) = 2.4305e18 m⁻³; k·L = 7.8976e9
        let n = 1e-4 * MBAR / (K_B * 298.0);
        let e = gas_effect(&xe, n, 0.0665, k).unwrap();
        assert!((e.phi - 0.3494).abs() < 2e-3, "{}", e.phi);
        assert!((-e.t.ln() - 0.4607).abs() < 2e-3, "{}", e.t);
        let e2 = gas_effect(&xe, 2.0 * n, 0.0665, k).unwrap();
        assert!((e2.phi / e.phi - 2.0).abs() < 1e-14);
        assert!((e2.t.ln() / e.t.ln() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn balanced_arm_identity() {
        let truth = FringeTruth::default();
        for &t in &[1.0, 0.9, 0.5, 0.1, 1e-3] {
            for &r in &[1.0, 0.7, 1.6] {
                let (i0, v) = attenuated_fringe(&truth, t, r);
                assert!((i0 * v / (t * truth.i_0 * truth.visibility) - 1.0).abs() < 1e-15);
            }
            let (i0, v) = attenuated_fringe(&truth, t, 1.0);
            assert!((i0 - truth.i_0 * (1.0 + t * t) / 2.0).abs() < 1e-9);
            assert!((v - truth.visibility * 2.0 * t / (1.0 + t * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SimulationConfig::default();
        let e = GasEffect { phi: 0.3, t: 0.6 };
        let a = simulate_run(&cfg, e, 1e-2, &mut run_rng(7, 0)).unwrap();
        let b = simulate_run(&cfg, e, 1e-2, &mut run_rng(7, 0)).unwrap();
        let c = simulate_run(&cfg, e, 1e-2, &mut run_rng(7, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.scans, c.scans);
    }

    #[test]
    fn flat_profile_without_visibility() {
        let s = SweepConfig::default();
        let lam = expected_counts(&s, 10.0, 100.0, 0.0).unwrap();
        assert!(lam.iter().all(|&l| (l - s.dwell * 110.0).abs() < 1e-12));
        assert!(expected_counts(&s, 0.0, 100.0, -2.0).is_err());
        assert!(expected_counts(&SweepConfig { n_points: 5, ..s }, 0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn poisson_mean_matches_rate() {
        let cfg = SimulationConfig {
            truth: FringeTruth { i_b: 20.0, i_0: 1000.0, visibility: 0.0 },
            sweep: SweepConfig { n_points: 1000, ..SweepConfig::default() },
            ..SimulationConfig::default()
        };
        let run = simulate_run(&cfg, GasEffect::NONE, 0.0, &mut run_rng(3, 0)).unwrap();
        let lam = cfg.sweep.dwell * 1020.0;
        let mean = run.scans[0].iter().sum::<u64>() as f64 / 1000.0;
        assert!((mean - lam).abs() < 5.0 * (lam / 1000.0).sqrt(), "{mean} vs {lam}");
    }

    #[test]
    fn bad_runs_rejected() {
        let cfg = SimulationConfig::default();
        let mut rng = run_rng(1, 0);
        assert!(simulate_run(&cfg, GasEffect { phi: 0.0, t: 0.0 }, 0.0, &mut rng).is_err());
        let bad = SimulationConfig { truth: FringeTruth { visibility: 1.5, ..cfg.truth }, ..cfg.clone() };
        assert!(simulate_run(&bad, GasEffect::NONE, 0.0, &mut rng).is_err());
        let mut run = simulate_run(&cfg, GasEffect::NONE, 0.0, &mut rng).unwrap();
        run.scans.pop();
        assert!(run.validate().is_err());
    }
}

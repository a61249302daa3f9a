//! Inverse pipeline: fit fringe sweeps, reduce each empty/gas/empty run to
//! (φ, t), and regress against gas density to recover the index.

use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cell::{density, effective_length, CellGeometry, GasState};
use crate::error::{domain, Error, Result};
use crate::fringes::FringeScan;
use crate::refraction::IndexResult;
use crate::thermal::TargetGasSpec;

const NP: usize = 5;
type Mat = SMatrix<f64, NP, NP>;
type Vector = SVector<f64, NP>;

/// Wrap an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPolicy {
    pub max_iterations: usize,
    /// Stop when every gradient component, scaled by the curvature of its
    /// parameter, is below this times max(1, √χ²).
    pub gradient_tol: f64,
    /// Number of fits with Poisson weights taken from the previous model
    /// (the first fit weights by the data).
    pub reweight_passes: usize,
    /// Zero padding factor of the initializing Fourier transform.
    pub fft_padding: usize,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self { max_iterations: 200, gradient_tol: 1e-8, reweight_passes: 1, fft_padding: 16 }
    }
}

/// Parameter order in `covariance`: a, b, c, I0, V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub i_0: f64,
    pub visibility: f64,
    pub i_b: f64,
    pub covariance: [[f64; NP]; NP],
    pub chi2_dof: f64,
    pub iterations: usize,
    /// Set when V lies outside [0, 1] or the phase parameters are unidentifiable.
    pub flagged: bool,
}

impl FringeFit {
    pub fn sigma(&self, i: usize) -> f64 {
        self.covariance[i][i].sqrt()
    }

    /// `I0·V` and its variance.
    pub fn contrast_product(&self) -> (f64, f64) {
        let c = &self.covariance;
        let (i0, v) = (self.i_0, self.visibility);
        (i0 * v, v * v * c[3][3] + i0 * i0 * c[4][4] + 2.0 * i0 * v * c[3][4])
    }

    /// Expected counts at channel number `n`.
    pub fn model(&self, n: i64, dwell: f64) -> f64 {
        let x = n as f64;
        let psi = self.a + self.b * x + self.c * x * x;
        dwell * (self.i_b + self.i_0 * (1.0 + self.visibility * psi.cos()))
    }
}

struct Problem<'a> {
    y: &'a [f64],
    first: f64,
    dwell: f64,
    i_b: f64,
    scale: f64,
}

impl Problem<'_> {
    fn model(&self, p: &Vector, n: usize) -> (f64, [f64; NP]) {
        let t = (self.first + n as f64) / self.scale;
        let psi = p[0] + p[1] * t + p[2] * t * t;
        let (s, c) = psi.sin_cos();
        let d = self.dwell;
        let dpsi = -d * p[3] * p[4] * s;
        (d * (self.i_b + p[3] * (1.0 + p[4] * c)), [dpsi, dpsi * t, dpsi * t * t, d * (1.0 + p[4] * c), d * p[3] * c])
    }

    fn normal(&self, p: &Vector, w: &[f64]) -> (Mat, Vector, f64) {
        let mut h = Mat::zeros();
        let mut g = Vector::zeros();
        let mut chi2 = 0.0;
        for (n, (&y, &wn)) in self.y.iter().zip(w).enumerate() {
            let (m, j) = self.model(p, n);
            let r = y - m;
            chi2 += wn * r * r;
            for i in 0..NP {
                g[i] += wn * j[i] * r;
                for k in 0..=i {
                    h[(i, k)] += wn * j[i] * j[k];
                }
            }
        }
        for i in 0..NP {
            for k in 0..i {
                h[(k, i)] = h[(i, k)];
            }
        }
        (h, g, chi2)
    }

    fn chi2(&self, p: &Vector, w: &[f64]) -> f64 {
        self.y.iter().zip(w).enumerate().map(|(n, (&y, &wn))| wn * (y - self.model(p, n).0).powi(2)).sum()
    }
}

fn scaled_gradient(h: &Mat, g: &Vector) -> f64 {
    (0..NP).filter(|&i| h[(i, i)] > 0.0).map(|i| g[i].abs() / h[(i, i)].sqrt()).fold(0.0, f64::max)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) minimization of the weighted χ².
fn levenberg_marquardt(problem: &Problem, mut p: Vector, w: &[f64], policy: &FitPolicy) -> Result<(Vector, Mat, f64, usize)> {
    let mut lambda = 1e-3;
    let (mut h, mut g, mut chi2) = problem.normal(&p, w);
    let mut trace = Vec::new();
    for iter in 0..policy.max_iterations {
        let grad = scaled_gradient(&h, &g);
        if trace.len() < 12 {
            trace.push(format!("#{iter} chi2={chi2:.6e} grad={grad:.2e} lambda={lambda:.1e}"));
        }
        if grad < policy.gradient_tol * chi2.sqrt().max(1.0) {
            return Ok((p, h, chi2, iter));
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = h;
            for i in 0..NP {
                damped[(i, i)] += lambda * h[(i, i)].max(1e-300) + 1e-300;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + chol.solve(&g);
            let c2 = problem.chi2(&trial, w);
            if c2.is_finite() && c2 <= chi2 {
                let stalled = chi2 - c2 <= 1e-15 * chi2;
                p = trial;
                (h, g, chi2) = problem.normal(&p, w);
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if stalled && scaled_gradient(&h, &g) < 1e3 * policy.gradient_tol * chi2.sqrt().max(1.0) {
                    return Ok((p, h, chi2, iter + 1));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            if scaled_gradient(&h, &g) < 1e3 * policy.gradient_tol * chi2.sqrt().max(1.0) {
                return Ok((p, h, chi2, iter + 1));
            }
            trace.push(format!("stuck at chi2={chi2:.6e}"));
            return Err(Error::FitDivergence { iterations: iter + 1, trace: trace.join("; ") });
        }
    }
    Err(Error::FitDivergence { iterations: policy.max_iterations, trace: trace.join("; ") })
}

/// Starting point from the dominant Fourier component of the mean-removed
/// sweep: frequency → b, its phase → a, its amplitude → V; c starts at 0.
fn initial_guess(y: &[f64], first: f64, dwell: f64, i_b: f64, padding: usize) -> Vector {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let m = (n * padding.max(1)).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(m, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    // skip frequencies below one fringe per sweep
    let lo = (m / n).max(1);
    let (k, peak) = buf[lo..=m / 2]
        .iter()
        .enumerate()
        .map(|(i, z)| (i + lo, *z))
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty spectrum");
    let omega = 2.0 * PI * k as f64 / m as f64;
    let i0 = (mean / dwell - i_b).max(f64::MIN_POSITIVE);
    let amplitude = 2.0 * peak.norm() / n as f64;
    Vector::from([peak.arg() - omega * first, omega * n as f64, 0.0, i0, (amplitude / (dwell * i0)).min(1.0)])
}

/// Weighted nonlinear least-squares fit of
/// `dwell·{I_B + I0·[1 + V·cos(a + b·n + c·n²)]}` to per-channel counts,
/// `y[i]` being channel `first_channel + i`. The cosine cannot tell
/// (a, b, c) from (−a, −b, −c); fits report the branch with b > 0.
pub fn fit_counts(y: &[f64], first_channel: i64, dwell: f64, i_b: f64, policy: &FitPolicy) -> Result<FringeFit> {
    if y.len() < 10 {
        return domain(format!("sweep too short for a fit: {} channels", y.len()));
    }
    if !(dwell > 0.0) || !(i_b >= 0.0) || y.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return domain("fit inputs must be finite and non-negative with positive dwell");
    }
    let scale = y.len() as f64;
    let first = first_channel as f64;
    let problem = Problem { y, first, dwell, i_b, scale };
    let mut p = initial_guess(y, first, dwell, i_b, policy.fft_padding);
    let mut w: Vec<f64> = y.iter().map(|&v| 1.0 / v.max(1.0)).collect();
    let mut fit = levenberg_marquardt(&problem, p, &w, policy)?;
    let mut iterations = fit.3;
    for _ in 0..policy.reweight_passes {
        p = fit.0;
        w = (0..y.len()).map(|n| 1.0 / problem.model(&p, n).0.max(1.0)).collect();
        fit = levenberg_marquardt(&problem, p, &w, policy)?;
        iterations += fit.3;
    }
    let (mut p, h, chi2, _) = fit;

    // canonical form: V ≥ 0, a ∈ (−π, π]
    if p[4] < 0.0 {
        p[4] = -p[4];
        p[0] += PI;
    }
    p[0] = wrap_phase(p[0]);

    let s = [1.0, 1.0 / scale, 1.0 / (scale * scale), 1.0, 1.0];
    let mut cov = [[0.0; NP]; NP];
    let mut flagged = !(0.0..=1.0).contains(&p[4]);
    match h.cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            for i in 0..NP {
                for k in 0..NP {
                    cov[i][k] = s[i] * s[k] * inv[(i, k)];
                }
            }
        }
        None => {
            // phase parameters are unidentifiable (V ≈ 0): invert the
            // intensity block only
            flagged = true;
            let (a, b, d) = (h[(3, 3)], h[(3, 4)], h[(4, 4)]);
            let det = a * d - b * b;
            for row in cov.iter_mut().take(3) {
                row.fill(f64::INFINITY);
            }
            for i in 0..3 {
                for row in cov.iter_mut().skip(3) {
                    row[i] = f64::INFINITY;
                }
            }
            cov[3][3] = d / det;
            cov[4][4] = a / det;
            cov[3][4] = -b / det;
            cov[4][3] = -b / det;
        }
    }
    let dof = (y.len() - NP) as f64;
    Ok(FringeFit {
        a: p[0],
        b: p[1] / scale,
        c: p[2] / (scale * scale),
        i_0: p[3],
        visibility: p[4],
        i_b,
        covariance: cov,
        chi2_dof: chi2 / dof,
        iterations,
        flagged,
    })
}

pub fn fit_sweep(scan: &FringeScan, dwell: f64, i_b: f64, policy: &FitPolicy) -> Result<FringeFit> {
    let y: Vec<f64> = scan.counts.iter().map(|&c| c as f64).collect();
    fit_counts(&y, scan.first_channel, dwell, i_b, policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunReduction {
    pub phi: f64,
    pub phi_err: f64,
    pub t: f64,
    pub t_err: f64,
}

/// `φ = a₂ − (a₁+a₃)/2` and `t = I₀₂V₂ / mean(I₀₁V₁, I₀₃V₃)`, with errors
/// propagated to first order from the fit covariances.
pub fn reduce_fits(fits: &[FringeFit; 3]) -> Result<RunReduction> {
    let a1 = fits[0].a;
    let a3 = a1 + wrap_phase(fits[2].a - a1);
    let phi = wrap_phase(fits[1].a - (a1 + a3) / 2.0);
    let phi_err = (fits[1].covariance[0][0] + (fits[0].covariance[0][0] + fits[2].covariance[0][0]) / 4.0).sqrt();
    let (p1, v1) = fits[0].contrast_product();
    let (p2, v2) = fits[1].contrast_product();
    let (p3, v3) = fits[2].contrast_product();
    let reference = (p1 + p3) / 2.0;
    if !(reference > 0.0) {
        return domain("empty-cell sweeps show no fringe contrast");
    }
    let t = p2 / reference;
    let t_err = t.abs() * (v2 / (p2 * p2) + (v1 + v3) / ((p1 + p3) * (p1 + p3))).sqrt();
    Ok(RunReduction { phi, phi_err, t, t_err })
}

/// Fit the three sweeps of a run with the background fixed from its record.
pub fn reduce_run(run: &crate::fringes::ExperimentRun, policy: &FitPolicy) -> Result<([FringeFit; 3], RunReduction)> {
    run.validate()?;
    let i_b = run.background_rate();
    let dwell = run.config.sweep.dwell;
    let fits = [0, 1, 2].map(|j| fit_sweep(&run.sweep(j), dwell, i_b, policy));
    let [f1, f2, f3] = fits;
    let fits = [f1?, f2?, f3?];
    let red = reduce_fits(&fits)?;
    Ok((fits, red))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub p_meas: f64,
    pub n_gas: f64,
    pub phi: f64,
    pub phi_err: f64,
    /// −ln t
    pub attenuation: f64,
    pub attenuation_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySeries {
    pub points: Vec<SeriesPoint>,
    pub u_mean: f64,
    pub k_lab: f64,
    pub length: f64,
    pub flags: Vec<String>,
}

/// Order runs by density, unwrap φ incrementally from zero density and
/// convert t to −ln t.
pub fn build_series(entries: &[(GasState, RunReduction)], u_mean: f64, k_lab: f64, length: f64) -> Result<DensitySeries> {
    if entries.is_empty() {
        return domain("no runs to build a series from");
    }
    let mut sorted: Vec<&(GasState, RunReduction)> = entries.iter().collect();
    sorted.sort_by(|a, b| a.0.n_gas.total_cmp(&b.0.n_gas));
    let mut flags = Vec::new();
    let mut points = Vec::with_capacity(sorted.len());
    let mut prev_phi = 0.0;
    let mut prev_n = -1.0;
    for (state, red) in sorted {
        if !(state.n_gas > prev_n) {
            return domain(format!("gas densities must be distinct and non-negative; repeated {}", state.n_gas));
        }
        if !(red.t > 0.0) {
            return domain(format!("non-positive transmission {} at p = {} Pa", red.t, state.p_meas));
        }
        if !(red.phi_err > 0.0 && red.t_err > 0.0) {
            return domain(format!("uncertainties must be positive at p = {} Pa", state.p_meas));
        }
        let step = wrap_phase(red.phi - prev_phi);
        if step.abs() > 0.9 * PI {
            flags.push(format!("ambiguous phase unwrap at p = {:.4e} Pa (step {step:.3} rad)", state.p_meas));
        }
        let phi = prev_phi + step;
        if red.t > 1.05 {
            flags.push(format!("transmission {:.4} above 1 at p = {:.4e} Pa", red.t, state.p_meas));
        }
        points.push(SeriesPoint {
            p_meas: state.p_meas,
            n_gas: state.n_gas,
            phi,
            phi_err: red.phi_err,
            attenuation: -red.t.ln(),
            attenuation_err: red.t_err / red.t,
        });
        prev_phi = phi;
        prev_n = state.n_gas;
    }
    Ok(DensitySeries { points, u_mean, k_lab, length, flags })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub slope_err: f64,
    pub intercept: f64,
    pub intercept_err: f64,
    pub r_squared: f64,
    pub chi2_dof: f64,
}

impl LineFit {
    /// Intercept compatible with zero at two standard deviations.
    pub fn intercept_consistent(&self) -> bool {
        self.intercept.abs() <= 2.0 * self.intercept_err
    }
}

/// Weighted straight-line fit `y = α + β·x` with weights `1/σ²`.
pub fn weighted_line(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<LineFit> {
    if x.len() < 2 || x.len() != y.len() || x.len() != sigma.len() {
        return domain("line fit needs at least two points with matching lengths");
    }
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return domain("line fit needs positive uncertainties");
    }
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - xm) * (a - xm)).sum();
    if !(sxx > 0.0) {
        return domain("line fit needs at least two distinct abscissae");
    }
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((a, c), b)| b * (a - xm) * (c - ym)).sum();
    let syy: f64 = y.iter().zip(&w).map(|(c, b)| b * (c - ym) * (c - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = x.iter().zip(y).zip(&w).map(|((a, c), b)| b * (c - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    let dof = (x.len() as f64 - 2.0).max(1.0);
    Ok(LineFit {
        slope,
        slope_err: (1.0 / sxx).sqrt(),
        intercept,
        intercept_err: (1.0 / sw + xm * xm / sxx).sqrt(),
        r_squared,
        chi2_dof: chi2 / dof,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredIndex {
    pub index: IndexResult,
    pub phase_fit: LineFit,
    pub attenuation_fit: LineFit,
    pub flags: Vec<String>,
}

/// Slopes of φ and −ln t against density, divided by k·L.
pub fn extract_index(series: &DensitySeries) -> Result<MeasuredIndex> {
    let mut pts = series.points.clone();
    pts.sort_by(|a, b| a.n_gas.total_cmp(&b.n_gas));
    let x: Vec<f64> = pts.iter().map(|p| p.n_gas).collect();
    let phase_fit = weighted_line(
        &x,
        &pts.iter().map(|p| p.phi).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.phi_err).collect::<Vec<_>>(),
    )?;
    let attenuation_fit = weighted_line(
        &x,
        &pts.iter().map(|p| p.attenuation).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.attenuation_err).collect::<Vec<_>>(),
    )?;
    let kl = series.k_lab * series.length;
    if !(kl > 0.0) {
        return domain("k·L must be positive");
    }
    let (re, im) = (phase_fit.slope / kl, attenuation_fit.slope / kl);
    let (re_err, im_err) = (phase_fit.slope_err / kl, attenuation_fit.slope_err / kl);
    let mut index = IndexResult::from_parts(series.u_mean, series.k_lab, re, im);
    index.re_err = Some(re_err);
    index.im_err = Some(im_err);
    index.rho_err = Some(index.rho.abs() * ((re_err / re).powi(2) + (im_err / im).powi(2)).sqrt());
    let mut flags = series.flags.clone();
    if !phase_fit.intercept_consistent() {
        flags.push(format!("phase intercept {:.3e} ± {:.1e} not compatible with zero", phase_fit.intercept, phase_fit.intercept_err));
    }
    if !attenuation_fit.intercept_consistent() {
        flags.push(format!(
            "attenuation intercept {:.3e} ± {:.1e} not compatible with zero",
            attenuation_fit.intercept, attenuation_fit.intercept_err
        ));
    }
    Ok(MeasuredIndex { index, phase_fit, attenuation_fit, flags })
}

/// Fit every run, convert gauge pressures to densities and regress.
pub fn analyze_runs(
    runs: &[crate::fringes::ExperimentRun],
    geom: &CellGeometry,
    gas: &TargetGasSpec,
    u_mean: f64,
    k_lab: f64,
    policy: &FitPolicy,
) -> Result<(DensitySeries, MeasuredIndex)> {
    let entries = runs
        .iter()
        .map(|run| Ok((density(run.p_meas, geom, gas)?, reduce_run(run, policy)?.1)))
        .collect::<Result<Vec<_>>>()?;
    let series = build_series(&entries, u_mean, k_lab, effective_length(geom))?;
    let measured = extract_index(&series)?;
    Ok((series, measured))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fringes::{expected_counts, SweepConfig};

    fn noiseless(a: f64, b: f64, c: f64, i0: f64, v: f64) -> Vec<f64> {
        expected_counts(&SweepConfig { a, b, c, ..SweepConfig::default() }, 50.0, i0, v).unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        for &(a, b, c, i0, v) in &[(0.4, 0.063, 1e-5, 1e4, 0.7), (-2.9, 0.05, -2e-5, 300.0, 0.2), (3.0, 0.09, 0.0, 5e3, 0.95)] {
            let y = noiseless(a, b, c, i0, v);
            let f = fit_counts(&y, -150, 0.3, 50.0, &FitPolicy::default()).unwrap();
            assert!(wrap_phase(f.a - a).abs() < 1e-8, "a {} vs {a}", f.a);
            assert!((f.b / b - 1.0).abs() < 1e-8);
            assert!((f.c - c).abs() < 1e-8 * c.abs().max(1e-5));
            assert!((f.i_0 / i0 - 1.0).abs() < 1e-8);
            assert!((f.visibility / v - 1.0).abs() < 1e-8);
            assert!(!f.flagged);
        }
    }

    #[test]
    fn reversed_sweep_reported_with_positive_b() {
        let y = noiseless(1.0, -0.07, 3e-5, 2e3, 0.5);
        let f = fit_counts(&y, -150, 0.3, 50.0, &FitPolicy::default()).unwrap();
        assert!((f.a + 1.0).abs() < 1e-8 && (f.b - 0.07).abs() < 1e-10 && (f.c + 3e-5).abs() < 1e-12);
    }

    #[test]
    fn zero_visibility_is_flagged() {
        let y = noiseless(0.0, 0.06, 0.0, 1e3, 0.0);
        let f = fit_counts(&y, -150, 0.3, 50.0, &FitPolicy::default()).unwrap();
        assert!(f.visibility <= 2.0 * f.sigma(4), "{} ± {}", f.visibility, f.sigma(4));
        assert!(f.flagged);
    }

    fn fit_at(a: f64, p: f64) -> FringeFit {
        let mut cov = [[0.0; NP]; NP];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = 1e-6;
        }
        FringeFit { a, b: 0.06, c: 0.0, i_0: p, visibility: 1.0, i_b: 0.0, covariance: cov, chi2_dof: 1.0, iterations: 1, flagged: false }
    }

    #[test]
    fn three_sweep_estimators() {
        // linear drift cancels exactly
        let (alpha, delta, phi) = (0.3, 0.17, 0.25);
        let r = reduce_fits(&[fit_at(alpha - delta, 100.0), fit_at(alpha + phi, 40.0), fit_at(alpha + delta, 100.0)]).unwrap();
        assert!((r.phi - phi).abs() < 1e-15);
        assert!((r.t - 0.4).abs() < 1e-15);
        let same = reduce_fits(&[fit_at(1.0, 10.0), fit_at(1.0, 10.0), fit_at(1.0, 10.0)]).unwrap();
        assert_eq!((same.phi, same.t), (0.0, 1.0));
        assert!(same.phi_err > 0.0 && same.t_err > 0.0);
        // empty sweeps straddling the ±π cut average to π
        let r = reduce_fits(&[fit_at(3.1, 1.0), fit_at(-3.0, 1.0), fit_at(-3.1, 1.0)]).unwrap();
        assert!((r.phi - (PI - 3.0)).abs() < 1e-12, "{}", r.phi);
    }

    #[test]
    fn perfect_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let f = weighted_line(&x, &y, &[0.1; 4]).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-14 && f.intercept.abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(weighted_line(&[1.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    fn state(n: f64) -> GasState {
        GasState { p_meas: n * 1e-20, p_cell: n * 0.9e-20, n_gas: n, species: "xenon".into() }
    }

    #[test]
    fn series_unwraps_and_orders() {
        let slope = 1.2e-18;
        let entries: Vec<_> = [4e18, 1e18, 3e18, 2e18]
            .iter()
            .map(|&n| (state(n), RunReduction { phi: wrap_phase(slope * n), phi_err: 0.01, t: (-0.5e-18 * n).exp(), t_err: 0.01 }))
            .collect();
        let s = build_series(&entries, 1075.0, 1.0, 1.0).unwrap();
        assert!(s.points.windows(2).all(|w| w[0].n_gas < w[1].n_gas));
        assert!((s.points[3].phi - 4.8).abs() < 1e-12);
        let m = extract_index(&s).unwrap();
        assert!((m.index.re_per_density - slope).abs() < 1e-12 * slope);
        assert!((m.index.im_per_density - 0.5e-18).abs() < 1e-12 * 0.5e-18);
        assert!(m.phase_fit.intercept.abs() < 1e-12);
        let mut dup = entries.clone();
        dup.push(entries[0].clone());
        assert!(build_series(&dup, 1075.0, 1.0, 1.0).is_err());
    }
}

mod common;

use common::{load, rel};
use liwave::constants::{HBAR, LI7_MASS};
use liwave::refraction::{
    glory_scan_with_source, index_per_density, index_with_source, k_lab, sigma_eff, IndexPolicy, InterpolatedAmplitude,
};
use liwave::scattering::{build_table, forward_amplitude, total_cross_section, ScatteringPolicy};
use liwave::thermal::{doubled_node_check, BeamSpec, TargetGasSpec};

fn xenon() -> TargetGasSpec {
    TargetGasSpec::named("xenon").unwrap()
}

fn peak_to_trough(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

#[test]
fn stationary_target_reduces_to_single_amplitude() {
    let (_, system) = load("li_xe_bc.json");
    let cold = xenon().at_temperature(1e-6).unwrap();
    let policy = IndexPolicy::default();
    let u = 1075.0;
    let beam = BeamSpec::new(LI7_MASS, u, 0.0).unwrap();
    let r = index_per_density(&system, &beam, &cold, &policy).unwrap();

    let k_rel = system.mu * u / HBAR;
    let table = build_table(&system, k_rel, &policy.scattering).unwrap();
    let f = forward_amplitude(&table).unwrap();
    let kl = k_lab(LI7_MASS, u);
    let pref = 2.0 * std::f64::consts::PI * LI7_MASS / (system.mu * kl * kl);
    assert!(rel(r.rho, f.f_re / f.f_im) < 1e-10);
    assert!(rel(r.re_per_density, pref * f.f_re) < 1e-6);
    assert!(rel(r.im_per_density, pref * f.f_im) < 1e-6);
    assert!(rel(sigma_eff(&r), total_cross_section(&table).unwrap()) < 1e-6);
}

#[test]
fn xenon_index_at_measured_velocity() {
    let (_, system) = load("li_xe_bc.json");
    let beam = BeamSpec::new(LI7_MASS, 1075.0, 0.0).unwrap();
    let mut source = InterpolatedAmplitude::new(system, ScatteringPolicy::survey(), 0.02);
    let policy = IndexPolicy::default();
    let r = index_with_source(&mut source, &system, &beam, &xenon(), &policy).unwrap();
    assert!(r.im_per_density > 0.0);
    assert!((0.6..=0.8).contains(&r.rho), "{}", r.rho);
    assert!((r.rho - r.re_per_density / r.im_per_density).abs() <= 1e-12 * r.rho);

    // node doubling at N = 32, using the same interpolated amplitudes
    let change = doubled_node_check(32, |n| {
        let p = IndexPolicy { target_nodes: n, ..policy };
        Ok(index_with_source(&mut source, &system, &beam, &xenon(), &p)?.im_per_density)
    })
    .unwrap();
    assert!(change < 1e-4, "{change:e}");
}

#[test]
fn pure_c6_scaled_index_is_flat() {
    let (_, system) = load("li_xe_c6.json");
    let mut source = InterpolatedAmplitude::new(system, ScatteringPolicy::survey(), 0.02);
    let rows =
        glory_scan_with_source(&mut source, &system, &xenon(), 0.0, 1000.0, 3000.0, 6, &IndexPolicy::default()).unwrap();
    let im: Vec<f64> = rows.iter().map(|r| r.im_scaled).collect();
    let max = im.iter().cloned().fold(f64::MIN, f64::max);
    let min = im.iter().cloned().fold(f64::MAX, f64::min);
    assert!((max - min) / min < 0.05, "{im:?}");
    for r in &rows {
        assert!(rel(r.rho, (std::f64::consts::PI / 5.0).tan()) < 0.03, "{}", r.rho);
    }
}

#[test]
fn thermal_averaging_damps_glory_contrast() {
    let (_, system) = load("li_xe_bc.json");
    let mut source = InterpolatedAmplitude::new(system, ScatteringPolicy::survey(), 0.01);
    let policy = IndexPolicy::default();
    let mut contrast = |gas: &TargetGasSpec| {
        let rows = glory_scan_with_source(&mut source, &system, gas, 0.0, 700.0, 3300.0, 24, &policy).unwrap();
        peak_to_trough(&rows.iter().map(|r| r.im_scaled).collect::<Vec<_>>())
    };
    let cold = contrast(&xenon().at_temperature(1.0).unwrap());
    let warm = contrast(&xenon());
    assert!(warm < cold, "warm {warm} cold {cold}");
}

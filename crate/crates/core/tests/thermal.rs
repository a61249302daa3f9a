mod common;

use common::rel;
use liwave::constants::{K_B, LI7_MASS};
use liwave::thermal::{beam_nodes, relative_speed_nodes, BeamSpec, TargetGasSpec, DEFAULT_NODES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SAMPLES: usize = 10_000_000;

fn mean(nodes: &[liwave::thermal::Node], f: impl Fn(f64) -> f64) -> f64 {
    nodes.iter().map(|n| n.weight * f(n.v)).sum()
}

#[test]
fn relative_speed_matches_monte_carlo() {
    let gas = TargetGasSpec::named("xenon").unwrap();
    let v = 1075.0;
    let nodes = relative_speed_nodes(v, &gas, DEFAULT_NODES).unwrap();
    assert!((nodes.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(nodes.iter().all(|n| n.weight > 0.0));

    let sigma = (K_B * gas.temperature / gas.m_target).sqrt();
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sum = 0.0;
    for _ in 0..SAMPLES {
        let (x, y, z): (f64, f64, f64) = (normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
        sum += (x * x + y * y + (v - z) * (v - z)).sqrt();
    }
    let mc = sum / SAMPLES as f64;
    let quad = mean(&nodes, |x| x);
    assert!(rel(quad, mc) < 1e-3, "quadrature {quad} vs Monte Carlo {mc}");

    // ⟨v_r²⟩ = v² + 3kT/m exactly
    let second = mean(&nodes, |x| x * x);
    let exact = v * v + 3.0 * sigma * sigma;
    assert!(rel(second, exact) < 1e-8, "{second} vs {exact}: {:e}", rel(second, exact));
}

#[test]
fn beam_mean_matches_monte_carlo() {
    let beam = BeamSpec::lithium(1075.0).unwrap();
    let nodes = beam_nodes(&beam, DEFAULT_NODES).unwrap();
    assert!((nodes.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs() < 1e-12);
    let s = beam.u_mean * beam.fwhm_fraction / 2.3548;
    let vmax = beam.u_mean + 6.0 * s;
    let proposal = Normal::new(beam.u_mean, s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut sum, mut n) = (0.0, 0usize);
    while n < SAMPLES {
        let v: f64 = proposal.sample(&mut rng);
        if v <= 0.0 || v > vmax {
            continue;
        }
        if rng.gen::<f64>() < (v / vmax).powi(3) {
            sum += v;
            n += 1;
        }
    }
    let mc = sum / n as f64;
    let quad = mean(&nodes, |x| x);
    assert!(rel(quad, mc) < 1e-3, "quadrature {quad} vs Monte Carlo {mc}");
}

#[test]
fn cold_target_collapses_to_beam_speed() {
    let gas = TargetGasSpec::named("xenon").unwrap().at_temperature(1e-6).unwrap();
    let nodes = relative_speed_nodes(1075.0, &gas, 32).unwrap();
    assert!(rel(mean(&nodes, |x| x), 1075.0) < 1e-6);
    let zero = relative_speed_nodes(1075.0, &gas.at_temperature(0.0).unwrap(), 32).unwrap();
    assert_eq!(zero.len(), 1);
    assert_eq!((zero[0].v, zero[0].weight), (1075.0, 1.0));
}

#[test]
fn beam_without_spread_is_one_node() {
    let beam = BeamSpec::new(LI7_MASS, 1500.0, 0.0).unwrap();
    let nodes = beam_nodes(&beam, 16).unwrap();
    assert_eq!(nodes.len(), 1);
    assert_eq!(nodes[0].v, 1500.0);
}

#[test]
fn node_sets_are_deterministic() {
    let gas = TargetGasSpec::named("krypton").unwrap();
    assert_eq!(relative_speed_nodes(900.0, &gas, 40).unwrap(), relative_speed_nodes(900.0, &gas, 40).unwrap());
}

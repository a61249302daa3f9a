mod common;

use common::{config_path, load, rel};
use liwave::cell::{effective_length, pressure_correction, CellGeometry};
use liwave::potentials::PotentialSpec;
use liwave::thermal::TargetGasSpec;

#[test]
fn shipped_buckingham_corner_well_depths() {
    for name in ["li_ar_bc.json", "li_kr_bc.json", "li_xe_bc.json"] {
        let (cfg, system) = load(name);
        let reference = cfg.reference_depth().unwrap().expect("documented depth");
        // independent dense-grid minimum over [0.5, 3]·r_m
        let rm = system.potential.range_scale();
        let min = (0..100_000)
            .map(|i| system.potential.value(rm * (0.5 + 2.5 * i as f64 / 99_999.0)))
            .fold(f64::INFINITY, f64::min);
        assert!(rel(-min, reference) < 0.01, "{name}: {} vs {reference}", -min);
        let (eps, _) = system.potential.well_parameters().unwrap();
        assert!(rel(eps, -min) < 1e-6);
        assert!(!cfg.provenance.is_empty());
    }
}

#[test]
fn pure_dispersion_config() {
    let (_, system) = load("li_xe_c6.json");
    assert!(matches!(system.potential, PotentialSpec::Dispersion { c8, c10, .. } if c8 == 0.0 && c10 == 0.0));
    assert!(system.potential.well_parameters().is_err());
}

#[test]
fn shipped_geometry_file() {
    let geom = CellGeometry::load(&config_path("cell_default.json")).unwrap();
    assert_eq!(geom.inner_length, CellGeometry::default_geometry().inner_length);
    let gas = TargetGasSpec::named("xenon").unwrap();
    let ratio = pressure_correction(&geom, &gas).unwrap();
    assert!((0.88..=0.92).contains(&ratio), "{ratio}");
    assert!((effective_length(&geom) - 0.0665).abs() <= 1e-3);
    assert!(geom.provenance.contains("reverse-engineered"));
}

#[test]
fn missing_and_corrupt_files() {
    let err = liwave::config::PotentialConfig::load(&config_path("does_not_exist.json")).unwrap_err();
    assert_eq!(err.code(), "E_IO");
    let dir = std::env::temp_dir().join(format!("liwave-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"pair\": ").unwrap();
    let err = liwave::config::PotentialConfig::load(&bad).unwrap_err();
    assert_eq!(err.code(), "E_PARSE");
    assert!(err.to_string().contains("bad.json"));
    std::fs::remove_dir_all(&dir).ok();
}

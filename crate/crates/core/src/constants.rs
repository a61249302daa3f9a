//! Physical constants (CODATA 2018) and unit conversions. All internal
//! quantities are SI.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass constant, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Hartree energy, J.
pub const HARTREE: f64 = 4.359_744_722_2e-18;
/// Bohr radius, m.
pub const BOHR: f64 = 5.291_772_109_03e-11;
/// Energy of one wavenumber (cm⁻¹), J.
pub const WAVENUMBER: f64 = 1.986_445_857e-23;
/// Ångström, m.
pub const ANGSTROM: f64 = 1e-10;
/// Millibar, Pa.
pub const MBAR: f64 = 100.0;

/// Default target-gas temperature, K.
pub const ROOM_TEMPERATURE: f64 = 298.0;

/// Mass of ⁷Li, kg.
pub const LI7_MASS: f64 = 7.016_003_4 * AMU;

/// Standard atomic weights of the rare gases used as targets, in u.
pub const ARGON_U: f64 = 39.948;
pub const KRYPTON_U: f64 = 83.798;
pub const XENON_U: f64 = 131.293;

/// Looks up a target species by name and returns its mass in kg.
pub fn species_mass(name: &str) -> Option<f64> {
    let u = match name.to_ascii_lowercase().as_str() {
        "ar" | "argon" => ARGON_U,
        "kr" | "krypton" => KRYPTON_U,
        "xe" | "xenon" => XENON_U,
        "li7" | "7li" | "lithium" => 7.016_003_4,
        _ => return None,
    };
    Some(u * AMU)
}

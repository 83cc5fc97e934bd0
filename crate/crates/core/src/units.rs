//! Physical constants and unit conversions.
//!
//! Lengths and momenta are atomic units, energies are eV at every public
//! interface, delays are femtoseconds.

/// One hartree in eV.
pub const HARTREE_EV: f64 = 27.211_386_245_988;

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Proton mass in electron masses.
pub const PROTON_MASS: f64 = 1836.153;

/// Hydrogen atom mass (proton plus bound electron) in electron masses.
pub const HYDROGEN_MASS: f64 = 1837.153;

/// Reduced mass of the two nuclei of H2+ in electron masses.
pub const REDUCED_MASS_H2PLUS: f64 = 918.076;

/// H + H+ dissociation limit above the neutral H2 ground state, eV.
pub const DISSOCIATION_LIMIT_EV: f64 = 18.1;

/// Intensity corresponding to a field amplitude of 1 a.u., W/cm².
pub const ATOMIC_UNIT_INTENSITY: f64 = 3.509e16;

/// Default IR photon energy (1030 nm fundamental), eV.
pub const DEFAULT_PHOTON_ENERGY_EV: f64 = 1.2;

#[inline]
pub fn ev_to_hartree(e: f64) -> f64 {
    e / HARTREE_EV
}

#[inline]
pub fn hartree_to_ev(e: f64) -> f64 {
    e * HARTREE_EV
}

/// Angular frequency in rad/fs for a photon energy in eV.
#[inline]
pub fn angular_frequency(photon_energy_ev: f64) -> f64 {
    photon_energy_ev / HBAR_EV_FS
}

/// Period of the 2ω delay oscillation, π/ω, in fs.
#[inline]
pub fn oscillation_period(photon_energy_ev: f64) -> f64 {
    std::f64::consts::PI / angular_frequency(photon_energy_ev)
}

/// Wrap an angle into (−π, π].
pub fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut p = phase.rem_euclid(TAU);
    if p > PI {
        p -= TAU;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_for_default_photon() {
        let t = oscillation_period(1.2);
        assert!((t - 1.7231).abs() < 1e-3, "{t}");
    }

    #[test]
    fn wrap_is_half_open() {
        use std::f64::consts::PI;
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_phase(0.0), 0.0);
    }
}

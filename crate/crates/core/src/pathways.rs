//! Quantum-path amplitudes and the parity-qubit final state.
//!
//! Each diagonal band of the joint energy spectrum is reached by three
//! interfering paths. Odd bands (one XUV photon) have one ground-state path
//! g1 and two bond-softening paths b1, b2; even bands (XUV ± one IR photon)
//! have two ground-state paths g1, g2 and one bond-softening path b1. The
//! ground-state paths end in the c_gs sector and the bond-softening paths in
//! the orthogonal c_bs sector, and the hemisphere asymmetry is
//! A = −2 Re[c_gs c_bs*] / (|c_gs|² + |c_bs|²).
//!
//! Delay convention: τ > 0 means the IR pulse arrives later, φ(τ) = +ωτ.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{angular_frequency, oscillation_period, DISSOCIATION_LIMIT_EV};

/// Overall sign in A = SIGN · 2 Re[c_gs c_bs*] / (|c_gs|² + |c_bs|²).
pub const ASYMMETRY_SIGN: f64 = -1.0;

/// Minimum number of delay samples for a one-period average.
pub const MIN_AVERAGE_SAMPLES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathwayError {
    #[error("electron energy {energy_ev:.4} eV is at or below threshold (q = {order}, KER = {ker_ev} eV)")]
    BelowThreshold { order: u32, ker_ev: f64, energy_ev: f64 },
    #[error("harmonic {0} is not in the XUV spectrum")]
    MissingHarmonic(u32),
    #[error("state has zero norm")]
    ZeroState,
    #[error("invalid XUV spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid pathway spec: {0}")]
    InvalidSpec(String),
    #[error("time average needs at least {MIN_AVERAGE_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandParity {
    Odd,
    Even,
}

impl BandParity {
    pub fn as_str(self) -> &'static str {
        match self {
            BandParity::Odd => "odd",
            BandParity::Even => "even",
        }
    }
}

impl std::fmt::Display for BandParity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub energy_ev: f64,
    pub magnitude: f64,
    pub phase: f64,
}

/// Odd harmonics of the IR fundamental with their spectral phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XuvSpectrum {
    photon_energy_ev: f64,
    harmonics: Vec<Harmonic>,
}

impl XuvSpectrum {
    /// `harmonics` are (order, magnitude, phase) triples.
    pub fn new(photon_energy_ev: f64, harmonics: &[(u32, f64, f64)]) -> Result<Self, PathwayError> {
        if !(photon_energy_ev > 0.0) {
            return Err(PathwayError::InvalidSpectrum(format!(
                "photon energy must be positive, got {photon_energy_ev}"
            )));
        }
        if harmonics.is_empty() {
            return Err(PathwayError::InvalidSpectrum("no harmonics".into()));
        }
        for (i, &(q, m, p)) in harmonics.iter().enumerate() {
            if q % 2 == 0 {
                return Err(PathwayError::InvalidSpectrum(format!("order {q} is even")));
            }
            if i > 0 && q != harmonics[i - 1].0 + 2 {
                return Err(PathwayError::InvalidSpectrum(format!(
                    "orders must increase in steps of 2 ({} then {q})",
                    harmonics[i - 1].0
                )));
            }
            if !(m >= 0.0) || !p.is_finite() {
                return Err(PathwayError::InvalidSpectrum(format!(
                    "order {q}: magnitude {m} / phase {p}"
                )));
            }
        }
        let harmonics = harmonics
            .iter()
            .map(|&(order, magnitude, phase)| Harmonic {
                order,
                energy_ev: order as f64 * photon_energy_ev,
                magnitude,
                phase,
            })
            .collect();
        Ok(Self {
            photon_energy_ev,
            harmonics,
        })
    }

    /// Unit-magnitude comb with φ(first) = 0 and φ_q − φ_{q−2} = `steps[k]`
    /// for the k-th adjacent pair.
    pub fn from_chirp(
        photon_energy_ev: f64,
        first_order: u32,
        steps: &[f64],
    ) -> Result<Self, PathwayError> {
        let mut phase = 0.0;
        let mut list = vec![(first_order, 1.0, 0.0)];
        for (k, s) in steps.iter().enumerate() {
            phase += s;
            list.push((first_order + 2 * (k as u32 + 1), 1.0, phase));
        }
        Self::new(photon_energy_ev, &list)
    }

    /// Flat-phase comb covering `first..=last`.
    pub fn unchirped(photon_energy_ev: f64, first_order: u32, last_order: u32) -> Result<Self, PathwayError> {
        let n = last_order.saturating_sub(first_order) / 2;
        Self::from_chirp(photon_energy_ev, first_order, &vec![0.0; n as usize])
    }

    pub fn photon_energy_ev(&self) -> f64 {
        self.photon_energy_ev
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn phase(&self, order: u32) -> Result<f64, PathwayError> {
        self.harmonics
            .iter()
            .find(|h| h.order == order)
            .map(|h| h.phase)
            .ok_or(PathwayError::MissingHarmonic(order))
    }

    /// Δφ_{q,q−2} = φ_q − φ_{q−2}.
    pub fn delta_phase(&self, order: u32) -> Result<f64, PathwayError> {
        let lower = order
            .checked_sub(2)
            .ok_or(PathwayError::MissingHarmonic(0))?;
        Ok(self.phase(order)? - self.phase(lower)?)
    }
}

/// Photoelectron energy shared by all paths of a band.
///
/// Odd band q: qħω − I_d − KER. Even band q (between harmonics q−2 and q):
/// qħω − I_d − KER − ħω.
pub fn electron_energy(
    parity: BandParity,
    order: u32,
    ker_ev: f64,
    photon_energy_ev: f64,
) -> Result<f64, PathwayError> {
    let mut e = order as f64 * photon_energy_ev - DISSOCIATION_LIMIT_EV - ker_ev;
    if parity == BandParity::Even {
        e -= photon_energy_ev;
    }
    if e > 0.0 {
        Ok(e)
    } else {
        Err(PathwayError::BelowThreshold {
            order,
            ker_ev,
            energy_ev: e,
        })
    }
}

/// Magnitudes, phases and partial waves of the three paths of one band at
/// one KER. Path order is (g1, b1, b2) for odd bands and (g1, g2, b1) for
/// even bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwaySpec {
    pub parity: BandParity,
    pub order: u32,
    pub ker_ev: f64,
    pub magnitudes: [f64; 3],
    pub theta_gs: f64,
    pub theta_bs: f64,
    pub partial_waves: [u32; 3],
    /// φ^XUV_q of the reference harmonic.
    pub phi_q: f64,
    /// φ^XUV_{q−2}.
    pub phi_q_minus_2: f64,
    pub photon_energy_ev: f64,
}

impl PathwaySpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        parity: BandParity,
        order: u32,
        ker_ev: f64,
        magnitudes: [f64; 3],
        theta: (f64, f64),
        partial_waves: [u32; 3],
        xuv: &XuvSpectrum,
    ) -> Result<Self, PathwayError> {
        if magnitudes.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(PathwayError::InvalidSpec(format!(
                "magnitudes must be finite and non-negative: {magnitudes:?}"
            )));
        }
        if !theta.0.is_finite() || !theta.1.is_finite() {
            return Err(PathwayError::InvalidSpec("non-finite nuclear phase".into()));
        }
        if order < 2 {
            return Err(PathwayError::MissingHarmonic(0));
        }
        Ok(Self {
            parity,
            order,
            ker_ev,
            magnitudes,
            theta_gs: theta.0,
            theta_bs: theta.1,
            partial_waves,
            phi_q: xuv.phase(order)?,
            phi_q_minus_2: xuv.phase(order - 2)?,
            photon_energy_ev: xuv.photon_energy_ev(),
        })
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.photon_energy_ev)
    }

    fn wave_phase(&self, i: usize) -> f64 {
        -PI * self.partial_waves[i] as f64 / 2.0
    }

    /// Complex amplitudes of the three paths at delay τ (fs).
    pub fn path_amplitudes(&self, tau_fs: f64) -> [Complex64; 3] {
        let wt = self.omega() * tau_fs;
        let m = self.magnitudes;
        let (gs, bs) = (self.theta_gs, self.theta_bs);
        let args = match self.parity {
            BandParity::Odd => [
                gs - FRAC_PI_2 + self.wave_phase(0) + self.phi_q,
                bs + self.wave_phase(1) + self.phi_q_minus_2 + 2.0 * wt,
                bs + self.wave_phase(2) + self.phi_q,
            ],
            BandParity::Even => [
                gs + self.wave_phase(0) + self.phi_q_minus_2 + wt,
                gs + self.wave_phase(1) + self.phi_q - wt,
                bs - FRAC_PI_2 + self.wave_phase(2) + self.phi_q_minus_2 + wt,
            ],
        };
        [0, 1, 2].map(|i| Complex64::from_polar(m[i], args[i]))
    }
}

/// c_gs |g-sector⟩ + c_bs |b-sector⟩. For odd bands the sectors are |+,−⟩
/// and |−,+⟩, for even bands |+,+⟩ and |−,−⟩ (ion parity, electron parity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalState {
    pub c_gs: Complex64,
    pub c_bs: Complex64,
    pub parity: BandParity,
}

impl FinalState {
    pub fn norm_sqr(&self) -> f64 {
        self.c_gs.norm_sqr() + self.c_bs.norm_sqr()
    }
}

pub fn assemble_odd(spec: &PathwaySpec, tau_fs: f64) -> Result<FinalState, PathwayError> {
    if spec.parity != BandParity::Odd {
        return Err(PathwayError::InvalidSpec("assemble_odd on an even band".into()));
    }
    let [g1, b1, b2] = spec.path_amplitudes(tau_fs);
    Ok(FinalState {
        c_gs: g1,
        c_bs: b1 + b2,
        parity: BandParity::Odd,
    })
}

pub fn assemble_even(spec: &PathwaySpec, tau_fs: f64) -> Result<FinalState, PathwayError> {
    if spec.parity != BandParity::Even {
        return Err(PathwayError::InvalidSpec("assemble_even on an odd band".into()));
    }
    let [g1, g2, b1] = spec.path_amplitudes(tau_fs);
    Ok(FinalState {
        c_gs: g1 + g2,
        c_bs: b1,
        parity: BandParity::Even,
    })
}

pub fn assemble(spec: &PathwaySpec, tau_fs: f64) -> FinalState {
    match spec.parity {
        BandParity::Odd => assemble_odd(spec, tau_fs),
        BandParity::Even => assemble_even(spec, tau_fs),
    }
    .expect("parity matches")
}

pub fn asymmetry_of_state(s: &FinalState) -> Result<f64, PathwayError> {
    let n = s.norm_sqr();
    if n == 0.0 {
        return Err(PathwayError::ZeroState);
    }
    let a = ASYMMETRY_SIGN * 2.0 * (s.c_gs * s.c_bs.conj()).re / n;
    Ok(a.clamp(-1.0, 1.0))
}

/// Closed-form odd-band asymmetry with the delay dependence written out:
///
/// numerator  −2 [|g1||b1| cos(Φ1 − 2ωτ) + |g1||b2| cos Φ2]
/// denominator |g1|² + |b1|² + |b2|² + 2|b1||b2| cos(Φ12 + 2ωτ)
///
/// with Φ1 = ΔΘ − π/2 − π(ℓg1 − ℓb1)/2 + Δφ_{q,q−2},
/// Φ2 = ΔΘ − π/2 − π(ℓg1 − ℓb2)/2, Φ12 = π(ℓb2 − ℓb1)/2 − Δφ_{q,q−2}.
pub fn asymmetry_odd(spec: &PathwaySpec, tau_fs: f64) -> Result<f64, PathwayError> {
    if spec.parity != BandParity::Odd {
        return Err(PathwayError::InvalidSpec("asymmetry_odd on an even band".into()));
    }
    let [g1, b1, b2] = spec.magnitudes;
    let [l_g1, l_b1, l_b2] = spec.partial_waves.map(|l| l as f64);
    let dtheta = spec.theta_gs - spec.theta_bs;
    let dphi = spec.phi_q - spec.phi_q_minus_2;
    let x = 2.0 * spec.omega() * tau_fs;
    let phi1 = dtheta - FRAC_PI_2 - PI * (l_g1 - l_b1) / 2.0 + dphi;
    let phi2 = dtheta - FRAC_PI_2 - PI * (l_g1 - l_b2) / 2.0;
    let phi12 = PI * (l_b2 - l_b1) / 2.0 - dphi;
    let num = g1 * b1 * (phi1 - x).cos() + g1 * b2 * phi2.cos();
    let den = g1 * g1 + b1 * b1 + b2 * b2 + 2.0 * b1 * b2 * (phi12 + x).cos();
    ratio(num, den)
}

/// Closed-form even-band asymmetry:
///
/// numerator  −2 [|g1||b1| cos Ψ1 + |g2||b1| cos(Ψ2 − 2ωτ)]
/// denominator |g1|² + |g2|² + |b1|² + 2|g1||g2| cos(Ψ12 + 2ωτ)
///
/// with Ψ1 = ΔΘ + π/2 − π(ℓg1 − ℓb1)/2,
/// Ψ2 = ΔΘ + π/2 − π(ℓg2 − ℓb1)/2 + Δφ_{q,q−2}, Ψ12 = −π(ℓg1 − ℓg2)/2 − Δφ_{q,q−2}.
pub fn asymmetry_even(spec: &PathwaySpec, tau_fs: f64) -> Result<f64, PathwayError> {
    if spec.parity != BandParity::Even {
        return Err(PathwayError::InvalidSpec("asymmetry_even on an odd band".into()));
    }
    let [g1, g2, b1] = spec.magnitudes;
    let [l_g1, l_g2, l_b1] = spec.partial_waves.map(|l| l as f64);
    let dtheta = spec.theta_gs - spec.theta_bs;
    let dphi = spec.phi_q - spec.phi_q_minus_2;
    let x = 2.0 * spec.omega() * tau_fs;
    let psi1 = dtheta + FRAC_PI_2 - PI * (l_g1 - l_b1) / 2.0;
    let psi2 = dtheta + FRAC_PI_2 - PI * (l_g2 - l_b1) / 2.0 + dphi;
    let psi12 = -PI * (l_g1 - l_g2) / 2.0 - dphi;
    let num = g1 * b1 * psi1.cos() + g2 * b1 * (psi2 - x).cos();
    let den = g1 * g1 + g2 * g2 + b1 * b1 + 2.0 * g1 * g2 * (psi12 + x).cos();
    ratio(num, den)
}

fn ratio(num: f64, den: f64) -> Result<f64, PathwayError> {
    // den is |c_gs|² + |c_bs|², non-negative up to rounding
    if den <= 0.0 {
        return Err(PathwayError::ZeroState);
    }
    Ok((ASYMMETRY_SIGN * 2.0 * num / den).clamp(-1.0, 1.0))
}

/// Closed-form asymmetry for either parity.
pub fn asymmetry(spec: &PathwaySpec, tau_fs: f64) -> Result<f64, PathwayError> {
    match spec.parity {
        BandParity::Odd => asymmetry_odd(spec, tau_fs),
        BandParity::Even => asymmetry_even(spec, tau_fs),
    }
}

/// Event rate of a band: |c_gs|² + |c_bs|² (the two sectors are orthogonal).
pub fn dissociation_probability(spec: &PathwaySpec, tau_fs: f64) -> f64 {
    assemble(spec, tau_fs).norm_sqr()
}

/// |g1 + b1 + b2|² (odd) or |g1 + g2 + b1|² (even), kept as a diagnostic.
pub fn coherent_probability(spec: &PathwaySpec, tau_fs: f64) -> f64 {
    let a = spec.path_amplitudes(tau_fs);
    (a[0] + a[1] + a[2]).norm_sqr()
}

/// Mean of A(τ) over `n_samples` uniform delays covering one period π/ω.
pub fn time_average_asymmetry(spec: &PathwaySpec, n_samples: usize) -> Result<f64, PathwayError> {
    if n_samples < MIN_AVERAGE_SAMPLES {
        return Err(PathwayError::TooFewSamples(n_samples));
    }
    let period = oscillation_period(spec.photon_energy_ev);
    let mut sum = 0.0;
    for k in 0..n_samples {
        sum += asymmetry(spec, period * k as f64 / n_samples as f64)?;
    }
    Ok(sum / n_samples as f64)
}

pub fn concurrence(s: &FinalState) -> Result<f64, PathwayError> {
    let n = s.norm_sqr();
    if n == 0.0 {
        return Err(PathwayError::ZeroState);
    }
    Ok((2.0 * s.c_gs.norm() * s.c_bs.norm() / n).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_xuv() -> XuvSpectrum {
        XuvSpectrum::unchirped(1.2, 15, 27).unwrap()
    }

    fn odd(m: [f64; 3], l: [u32; 3]) -> PathwaySpec {
        PathwaySpec::new(BandParity::Odd, 21, 0.6, m, (0.0, 0.0), l, &flat_xuv()).unwrap()
    }

    fn even(m: [f64; 3], l: [u32; 3]) -> PathwaySpec {
        PathwaySpec::new(BandParity::Even, 21, 0.6, m, (0.0, 0.0), l, &flat_xuv()).unwrap()
    }

    #[test]
    fn electron_energy_examples() {
        let e = electron_energy(BandParity::Odd, 21, 0.0, 1.2).unwrap();
        assert!((e - 7.1).abs() < 1e-12);
        let e = electron_energy(BandParity::Odd, 21, 0.6, 1.2).unwrap();
        assert!((e - 6.5).abs() < 1e-12);
        let e = electron_energy(BandParity::Even, 21, 0.6, 1.2).unwrap();
        assert!((e - 5.3).abs() < 1e-12);
        assert!(matches!(
            electron_energy(BandParity::Odd, 21, 21.0 * 1.2 - 18.1, 1.2),
            Err(PathwayError::BelowThreshold { .. })
        ));
    }

    #[test]
    fn spectrum_validation() {
        assert!(XuvSpectrum::new(1.2, &[(20, 1.0, 0.0)]).is_err());
        assert!(XuvSpectrum::new(1.2, &[(19, 1.0, 0.0), (23, 1.0, 0.0)]).is_err());
        assert!(XuvSpectrum::new(0.0, &[(19, 1.0, 0.0)]).is_err());
        let x = XuvSpectrum::from_chirp(1.2, 17, &[0.4, 0.4, 0.4]).unwrap();
        assert_eq!(x.harmonics().len(), 4);
        assert!((x.harmonics()[3].energy_ev - 27.6).abs() < 1e-9);
        assert!((x.delta_phase(21).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(x.phase(25), Err(PathwayError::MissingHarmonic(25)));
    }

    #[test]
    fn missing_lower_harmonic() {
        let x = XuvSpectrum::unchirped(1.2, 21, 25).unwrap();
        let r = PathwaySpec::new(BandParity::Odd, 21, 0.6, [1.0; 3], (0.0, 0.0), [1; 3], &x);
        assert_eq!(r.unwrap_err(), PathwayError::MissingHarmonic(19));
    }

    #[test]
    fn single_path_states() {
        let s = assemble_odd(&odd([1.0, 0.0, 0.0], [1; 3]), 0.3).unwrap();
        assert_eq!(s.c_bs, Complex64::new(0.0, 0.0));
        assert_eq!(asymmetry_of_state(&s).unwrap(), 0.0);
        let s = assemble_even(&even([1.0, 0.0, 0.0], [1; 3]), 0.3).unwrap();
        assert_eq!(asymmetry_of_state(&s).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_odd_example() {
        let spec = odd([1.0, 1.0, 1.0], [1, 0, 0]);
        let s = assemble_odd(&spec, 0.0).unwrap();
        assert!((s.c_gs.arg().abs() - PI).abs() < 1e-12);
        assert!((s.c_bs - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((asymmetry_of_state(&s).unwrap() - 0.8).abs() < 1e-12);
        assert!((asymmetry_odd(&spec, 0.0).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn asymmetry_of_state_extremes() {
        let one = Complex64::new(1.0, 0.0);
        let st = |c_gs, c_bs| FinalState {
            c_gs,
            c_bs,
            parity: BandParity::Odd,
        };
        assert_eq!(asymmetry_of_state(&st(one, one)).unwrap(), -1.0);
        assert!(asymmetry_of_state(&st(one, Complex64::i())).unwrap().abs() < 1e-16);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(asymmetry_of_state(&st(zero, zero)), Err(PathwayError::ZeroState));
    }

    #[test]
    fn two_slit_closure() {
        let spec = even([1.0, 1.0, 0.0], [1; 3]);
        let w = spec.omega();
        for k in 0..20 {
            let t = k as f64 * 0.13;
            let s = assemble_even(&spec, t).unwrap();
            assert!((s.c_gs.norm() - 2.0 * (w * t).cos().abs()).abs() < 1e-12);
            let p = dissociation_probability(&spec, t);
            assert!((p - 4.0 * (w * t).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities() {
        assert_eq!(dissociation_probability(&odd([0.0; 3], [1; 3]), 0.2), 0.0);
        let p = dissociation_probability(&odd([0.0, 0.0, 1.7], [1; 3]), 0.2);
        assert!((p - 1.7 * 1.7).abs() < 1e-12);
        let p = coherent_probability(&odd([0.0, 0.0, 1.7], [1; 3]), 0.2);
        assert!((p - 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn b1_zero_is_delay_independent() {
        let spec = odd([1.0, 0.0, 0.7], [1; 3]);
        let a0 = asymmetry_odd(&spec, 0.0).unwrap();
        for k in 1..50 {
            assert!((asymmetry_odd(&spec, k as f64 * 0.07).unwrap() - a0).abs() < 1e-12);
        }
        let avg = time_average_asymmetry(&spec, 32).unwrap();
        assert!((avg - a0).abs() < 1e-12);
    }

    #[test]
    fn b2_zero_averages_to_zero() {
        let spec = odd([1.0, 0.6, 0.0], [1; 3]);
        assert!(time_average_asymmetry(&spec, 16).unwrap().abs() < 1e-12);
        assert_eq!(
            time_average_asymmetry(&spec, 15),
            Err(PathwayError::TooFewSamples(15))
        );
    }

    #[test]
    fn concurrence_examples() {
        let c = Complex64::new;
        let st = |a, b| FinalState {
            c_gs: a,
            c_bs: b,
            parity: BandParity::Even,
        };
        assert!((concurrence(&st(c(1.0, 0.0), c(0.0, 1.0))).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence(&st(c(1.0, 0.0), c(0.0, 0.0))).unwrap(), 0.0);
        assert!((concurrence(&st(c(2.0, 0.0), c(0.0, 1.0))).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn wrong_parity_rejected() {
        let spec = odd([1.0; 3], [1; 3]);
        assert!(assemble_even(&spec, 0.0).is_err());
        assert!(asymmetry_even(&spec, 0.0).is_err());
    }
}

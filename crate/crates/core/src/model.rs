//! Band model: KER envelopes, per-band path weights and the nuclear phase
//! table combined into pathway specs on a (KER, τ) grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathways::{
    self, electron_energy, BandParity, PathwayError, PathwaySpec, XuvSpectrum,
};
use crate::potentials::{dress_curves, CouplingModel, H2PlusCurves, IrFieldParams, PotentialError};
use crate::quadrature::integrate;
use crate::units::DISSOCIATION_LIMIT_EV;
use crate::wkb::{NuclearPhaseTable, WkbError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Wkb(#[from] WkbError),
    #[error(transparent)]
    Pathway(#[from] PathwayError),
    #[error("invalid band {index}: {message}")]
    InvalidBand { index: usize, message: String },
    #[error("band index {0} out of range")]
    NoSuchBand(usize),
    #[error("invalid KER range: {0}")]
    InvalidRange(String),
}

/// |α|²(KER) = A e^{−a KER} for ground-state dissociation and
/// |β|²(KER) = B exp(−(KER − c)² / 2w²) for the bond-softening bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Envelope {
    pub gs_amplitude: f64,
    /// a, 1/eV.
    pub gs_decay: f64,
    pub bs_amplitude: f64,
    pub bs_center_ev: f64,
    pub bs_width_ev: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Self {
            gs_amplitude: 1.0,
            gs_decay: 4.0,
            bs_amplitude: 0.5,
            bs_center_ev: 0.6,
            bs_width_ev: 0.10,
        }
    }
}

impl Envelope {
    pub fn alpha_sq(&self, ker: f64) -> f64 {
        self.gs_amplitude * (-self.gs_decay * ker).exp()
    }

    pub fn beta_sq(&self, ker: f64) -> f64 {
        let z = (ker - self.bs_center_ev) / self.bs_width_ev;
        self.bs_amplitude * (-0.5 * z * z).exp()
    }

    fn validate(&self) -> Result<(), String> {
        let ok = self.gs_amplitude >= 0.0
            && self.gs_decay.is_finite()
            && self.bs_amplitude >= 0.0
            && self.bs_center_ev.is_finite()
            && self.bs_width_ev > 0.0;
        if ok {
            Ok(())
        } else {
            Err(format!("non-physical envelope {self:?}"))
        }
    }
}

fn ones() -> [f64; 3] {
    [1.0; 3]
}

fn equal_waves() -> [u32; 3] {
    [1; 3]
}

/// One diagonal band. `order` is the reference harmonic q: odd bands sit at
/// qħω − I_d, even bands between harmonics q−2 and q at (q−1)ħω − I_d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub parity: BandParity,
    pub order: u32,
    #[serde(default)]
    pub envelope: Envelope,
    /// Scale factors on the three path magnitudes, (g1, b1, b2) for odd and
    /// (g1, g2, b1) for even bands.
    #[serde(default = "ones")]
    pub path_weights: [f64; 3],
    #[serde(default = "equal_waves")]
    pub partial_waves: [u32; 3],
}

impl BandSpec {
    pub fn new(parity: BandParity, order: u32) -> Self {
        Self {
            parity,
            order,
            envelope: Envelope::default(),
            path_weights: ones(),
            partial_waves: equal_waves(),
        }
    }

    /// Path magnitudes at `ker`. Odd: |g1| = |α|, |b1| = |b2| = |β|/2.
    /// Even: |g1| = |g2| = |α|/2, |b1| = |β|.
    pub fn magnitudes(&self, ker: f64) -> [f64; 3] {
        let a = self.envelope.alpha_sq(ker).sqrt();
        let b = self.envelope.beta_sq(ker).sqrt();
        let w = self.path_weights;
        match self.parity {
            BandParity::Odd => [w[0] * a, w[1] * b / 2.0, w[2] * b / 2.0],
            BandParity::Even => [w[0] * a / 2.0, w[1] * a / 2.0, w[2] * b],
        }
    }

    /// Upper bound on |c_gs|² + |c_bs|² over all delays, used as the
    /// rejection-sampling envelope. Returned as (ground-state, bump) weights
    /// multiplying |α|² and |β|².
    pub fn bound_weights(&self) -> (f64, f64) {
        let w = self.path_weights;
        match self.parity {
            BandParity::Odd => (w[0] * w[0], ((w[1] + w[2]) / 2.0).powi(2)),
            BandParity::Even => (((w[0] + w[1]) / 2.0).powi(2), w[2] * w[2]),
        }
    }

    pub fn bound_density(&self, ker: f64) -> f64 {
        let (ca, cb) = self.bound_weights();
        ca * self.envelope.alpha_sq(ker) + cb * self.envelope.beta_sq(ker)
    }

    /// Total photoelectron + KER energy of the band, eV.
    pub fn total_energy(&self, photon_energy_ev: f64) -> f64 {
        let n = match self.parity {
            BandParity::Odd => self.order as f64,
            BandParity::Even => self.order as f64 - 1.0,
        };
        n * photon_energy_ev - DISSOCIATION_LIMIT_EV
    }
}

/// Everything needed to evaluate A(KER, τ) and the event rate per band.
#[derive(Debug, Clone)]
pub struct PathwayModel {
    pub xuv: XuvSpectrum,
    pub phases: NuclearPhaseTable,
    pub bands: Vec<BandSpec>,
    pub ker_max: f64,
}

impl PathwayModel {
    pub fn new(
        xuv: XuvSpectrum,
        phases: NuclearPhaseTable,
        bands: Vec<BandSpec>,
        ker_max: f64,
    ) -> Result<Self, ModelError> {
        if !(ker_max > 0.0) {
            return Err(ModelError::InvalidRange(format!("ker_max = {ker_max}")));
        }
        let hw = xuv.photon_energy_ev();
        for (index, b) in bands.iter().enumerate() {
            let bad = |message: String| ModelError::InvalidBand { index, message };
            b.envelope.validate().map_err(bad)?;
            if b.order % 2 == 0 {
                return Err(bad(format!("order {} must be odd", b.order)));
            }
            if b.path_weights.iter().any(|w| !(*w >= 0.0)) {
                return Err(bad(format!("negative path weight {:?}", b.path_weights)));
            }
            if b.bound_weights() == (0.0, 0.0) {
                return Err(bad("all path weights are zero".into()));
            }
            xuv.phase(b.order)?;
            if b.order >= 2 {
                xuv.phase(b.order - 2)?;
            }
            electron_energy(b.parity, b.order, ker_max, hw)?;
        }
        Ok(Self {
            xuv,
            phases,
            bands,
            ker_max,
        })
    }

    /// Compute the nuclear phase table from the potential curves.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        curves: &H2PlusCurves,
        ir: &IrFieldParams,
        coupling: &CouplingModel,
        xuv: XuvSpectrum,
        bands: Vec<BandSpec>,
        ker_max: f64,
        phase_step: f64,
        r_max: f64,
    ) -> Result<Self, ModelError> {
        if !(phase_step > 0.0) || phase_step > ker_max {
            return Err(ModelError::InvalidRange(format!("phase grid step {phase_step}")));
        }
        let pair = dress_curves(&curves.ground, &curves.excited, ir, coupling)?;
        let n = (ker_max / phase_step - 1e-9).ceil() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * phase_step).min(ker_max)).collect();
        let table =
            NuclearPhaseTable::compute(&curves.ground, &pair, DISSOCIATION_LIMIT_EV, &grid, r_max)?;
        Self::new(xuv, table, bands, ker_max)
    }

    pub fn photon_energy_ev(&self) -> f64 {
        self.xuv.photon_energy_ev()
    }

    pub fn band(&self, index: usize) -> Result<&BandSpec, ModelError> {
        self.bands.get(index).ok_or(ModelError::NoSuchBand(index))
    }

    pub fn spec(&self, band: usize, ker: f64) -> Result<PathwaySpec, ModelError> {
        let b = self.band(band)?;
        let ph = self.phases.at(ker);
        Ok(PathwaySpec::new(
            b.parity,
            b.order,
            ker,
            b.magnitudes(ker),
            (ph.theta_gs, ph.theta_bs),
            b.partial_waves,
            &self.xuv,
        )?)
    }

    /// A(KER, τ); zero where the band has no population.
    pub fn asymmetry(&self, band: usize, ker: f64, tau_fs: f64) -> Result<f64, ModelError> {
        let spec = self.spec(band, ker)?;
        match pathways::asymmetry(&spec, tau_fs) {
            Err(PathwayError::ZeroState) => Ok(0.0),
            r => Ok(r?),
        }
    }

    pub fn probability(&self, band: usize, ker: f64, tau_fs: f64) -> Result<f64, ModelError> {
        Ok(pathways::dissociation_probability(&self.spec(band, ker)?, tau_fs))
    }

    /// ⟨A⟩ over one period at `ker`.
    pub fn time_average_asymmetry(&self, band: usize, ker: f64, n: usize) -> Result<f64, ModelError> {
        let spec = self.spec(band, ker)?;
        match pathways::time_average_asymmetry(&spec, n) {
            Err(PathwayError::ZeroState) => Ok(0.0),
            r => Ok(r?),
        }
    }

    fn integrate_ker(
        &self,
        band: usize,
        lo: f64,
        hi: f64,
        tau_fs: f64,
        weighted_by_asymmetry: bool,
    ) -> Result<f64, ModelError> {
        let b = self.band(band)?;
        let c = b.envelope.bs_center_ev;
        let w = b.envelope.bs_width_ev;
        // resolve the bump flanks; the exponential part is smooth
        let breaks: Vec<f64> = (-4..=4).map(|k| c + k as f64 * w).collect();
        let f = |ker: f64| -> f64 {
            let Ok(spec) = self.spec(band, ker) else { return 0.0 };
            let s = pathways::assemble(&spec, tau_fs);
            if weighted_by_asymmetry {
                pathways::ASYMMETRY_SIGN * 2.0 * (s.c_gs * s.c_bs.conj()).re
            } else {
                s.norm_sqr()
            }
        };
        let q = integrate(f, lo, hi, &breaks, 1e-11, 20_000);
        Ok(q.value)
    }

    /// ∫ P dKER over [lo, hi] at delay τ.
    pub fn yield_in(&self, band: usize, lo: f64, hi: f64, tau_fs: f64) -> Result<f64, ModelError> {
        self.integrate_ker(band, lo, hi, tau_fs, false)
    }

    /// Band yield over the full KER range.
    pub fn band_yield(&self, band: usize, tau_fs: f64) -> Result<f64, ModelError> {
        self.yield_in(band, 0.0, self.ker_max, tau_fs)
    }

    /// ∫ P·A dKER over [lo, hi]: the expected difference N_same − N_opp per
    /// unit rate.
    pub fn signed_yield_in(&self, band: usize, lo: f64, hi: f64, tau_fs: f64) -> Result<f64, ModelError> {
        self.integrate_ker(band, lo, hi, tau_fs, true)
    }

    /// Asymmetry expected from counting all events of `bands` with KER in
    /// [lo, hi] at delay τ.
    pub fn binned_asymmetry(
        &self,
        bands: &[usize],
        lo: f64,
        hi: f64,
        tau_fs: f64,
    ) -> Result<f64, ModelError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for &b in bands {
            num += self.signed_yield_in(b, lo, hi, tau_fs)?;
            den += self.yield_in(b, lo, hi, tau_fs)?;
        }
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    pub fn bands_with_parity(&self, parity: BandParity) -> Vec<usize> {
        (0..self.bands.len())
            .filter(|&i| self.bands[i].parity == parity)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::oscillation_period;

    fn model(bands: Vec<BandSpec>) -> PathwayModel {
        let xuv = XuvSpectrum::unchirped(1.2, 15, 27).unwrap();
        PathwayModel::new(xuv, NuclearPhaseTable::constant(0.3), bands, 2.0).unwrap()
    }

    #[test]
    fn envelope_shapes() {
        let e = Envelope::default();
        assert_eq!(e.alpha_sq(0.0), 1.0);
        assert!((e.alpha_sq(0.25) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(e.beta_sq(0.6), 0.5);
        assert!((e.beta_sq(0.7) - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn magnitudes_split() {
        let b = BandSpec::new(BandParity::Odd, 21);
        let m = b.magnitudes(0.6);
        assert!((m[1] - 0.5f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(m[1], m[2]);
        let b = BandSpec::new(BandParity::Even, 21);
        let m = b.magnitudes(0.0);
        assert_eq!(m[0], 0.5);
        assert_eq!(m[0], m[1]);
    }

    #[test]
    fn bound_dominates_probability() {
        let m = model(vec![BandSpec::new(BandParity::Odd, 21), BandSpec::new(BandParity::Even, 21)]);
        for band in 0..2 {
            for k in 0..50 {
                let ker = k as f64 * 0.04;
                for t in 0..10 {
                    let p = m.probability(band, ker, t as f64 * 0.17).unwrap();
                    assert!(p <= m.bands[band].bound_density(ker) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn band_validation() {
        let xuv = XuvSpectrum::unchirped(1.2, 15, 21).unwrap();
        let bad = vec![BandSpec::new(BandParity::Odd, 23)];
        assert!(PathwayModel::new(xuv.clone(), NuclearPhaseTable::constant(0.0), bad, 2.0).is_err());
        let mut b = BandSpec::new(BandParity::Odd, 21);
        b.path_weights = [0.0; 3];
        assert!(PathwayModel::new(xuv.clone(), NuclearPhaseTable::constant(0.0), vec![b], 2.0).is_err());
        let low = vec![BandSpec::new(BandParity::Odd, 17)];
        assert!(matches!(
            PathwayModel::new(xuv, NuclearPhaseTable::constant(0.0), low, 2.5),
            Err(ModelError::Pathway(PathwayError::BelowThreshold { .. }))
        ));
    }

    #[test]
    fn binned_asymmetry_narrow_bin_matches_point() {
        let m = model(vec![BandSpec::new(BandParity::Odd, 21)]);
        let a = m.asymmetry(0, 0.6, 0.4).unwrap();
        let b = m.binned_asymmetry(&[0], 0.6 - 1e-4, 0.6 + 1e-4, 0.4).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn odd_yield_average_matches_envelope() {
        // over one period the b1/b2 interference averages out, leaving |α|² + |β|²/2
        let m = model(vec![BandSpec::new(BandParity::Odd, 21)]);
        let t = oscillation_period(1.2);
        let n = 16;
        let avg: f64 = (0..n)
            .map(|k| m.yield_in(0, 0.0, 2.0, t * k as f64 / n as f64).unwrap())
            .sum::<f64>()
            / n as f64;
        let e = Envelope::default();
        let q = integrate(|x| e.alpha_sq(x) + e.beta_sq(x) / 2.0, 0.0, 2.0, &[0.6], 1e-13, 1000);
        assert!((avg - q.value).abs() < 1e-9, "{avg} {}", q.value);
    }

    #[test]
    fn total_energy_centers() {
        assert!((BandSpec::new(BandParity::Odd, 21).total_energy(1.2) - 7.1).abs() < 1e-12);
        assert!((BandSpec::new(BandParity::Even, 21).total_energy(1.2) - 5.9).abs() < 1e-12);
    }
}

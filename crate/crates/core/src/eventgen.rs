//! Monte Carlo generation of electron–proton coincidence events.
//!
//! Per delay the event count follows the summed band yields. Each event
//! picks a band, draws KER by rejection from the band's envelope bound,
//! fixes E_e by energy conservation, and places the electron in the
//! proton's hemisphere with probability (1 + A)/2. The angular density is
//! flat within each hemisphere.

use std::f64::consts::TAU;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{DissociationEvent, EventFile};
use crate::model::{ModelError, PathwayModel};
use crate::pathways::{electron_energy, PathwayError};
use crate::quadrature::integrate;
use crate::units::{ev_to_hartree, hartree_to_ev, HYDROGEN_MASS, PROTON_MASS};

const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Error)]
pub enum EventGenError {
    #[error("delay grid is empty")]
    EmptyDelayGrid,
    #[error("events_total must be positive")]
    NoEvents,
    #[error("smearing width must be finite and non-negative, got {0}")]
    InvalidSmear(f64),
    #[error("model has zero yield at delay index {0}")]
    ZeroYield(usize),
    #[error("rejection sampling did not accept within {MAX_REJECTIONS} draws (band {band})")]
    RejectionStalled { band: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pathway(#[from] PathwayError),
}

/// Gaussian momentum resolution per Cartesian component, a.u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Smear {
    pub electron: f64,
    pub ion: f64,
}

impl Default for Smear {
    fn default() -> Self {
        Self {
            electron: 0.01,
            ion: 0.3,
        }
    }
}

impl Smear {
    pub const NONE: Smear = Smear {
        electron: 0.0,
        ion: 0.0,
    };

    fn validate(&self) -> Result<(), EventGenError> {
        for s in [self.electron, self.ion] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(EventGenError::InvalidSmear(s));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub delays_fs: Vec<f64>,
    pub events_total: u64,
    pub smear: Smear,
    pub seed: u64,
}

/// Generator-side values behind one event, for closed-loop checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventTruth {
    pub band: usize,
    pub ker_ev: f64,
    pub electron_energy_ev: f64,
    pub asymmetry: f64,
    pub same_hemisphere: bool,
    pub axis: [f64; 3],
    pub p_neutral: [f64; 3],
    /// Unsmeared momenta.
    pub p_electron: [f64; 3],
    pub p_proton: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratedEvent {
    pub event: DissociationEvent,
    pub truth: EventTruth,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn add(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Independent Gaussian offsets of width σ on each component.
pub fn detector_smear(p: [f64; 3], sigma: f64, rng: &mut impl Rng) -> [f64; 3] {
    if sigma == 0.0 {
        return p;
    }
    p.map(|x| {
        let z: f64 = rng.sample(StandardNormal);
        x + sigma * z
    })
}

/// Isotropic unit vector.
fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = TAU * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Two unit vectors completing `n` to a right-handed orthonormal basis.
fn perpendicular_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = add(helper, n, -dot(helper, n));
    let e1 = scale(e1, 1.0 / dot(e1, e1).sqrt());
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Proton momentum magnitude q along the axis such that
/// p_H+ = q n − p_e/2 and p_H = −q n − p_e/2 carry exactly `ker` (hartree).
/// None if the electron recoil alone exceeds `ker`.
fn axial_momentum(ker: f64, n: [f64; 3], p_e: [f64; 3]) -> Option<f64> {
    let inv = 1.0 / PROTON_MASS + 1.0 / HYDROGEN_MASS;
    let a = inv / 2.0;
    let b = dot(n, p_e) * (1.0 / HYDROGEN_MASS - 1.0 / PROTON_MASS) / 2.0;
    let c = dot(p_e, p_e) * inv / 8.0 - ker;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = (-b + disc.sqrt()) / (2.0 * a);
    (q > 0.0).then_some(q)
}

/// Per-band proposal for KER: a mixture of the truncated exponential and
/// truncated Gaussian parts of the envelope bound.
#[derive(Debug, Clone, Copy)]
struct KerProposal {
    weight_gs: f64,
    weight_bs: f64,
    decay: f64,
    center: f64,
    width: f64,
    ker_max: f64,
    /// Share of the untruncated Gaussian inside [0, ker_max].
    inside: f64,
}

impl KerProposal {
    fn new(model: &PathwayModel, band: usize) -> Result<Self, ModelError> {
        let b = model.band(band)?;
        let (ca, cb) = b.bound_weights();
        let e = b.envelope;
        let k = model.ker_max;
        let mass = |f: &dyn Fn(f64) -> f64| integrate(f, 0.0, k, &[e.bs_center_ev], 1e-12, 5000).value;
        let bump = mass(&|x| e.beta_sq(x));
        let full = e.bs_amplitude * e.bs_width_ev * TAU.sqrt();
        Ok(Self {
            weight_gs: ca * mass(&|x| e.alpha_sq(x)),
            weight_bs: cb * bump,
            decay: e.gs_decay,
            center: e.bs_center_ev,
            width: e.bs_width_ev,
            ker_max: k,
            inside: if full > 0.0 { bump / full } else { 1.0 },
        })
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let total = self.weight_gs + self.weight_bs;
        if rng.random::<f64>() * total < self.weight_gs {
            let u: f64 = rng.random();
            let a = self.decay;
            if (a * self.ker_max).abs() < 1e-12 {
                return u * self.ker_max;
            }
            // inverse CDF of the exponential truncated to [0, ker_max]
            (-(u * (-a * self.ker_max).exp_m1()).ln_1p() / a).clamp(0.0, self.ker_max)
        } else if self.inside < 0.2 {
            // wide or distant bump: uniform proposal weighted by the Gaussian
            let peak = self.center.clamp(0.0, self.ker_max);
            let g = |x: f64| (-0.5 * ((x - self.center) / self.width).powi(2)).exp();
            loop {
                let x = rng.random::<f64>() * self.ker_max;
                if rng.random::<f64>() * g(peak) < g(x) {
                    return x;
                }
            }
        } else {
            loop {
                let z: f64 = rng.sample(StandardNormal);
                let x = self.center + self.width * z;
                if (0.0..=self.ker_max).contains(&x) {
                    return x;
                }
            }
        }
    }
}

fn sample_with_proposal(
    model: &PathwayModel,
    band: usize,
    proposal: &KerProposal,
    tau_fs: f64,
    delay_index: u32,
    smear: Smear,
    rng: &mut impl Rng,
) -> Result<GeneratedEvent, EventGenError> {
    let spec = model.band(band)?;
    let hw = model.photon_energy_ev();
    for _ in 0..MAX_REJECTIONS {
        let ker = proposal.sample(rng);
        let p = model.probability(band, ker, tau_fs)?;
        let bound = spec.bound_density(ker);
        if bound <= 0.0 || rng.random::<f64>() * bound >= p {
            continue;
        }
        let e_e = electron_energy(spec.parity, spec.order, ker, hw)?;
        let a = model.asymmetry(band, ker, tau_fs)?;

        let n = random_axis(rng);
        let same = rng.random::<f64>() < 0.5 * (1.0 + a);
        // |cos θ| uniform on (0, 1]
        let c = 1.0 - rng.random::<f64>();
        let cos_t = if same { c } else { -c };
        let sin_t = (1.0 - c * c).max(0.0).sqrt();
        let az = TAU * rng.random::<f64>();
        let (e1, e2) = perpendicular_basis(n);
        let dir = add(add(scale(n, cos_t), e1, sin_t * az.cos()), e2, sin_t * az.sin());
        let p_e = scale(dir, (2.0 * ev_to_hartree(e_e)).sqrt());

        let Some(q) = axial_momentum(ev_to_hartree(ker), n, p_e) else {
            continue;
        };
        let p_ion = add(scale(n, q), p_e, -0.5);
        let p_h = add(scale(n, -q), p_e, -0.5);
        let event = DissociationEvent {
            delay_index,
            p_electron: detector_smear(p_e, smear.electron, rng),
            p_proton: detector_smear(p_ion, smear.ion, rng),
        };
        return Ok(GeneratedEvent {
            event,
            truth: EventTruth {
                band,
                ker_ev: ker,
                electron_energy_ev: e_e,
                asymmetry: a,
                same_hemisphere: same,
                axis: n,
                p_neutral: p_h,
                p_electron: p_e,
                p_proton: p_ion,
            },
        });
    }
    Err(EventGenError::RejectionStalled { band })
}

/// Draw one event of `band` at delay τ.
pub fn sample_event(
    model: &PathwayModel,
    band: usize,
    tau_fs: f64,
    delay_index: u32,
    smear: Smear,
    rng: &mut impl Rng,
) -> Result<GeneratedEvent, EventGenError> {
    smear.validate()?;
    let proposal = KerProposal::new(model, band)?;
    sample_with_proposal(model, band, &proposal, tau_fs, delay_index, smear, rng)
}

/// Split `total` into integer parts proportional to `weights`
/// (largest-remainder method, ties to the lower index).
pub fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = exact[i] - exact[i].floor();
        let rj = exact[j] - exact[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// The random stream for one delay bin.
pub fn delay_rng(seed: u64, delay_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(delay_index as u64);
    rng
}

/// Events per delay, proportional to the summed band yield at each delay.
pub fn events_per_delay(model: &PathwayModel, cfg: &SimConfig) -> Result<Vec<u64>, EventGenError> {
    let yields = cfg
        .delays_fs
        .iter()
        .map(|&t| {
            (0..model.bands.len())
                .map(|b| model.band_yield(b, t))
                .sum::<Result<f64, _>>()
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if let Some(k) = yields.iter().position(|y| !(*y > 0.0)) {
        return Err(EventGenError::ZeroYield(k));
    }
    Ok(apportion(cfg.events_total, &yields))
}

/// Generate the full event set together with the per-event truth.
pub fn run_simulation_with_truth(
    model: &PathwayModel,
    cfg: &SimConfig,
    config_hash: u64,
) -> Result<(EventFile, Vec<EventTruth>), EventGenError> {
    if cfg.delays_fs.is_empty() {
        return Err(EventGenError::EmptyDelayGrid);
    }
    if cfg.events_total == 0 {
        return Err(EventGenError::NoEvents);
    }
    cfg.smear.validate()?;
    let counts = events_per_delay(model, cfg)?;
    let proposals = (0..model.bands.len())
        .map(|b| KerProposal::new(model, b))
        .collect::<Result<Vec<_>, _>>()?;

    let per_delay: Vec<Vec<GeneratedEvent>> = counts
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let tau = cfg.delays_fs[k];
            let weights = (0..model.bands.len())
                .map(|b| model.band_yield(b, tau))
                .collect::<Result<Vec<f64>, _>>()?;
            let pick = WeightedIndex::new(&weights).map_err(|_| EventGenError::ZeroYield(k))?;
            let mut rng = delay_rng(cfg.seed, k);
            (0..n)
                .map(|_| {
                    let band = pick.sample(&mut rng);
                    sample_with_proposal(
                        model,
                        band,
                        &proposals[band],
                        tau,
                        k as u32,
                        cfg.smear,
                        &mut rng,
                    )
                })
                .collect()
        })
        .collect::<Result<_, EventGenError>>()?;

    let total: usize = per_delay.iter().map(Vec::len).sum();
    let mut events = Vec::with_capacity(total);
    let mut truth = Vec::with_capacity(total);
    for g in per_delay.into_iter().flatten() {
        events.push(g.event);
        truth.push(g.truth);
    }
    Ok((
        EventFile {
            config_hash,
            delays_fs: cfg.delays_fs.clone(),
            events,
        },
        truth,
    ))
}

pub fn run_simulation(
    model: &PathwayModel,
    cfg: &SimConfig,
    config_hash: u64,
) -> Result<EventFile, EventGenError> {
    run_simulation_with_truth(model, cfg, config_hash).map(|(f, _)| f)
}

/// Kinetic energy of a momentum vector for mass `m`, eV.
pub fn kinetic_energy_ev(p: [f64; 3], m: f64) -> f64 {
    hartree_to_ev(dot(p, p) / (2.0 * m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BandSpec;
    use crate::pathways::{BandParity, XuvSpectrum};
    use crate::wkb::NuclearPhaseTable;

    fn model() -> PathwayModel {
        let xuv = XuvSpectrum::unchirped(1.2, 15, 27).unwrap();
        let bands = vec![BandSpec::new(BandParity::Odd, 21), BandSpec::new(BandParity::Even, 21)];
        PathwayModel::new(xuv, NuclearPhaseTable::constant(0.4), bands, 2.0).unwrap()
    }

    #[test]
    fn unsmeared_momentum_balance_and_energies() {
        let m = model();
        let mut rng = delay_rng(3, 0);
        for _ in 0..2000 {
            let g = sample_event(&m, 0, 0.3, 0, Smear::NONE, &mut rng).unwrap();
            let t = g.truth;
            let e = g.event;
            let sum = add(add(e.p_electron, e.p_proton, 1.0), t.p_neutral, 1.0);
            assert!(sum.iter().all(|x| x.abs() < 1e-12));
            let ker = kinetic_energy_ev(e.p_proton, PROTON_MASS)
                + kinetic_energy_ev(t.p_neutral, HYDROGEN_MASS);
            assert!((ker - t.ker_ev).abs() < 1e-12, "{ker} {}", t.ker_ev);
            let ee = kinetic_energy_ev(e.p_electron, 1.0);
            assert!((ee - t.electron_energy_ev).abs() < 1e-12);
            assert!((t.ker_ev + t.electron_energy_ev - 7.1).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_magnitudes() {
        // axial momentum at KER = 0.6 eV with the electron perpendicular
        let p_e = [0.0, (2.0 * ev_to_hartree(6.5)).sqrt(), 0.0];
        assert!((p_e[1] - 0.691).abs() < 1e-3);
        let oracle = (1836.15f64 * 0.6 / 27.2114).sqrt();
        let q0 = axial_momentum(ev_to_hartree(0.6), [0.0, 0.0, 1.0], [0.0; 3]).unwrap();
        assert!((q0 - 6.36).abs() < 5e-3 && (q0 - oracle).abs() < 1e-3, "{q0} {oracle}");
        // perpendicular electron: q²(1/m_p + 1/m_H)/2 = KER − |p_e|²(1/m_p + 1/m_H)/8
        let inv = 1.0 / PROTON_MASS + 1.0 / HYDROGEN_MASS;
        let q = axial_momentum(ev_to_hartree(0.6), [0.0, 0.0, 1.0], p_e).unwrap();
        let exact = ((ev_to_hartree(0.6) - p_e[1] * p_e[1] * inv / 8.0) * 2.0 / inv).sqrt();
        assert!((q - exact).abs() < 1e-12);
        assert!(axial_momentum(1e-9, [0.0, 0.0, 1.0], p_e).is_none());
    }

    #[test]
    fn hemisphere_flag_matches_molecular_frame() {
        let m = model();
        let mut rng = delay_rng(9, 1);
        for _ in 0..2000 {
            let g = sample_event(&m, 0, 0.0, 0, Smear::NONE, &mut rng).unwrap();
            let p_mf = add(g.event.p_proton, g.event.p_electron, 0.5);
            assert_eq!(dot(p_mf, g.event.p_electron) >= 0.0, g.truth.same_hemisphere);
        }
    }

    #[test]
    fn forced_unit_asymmetry() {
        // |g1| = |b2| at every KER, b1 = 0 and ΔΘ = 3π/2 give A = +1
        let xuv = XuvSpectrum::unchirped(1.2, 15, 27).unwrap();
        let mut band = BandSpec::new(BandParity::Odd, 21);
        band.envelope = crate::model::Envelope {
            gs_amplitude: 0.25,
            gs_decay: 0.0,
            bs_amplitude: 1.0,
            bs_center_ev: 0.6,
            bs_width_ev: 1e6,
        };
        band.path_weights = [1.0, 0.0, 1.0];
        let table = NuclearPhaseTable::constant(1.5 * std::f64::consts::PI);
        let m = PathwayModel::new(xuv, table, vec![band], 2.0).unwrap();
        assert!((m.asymmetry(0, 0.3, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = delay_rng(2, 0);
        for _ in 0..2000 {
            let g = sample_event(&m, 0, 0.7, 0, Smear::NONE, &mut rng).unwrap();
            let p_mf = add(g.event.p_proton, g.event.p_electron, 0.5);
            assert!(dot(p_mf, g.event.p_electron) > 0.0);
        }
    }

    #[test]
    fn smear_statistics() {
        let mut rng = delay_rng(1, 0);
        let n = 1_000_000;
        let sigma = 0.3;
        let mut s = [0.0; 3];
        let mut s2 = [0.0; 3];
        for _ in 0..n {
            let p = detector_smear([1.0, -2.0, 0.5], sigma, &mut rng);
            for i in 0..3 {
                let d = p[i] - [1.0, -2.0, 0.5][i];
                s[i] += d;
                s2[i] += d * d;
            }
        }
        for i in 0..3 {
            let mean = s[i] / n as f64;
            let var = s2[i] / n as f64 - mean * mean;
            assert!(mean.abs() < 5.0 * sigma / (n as f64).sqrt());
            assert!((var / (sigma * sigma) - 1.0).abs() < 0.01);
        }
        assert_eq!(detector_smear([1.0, 2.0, 3.0], 0.0, &mut rng), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(7, &[0.0, 2.0]), vec![0, 7]);
        assert_eq!(apportion(5, &[0.0, 0.0]), vec![0, 0]);
        let c = apportion(1_000_003, &[0.3, 0.7, 1.1, 0.01]);
        assert_eq!(c.iter().sum::<u64>(), 1_000_003);
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = model();
        let cfg = SimConfig {
            delays_fs: (0..8).map(|k| k as f64 * 0.2).collect(),
            events_total: 5000,
            smear: Smear::default(),
            seed: 42,
        };
        let a = run_simulation(&m, &cfg, 7).unwrap();
        let b = run_simulation(&m, &cfg, 7).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_eq!(a.len(), 5000);
        let c = run_simulation(&m, &SimConfig { seed: 43, ..cfg.clone() }, 7).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn bad_configs() {
        let m = model();
        let cfg = SimConfig {
            delays_fs: vec![],
            events_total: 10,
            smear: Smear::NONE,
            seed: 0,
        };
        assert!(matches!(run_simulation(&m, &cfg, 0), Err(EventGenError::EmptyDelayGrid)));
        let cfg = SimConfig {
            delays_fs: vec![0.0],
            events_total: 0,
            ..cfg
        };
        assert!(matches!(run_simulation(&m, &cfg, 0), Err(EventGenError::NoEvents)));
        let cfg = SimConfig {
            events_total: 1,
            smear: Smear {
                electron: -1.0,
                ion: 0.0,
            },
            ..cfg
        };
        assert!(matches!(run_simulation(&m, &cfg, 0), Err(EventGenError::InvalidSmear(_))));
    }

    #[test]
    fn truncated_exponential_proposal() {
        let p = KerProposal {
            weight_gs: 1.0,
            weight_bs: 0.0,
            decay: 4.0,
            center: 0.6,
            width: 0.1,
            ker_max: 2.0,
            inside: 1.0,
        };
        let mut rng = delay_rng(5, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        // mean of Exp(4) truncated at 2
        let a: f64 = 4.0;
        let t: f64 = 2.0;
        let exact = 1.0 / a - t * (-a * t).exp() / (1.0 - (-a * t).exp());
        assert!((mean - exact).abs() < 5.0 * 0.25 / (n as f64).sqrt(), "{mean} {exact}");
    }
}

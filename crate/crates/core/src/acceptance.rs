//! Acceptance suite: the ten end-to-end checks run by `h2asym selfcheck`
//! and by the `acceptance` test target.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{
    asymmetry_from_counts, band_projection, delay_scan, AnalysisError,
    BandSelection, Binning, ChirpTable, CountGrid, DelayScanOptions, DelayScanResult,
};
use crate::config::{ConfigError, RunConfig};
use crate::eventgen::{run_simulation, EventGenError, Smear};
use crate::fitting::{
    extract_alpha_beta, fit_bump, fit_cosine, fit_exponential, fit_frequency, sideband_chirp, FitError,
    Sample,
};
use crate::format::EventFile;
use crate::model::{BandSpec, ModelError, PathwayModel};
use crate::pathways::{
    asymmetry, asymmetry_even, asymmetry_odd, asymmetry_of_state, assemble, time_average_asymmetry,
    BandParity, PathwayError, PathwaySpec, XuvSpectrum,
};
use crate::potentials::{dress_curves, CurveLabel, PotentialCurve, PotentialError};
use crate::units::{angular_frequency, oscillation_period, wrap_phase, DISSOCIATION_LIMIT_EV, HARTREE_EV, REDUCED_MASS_H2PLUS};
use crate::wkb::{delta_theta, wkb_phase, NuclearPhaseTable, WkbError, WkbPath};

#[derive(Debug, Error)]
pub enum AcceptanceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pathway(#[from] PathwayError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Wkb(#[from] WkbError),
    #[error(transparent)]
    EventGen(#[from] EventGenError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("unknown criterion {0}")]
    UnknownCriterion(u8),
}

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<24} {:>6.2} s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "oscillation period"),
    (2, "parity phase shift"),
    (3, "limiting cases"),
    (4, "closed loop"),
    (5, "null test"),
    (6, "alpha/beta recovery"),
    (7, "chirp recovery"),
    (8, "wkb validity"),
    (9, "equivalence oracle"),
    (10, "determinism"),
];

/// KER at which delay oscillations are compared, eV.
const PROBE_KER: f64 = 0.6;

type Check = Result<(bool, String), AcceptanceError>;

/// Shared state: default physics with its nuclear phase table, and the seed
/// used by the statistical criteria.
pub struct Suite {
    base: RunConfig,
    phases: NuclearPhaseTable,
    seed: u64,
}

impl Suite {
    pub fn new(seed: u64) -> Result<Self, AcceptanceError> {
        let base = RunConfig::default();
        let phases = base.build_model()?.phases;
        Ok(Self { base, phases, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn hw(&self) -> f64 {
        self.base.physics.photon_energy_ev
    }

    fn model(&self, xuv: XuvSpectrum, bands: Vec<BandSpec>) -> Result<PathwayModel, AcceptanceError> {
        Ok(PathwayModel::new(
            xuv,
            self.phases.clone(),
            bands,
            self.base.physics.ker_max_ev,
        )?)
    }

    fn default_model(&self) -> Result<PathwayModel, AcceptanceError> {
        self.model(self.base.xuv()?, self.base.bands.clone())
    }

    fn simulate(
        &self,
        model: &PathwayModel,
        events: u64,
        smear: Smear,
    ) -> Result<EventFile, AcceptanceError> {
        let mut cfg = self.base.sim_config()?;
        cfg.events_total = events;
        cfg.smear = smear;
        cfg.seed = self.seed;
        Ok(run_simulation(model, &cfg, self.base.hash())?)
    }

    fn selections(&self, model: &PathwayModel) -> Result<Vec<BandSelection>, AcceptanceError> {
        let hw = self.hw();
        let half = self.base.analysis.half_width_ev;
        Ok(model
            .bands
            .iter()
            .map(|b| BandSelection::new(b.parity, b.order, hw, half))
            .collect::<Result<_, _>>()?)
    }

    fn scan(&self, file: &EventFile, sel: &[BandSelection], chirp: &ChirpTable) -> Result<DelayScanResult, AcceptanceError> {
        let opts = DelayScanOptions {
            ker: Binning::default().ker,
            photon_energy_ev: self.hw(),
            subtract_mean: false,
        };
        Ok(delay_scan(file, sel, chirp, &opts)?)
    }

    pub fn run(&self, id: u8) -> Outcome {
        let start = Instant::now();
        let result = match id {
            1 => self.period(),
            2 => self.parity_shift(),
            3 => self.limiting_cases(),
            4 => self.closed_loop(),
            5 => self.null_test(),
            6 => self.alpha_beta(),
            7 => self.chirp(),
            8 => self.wkb_validity(),
            9 => self.equivalence(),
            10 => self.determinism(),
            other => Err(AcceptanceError::UnknownCriterion(other)),
        };
        let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        Outcome {
            id,
            name: CRITERIA
                .iter()
                .find(|c| c.0 == id)
                .map_or("unknown", |c| c.1),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn run_all(&self) -> Vec<Outcome> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    fn period(&self) -> Check {
        let model = self.model(
            self.base.xuv()?,
            vec![BandSpec::new(BandParity::Odd, 21)],
        )?;
        let expected = oscillation_period(self.hw());
        // a long window keeps the harmonics of A(τ) from pulling the fit
        let samples: Vec<Sample> = (0..512)
            .map(|k| {
                let t = k as f64 * expected / 32.0;
                model.asymmetry(0, PROBE_KER, t).map(|a| (t, a, 1.0))
            })
            .collect::<Result<_, _>>()?;
        let fit = fit_frequency(&samples, 2.0 * angular_frequency(self.hw()), 0.3)?;
        let period = TAU / fit.angular_frequency;
        let rel = (period / expected - 1.0).abs();
        Ok((
            rel < 0.01,
            format!("fitted period {period:.4} fs, pi/omega = {expected:.4} fs, deviation {:.2e}", rel),
        ))
    }

    fn parity_shift(&self) -> Check {
        let xuv = self.base.xuv()?;
        let ph = self.phases.at(PROBE_KER);
        let w2 = 2.0 * angular_frequency(self.hw());
        let period = oscillation_period(self.hw());
        let mut phase = [0.0; 2];
        for (i, parity) in [BandParity::Odd, BandParity::Even].into_iter().enumerate() {
            let spec = PathwaySpec::new(
                parity,
                21,
                PROBE_KER,
                [1.0; 3],
                (ph.theta_gs, ph.theta_bs),
                [1; 3],
                &xuv,
            )?;
            let s: Vec<Sample> = (0..64)
                .map(|k| {
                    let t = k as f64 * period / 64.0;
                    asymmetry(&spec, t).map(|a| (t, a, 1.0))
                })
                .collect::<Result<_, _>>()?;
            phase[i] = fit_cosine(&s, w2)?.phase;
        }
        let diff = wrap_phase(phase[0] - phase[1]).abs();
        Ok((
            (diff - PI).abs() < 0.1,
            format!(
                "odd {:.4} rad, even {:.4} rad, |difference| {diff:.4} rad",
                phase[0], phase[1]
            ),
        ))
    }

    fn limiting_cases(&self) -> Check {
        let xuv = self.base.xuv()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x3);
        let period = oscillation_period(self.hw());
        let taus: Vec<f64> = (0..64).map(|k| k as f64 * period / 64.0).collect();
        let (mut g1_max, mut b1_span, mut b2_mean) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..200 {
            let ker = rng.random_range(0.0..2.0);
            let theta = (rng.random_range(0.0..300.0), rng.random_range(0.0..300.0));
            let ell = [rng.random_range(0..4), rng.random_range(0..4), rng.random_range(0..4)];
            let m = [rng.random_range(0.05..1.0), rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)];
            let odd = |mags: [f64; 3]| PathwaySpec::new(BandParity::Odd, 21, ker, mags, theta, ell, &xuv);

            let s = odd([0.0, m[1], m[2]])?;
            for &t in &taus {
                // c_gs = 0 leaves the asymmetry at exactly zero
                let a = asymmetry_of_state(&assemble(&s, t))?;
                let c = asymmetry_odd(&s, t)?;
                g1_max = g1_max.max(a.abs()).max(c.abs());
            }
            let s = odd([m[0], 0.0, m[2]])?;
            let vals: Vec<f64> = taus.iter().map(|&t| asymmetry_odd(&s, t)).collect::<Result<_, _>>()?;
            let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            b1_span = b1_span.max(hi - lo);
            let s = odd([m[0], m[1], 0.0])?;
            b2_mean = b2_mean.max(time_average_asymmetry(&s, 64)?.abs());
        }
        Ok((
            g1_max == 0.0 && b1_span < 1e-12 && b2_mean < 1e-10,
            format!("|g1|=0: max|A| {g1_max:.1e}; |b1|=0: span {b1_span:.1e}; |b2|=0: max|<A>| {b2_mean:.1e}"),
        ))
    }

    fn closed_loop(&self) -> Check {
        let model = self.default_model()?;
        let file = self.simulate(&model, 1_000_000, Smear::NONE)?;
        let sel = self.selections(&model)?;
        let scan = self.scan(&file, &sel, &ChirpTable::new())?;
        let ker = scan.ker;
        let delays = &scan.delays_fs;

        // cell-by-cell comparison with the bin-integrated model
        let mut cells = Vec::new();
        for (b, band) in scan.bands.iter().enumerate() {
            for i in 0..ker.bins {
                for d in 0..delays.len() {
                    let n = band.counts.counts(i, d);
                    if n >= 10.0 {
                        cells.push((b, i, d, band.counts.asymmetry(i, d).0, n));
                    }
                }
            }
        }
        let within: Vec<bool> = cells
            .par_iter()
            .map(|&(b, i, d, a, n)| {
                let lo = ker.lower_edge(i);
                let hi = ker.lower_edge(i + 1);
                let m = model.binned_asymmetry(&[b], lo, hi, delays[d])?;
                let sigma = ((1.0 - m * m).max(0.0) / n).sqrt();
                Ok((a - m).abs() <= 3.0 * sigma + 1e-12)
            })
            .collect::<Result<_, AcceptanceError>>()?;
        let frac = within.iter().filter(|&&x| x).count() as f64 / within.len().max(1) as f64;

        // phase of the summed odd bands at the probe KER
        let bin = ker.index(PROBE_KER).expect("probe KER inside axis");
        let odd = model.bands_with_parity(BandParity::Odd);
        let sum = scan.sum(BandParity::Odd).expect("odd bands present");
        let w2 = 2.0 * angular_frequency(self.hw());
        let samples = row_samples(&sum.counts, bin, delays);
        let observed = fit_cosine(&samples, w2)?;
        // same weights for the model series, A(τ) not being a pure cosine
        let expected: Vec<Sample> = samples
            .iter()
            .map(|&(t, _, sigma)| {
                model
                    .binned_asymmetry(&odd, ker.lower_edge(bin), ker.lower_edge(bin + 1), t)
                    .map(|a| (t, a, sigma))
            })
            .collect::<Result<_, _>>()?;
        let expected = fit_cosine(&expected, w2)?;
        let dphi = wrap_phase(observed.phase - expected.phase);
        Ok((
            dphi.abs() < 0.1 && frac >= 0.99,
            format!(
                "phase {:.3} vs model {:.3} rad (diff {dphi:+.3}); {:.2}% of {} cells within 3 sigma",
                observed.phase,
                expected.phase,
                100.0 * frac,
                within.len()
            ),
        ))
    }

    fn null_test(&self) -> Check {
        let mut band = BandSpec::new(BandParity::Odd, 21);
        band.path_weights = [1.0, 0.0, 0.0];
        let model = self.model(self.base.xuv()?, vec![band])?;
        let file = self.simulate(&model, 100_000, Smear::default())?;
        let sel = self.selections(&model)?;
        let scan = self.scan(&file, &sel, &ChirpTable::new())?;
        let g = &scan.bands[0].counts;
        let mut populated = 0;
        let mut worst: f64 = 0.0;
        let mut violations = 0;
        // A(KER) of the band, integrated over delay
        for i in 0..g.n_ker {
            let (same, opp) = (0..g.n_delays).fold((0.0, 0.0), |(s, o), d| {
                let k = g.index(i, d);
                (s + g.same[k], o + g.opp[k])
            });
            let n = same + opp;
            if n == 0.0 {
                continue;
            }
            populated += 1;
            // σ under the null hypothesis A = 0
            let z = ((same - opp) / n).abs() * n.sqrt();
            worst = worst.max(z);
            if z >= 3.0 {
                violations += 1;
            }
        }
        Ok((
            violations == 0 && populated > 0,
            format!("{populated} populated KER bins, max |A|/sigma = {worst:.2}, {violations} at or above 3"),
        ))
    }

    fn alpha_beta(&self) -> Check {
        let band = BandSpec::new(BandParity::Odd, 21);
        let env = band.envelope;
        let model = self.model(self.base.xuv()?, vec![band])?;
        let file = self.simulate(&model, 1_000_000, Smear::NONE)?;
        let sel = self.selections(&model)?[0];
        let axis = Binning::default().ker;
        let counts: Vec<f64> = band_projection(&file.events, &sel, axis)
            .into_iter()
            .map(|c| c as f64)
            .collect();
        let centers = axis.centers();
        let an = &self.base.analysis;
        let fit = fit_exponential(
            &centers,
            &counts,
            (an.fit_range_ev[0], an.fit_range_ev[1]),
            self.base.exp_fit_options(),
        )?;
        // counts per unit model density: events are drawn ∝ band yield per delay
        let yields: f64 = file
            .delays_fs
            .iter()
            .map(|&t| model.band_yield(0, t))
            .sum::<Result<f64, _>>()?;
        let n_sel: f64 = counts.iter().sum();
        let scale = yields / (n_sel * file.delays_fs.len() as f64);
        let amp = fit.density_amplitude(axis.width()) * scale;
        let rel_amp = (amp / env.gs_amplitude - 1.0).abs();
        let rel_decay = (fit.decay / env.gs_decay - 1.0).abs();
        let profile = extract_alpha_beta(&centers, &counts, &fit, BandParity::Odd);
        let bump = fit_bump(&centers, &profile.beta_sq, 0.3)?;
        let dc = (bump.center - env.bs_center_ev).abs();
        Ok((
            rel_amp < 0.05 && rel_decay < 0.05 && dc < 0.05,
            format!(
                "A = {amp:.4} ({:.1}%), a = {:.4} ({:.1}%), bump at {:.3} eV",
                100.0 * rel_amp,
                fit.decay,
                100.0 * rel_decay,
                bump.center
            ),
        ))
    }

    fn chirp(&self) -> Check {
        let steps = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0];
        let xuv = XuvSpectrum::from_chirp(self.hw(), 15, &steps)?;
        let model = self.model(xuv.clone(), self.base.bands.clone())?;
        let file = self.simulate(&model, 2_000_000, Smear::default())?;
        let sel = self.selections(&model)?;
        let raw = self.scan(&file, &sel, &ChirpTable::new())?;
        let w2 = 2.0 * angular_frequency(self.hw());

        let mut fits = Vec::new();
        for b in raw.bands.iter().filter(|b| b.selection.parity == BandParity::Even) {
            let g = &b.counts;
            let s: Vec<Sample> = (0..g.n_delays)
                .map(|d| {
                    let n: f64 = (0..g.n_ker).map(|i| g.counts(i, d)).sum();
                    (raw.delays_fs[d], n, n.max(1.0).sqrt())
                })
                .collect();
            fits.push((b.selection.order, fit_cosine(&s, w2)?));
        }
        let recovered = sideband_chirp(&fits)?;
        let lowest = recovered[0].order;
        let mut worst: f64 = 0.0;
        for r in &recovered {
            let truth = xuv.delta_phase(r.order)? - xuv.delta_phase(lowest)?;
            worst = worst.max(wrap_phase(r.relative_chirp - truth).abs());
        }
        let table: ChirpTable = recovered.iter().map(|r| (r.order, r.relative_chirp)).collect();
        let aligned = self.scan(&file, &sel, &table)?;
        let bin = raw.ker.index(PROBE_KER).expect("probe KER inside axis");
        let singles: Vec<f64> = raw
            .bands
            .iter()
            .filter(|b| b.selection.parity == BandParity::Odd)
            .map(|b| fit_cosine(&row_samples(&b.counts, bin, &raw.delays_fs), w2).map(|f| f.amplitude))
            .collect::<Result<_, _>>()?;
        let single = singles.iter().sum::<f64>() / singles.len() as f64;
        let amp = |r: &DelayScanResult| -> Result<f64, FitError> {
            let sum = r.sum(BandParity::Odd).expect("odd bands present");
            fit_cosine(&row_samples(&sum.counts, bin, &r.delays_fs), w2).map(|f| f.amplitude)
        };
        let (before, after) = (amp(&raw)?, amp(&aligned)?);
        let steps_txt: Vec<String> = recovered.iter().map(|r| format!("{:.3}", r.relative_chirp)).collect();
        Ok((
            worst < 0.05 && after > 0.95 * single,
            format!(
                "steps [{}] (max error {worst:.3} rad); summed amplitude {after:.3} aligned / {before:.3} raw vs single-band {single:.3}",
                steps_txt.join(", ")
            ),
        ))
    }

    fn wkb_validity(&self) -> Check {
        // linear potential V = v0 − F R with E − V = (E − v0) + F R
        let (slope, v0, e) = (3.0, 20.0, 8.0);
        let grid: Vec<f64> = (0..=120).map(|i| 0.1 * i as f64).collect();
        let lin = PotentialCurve::from_fn(CurveLabel::GroundSigmaG, &grid, |r| v0 - slope * r)?;
        let path = WkbPath::new(&lin, e, 0.0, 10.0)?;
        let res = wkb_phase(&path, 1e-10)?;
        let mu2 = 2.0 * REDUCED_MASS_H2PLUS / HARTREE_EV;
        let anti = |r: f64| mu2.sqrt() * (2.0 / 3.0) * (e - v0 + slope * r).max(0.0).powf(1.5) / slope;
        let exact = anti(10.0) - anti(4.0);
        let rel = ((res.phase - exact) / exact).abs();

        let curves = self.base.curves()?;
        let pair = dress_curves(&curves.ground, &curves.excited, &self.base.ir()?, &self.base.physics.coupling)?;
        let r_max = self.base.physics.r_max_au;
        let mut cutoff: f64 = 0.0;
        for k in 0..=20 {
            let ker = 0.1 * k as f64;
            let gs = WkbPath::ground_state(&curves.ground, ker, DISSOCIATION_LIMIT_EV, r_max)?;
            let bs = WkbPath::bond_softening(&pair, ker, DISSOCIATION_LIMIT_EV, r_max)?;
            cutoff = cutoff.max(delta_theta(&gs, &bs)?.cutoff_change());
        }
        let rf = pair.crossing_radius_rf;
        Ok((
            rel < 1e-6 && cutoff < 1e-3 && (rf - 5.0).abs() <= 0.5,
            format!(
                "linear phase rel. error {rel:.1e}; max |dTheta(40) - dTheta(80)| {cutoff:.1e} rad; crossing at {rf:.3} a.u."
            ),
        ))
    }

    fn equivalence(&self) -> Check {
        let xuv = XuvSpectrum::from_chirp(self.hw(), 15, &[0.3, -1.1, 2.0, 0.7, -0.4, 1.5])?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let parity = if rng.random_bool(0.5) { BandParity::Odd } else { BandParity::Even };
            let order = 2 * rng.random_range(9..14) + 1;
            let ker = rng.random_range(0.0..2.0);
            let mags = [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)];
            let theta = (rng.random_range(-50.0..300.0), rng.random_range(-50.0..300.0));
            let ell = [rng.random_range(0..4), rng.random_range(0..4), rng.random_range(0..4)];
            let tau = rng.random_range(-5.0..5.0);
            let spec = PathwaySpec::new(parity, order, ker, mags, theta, ell, &xuv)?;
            let closed = match parity {
                BandParity::Odd => asymmetry_odd(&spec, tau)?,
                BandParity::Even => asymmetry_even(&spec, tau)?,
            };
            let state = asymmetry_of_state(&assemble(&spec, tau))?;
            worst = worst.max((closed - state).abs());
        }
        Ok((worst < 1e-12, format!("max |closed form - assembled| {worst:.1e} over 10000 specs")))
    }

    fn determinism(&self) -> Check {
        let model = self.default_model()?;
        let first = self.simulate(&model, 200_000, Smear::default())?.to_bytes();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("thread pool");
        let second = pool.install(|| self.simulate(&model, 200_000, Smear::default()))?.to_bytes();
        let identical = first == second;
        Ok((
            identical,
            format!(
                "{} bytes, {} between a parallel and a single-threaded run",
                first.len(),
                if identical { "identical" } else { "different" }
            ),
        ))
    }
}

/// (τ, A, σ) samples of one KER row, skipping empty cells.
fn row_samples(g: &CountGrid, bin: usize, delays: &[f64]) -> Vec<Sample> {
    (0..g.n_delays)
        .filter_map(|d| {
            let k = g.index(bin, d);
            let (a, s) = asymmetry_from_counts(g.same[k], g.opp[k]);
            (a.is_finite() && s > 0.0).then_some((delays[d], a, s))
        })
        .collect()
}

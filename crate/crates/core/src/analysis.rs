//! Inverse pipeline: frame reconstruction, energies, joint energy spectra,
//! band selection and delay-resolved asymmetry maps.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{DissociationEvent, EventFile};
use crate::pathways::BandParity;
use crate::units::{angular_frequency, hartree_to_ev, oscillation_period, DISSOCIATION_LIMIT_EV, HYDROGEN_MASS, PROTON_MASS};

/// Fewest delay points accepted by [`delay_scan`].
pub const MIN_DELAYS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("delay scan needs at least {MIN_DELAYS} delays, got {0}")]
    InsufficientDelays(usize),
    #[error("invalid band selection: {0}")]
    InvalidBand(String),
    #[error("chirp table has no entry for harmonic {0}")]
    MissingChirp(u32),
}

/// Uniform histogram axis over [min, max).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, bins: usize) -> Result<Self, AnalysisError> {
        if !(max > min) || bins == 0 || !min.is_finite() || !max.is_finite() {
            return Err(AnalysisError::InvalidBinning(format!("[{min}, {max}) with {bins} bins")));
        }
        Ok(Self { min, max, bins })
    }

    /// Axis with bins of `width`, rounded to a whole number of bins.
    pub fn with_width(min: f64, max: f64, width: f64) -> Result<Self, AnalysisError> {
        if !(width > 0.0) {
            return Err(AnalysisError::InvalidBinning(format!("bin width {width}")));
        }
        let bins = ((max - min) / width).round() as usize;
        Self::new(min, max, bins)
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    pub fn index(&self, v: f64) -> Option<usize> {
        if !(v >= self.min && v < self.max) {
            return None;
        }
        let i = ((v - self.min) * self.bins as f64 / (self.max - self.min)) as usize;
        Some(i.min(self.bins - 1))
    }

    pub fn lower_edge(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / self.bins as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lower_edge(i)).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|i| self.center(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub ker: Axis,
    pub ee: Axis,
}

impl Default for Binning {
    fn default() -> Self {
        Self {
            ker: Axis::new(0.0, 2.0, 40).unwrap(),
            ee: Axis::new(0.0, 12.0, 120).unwrap(),
        }
    }
}

fn add(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Proton momentum in the molecular frame: p_H+ + p_e/2.
pub fn reconstruct_molecular_frame(ev: &DissociationEvent) -> [f64; 3] {
    add(ev.p_proton, ev.p_electron, 0.5)
}

/// Undetected neutral from momentum balance: −(p_H+ + p_e).
pub fn reconstruct_neutral(ev: &DissociationEvent) -> [f64; 3] {
    let s = add(ev.p_proton, ev.p_electron, 1.0);
    [-s[0], -s[1], -s[2]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub ker_ev: f64,
    pub electron_ev: f64,
}

/// KER = E_H+ + E_H and the electron energy, eV.
pub fn energies(ev: &DissociationEvent) -> Energies {
    let p_h = reconstruct_neutral(ev);
    let ker = dot(ev.p_proton, ev.p_proton) / (2.0 * PROTON_MASS) + dot(p_h, p_h) / (2.0 * HYDROGEN_MASS);
    Energies {
        ker_ev: hartree_to_ev(ker),
        electron_ev: hartree_to_ev(dot(ev.p_electron, ev.p_electron) / 2.0),
    }
}

/// Electron emitted into the proton's hemisphere (θ ≤ 90° in the molecular
/// frame; exactly 90° counts as same).
pub fn same_hemisphere(ev: &DissociationEvent) -> bool {
    dot(ev.p_electron, reconstruct_molecular_frame(ev)) >= 0.0
}

/// (A, σ_A) from hemisphere counts; NaN for an empty bin.
pub fn asymmetry_from_counts(same: f64, opp: f64) -> (f64, f64) {
    let n = same + opp;
    if !(n > 0.0) {
        return (f64::NAN, f64::NAN);
    }
    let a = (same - opp) / n;
    (a, ((1.0 - a * a).max(0.0) / n).sqrt())
}

/// KER × E_e histogram split by hemisphere, stored KER-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEnergySpectrum {
    pub binning: Binning,
    pub counts_same: Vec<u64>,
    pub counts_opp: Vec<u64>,
    pub out_of_range: u64,
}

impl JointEnergySpectrum {
    pub fn empty(binning: Binning) -> Self {
        let n = binning.ker.bins * binning.ee.bins;
        Self {
            binning,
            counts_same: vec![0; n],
            counts_opp: vec![0; n],
            out_of_range: 0,
        }
    }

    pub fn index(&self, ker_bin: usize, ee_bin: usize) -> usize {
        ker_bin * self.binning.ee.bins + ee_bin
    }

    pub fn total(&self) -> u64 {
        self.counts_same.iter().sum::<u64>() + self.counts_opp.iter().sum::<u64>()
    }

    fn add_event(&mut self, ev: &DissociationEvent) {
        let e = energies(ev);
        match (self.binning.ker.index(e.ker_ev), self.binning.ee.index(e.electron_ev)) {
            (Some(i), Some(j)) => {
                let k = self.index(i, j);
                if same_hemisphere(ev) {
                    self.counts_same[k] += 1;
                } else {
                    self.counts_opp[k] += 1;
                }
            }
            _ => self.out_of_range += 1,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts_same.iter_mut().zip(&other.counts_same) {
            *a += b;
        }
        for (a, b) in self.counts_opp.iter_mut().zip(&other.counts_opp) {
            *a += b;
        }
        self.out_of_range += other.out_of_range;
        self
    }
}

/// Bin events into a joint energy spectrum (sharded in parallel).
pub fn fill_jes(events: &[DissociationEvent], binning: Binning) -> JointEnergySpectrum {
    events
        .par_chunks(1 << 14)
        .map(|chunk| {
            let mut h = JointEnergySpectrum::empty(binning);
            for ev in chunk {
                h.add_event(ev);
            }
            h
        })
        .reduce(|| JointEnergySpectrum::empty(binning), JointEnergySpectrum::merge)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryMap {
    pub binning: Binning,
    pub asymmetry: Vec<f64>,
    pub sigma: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn asymmetry_map(jes: &JointEnergySpectrum) -> AsymmetryMap {
    let (asymmetry, sigma): (Vec<f64>, Vec<f64>) = jes
        .counts_same
        .iter()
        .zip(&jes.counts_opp)
        .map(|(&s, &o)| asymmetry_from_counts(s as f64, o as f64))
        .unzip();
    AsymmetryMap {
        binning: jes.binning,
        asymmetry,
        sigma,
        counts: jes
            .counts_same
            .iter()
            .zip(&jes.counts_opp)
            .map(|(s, o)| s + o)
            .collect(),
    }
}

/// Diagonal band |KER + E_e − center| ≤ half_width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSelection {
    pub parity: BandParity,
    pub order: u32,
    pub center_ev: f64,
    pub half_width_ev: f64,
}

impl BandSelection {
    /// Odd band q at qħω − I_d, even band q at (q − 1)ħω − I_d.
    pub fn new(
        parity: BandParity,
        order: u32,
        photon_energy_ev: f64,
        half_width_ev: f64,
    ) -> Result<Self, AnalysisError> {
        if !(half_width_ev > 0.0) {
            return Err(AnalysisError::InvalidBand(format!("half width {half_width_ev}")));
        }
        let n = match parity {
            BandParity::Odd => order as f64,
            BandParity::Even => order as f64 - 1.0,
        };
        let center_ev = n * photon_energy_ev - DISSOCIATION_LIMIT_EV;
        if !(center_ev > 0.0) {
            return Err(AnalysisError::InvalidBand(format!(
                "{parity} band {order} lies below threshold"
            )));
        }
        Ok(Self {
            parity,
            order,
            center_ev,
            half_width_ev,
        })
    }

    pub fn contains(&self, e: &Energies) -> bool {
        (e.ker_ev + e.electron_ev - self.center_ev).abs() <= self.half_width_ev
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.parity, self.order)
    }
}

pub fn select_band<'a>(events: &'a [DissociationEvent], band: &BandSelection) -> Vec<&'a DissociationEvent> {
    events.iter().filter(|e| band.contains(&energies(e))).collect()
}

/// KER histogram of the events inside `band`.
pub fn band_projection(events: &[DissociationEvent], band: &BandSelection, ker: Axis) -> Vec<u64> {
    let mut h = vec![0u64; ker.bins];
    for e in events {
        let en = energies(e);
        if band.contains(&en) {
            if let Some(i) = ker.index(en.ker_ev) {
                h[i] += 1;
            }
        }
    }
    h
}

/// Harmonic order → Δφ_{q,q−2} in radians.
pub type ChirpTable = BTreeMap<u32, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    /// Band-limited (trigonometric) interpolation, for uniform grids that
    /// cover a whole number of periods.
    Fourier,
    /// Linear interpolation clamped at the grid ends.
    Linear,
}

/// Hemisphere counts per (KER bin, delay), stored KER-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CountGrid {
    pub n_ker: usize,
    pub n_delays: usize,
    pub same: Vec<f64>,
    pub opp: Vec<f64>,
}

impl CountGrid {
    fn zeros(n_ker: usize, n_delays: usize) -> Self {
        Self {
            n_ker,
            n_delays,
            same: vec![0.0; n_ker * n_delays],
            opp: vec![0.0; n_ker * n_delays],
        }
    }

    pub fn index(&self, ker_bin: usize, delay: usize) -> usize {
        ker_bin * self.n_delays + delay
    }

    /// (A, σ) at one cell.
    pub fn asymmetry(&self, ker_bin: usize, delay: usize) -> (f64, f64) {
        let k = self.index(ker_bin, delay);
        asymmetry_from_counts(self.same[k], self.opp[k])
    }

    pub fn counts(&self, ker_bin: usize, delay: usize) -> f64 {
        let k = self.index(ker_bin, delay);
        self.same[k] + self.opp[k]
    }

    /// Per-delay (A, σ) series of one KER bin.
    pub fn row(&self, ker_bin: usize) -> Vec<(f64, f64)> {
        (0..self.n_delays).map(|d| self.asymmetry(ker_bin, d)).collect()
    }

    /// Counts summed over the KER bins in `range` (inclusive start,
    /// exclusive end), per delay.
    pub fn merged_rows(&self, range: std::ops::Range<usize>) -> Vec<(f64, f64)> {
        (0..self.n_delays)
            .map(|d| {
                let (s, o) = range.clone().fold((0.0, 0.0), |(s, o), i| {
                    let k = self.index(i, d);
                    (s + self.same[k], o + self.opp[k])
                });
                asymmetry_from_counts(s, o)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandScan {
    pub selection: BandSelection,
    pub counts: CountGrid,
    /// τ shift Δφ/(2ω) applied when summing, fs.
    pub shift_fs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityScan {
    pub parity: BandParity,
    pub bands: Vec<u32>,
    /// Aligned counts summed over the bands of this parity.
    pub counts: CountGrid,
    /// A with the per-KER delay average removed, when requested.
    pub mean_subtracted: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayScanResult {
    pub delays_fs: Vec<f64>,
    pub ker: Axis,
    pub bands: Vec<BandScan>,
    pub sums: Vec<ParityScan>,
    pub alignment: Alignment,
    pub warnings: Vec<String>,
}

impl DelayScanResult {
    pub fn sum(&self, parity: BandParity) -> Option<&ParityScan> {
        self.sums.iter().find(|s| s.parity == parity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayScanOptions {
    pub ker: Axis,
    pub photon_energy_ev: f64,
    pub subtract_mean: bool,
}

/// Whether `delays` are uniform and span a whole number of periods.
fn whole_period_grid(delays: &[f64], period: f64) -> bool {
    let n = delays.len();
    if n < 2 {
        return false;
    }
    let d = (delays[n - 1] - delays[0]) / (n - 1) as f64;
    if !(d > 0.0) {
        return false;
    }
    let uniform = delays
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - delays[0] - k as f64 * d).abs() <= 1e-9 * d.max(1.0));
    let cycles = n as f64 * d / period;
    uniform && cycles >= 0.999 && (cycles - cycles.round()).abs() < 1e-6
}

/// Values at τ_k + `shift` from samples at τ_k.
pub fn shift_series(values: &[f64], delays: &[f64], shift: f64, method: Alignment) -> Vec<f64> {
    let n = values.len();
    if shift == 0.0 || n < 2 {
        return values.to_vec();
    }
    match method {
        Alignment::Fourier => {
            let d = (delays[n - 1] - delays[0]) / (n - 1) as f64;
            let s = shift / d;
            let half = n / 2;
            let mut out = vec![0.0; n];
            for j in 0..=half {
                let (mut re, mut im) = (0.0, 0.0);
                for (k, &x) in values.iter().enumerate() {
                    let ang = -2.0 * PI * (j * k) as f64 / n as f64;
                    re += x * ang.cos();
                    im += x * ang.sin();
                }
                // weights of the one-sided real spectrum
                let w = if j == 0 || (n.is_multiple_of(2) && j == half) { 1.0 } else { 2.0 };
                for (k, o) in out.iter_mut().enumerate() {
                    let ang = 2.0 * PI * j as f64 * (k as f64 + s) / n as f64;
                    *o += w * (re * ang.cos() - im * ang.sin()) / n as f64;
                }
            }
            out
        }
        Alignment::Linear => delays
            .iter()
            .map(|&t| {
                let x = (t + shift).clamp(delays[0], delays[n - 1]);
                let i = delays.partition_point(|&v| v <= x).clamp(1, n - 1);
                let (t0, t1) = (delays[i - 1], delays[i]);
                let f = if t1 > t0 { (x - t0) / (t1 - t0) } else { 0.0 };
                values[i - 1] + f * (values[i] - values[i - 1])
            })
            .collect(),
    }
}

/// Delay- and KER-resolved hemisphere counts per band, plus same-parity sums
/// after aligning each band by Δφ_{q,q−2}/(2ω). An empty chirp table means
/// no alignment.
pub fn delay_scan(
    file: &EventFile,
    bands: &[BandSelection],
    chirp: &ChirpTable,
    opts: &DelayScanOptions,
) -> Result<DelayScanResult, AnalysisError> {
    let n_delays = file.delays_fs.len();
    if n_delays < MIN_DELAYS {
        return Err(AnalysisError::InsufficientDelays(n_delays));
    }
    let omega = angular_frequency(opts.photon_energy_ev);
    let period = oscillation_period(opts.photon_energy_ev);
    let alignment = if whole_period_grid(&file.delays_fs, period) {
        Alignment::Fourier
    } else {
        Alignment::Linear
    };
    let n_ker = opts.ker.bins;

    let mut scans: Vec<BandScan> = Vec::with_capacity(bands.len());
    for b in bands {
        let shift_fs = if chirp.is_empty() {
            0.0
        } else {
            chirp.get(&b.order).ok_or(AnalysisError::MissingChirp(b.order))? / (2.0 * omega)
        };
        scans.push(BandScan {
            selection: *b,
            counts: CountGrid::zeros(n_ker, n_delays),
            shift_fs,
        });
    }
    let per_band: Vec<CountGrid> = scans
        .par_iter()
        .map(|scan| {
            let mut g = CountGrid::zeros(n_ker, n_delays);
            for ev in &file.events {
                let e = energies(ev);
                if !scan.selection.contains(&e) {
                    continue;
                }
                if let Some(i) = opts.ker.index(e.ker_ev) {
                    let k = g.index(i, ev.delay_index as usize);
                    if same_hemisphere(ev) {
                        g.same[k] += 1.0;
                    } else {
                        g.opp[k] += 1.0;
                    }
                }
            }
            g
        })
        .collect();
    let mut warnings = Vec::new();
    for (scan, g) in scans.iter_mut().zip(per_band) {
        if g.same.iter().chain(&g.opp).all(|&c| c == 0.0) {
            warnings.push(format!("band {} is empty", scan.selection.label()));
        }
        scan.counts = g;
    }

    let mut sums = Vec::new();
    for parity in [BandParity::Odd, BandParity::Even] {
        let members: Vec<&BandScan> = scans.iter().filter(|s| s.selection.parity == parity).collect();
        if members.is_empty() {
            continue;
        }
        let mut total = CountGrid::zeros(n_ker, n_delays);
        for m in &members {
            for i in 0..n_ker {
                let row = i * n_delays..(i + 1) * n_delays;
                let same = shift_series(&m.counts.same[row.clone()], &file.delays_fs, m.shift_fs, alignment);
                let opp = shift_series(&m.counts.opp[row.clone()], &file.delays_fs, m.shift_fs, alignment);
                for d in 0..n_delays {
                    total.same[i * n_delays + d] += same[d].max(0.0);
                    total.opp[i * n_delays + d] += opp[d].max(0.0);
                }
            }
        }
        let mean_subtracted = opts.subtract_mean.then(|| subtract_delay_mean(&total));
        sums.push(ParityScan {
            parity,
            bands: members.iter().map(|m| m.selection.order).collect(),
            counts: total,
            mean_subtracted,
        });
    }
    Ok(DelayScanResult {
        delays_fs: file.delays_fs.clone(),
        ker: opts.ker,
        bands: scans,
        sums,
        alignment,
        warnings,
    })
}

/// A(KER, τ) minus its delay average per KER bin; undefined cells stay NaN.
pub fn subtract_delay_mean(grid: &CountGrid) -> Vec<f64> {
    let mut out = vec![f64::NAN; grid.n_ker * grid.n_delays];
    for i in 0..grid.n_ker {
        let row: Vec<f64> = (0..grid.n_delays).map(|d| grid.asymmetry(i, d).0).collect();
        let defined: Vec<f64> = row.iter().copied().filter(|v| v.is_finite()).collect();
        if defined.is_empty() {
            continue;
        }
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        for (d, v) in row.iter().enumerate() {
            if v.is_finite() {
                out[i * grid.n_delays + d] = v - mean;
            }
        }
    }
    out
}

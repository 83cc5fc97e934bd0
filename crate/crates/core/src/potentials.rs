//! H2+ Born–Oppenheimer curves and their IR-dressed adiabatic pair.
//!
//! Curves are tabulated on a strictly increasing grid of internuclear
//! distances (a.u.) and interpolated with a monotone piecewise-cubic Hermite
//! scheme, so interpolated values never overshoot the tabulated data. All
//! energies are eV above the neutral H2 ground state; the shared H + H+
//! asymptote is the dissociation limit.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::MonotoneCubic;
use crate::units::{
    ATOMIC_UNIT_INTENSITY, DEFAULT_PHOTON_ENERGY_EV, DISSOCIATION_LIMIT_EV, HARTREE_EV,
};

const EMBEDDED_GROUND: &str = include_str!("../data/h2plus_1ssg.dat");
const EMBEDDED_EXCITED: &str = include_str!("../data/h2plus_2psu.dat");

/// Subintervals inserted per table interval when tabulating dressed curves.
const DRESSED_REFINEMENT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("r = {r} a.u. outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("V_u - V_g never equals the photon energy {photon_ev} eV on the grid")]
    NoCrossing { photon_ev: f64 },
    #[error("invalid curve table: {0}")]
    InvalidTable(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("cannot read curve file {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveLabel {
    GroundSigmaG,
    ExcitedSigmaU,
    DressedLower,
    DressedUpper,
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CurveLabel::GroundSigmaG => "1s-sigma-g",
            CurveLabel::ExcitedSigmaU => "2p-sigma-u",
            CurveLabel::DressedLower => "dressed-lower",
            CurveLabel::DressedUpper => "dressed-upper",
        };
        f.write_str(s)
    }
}

/// A tabulated potential energy curve with monotone cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCurve {
    label: CurveLabel,
    table: MonotoneCubic,
}

impl PotentialCurve {
    pub fn new(label: CurveLabel, r: Vec<f64>, v: Vec<f64>) -> Result<Self, PotentialError> {
        let table = MonotoneCubic::new(r, v).map_err(PotentialError::InvalidTable)?;
        Ok(Self { label, table })
    }

    /// Sample a function on the given grid.
    pub fn from_fn(
        label: CurveLabel,
        grid: &[f64],
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, PotentialError> {
        let v = grid.iter().map(|&r| f(r)).collect();
        Self::new(label, grid.to_vec(), v)
    }

    /// Parse the two-column text format: `R[a.u.] V[eV]`, `#` starts a comment.
    pub fn parse_table(label: CurveLabel, text: &str) -> Result<Self, PotentialError> {
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64, PotentialError> {
                let tok = cols.next().ok_or_else(|| PotentialError::Parse {
                    line: i + 1,
                    message: format!("missing {what} column"),
                })?;
                tok.parse::<f64>().map_err(|e| PotentialError::Parse {
                    line: i + 1,
                    message: format!("bad {what} value {tok:?}: {e}"),
                })
            };
            r.push(next("distance")?);
            v.push(next("energy")?);
            if cols.next().is_some() {
                return Err(PotentialError::Parse {
                    line: i + 1,
                    message: "expected exactly two columns".into(),
                });
            }
        }
        Self::new(label, r, v)
    }

    pub fn load(label: CurveLabel, path: &Path) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path).map_err(|e| PotentialError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_table(label, &text)
    }

    pub fn label(&self) -> CurveLabel {
        self.label
    }

    pub fn grid(&self) -> &[f64] {
        self.table.x()
    }

    pub fn values(&self) -> &[f64] {
        self.table.y()
    }

    pub fn r_min(&self) -> f64 {
        self.table.x_min()
    }

    pub fn r_max(&self) -> f64 {
        self.table.x_max()
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min() && r <= self.r_max()
    }

    /// Interpolated energy in eV; exact at the grid nodes.
    pub fn eval(&self, r: f64) -> Result<f64, PotentialError> {
        if !self.contains(r) {
            return Err(PotentialError::OutOfRange {
                r,
                lo: self.r_min(),
                hi: self.r_max(),
            });
        }
        Ok(self.eval_clamped(r))
    }

    /// Evaluate, clamping `r` into the grid.
    pub(crate) fn eval_clamped(&self, r: f64) -> f64 {
        self.table.eval_clamped(r)
    }

    /// Local grid spacing around `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        self.table.spacing_at(r)
    }

    pub fn min_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shift every energy by a constant.
    pub fn shifted(&self, delta_ev: f64, label: CurveLabel) -> Self {
        let v = self.values().iter().map(|x| x + delta_ev).collect();
        Self::new(label, self.grid().to_vec(), v).expect("shifting keeps a valid table")
    }
}

/// The 1sσg / 2pσu pair of H2+.
#[derive(Debug, Clone, PartialEq)]
pub struct H2PlusCurves {
    pub ground: PotentialCurve,
    pub excited: PotentialCurve,
}

impl H2PlusCurves {
    /// Tables shipped with the crate (exact two-centre solution, 0.5–100 a.u.).
    pub fn embedded() -> Self {
        let ground = PotentialCurve::parse_table(CurveLabel::GroundSigmaG, EMBEDDED_GROUND)
            .expect("embedded 1s-sigma-g table");
        let excited = PotentialCurve::parse_table(CurveLabel::ExcitedSigmaU, EMBEDDED_EXCITED)
            .expect("embedded 2p-sigma-u table");
        Self { ground, excited }
    }

    /// Analytic stand-in: Morse 1sσg and exponential 2pσu with the H2+ well
    /// depth, equilibrium distance and a one-photon crossing near 5 a.u.
    pub fn analytic_fallback() -> Self {
        let grid: Vec<f64> = (0..=995).map(|i| 0.5 + 0.1 * i as f64).collect();
        let ground = PotentialCurve::from_fn(CurveLabel::GroundSigmaG, &grid, |r| {
            let x = 1.0 - (-0.72 * (r - 2.0)).exp();
            DISSOCIATION_LIMIT_EV + 2.79 * (x * x - 1.0)
        })
        .unwrap();
        let excited = PotentialCurve::from_fn(CurveLabel::ExcitedSigmaU, &grid, |r| {
            DISSOCIATION_LIMIT_EV + 54.1 * (-0.894 * r).exp()
        })
        .unwrap();
        Self { ground, excited }
    }

    pub fn from_files(ground: &Path, excited: &Path) -> Result<Self, PotentialError> {
        let curves = Self {
            ground: PotentialCurve::load(CurveLabel::GroundSigmaG, ground)?,
            excited: PotentialCurve::load(CurveLabel::ExcitedSigmaU, excited)?,
        };
        curves.validate()?;
        Ok(curves)
    }

    /// Physical sanity of a user-supplied pair: coverage, ordering, common asymptote.
    pub fn validate(&self) -> Result<(), PotentialError> {
        for c in [&self.ground, &self.excited] {
            if c.r_min() > 0.5 || c.r_max() < 40.0 {
                return Err(PotentialError::InvalidTable(format!(
                    "{} covers [{}, {}] a.u., need at least [0.5, 40]",
                    c.label(),
                    c.r_min(),
                    c.r_max()
                )));
            }
        }
        let r_far = self.ground.r_max().min(self.excited.r_max());
        let gap = (self.ground.eval_clamped(r_far) - self.excited.eval_clamped(r_far)).abs();
        if gap >= 0.01 {
            return Err(PotentialError::InvalidTable(format!(
                "curves differ by {gap} eV at R = {r_far} a.u."
            )));
        }
        for &r in self.ground.grid().iter().filter(|&&r| self.excited.contains(r)) {
            if self.excited.eval_clamped(r) < self.ground.eval_clamped(r) - 1e-9 {
                return Err(PotentialError::InvalidTable(format!(
                    "2p-sigma-u below 1s-sigma-g at R = {r} a.u."
                )));
            }
        }
        Ok(())
    }
}

/// IR probe field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrFieldParams {
    pub photon_energy_ev: f64,
    pub intensity_w_cm2: f64,
}

impl Default for IrFieldParams {
    fn default() -> Self {
        Self {
            photon_energy_ev: DEFAULT_PHOTON_ENERGY_EV,
            intensity_w_cm2: 2e11,
        }
    }
}

impl IrFieldParams {
    pub fn new(photon_energy_ev: f64, intensity_w_cm2: f64) -> Result<Self, PotentialError> {
        let p = Self {
            photon_energy_ev,
            intensity_w_cm2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(self.photon_energy_ev > 0.0) {
            return Err(PotentialError::InvalidField(format!(
                "photon energy must be positive, got {}",
                self.photon_energy_ev
            )));
        }
        if !(self.intensity_w_cm2 > 0.0) {
            return Err(PotentialError::InvalidField(format!(
                "intensity must be positive, got {}",
                self.intensity_w_cm2
            )));
        }
        Ok(())
    }

    /// Peak field amplitude E0 in atomic units.
    pub fn field_amplitude(&self) -> f64 {
        (self.intensity_w_cm2 / ATOMIC_UNIT_INTENSITY).sqrt()
    }
}

/// Transition dipole d(R) between 1sσg and 2pσu, a.u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingModel {
    /// Charge-resonance dipole d(R) = R/2.
    ChargeResonance,
    /// R/2 multiplied by a Fermi switch 1/(1 + exp((R − r_switch)/width)),
    /// so the dressing vanishes at large R.
    SwitchedChargeResonance { r_switch: f64, width: f64 },
    /// R-independent dipole.
    Constant { dipole: f64 },
}

impl Default for CouplingModel {
    fn default() -> Self {
        CouplingModel::SwitchedChargeResonance {
            r_switch: 12.0,
            width: 1.0,
        }
    }
}

impl CouplingModel {
    pub fn dipole(&self, r: f64) -> f64 {
        match *self {
            CouplingModel::ChargeResonance => 0.5 * r,
            CouplingModel::SwitchedChargeResonance { r_switch, width } => {
                0.5 * r / (1.0 + ((r - r_switch) / width).exp())
            }
            CouplingModel::Constant { dipole } => dipole,
        }
    }

    /// Off-diagonal coupling W(R) = d(R)·E0/2, eV.
    pub fn coupling_ev(&self, r: f64, ir: &IrFieldParams) -> f64 {
        self.dipole(r) * ir.field_amplitude() / 2.0 * HARTREE_EV
    }
}

/// Adiabatic curves of the two-state Floquet matrix
/// [[V_g, W], [W, V_u − ħω]].
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPair {
    pub lower: PotentialCurve,
    pub upper: PotentialCurve,
    pub crossing_radius_rf: f64,
    pub gap_width: f64,
    pub photon_energy_ev: f64,
}

fn eigen_pair(a: f64, b: f64, w: f64) -> (f64, f64) {
    let mean = 0.5 * (a + b);
    let half = (0.25 * (a - b) * (a - b) + w * w).sqrt();
    (mean - half, mean + half)
}

fn shared_grid(a: &PotentialCurve, b: &PotentialCurve) -> Result<Vec<f64>, PotentialError> {
    let lo = a.r_min().max(b.r_min());
    let hi = a.r_max().min(b.r_max());
    if hi <= lo {
        return Err(PotentialError::InvalidTable("curve grids do not overlap".into()));
    }
    let mut g: Vec<f64> = a
        .grid()
        .iter()
        .chain(b.grid())
        .copied()
        .filter(|&r| r >= lo && r <= hi)
        .collect();
    g.push(lo);
    g.push(hi);
    g.sort_by(|x, y| x.total_cmp(y));
    g.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    Ok(g)
}

/// Root of V_u(R) − V_g(R) − ħω, the one-photon resonance radius.
///
/// The innermost sign change on the shared grid is refined by bisection on
/// the interpolants.
pub fn crossing_radius(
    vg: &PotentialCurve,
    vu: &PotentialCurve,
    photon_energy_ev: f64,
) -> Result<f64, PotentialError> {
    let grid = shared_grid(vg, vu)?;
    let f = |r: f64| vu.eval_clamped(r) - vg.eval_clamped(r) - photon_energy_ev;
    let mut prev = (grid[0], f(grid[0]));
    if prev.1 == 0.0 {
        return Ok(prev.0);
    }
    for &r in &grid[1..] {
        let fr = f(r);
        if fr == 0.0 {
            return Ok(r);
        }
        if fr.signum() != prev.1.signum() {
            return Ok(bisect(f, prev.0, r, prev.1));
        }
        prev = (r, fr);
    }
    Err(PotentialError::NoCrossing {
        photon_ev: photon_energy_ev,
    })
}

/// Bisection to machine precision on a bracketing interval.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Diagonalise the dressed two-state matrix pointwise.
///
/// The lower/upper curves are tabulated on the union of both input grids,
/// refined so the avoided crossing is resolved.
pub fn dress_curves(
    vg: &PotentialCurve,
    vu: &PotentialCurve,
    ir: &IrFieldParams,
    coupling: &CouplingModel,
) -> Result<DressedPair, PotentialError> {
    ir.validate()?;
    let hw = ir.photon_energy_ev;
    let rf = crossing_radius(vg, vu, hw)?;
    let coarse = shared_grid(vg, vu)?;
    let mut grid = Vec::with_capacity(coarse.len() * DRESSED_REFINEMENT);
    for w in coarse.windows(2) {
        for j in 0..DRESSED_REFINEMENT {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / DRESSED_REFINEMENT as f64);
        }
    }
    grid.push(*coarse.last().unwrap());

    let (lower, upper): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .map(|&r| {
            eigen_pair(
                vg.eval_clamped(r),
                vu.eval_clamped(r) - hw,
                coupling.coupling_ev(r, ir),
            )
        })
        .unzip();

    let (lo_f, up_f) = eigen_pair(
        vg.eval_clamped(rf),
        vu.eval_clamped(rf) - hw,
        coupling.coupling_ev(rf, ir),
    );
    Ok(DressedPair {
        lower: PotentialCurve::new(CurveLabel::DressedLower, grid.clone(), lower)?,
        upper: PotentialCurve::new(CurveLabel::DressedUpper, grid, upper)?,
        crossing_radius_rf: rf,
        gap_width: up_f - lo_f,
        photon_energy_ev: hw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ev_to_hartree;

    fn linear(label: CurveLabel, slope: f64, offset: f64) -> PotentialCurve {
        let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        PotentialCurve::from_fn(label, &grid, |r| slope * r + offset).unwrap()
    }

    #[test]
    fn node_values_are_exact() {
        let c = H2PlusCurves::embedded().ground;
        for (r, v) in c.grid().iter().zip(c.values()) {
            assert_eq!(c.eval(*r).unwrap(), *v);
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = H2PlusCurves::embedded().ground;
        assert!(matches!(c.eval(0.1), Err(PotentialError::OutOfRange { .. })));
        assert!(matches!(c.eval(1e3), Err(PotentialError::OutOfRange { .. })));
    }

    #[test]
    fn ground_asymptote_is_dissociation_limit() {
        let c = H2PlusCurves::embedded();
        assert!((c.ground.eval(40.0).unwrap() - DISSOCIATION_LIMIT_EV).abs() < 0.01);
        assert!((c.ground.eval(100.0).unwrap() - DISSOCIATION_LIMIT_EV).abs() < 0.01);
        c.validate().unwrap();
    }

    #[test]
    fn linear_data_interpolates_linearly() {
        let c = linear(CurveLabel::GroundSigmaG, -1.5, 10.0);
        for i in 0..99 {
            let r = 0.1 * i as f64 + 0.05;
            assert!((c.eval(r).unwrap() - (-1.5 * r + 10.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_midpoints_match_linear_oracle() {
        // Beyond ~30 a.u. the tables vary by micro-eV per step; the midpoint
        // must agree with the chord to well below that.
        let c = H2PlusCurves::embedded().ground;
        for w in c.grid().windows(2).filter(|w| w[0] >= 30.0) {
            let k = c.grid().iter().position(|&x| x == w[0]).unwrap();
            let chord = 0.5 * (c.values()[k] + c.values()[k + 1]);
            let mid = c.eval(0.5 * (w[0] + w[1])).unwrap();
            assert!((mid - chord).abs() < 1e-6, "r={} {mid} {chord}", w[0]);
        }
    }

    #[test]
    fn interpolant_does_not_overshoot() {
        // step data: monotone interpolation stays within the data bounds
        let r: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let v = vec![0., 0., 0., 0., 1., 1., 1., 1., 1., 1.];
        let c = PotentialCurve::new(CurveLabel::GroundSigmaG, r, v).unwrap();
        for i in 0..=900 {
            let x = 0.01 * i as f64;
            let y = c.eval(x).unwrap();
            assert!((-1e-15..=1.0 + 1e-15).contains(&y), "{x} {y}");
        }
    }

    #[test]
    fn table_parser_reports_line() {
        let err = PotentialCurve::parse_table(CurveLabel::GroundSigmaG, "# c\n1 2\n2 x\n")
            .unwrap_err();
        assert_eq!(
            err,
            PotentialError::Parse {
                line: 3,
                message: "bad energy value \"x\": invalid float literal".into()
            }
        );
        assert!(PotentialCurve::parse_table(CurveLabel::GroundSigmaG, "1 1\n1 2\n").is_err());
    }

    #[test]
    fn constructed_crossing_at_four() {
        let vg = linear(CurveLabel::GroundSigmaG, 0.0, 0.0);
        // V_u − V_g = 3.2 − 0.5 R equals 1.2 at R = 4
        let vu = linear(CurveLabel::ExcitedSigmaU, -0.5, 3.2);
        let rf = crossing_radius(&vg, &vu, 1.2).unwrap();
        assert!((rf - 4.0).abs() < 1e-12, "{rf}");
    }

    #[test]
    fn no_crossing_error() {
        let vg = linear(CurveLabel::GroundSigmaG, 0.0, 0.0);
        let vu = linear(CurveLabel::ExcitedSigmaU, 0.0, 5.0);
        assert!(matches!(
            crossing_radius(&vg, &vu, 1.2),
            Err(PotentialError::NoCrossing { .. })
        ));
        let ir = IrFieldParams::default();
        assert!(dress_curves(&vg, &vu, &ir, &CouplingModel::ChargeResonance).is_err());
    }

    #[test]
    fn embedded_crossing_near_five() {
        let c = H2PlusCurves::embedded();
        let rf = crossing_radius(&c.ground, &c.excited, 1.2).unwrap();
        assert!((rf - 5.0).abs() < 0.5, "{rf}");
        let f = c.excited.eval(rf).unwrap() - c.ground.eval(rf).unwrap() - 1.2;
        assert!(f.abs() < 1e-6);
    }

    #[test]
    fn crossing_matches_dense_scan() {
        let c = H2PlusCurves::embedded();
        let rf = crossing_radius(&c.ground, &c.excited, 1.2).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        let mut r = 0.5;
        while r <= 40.0 {
            let f = (c.excited.eval(r).unwrap() - c.ground.eval(r).unwrap() - 1.2).abs();
            if f < best.0 {
                best = (f, r);
            }
            r += 1e-3;
        }
        assert!((best.1 - rf).abs() <= c.ground.spacing_at(rf), "{} {rf}", best.1);
    }

    #[test]
    fn fallback_is_physical() {
        let c = H2PlusCurves::analytic_fallback();
        c.validate().unwrap();
        let rf = crossing_radius(&c.ground, &c.excited, 1.2).unwrap();
        assert!((rf - 5.0).abs() < 0.5, "{rf}");
    }

    #[test]
    fn zero_coupling_gives_sorted_diabats() {
        let c = H2PlusCurves::embedded();
        let ir = IrFieldParams::default();
        let pair = dress_curves(&c.ground, &c.excited, &ir, &CouplingModel::Constant { dipole: 0.0 })
            .unwrap();
        assert!(pair.gap_width.abs() < 1e-9);
        for &r in pair.lower.grid() {
            let a = c.ground.eval(r).unwrap();
            let b = c.excited.eval(r).unwrap() - 1.2;
            assert!((pair.lower.eval(r).unwrap() - a.min(b)).abs() < 1e-12);
            assert!((pair.upper.eval(r).unwrap() - a.max(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_from_closed_form_field_amplitude() {
        // synthetic pair crossing exactly at R_f = 5
        let vg = linear(CurveLabel::GroundSigmaG, 0.0, 0.0);
        let vu = linear(CurveLabel::ExcitedSigmaU, -0.5, 3.7);
        let ir = IrFieldParams::new(1.2, 2e11).unwrap();
        let pair = dress_curves(&vg, &vu, &ir, &CouplingModel::ChargeResonance).unwrap();
        assert!((pair.crossing_radius_rf - 5.0).abs() < 1e-12);
        let e0 = (2e11_f64 / 3.509e16).sqrt();
        let w_hartree = 5.0 * e0 / 4.0;
        let expected = 2.0 * w_hartree * HARTREE_EV;
        assert!((pair.gap_width - expected).abs() < 1e-12, "{} {expected}", pair.gap_width);
        assert!((ev_to_hartree(pair.gap_width) - 2.0 * w_hartree).abs() < 1e-14);
    }

    #[test]
    fn trace_and_ordering() {
        let c = H2PlusCurves::embedded();
        let ir = IrFieldParams::default();
        let pair = dress_curves(&c.ground, &c.excited, &ir, &CouplingModel::ChargeResonance).unwrap();
        for (i, &r) in pair.lower.grid().iter().enumerate() {
            let a = c.ground.eval(r).unwrap();
            let b = c.excited.eval(r).unwrap() - 1.2;
            let lo = pair.lower.values()[i];
            let up = pair.upper.values()[i];
            assert!(lo <= up);
            assert!(lo <= a.min(b) + 1e-12);
            let trace = a + b;
            assert!(((lo + up) - trace).abs() <= 1e-12 * trace.abs());
        }
    }

    #[test]
    fn gap_scales_with_sqrt_intensity() {
        let c = H2PlusCurves::embedded();
        let model = CouplingModel::ChargeResonance;
        let g1 = dress_curves(&c.ground, &c.excited, &IrFieldParams::new(1.2, 2e11).unwrap(), &model)
            .unwrap()
            .gap_width;
        let g2 = dress_curves(&c.ground, &c.excited, &IrFieldParams::new(1.2, 4e11).unwrap(), &model)
            .unwrap()
            .gap_width;
        assert!((g2 / g1 - 2f64.sqrt()).abs() < 1e-9 * 2f64.sqrt());
    }

    #[test]
    fn switched_coupling_recovers_diabatic_asymptotes() {
        let c = H2PlusCurves::embedded();
        let ir = IrFieldParams::default();
        let pair = dress_curves(&c.ground, &c.excited, &ir, &CouplingModel::default()).unwrap();
        for r in [40.0, 60.0, 100.0] {
            let a = c.ground.eval(r).unwrap();
            let b = c.excited.eval(r).unwrap() - 1.2;
            assert!((pair.lower.eval(r).unwrap() - a.min(b)).abs() < 1e-3);
            assert!((pair.upper.eval(r).unwrap() - a.max(b)).abs() < 1e-3);
        }
        assert!(pair.gap_width > 0.0);
    }

    #[test]
    fn field_validation() {
        assert!(IrFieldParams::new(1.2, 0.0).is_err());
        assert!(IrFieldParams::new(0.0, 1e11).is_err());
        let e0 = IrFieldParams::new(1.2, 3.509e16).unwrap().field_amplitude();
        assert!((e0 - 1.0).abs() < 1e-15);
    }
}

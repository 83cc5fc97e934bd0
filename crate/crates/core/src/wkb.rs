//! Semiclassical nuclear phases Θ = ∫ p(R) dR along a potential curve.
//!
//! The local momentum is p(R) = sqrt(2μ (E − V(R))) in atomic units, so the
//! phase comes out in radians. Endpoints that are classical turning points
//! carry a square-root singularity in dp/dR; over a window of ten grid
//! spacings next to them the integral is rewritten with R = R_t ± u², which
//! makes the integrand smooth for the Gauss–Kronrod rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::MonotoneCubic;
use crate::potentials::{bisect, DressedPair, PotentialCurve};
use crate::quadrature::integrate;
use crate::units::{ev_to_hartree, REDUCED_MASS_H2PLUS};

/// Cutoff radius for the phase integrals, a.u.
pub const DEFAULT_R_MAX: f64 = 40.0;

/// Largest allowed |ΔΘ(r_max) − ΔΘ(2 r_max)|, rad.
pub const CUTOFF_TOLERANCE: f64 = 1e-3;

const TURNING_WINDOW_SPACINGS: f64 = 10.0;
const MAX_INTERVALS: usize = 50_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    #[error("E - V has constant sign on the grid (E = {energy_ev} eV)")]
    NoTurningPoint { energy_ev: f64 },
    #[error("no classically allowed region in [{r_start}, {r_max}] a.u.")]
    NoAllowedRegion { r_start: f64, r_max: f64 },
    #[error("adaptive quadrature stopped at error {estimate:.3e} rad (requested {tol:.3e})")]
    ToleranceNotMet { estimate: f64, tol: f64 },
    #[error("phase difference not converged: {at_r_max} rad at r_max, {at_double} rad at 2 r_max")]
    NotConverged { at_r_max: f64, at_double: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// A classical trajectory of the nuclei on one curve.
#[derive(Debug, Clone, Copy)]
pub struct WkbPath<'a> {
    pub curve: &'a PotentialCurve,
    pub total_energy_ev: f64,
    pub r_start: f64,
    pub r_max: f64,
    pub reduced_mass: f64,
}

impl<'a> WkbPath<'a> {
    pub fn new(
        curve: &'a PotentialCurve,
        total_energy_ev: f64,
        r_start: f64,
        r_max: f64,
    ) -> Result<Self, WkbError> {
        let path = Self {
            curve,
            total_energy_ev,
            r_start,
            r_max,
            reduced_mass: REDUCED_MASS_H2PLUS,
        };
        path.validate()?;
        Ok(path)
    }

    /// Ground-state dissociation: 1sσg at E = KER + I_d, from the inner wall.
    pub fn ground_state(
        curve: &'a PotentialCurve,
        ker_ev: f64,
        dissociation_limit_ev: f64,
        r_max: f64,
    ) -> Result<Self, WkbError> {
        Self::new(curve, ker_ev + dissociation_limit_ev, curve.r_min(), r_max)
    }

    /// Bond softening on the dressed lower curve. The total energy puts the
    /// asymptotic kinetic energy at KER, matching the ground-state path, and
    /// the integral starts at the inner turning point of the dressed curve.
    pub fn bond_softening(
        pair: &'a DressedPair,
        ker_ev: f64,
        dissociation_limit_ev: f64,
        r_max: f64,
    ) -> Result<Self, WkbError> {
        let e = ker_ev + dissociation_limit_ev - pair.photon_energy_ev;
        Self::new(&pair.lower, e, pair.lower.r_min(), r_max)
    }

    pub fn with_r_max(&self, r_max: f64) -> Result<Self, WkbError> {
        let p = Self { r_max, ..*self };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), WkbError> {
        if !(self.r_start < self.r_max) {
            return Err(WkbError::InvalidPath(format!(
                "r_start {} must be below r_max {}",
                self.r_start, self.r_max
            )));
        }
        if !self.curve.contains(self.r_start) || !self.curve.contains(self.r_max) {
            return Err(WkbError::InvalidPath(format!(
                "[{}, {}] a.u. not covered by the {} table [{}, {}]",
                self.r_start,
                self.r_max,
                self.curve.label(),
                self.curve.r_min(),
                self.curve.r_max()
            )));
        }
        if !(self.reduced_mass > 0.0) || !self.total_energy_ev.is_finite() {
            return Err(WkbError::InvalidPath("non-physical mass or energy".into()));
        }
        Ok(())
    }

    /// Local momentum in a.u., zero where classically forbidden.
    pub fn momentum(&self, r: f64) -> f64 {
        let ke = ev_to_hartree(self.total_energy_ev - self.curve.eval_clamped(r));
        if ke > 0.0 {
            (2.0 * self.reduced_mass * ke).sqrt()
        } else {
            0.0
        }
    }

    /// Classically allowed interval [a, b] within [r_start, r_max], with
    /// flags marking which ends are turning points.
    fn allowed_interval(&self) -> Result<(Endpoint, Endpoint), WkbError> {
        let g = |r: f64| self.total_energy_ev - self.curve.eval_clamped(r);
        let nodes = interior_nodes(self.curve, self.r_start, self.r_max);
        let lower = if g(self.r_start) > 0.0 {
            Endpoint::open(self.r_start)
        } else {
            let r = first_sign_change(&g, &nodes, |v| v > 0.0).ok_or(WkbError::NoAllowedRegion {
                r_start: self.r_start,
                r_max: self.r_max,
            })?;
            Endpoint::turning(r)
        };
        let rest: Vec<f64> = std::iter::once(lower.r)
            .chain(nodes.iter().copied().filter(|&r| r > lower.r))
            .collect();
        let upper = match first_sign_change(&g, &rest, |v| v <= 0.0) {
            Some(r) => Endpoint::turning(r),
            None => Endpoint::open(self.r_max),
        };
        Ok((lower, upper))
    }
}

#[derive(Debug, Clone, Copy)]
struct Endpoint {
    r: f64,
    turning: bool,
}

impl Endpoint {
    fn open(r: f64) -> Self {
        Self { r, turning: false }
    }
    fn turning(r: f64) -> Self {
        Self { r, turning: true }
    }
}

fn interior_nodes(curve: &PotentialCurve, lo: f64, hi: f64) -> Vec<f64> {
    let mut v = vec![lo];
    v.extend(curve.grid().iter().copied().filter(|&r| r > lo && r < hi));
    v.push(hi);
    v
}

/// First point along `nodes` where `g` enters the region `pred`, refined by
/// bisection on the interpolant.
fn first_sign_change(
    g: &impl Fn(f64) -> f64,
    nodes: &[f64],
    pred: impl Fn(f64) -> bool,
) -> Option<f64> {
    let mut prev = (nodes[0], g(nodes[0]));
    for &r in &nodes[1..] {
        let v = g(r);
        if pred(v) && !pred(prev.1) {
            if prev.1 == 0.0 {
                return Some(prev.0);
            }
            if v == 0.0 {
                return Some(r);
            }
            return Some(bisect(g, prev.0, r, prev.1));
        }
        prev = (r, v);
    }
    None
}

/// Semiclassical phase with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: f64,
    pub estimated_error: f64,
    pub r_turning: f64,
}

/// Innermost root of V(R) = E on the curve.
pub fn turning_point(curve: &PotentialCurve, energy_ev: f64) -> Result<f64, WkbError> {
    let g = |r: f64| energy_ev - curve.eval_clamped(r);
    let nodes = curve.grid();
    let mut prev = (nodes[0], g(nodes[0]));
    for &r in &nodes[1..] {
        let v = g(r);
        if v == 0.0 {
            return Ok(r);
        }
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if v.signum() != prev.1.signum() {
            return Ok(bisect(g, prev.0, r, prev.1));
        }
        prev = (r, v);
    }
    Err(WkbError::NoTurningPoint { energy_ev })
}

/// ∫ f over [a, b], using the u² substitution in windows next to turning points.
fn integrate_segment(
    f: &(impl Fn(f64) -> f64 + Sync),
    a: Endpoint,
    b: Endpoint,
    window: impl Fn(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64), WkbError> {
    let len = b.r - a.r;
    if len <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let share = tol / 3.0;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = a.r;
    let mut hi = b.r;
    let mut add = |q: crate::quadrature::Quadrature| -> Result<(), WkbError> {
        if !q.converged {
            return Err(WkbError::ToleranceNotMet {
                estimate: q.error,
                tol,
            });
        }
        value += q.value;
        error += q.error;
        Ok(())
    };
    if a.turning {
        let w = window(a.r).min(len / 2.0);
        add(integrate(
            |u| 2.0 * u * f(a.r + u * u),
            0.0,
            w.sqrt(),
            &[],
            share,
            max_intervals,
        ))?;
        lo = a.r + w;
    }
    if b.turning {
        let w = window(b.r).min(len / 2.0);
        add(integrate(
            |u| 2.0 * u * f(b.r - u * u),
            0.0,
            w.sqrt(),
            &[],
            share,
            max_intervals,
        ))?;
        hi = b.r - w;
    }
    if hi > lo {
        add(integrate(f, lo, hi, breaks, share, max_intervals))?;
    }
    Ok((value, error))
}

/// WKB phase ∫ p(R) dR over the classically allowed part of the path.
pub fn wkb_phase(path: &WkbPath<'_>, tol: f64) -> Result<PhaseResult, WkbError> {
    wkb_phase_budget(path, tol, MAX_INTERVALS)
}

fn wkb_phase_budget(
    path: &WkbPath<'_>,
    tol: f64,
    max_intervals: usize,
) -> Result<PhaseResult, WkbError> {
    path.validate()?;
    let (a, b) = path.allowed_interval()?;
    let breaks = interior_nodes(path.curve, a.r, b.r);
    let window = |r: f64| TURNING_WINDOW_SPACINGS * path.curve.spacing_at(r);
    let p = |r: f64| path.momentum(r);
    let (phase, err) = integrate_segment(&p, a, b, window, &breaks, tol, max_intervals)?;
    Ok(PhaseResult {
        phase,
        estimated_error: err,
        r_turning: a.r,
    })
}

/// ΔΘ = Θ_gs − Θ_bs with its cutoff check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDifference {
    pub value: f64,
    pub value_doubled_cutoff: f64,
    pub estimated_error: f64,
    pub converged: bool,
}

impl PhaseDifference {
    pub fn cutoff_change(&self) -> f64 {
        (self.value_doubled_cutoff - self.value).abs()
    }
}

fn delta_theta_at(gs: &WkbPath<'_>, bs: &WkbPath<'_>, tol: f64) -> Result<(f64, f64), WkbError> {
    let (ga, gb) = gs.allowed_interval()?;
    let (ba, bb) = bs.allowed_interval()?;
    let lo = ga.r.min(ba.r);
    let hi = gs.r_max;
    // every turning point of either path is a singular breakpoint
    let mut marks: Vec<Endpoint> = vec![ga, gb, ba, bb]
        .into_iter()
        .filter(|e| e.turning && e.r > lo && e.r < hi)
        .collect();
    marks.push(Endpoint {
        r: lo,
        turning: (ga.turning && ga.r == lo) || (ba.turning && ba.r == lo),
    });
    marks.push(Endpoint::open(hi));
    marks.sort_by(|x, y| x.r.total_cmp(&y.r));
    marks.dedup_by(|x, y| {
        if x.r == y.r {
            y.turning |= x.turning;
            true
        } else {
            false
        }
    });

    let mut nodes: Vec<f64> = interior_nodes(gs.curve, lo, hi);
    nodes.extend(interior_nodes(bs.curve, lo, hi));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let window = |r: f64| {
        TURNING_WINDOW_SPACINGS * gs.curve.spacing_at(r).min(bs.curve.spacing_at(r))
    };
    let f = |r: f64| gs.momentum(r) - bs.momentum(r);
    let share = tol / (marks.len() as f64);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in marks.windows(2) {
        let (v, e) = integrate_segment(&f, w[0], w[1], window, &nodes, share, MAX_INTERVALS)?;
        value += v;
        error += e;
    }
    Ok((value, error))
}

/// Phase difference of two paths from a single quadrature of p_gs − p_bs,
/// so the common large-R part cancels inside the integrand. The result is
/// checked against a second evaluation with the cutoff doubled.
pub fn delta_theta(gs: &WkbPath<'_>, bs: &WkbPath<'_>) -> Result<PhaseDifference, WkbError> {
    delta_theta_with_tol(gs, bs, 1e-9)
}

pub fn delta_theta_with_tol(
    gs: &WkbPath<'_>,
    bs: &WkbPath<'_>,
    tol: f64,
) -> Result<PhaseDifference, WkbError> {
    if gs.r_max != bs.r_max {
        return Err(WkbError::InvalidPath(format!(
            "paths must share r_max ({} vs {})",
            gs.r_max, bs.r_max
        )));
    }
    let (value, err) = delta_theta_at(gs, bs, tol)?;
    let r2 = 2.0 * gs.r_max;
    let (doubled, _) = delta_theta_at(&gs.with_r_max(r2)?, &bs.with_r_max(r2)?, tol)?;
    if (doubled - value).abs() > CUTOFF_TOLERANCE {
        return Err(WkbError::NotConverged {
            at_r_max: value,
            at_double: doubled,
        });
    }
    Ok(PhaseDifference {
        value,
        value_doubled_cutoff: doubled,
        estimated_error: err,
        converged: true,
    })
}

/// Θ_gs, Θ_bs and ΔΘ tabulated on a KER grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearPhaseTable {
    ker: Vec<f64>,
    theta_gs: Vec<f64>,
    delta: Vec<f64>,
    delta_interp: MonotoneCubic,
    gs_interp: MonotoneCubic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearPhases {
    pub theta_gs: f64,
    pub theta_bs: f64,
}

impl NuclearPhases {
    pub fn delta(&self) -> f64 {
        self.theta_gs - self.theta_bs
    }
}

impl NuclearPhaseTable {
    /// Evaluate the phases on `ker_grid` (eV, strictly increasing) in parallel.
    pub fn compute(
        ground: &PotentialCurve,
        dressed: &DressedPair,
        dissociation_limit_ev: f64,
        ker_grid: &[f64],
        r_max: f64,
    ) -> Result<Self, WkbError> {
        let rows: Vec<(f64, f64)> = ker_grid
            .par_iter()
            .map(|&ker| {
                let gs = WkbPath::ground_state(ground, ker, dissociation_limit_ev, r_max)?;
                let bs = WkbPath::bond_softening(dressed, ker, dissociation_limit_ev, r_max)?;
                let theta_gs = wkb_phase(&gs, 1e-9)?.phase;
                let d = delta_theta(&gs, &bs)?;
                Ok((theta_gs, d.value))
            })
            .collect::<Result<_, WkbError>>()?;
        let (theta_gs, delta): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        Self::from_values(ker_grid.to_vec(), theta_gs, delta)
    }

    pub fn from_values(ker: Vec<f64>, theta_gs: Vec<f64>, delta: Vec<f64>) -> Result<Self, WkbError> {
        let delta_interp =
            MonotoneCubic::new(ker.clone(), delta.clone()).map_err(WkbError::InvalidPath)?;
        let gs_interp =
            MonotoneCubic::new(ker.clone(), theta_gs.clone()).map_err(WkbError::InvalidPath)?;
        Ok(Self {
            ker,
            theta_gs,
            delta,
            delta_interp,
            gs_interp,
        })
    }

    /// A table with ΔΘ fixed, for tests and idealised runs.
    pub fn constant(delta: f64) -> Self {
        Self::from_values(vec![0.0, 100.0], vec![0.0, 0.0], vec![delta, delta]).unwrap()
    }

    pub fn ker_grid(&self) -> &[f64] {
        &self.ker
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta
    }

    pub fn theta_gs_values(&self) -> &[f64] {
        &self.theta_gs
    }

    /// Phases at `ker`, clamped to the tabulated range.
    pub fn at(&self, ker: f64) -> NuclearPhases {
        let theta_gs = self.gs_interp.eval_clamped(ker);
        NuclearPhases {
            theta_gs,
            theta_bs: theta_gs - self.delta_interp.eval_clamped(ker),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{dress_curves, CouplingModel, CurveLabel, H2PlusCurves, IrFieldParams};
    use crate::units::{DISSOCIATION_LIMIT_EV, HARTREE_EV};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn flat(level: f64) -> PotentialCurve {
        PotentialCurve::from_fn(CurveLabel::GroundSigmaG, &grid(0.0, 10.0, 101), |_| level).unwrap()
    }

    #[test]
    fn turning_point_of_linear_curve() {
        let c = PotentialCurve::from_fn(CurveLabel::GroundSigmaG, &grid(0.0, 10.0, 101), |r| 10.0 - r)
            .unwrap();
        let r = turning_point(&c, 6.0).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!((c.eval(r).unwrap() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn turning_point_missing() {
        let c = H2PlusCurves::embedded().ground;
        assert!(matches!(
            turning_point(&c, c.min_value() - 1.0),
            Err(WkbError::NoTurningPoint { .. })
        ));
    }

    #[test]
    fn embedded_turning_point_matches_scan() {
        let c = H2PlusCurves::embedded().ground;
        let e = DISSOCIATION_LIMIT_EV + 0.6;
        let r = turning_point(&c, e).unwrap();
        assert!((c.eval(r).unwrap() - e).abs() < 1e-8);
        // dense scan oracle: first point where E - V turns positive
        let mut x = c.r_min();
        while c.eval(x).unwrap() > e {
            x += 1e-5;
        }
        assert!((x - r).abs() < 2e-5, "{x} {r}");
    }

    #[test]
    fn flat_potential_constant_integrand() {
        let c = flat(0.0);
        let path = WkbPath::new(&c, HARTREE_EV, 0.0, 1.0).unwrap();
        let res = wkb_phase(&path, 1e-10).unwrap();
        let expected = (2.0 * 918.076f64).sqrt();
        assert!((res.phase - expected).abs() < 1e-9, "{}", res.phase);
        assert!((res.phase - 42.8503).abs() < 1e-3);
        assert!(res.estimated_error < 1e-10);
    }

    fn linear_closed_form(slope_ev: f64, v0: f64, e: f64, a: f64, b: f64) -> f64 {
        // V = v0 - slope R, p = sqrt(2 mu (E - V)/Eh)
        let mu2 = 2.0 * REDUCED_MASS_H2PLUS / HARTREE_EV;
        let anti = |r: f64| {
            let k = e - v0 + slope_ev * r;
            mu2.sqrt() * (2.0 / 3.0) * k.max(0.0).powf(1.5) / slope_ev
        };
        anti(b) - anti(a)
    }

    #[test]
    fn linear_potential_closed_form() {
        let (slope, v0, e) = (3.0, 20.0, 8.0);
        let c = PotentialCurve::from_fn(CurveLabel::GroundSigmaG, &grid(0.0, 12.0, 121), |r| v0 - slope * r)
            .unwrap();
        let path = WkbPath::new(&c, e, 0.0, 10.0).unwrap();
        let res = wkb_phase(&path, 1e-10).unwrap();
        assert!((res.r_turning - 4.0).abs() < 1e-12, "{}", res.r_turning);
        let exact = linear_closed_form(slope, v0, e, 4.0, 10.0);
        assert!(((res.phase - exact) / exact).abs() < 1e-6, "{} {exact}", res.phase);
    }

    #[test]
    fn forbidden_path_errors() {
        let c = flat(5.0);
        let path = WkbPath::new(&c, 1.0, 0.0, 5.0).unwrap();
        assert!(matches!(wkb_phase(&path, 1e-8), Err(WkbError::NoAllowedRegion { .. })));
        assert!(WkbPath::new(&c, 1.0, 5.0, 1.0).is_err());
        assert!(WkbPath::new(&c, 1.0, 0.0, 50.0).is_err());
    }

    #[test]
    fn tiny_budget_reports_tolerance() {
        let c = H2PlusCurves::embedded().ground;
        let path = WkbPath::ground_state(&c, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        assert!(matches!(
            wkb_phase_budget(&path, 1e-14, 4),
            Err(WkbError::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn identical_paths_cancel() {
        let c = H2PlusCurves::embedded().ground;
        let p = WkbPath::ground_state(&c, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        let d = delta_theta(&p, &p).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn flat_pair_closed_form() {
        let (e, delta) = (2.0, 0.5);
        let c1 = flat(0.0);
        let c2 = flat(delta);
        let a = WkbPath::new(&c1, e, 0.0, 4.0).unwrap();
        let b = WkbPath::new(&c2, e, 0.0, 4.0).unwrap();
        let d = delta_theta_at(&a, &b, 1e-12).unwrap().0;
        let k = |x: f64| (2.0 * REDUCED_MASS_H2PLUS * x / HARTREE_EV).sqrt();
        let expected = (k(e) - k(e - delta)) * 4.0;
        assert!((d - expected).abs() < 1e-10, "{d} {expected}");
    }

    #[test]
    fn dressed_phase_difference_converges() {
        let curves = H2PlusCurves::embedded();
        let pair = dress_curves(
            &curves.ground,
            &curves.excited,
            &IrFieldParams::default(),
            &CouplingModel::default(),
        )
        .unwrap();
        let gs = WkbPath::ground_state(&curves.ground, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        let bs = WkbPath::bond_softening(&pair, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        let d = delta_theta(&gs, &bs).unwrap();
        assert!(d.cutoff_change() < 1e-3, "{d:?}");
        // agrees with the difference of two separate integrals
        let tg = wkb_phase(&gs, 1e-10).unwrap().phase;
        let tb = wkb_phase(&bs, 1e-10).unwrap().phase;
        assert!((tg - tb - d.value).abs() < 1e-6, "{} {}", tg - tb, d.value);
    }

    #[test]
    fn bare_charge_resonance_diverges() {
        let curves = H2PlusCurves::embedded();
        let pair = dress_curves(
            &curves.ground,
            &curves.excited,
            &IrFieldParams::default(),
            &CouplingModel::ChargeResonance,
        )
        .unwrap();
        let gs = WkbPath::ground_state(&curves.ground, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        let bs = WkbPath::bond_softening(&pair, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        assert!(matches!(delta_theta(&gs, &bs), Err(WkbError::NotConverged { .. })));
    }

    #[test]
    fn mismatched_cutoffs_rejected() {
        let c = H2PlusCurves::embedded().ground;
        let a = WkbPath::ground_state(&c, 0.6, DISSOCIATION_LIMIT_EV, 40.0).unwrap();
        let b = WkbPath::ground_state(&c, 0.6, DISSOCIATION_LIMIT_EV, 30.0).unwrap();
        assert!(matches!(delta_theta(&a, &b), Err(WkbError::InvalidPath(_))));
    }

    #[test]
    fn phase_table_interpolates_nodes() {
        let t = NuclearPhaseTable::from_values(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 4.0], vec![0.5, 0.7, 0.9])
            .unwrap();
        let p = t.at(1.0);
        assert_eq!(p.theta_gs, 2.0);
        assert!((p.delta() - 0.7).abs() < 1e-15);
        assert!((t.at(5.0).delta() - 0.9).abs() < 1e-15);
    }
}

//! Parameter recovery from histograms and delay scans.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathways::BandParity;
use crate::units::wrap_phase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("samples span {span} fs, less than one period ({period} fs)")]
    ShortSpan { span: f64, period: f64 },
    #[error("need at least two sideband fits, got {0}")]
    InsufficientBands(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Weighted linear least squares; returns coefficients and their covariance
/// (JᵀWJ)⁻¹.
fn weighted_lstsq(
    design: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>), FitError> {
    let n = y.len();
    let p = design.first().map_or(0, Vec::len);
    if n < p || p == 0 {
        return Err(FitError::InsufficientData { needed: p.max(1), got: n });
    }
    let j = DMatrix::from_fn(n, p, |r, c| design[r][c] * w[r].sqrt());
    let b = DVector::from_fn(n, |r, _| y[r] * w[r].sqrt());
    let normal = j.transpose() * &j;
    let chol = normal.clone().cholesky().ok_or(FitError::RankDeficient)?;
    // reject near-singular systems that Cholesky still accepts
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v.abs())));
    if !(lo > hi * 1e-13) {
        return Err(FitError::RankDeficient);
    }
    let coef = chol.solve(&(j.transpose() * b));
    Ok((coef, chol.inverse()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFitOptions {
    /// Bins with fewer counts are left out.
    pub min_count: f64,
    /// Follow the log-linear solution with Gauss–Newton steps on the
    /// Poisson-weighted residuals.
    pub refine: bool,
}

impl Default for ExpFitOptions {
    fn default() -> Self {
        Self {
            min_count: 5.0,
            refine: false,
        }
    }
}

/// f(x) = A e^{−a x} with a reported as |a|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub amplitude: f64,
    pub decay: f64,
    pub bins_used: usize,
    pub bins_excluded: usize,
    pub sigma_amplitude: f64,
    pub sigma_decay: f64,
}

impl ExpFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-self.decay * x).exp()
    }

    /// Amplitude of the underlying density when the fitted values are counts
    /// integrated over bins of `width` centred on the abscissae.
    pub fn density_amplitude(&self, width: f64) -> f64 {
        let h = self.decay * width / 2.0;
        let factor = if h.abs() < 1e-12 { 1.0 } else { h.sinh() / h };
        self.amplitude / (width * factor)
    }
}

/// Fit A e^{−a x} to the bins with `x` in `range` by weighted regression of
/// ln y on x (weights y, the Poisson variance of ln y being 1/y).
pub fn fit_exponential(
    x: &[f64],
    y: &[f64],
    range: (f64, f64),
    opts: ExpFitOptions,
) -> Result<ExpFit, FitError> {
    if x.len() != y.len() {
        return Err(FitError::InvalidInput(format!("{} abscissae, {} values", x.len(), y.len())));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi < range.0 || xi > range.1 {
            continue;
        }
        if !(yi > 0.0) || yi < opts.min_count {
            excluded += 1;
            continue;
        }
        xs.push(xi);
        ys.push(yi);
    }
    if xs.len() < 4 {
        return Err(FitError::InsufficientData { needed: 4, got: xs.len() });
    }
    let design: Vec<Vec<f64>> = xs.iter().map(|&v| vec![1.0, -v]).collect();
    let logs: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (c, cov) = weighted_lstsq(&design, &logs, &ys)?;
    let mut amp = c[0].exp();
    let mut a = c[1];
    let mut cov_amp = amp * amp * cov[(0, 0)];
    let mut cov_a = cov[(1, 1)];
    if opts.refine {
        for _ in 0..20 {
            // residuals r = y − A e^{−ax}, weights 1/y
            let jac: Vec<Vec<f64>> = xs
                .iter()
                .map(|&v| {
                    let e = (-a * v).exp();
                    vec![e, -amp * v * e]
                })
                .collect();
            let r: Vec<f64> = xs.iter().zip(&ys).map(|(&v, &yv)| yv - amp * (-a * v).exp()).collect();
            let w: Vec<f64> = ys.iter().map(|v| 1.0 / v).collect();
            let (step, cv) = weighted_lstsq(&jac, &r, &w)?;
            amp += step[0];
            a += step[1];
            cov_amp = cv[(0, 0)];
            cov_a = cv[(1, 1)];
            if step[0].abs() <= 1e-14 * amp.abs() && step[1].abs() <= 1e-14 * a.abs().max(1.0) {
                break;
            }
        }
    }
    Ok(ExpFit {
        amplitude: amp,
        decay: a.abs(),
        bins_used: xs.len(),
        bins_excluded: excluded,
        sigma_amplitude: cov_amp.sqrt(),
        sigma_decay: cov_a.sqrt(),
    })
}

/// Ground-state and bond-softening parts of a band's KER projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaProfile {
    pub ker: Vec<f64>,
    pub alpha_sq: Vec<f64>,
    pub beta_sq: Vec<f64>,
    /// |b|² per bond-softening path: β² for even bands, β²/4 for each of
    /// the two equal odd-band paths b1 = b2.
    pub path_sq: Vec<f64>,
    pub fit: ExpFit,
}

pub fn extract_alpha_beta(ker: &[f64], projection: &[f64], fit: &ExpFit, parity: BandParity) -> AlphaBetaProfile {
    let alpha_sq: Vec<f64> = ker.iter().map(|&x| fit.eval(x)).collect();
    let beta_sq: Vec<f64> = projection
        .iter()
        .zip(&alpha_sq)
        .map(|(p, a)| (p - a).max(0.0))
        .collect();
    let path_sq = match parity {
        BandParity::Odd => beta_sq.iter().map(|b| b / 4.0).collect(),
        BandParity::Even => beta_sq.clone(),
    };
    AlphaBetaProfile {
        ker: ker.to_vec(),
        alpha_sq,
        beta_sq,
        path_sq,
        fit: *fit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFit {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

/// Gaussian peak of `y(x)` from a log-parabola fit to the contiguous bins
/// around the maximum that exceed `threshold` × max.
pub fn fit_bump(x: &[f64], y: &[f64], threshold: f64) -> Result<BumpFit, FitError> {
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(FitError::InsufficientData { needed: 3, got: 0 })?;
    if !(ymax > 0.0) {
        return Err(FitError::InsufficientData { needed: 3, got: 0 });
    }
    let cut = threshold * ymax;
    let mut lo = imax;
    while lo > 0 && y[lo - 1] > cut {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < y.len() && y[hi + 1] > cut {
        hi += 1;
    }
    let design: Vec<Vec<f64>> = (lo..=hi).map(|i| {
        let d = x[i] - x[imax];
        vec![1.0, d, d * d]
    }).collect();
    let logs: Vec<f64> = (lo..=hi).map(|i| y[i].ln()).collect();
    let w: Vec<f64> = (lo..=hi).map(|i| y[i]).collect();
    let (c, _) = weighted_lstsq(&design, &logs, &w)?;
    if !(c[2] < 0.0) {
        return Err(FitError::InvalidInput("peak region is not concave".into()));
    }
    let shift = -c[1] / (2.0 * c[2]);
    Ok(BumpFit {
        center: x[imax] + shift,
        width: (-1.0 / (2.0 * c[2])).sqrt(),
        height: (c[0] - c[1] * c[1] / (4.0 * c[2])).exp(),
    })
}

/// value(τ) = offset + amplitude · cos(Ωτ + phase), Ω fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub angular_frequency: f64,
    pub residual_rms: f64,
    pub chi2: f64,
    pub sigma_offset: f64,
    pub sigma_amplitude: f64,
    pub sigma_phase: f64,
}

impl CosineFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.angular_frequency * t + self.phase).cos()
    }
}

/// One delay sample: (τ fs, value, σ).
pub type Sample = (f64, f64, f64);

fn usable_samples(samples: &[Sample]) -> Vec<Sample> {
    samples
        .iter()
        .copied()
        .filter(|(t, v, s)| t.is_finite() && v.is_finite() && *s > 0.0 && s.is_finite())
        .collect()
}

/// Weighted least squares on the basis {1, cos Ωτ, sin Ωτ}. Samples with a
/// non-finite value or non-positive σ are skipped. The samples must cover at
/// least one oscillation period.
pub fn fit_cosine(samples: &[Sample], angular_frequency: f64) -> Result<CosineFit, FitError> {
    let usable = usable_samples(samples);
    if usable.len() < 5 {
        return Err(FitError::InsufficientData { needed: 5, got: usable.len() });
    }
    let n = usable.len() as f64;
    let period = TAU / angular_frequency;
    let (tmin, tmax) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.0), b.max(s.0)));
    // a uniform grid of n points over one period spans (n−1)/n of it
    if tmax - tmin < period * (n - 1.0) / n * (1.0 - 1e-9) {
        return Err(FitError::ShortSpan {
            span: tmax - tmin,
            period,
        });
    }
    cosine_lstsq(&usable, angular_frequency)
}

fn cosine_lstsq(usable: &[Sample], angular_frequency: f64) -> Result<CosineFit, FitError> {
    if usable.len() < 5 {
        return Err(FitError::InsufficientData { needed: 5, got: usable.len() });
    }
    let n = usable.len();
    let design: Vec<Vec<f64>> = usable
        .iter()
        .map(|&(t, _, _)| {
            let x = angular_frequency * t;
            vec![1.0, x.cos(), x.sin()]
        })
        .collect();
    let y: Vec<f64> = usable.iter().map(|s| s.1).collect();
    let w: Vec<f64> = usable.iter().map(|s| 1.0 / (s.2 * s.2)).collect();
    let (c, cov) = weighted_lstsq(&design, &y, &w)?;
    let (c1, c2) = (c[1], c[2]);
    let amplitude = c1.hypot(c2);
    let phase = if amplitude > 0.0 { wrap_phase((-c2).atan2(c1)) } else { 0.0 };
    let (sa, sp) = if amplitude > 0.0 {
        let va = (c1 * c1 * cov[(1, 1)] + c2 * c2 * cov[(2, 2)] + 2.0 * c1 * c2 * cov[(1, 2)]) / (amplitude * amplitude);
        let vp = (c2 * c2 * cov[(1, 1)] + c1 * c1 * cov[(2, 2)] - 2.0 * c1 * c2 * cov[(1, 2)])
            / amplitude.powi(4);
        (va.max(0.0).sqrt(), vp.max(0.0).sqrt())
    } else {
        (cov[(1, 1)].max(cov[(2, 2)]).sqrt(), f64::INFINITY)
    };
    let fit = CosineFit {
        offset: c[0],
        amplitude,
        phase,
        angular_frequency,
        residual_rms: 0.0,
        chi2: 0.0,
        sigma_offset: cov[(0, 0)].sqrt(),
        sigma_amplitude: sa,
        sigma_phase: sp,
    };
    let (ss, chi2) = usable.iter().fold((0.0, 0.0), |(ss, chi), &(t, v, s)| {
        let r = v - fit.eval(t);
        (ss + r * r, chi + r * r / (s * s))
    });
    Ok(CosineFit {
        residual_rms: (ss / n as f64).sqrt(),
        chi2,
        ..fit
    })
}

/// Best-fit oscillation frequency within `relative_range` of `guess`
/// (χ² scan followed by golden-section refinement).
pub fn fit_frequency(samples: &[Sample], guess: f64, relative_range: f64) -> Result<CosineFit, FitError> {
    if !(guess > 0.0) || !(relative_range > 0.0 && relative_range < 1.0) {
        return Err(FitError::InvalidInput(format!("guess {guess}, range {relative_range}")));
    }
    let usable = usable_samples(samples);
    let chi2 = |w: f64| -> f64 { cosine_lstsq(&usable, w).map_or(f64::INFINITY, |f| f.chi2) };
    let lo = guess * (1.0 - relative_range);
    let hi = guess * (1.0 + relative_range);
    let steps = 400;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&w| chi2(w)).collect();
    let best = (0..=steps).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(steps)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (chi2(c), chi2(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * guess {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = chi2(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = chi2(d);
        }
    }
    fit_cosine(&usable, 0.5 * (a + b))
}

/// Oscillation phase of one even band (sideband) yield and the chirp step
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandPhase {
    pub order: u32,
    /// Fitted phase of the yield oscillation.
    pub phase: f64,
    pub sigma: f64,
    /// Δφ_{q,q−2} relative to the lowest sideband, rad.
    pub relative_chirp: f64,
}

/// Sideband yields oscillate as cos(2ωτ − Δφ_{q,q−2}), so the chirp steps are
/// minus the fitted phases, reported relative to the lowest sideband.
pub fn sideband_chirp(fits: &[(u32, CosineFit)]) -> Result<Vec<SidebandPhase>, FitError> {
    if fits.len() < 2 {
        return Err(FitError::InsufficientBands(fits.len()));
    }
    let mut sorted = fits.to_vec();
    sorted.sort_by_key(|f| f.0);
    let ref_phase = sorted[0].1.phase;
    Ok(sorted
        .iter()
        .map(|(order, f)| SidebandPhase {
            order: *order,
            phase: f.phase,
            sigma: f.sigma_phase,
            relative_chirp: wrap_phase(-(f.phase - ref_phase)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::angular_frequency;

    #[test]
    fn exact_exponential() {
        let x: Vec<f64> = (0..7).map(|i| 0.025 + 0.05 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * (-4.0 * v).exp()).collect();
        let opts = ExpFitOptions { min_count: 0.0, refine: false };
        let f = fit_exponential(&x, &y, (0.0, 0.35), opts).unwrap();
        assert!((f.amplitude - 3.0).abs() < 1e-9 && (f.decay - 4.0).abs() < 1e-9, "{f:?}");
        let r = fit_exponential(&x, &y, (0.0, 0.35), ExpFitOptions { refine: true, ..opts }).unwrap();
        assert!((r.amplitude - 3.0).abs() < 1e-9 && (r.decay - 4.0).abs() < 1e-9);
    }

    #[test]
    fn constant_data_has_zero_decay() {
        let x = [0.0, 0.1, 0.2, 0.3];
        let f = fit_exponential(&x, &[7.0; 4], (0.0, 0.35), ExpFitOptions::default()).unwrap();
        assert!(f.decay.abs() < 1e-12);
        assert!((f.amplitude - 7.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_needs_four_bins() {
        let x = [0.0, 0.1, 0.2, 0.3];
        let y = [10.0, 0.0, 8.0, 7.0];
        assert!(matches!(
            fit_exponential(&x, &y, (0.0, 0.35), ExpFitOptions::default()),
            Err(FitError::InsufficientData { got: 3, .. })
        ));
    }

    #[test]
    fn bin_integrated_amplitude() {
        // counts = ∫ 3 e^{−4x} over bins of width 0.05
        let w = 0.05;
        let x: Vec<f64> = (0..7).map(|i| w / 2.0 + w * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&c| 3.0 / 4.0 * ((-4.0 * (c - w / 2.0)).exp() - (-4.0 * (c + w / 2.0)).exp()))
            .collect();
        let f = fit_exponential(&x, &y, (0.0, 0.35), ExpFitOptions { min_count: 0.0, refine: false }).unwrap();
        assert!((f.decay - 4.0).abs() < 1e-9);
        assert!((f.density_amplitude(w) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_beta_split() {
        let x: Vec<f64> = (0..20).map(|i| 0.05 * i as f64).collect();
        let fit = ExpFit {
            amplitude: 2.0,
            decay: 3.0,
            bins_used: 0,
            bins_excluded: 0,
            sigma_amplitude: 0.0,
            sigma_decay: 0.0,
        };
        let proj: Vec<f64> = x.iter().map(|&v| fit.eval(v)).collect();
        let p = extract_alpha_beta(&x, &proj, &fit, BandParity::Odd);
        assert!(p.beta_sq.iter().all(|&b| b == 0.0));
        let low: Vec<f64> = proj.iter().map(|v| v * 0.5).collect();
        let p = extract_alpha_beta(&x, &low, &fit, BandParity::Even);
        assert!(p.beta_sq.iter().all(|&b| b == 0.0));
        let bump: Vec<f64> = x
            .iter()
            .map(|&v| fit.eval(v) + 4.0 * (-0.5 * ((v - 0.6) / 0.1f64).powi(2)).exp())
            .collect();
        let p = extract_alpha_beta(&x, &bump, &fit, BandParity::Odd);
        assert!((p.path_sq[12] - p.beta_sq[12] / 4.0).abs() < 1e-15);
        let b = fit_bump(&x, &p.beta_sq, 0.2).unwrap();
        assert!((b.center - 0.6).abs() < 1e-9 && (b.width - 0.1).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn exact_cosine() {
        let w2 = 2.0 * angular_frequency(1.2);
        let period = TAU / w2;
        let s: Vec<Sample> = (0..16)
            .map(|k| {
                let t = k as f64 * period / 16.0;
                (t, 0.1 + 0.3 * (w2 * t - 0.7).cos(), 0.01)
            })
            .collect();
        let f = fit_cosine(&s, w2).unwrap();
        assert!((f.offset - 0.1).abs() < 1e-10);
        assert!((f.amplitude - 0.3).abs() < 1e-10);
        assert!((f.phase + 0.7).abs() < 1e-10);
        let c: Vec<Sample> = s.iter().map(|&(t, _, e)| (t, 0.25, e)).collect();
        let f = fit_cosine(&c, w2).unwrap();
        assert!(f.amplitude < 1e-12);
    }

    #[test]
    fn cosine_degenerate_inputs() {
        let w2 = 2.0 * angular_frequency(1.2);
        let same: Vec<Sample> = (0..8).map(|_| (0.3, 1.0, 0.1)).collect();
        assert!(fit_cosine(&same, w2).is_err());
        let few: Vec<Sample> = (0..4).map(|k| (k as f64, 1.0, 0.1)).collect();
        assert!(matches!(fit_cosine(&few, w2), Err(FitError::InsufficientData { .. })));
        // samples exactly one period apart alias onto a single point
        let period = TAU / w2;
        let alias: Vec<Sample> = (0..8).map(|k| (k as f64 * period, 1.0 + k as f64 * 1e-3, 0.1)).collect();
        assert_eq!(fit_cosine(&alias, w2), Err(FitError::RankDeficient));
    }

    #[test]
    fn frequency_recovered() {
        let w = 2.0 * angular_frequency(1.2);
        let s: Vec<Sample> = (0..64)
            .map(|k| {
                let t = k as f64 * 0.1;
                (t, 0.2 + 0.5 * (w * t + 0.3).cos(), 0.01)
            })
            .collect();
        let f = fit_frequency(&s, w * 1.05, 0.2).unwrap();
        assert!((f.angular_frequency / w - 1.0).abs() < 1e-8, "{}", f.angular_frequency / w);
    }

    #[test]
    fn sideband_staircase() {
        let mk = |phase: f64| CosineFit {
            offset: 1.0,
            amplitude: 0.5,
            phase,
            angular_frequency: 1.0,
            residual_rms: 0.0,
            chi2: 0.0,
            sigma_offset: 0.0,
            sigma_amplitude: 0.0,
            sigma_phase: 0.01,
        };
        let fits = [(23, mk(-0.8 - 0.2)), (19, mk(-0.2)), (21, mk(-0.4 - 0.2))];
        let r = sideband_chirp(&fits).unwrap();
        assert_eq!(r.iter().map(|s| s.order).collect::<Vec<_>>(), vec![19, 21, 23]);
        assert!((r[1].relative_chirp - 0.4).abs() < 1e-12);
        assert!((r[2].relative_chirp - 0.8).abs() < 1e-12);
        assert_eq!(sideband_chirp(&fits[..1]), Err(FitError::InsufficientBands(1)));
    }
}

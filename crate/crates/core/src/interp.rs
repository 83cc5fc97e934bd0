//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, String> {
        if x.len() != y.len() {
            return Err(format!("{} abscissae but {} values", x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err("need at least two points".into());
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err("non-finite entry".into());
        }
        if let Some(w) = x.windows(2).find(|w| w[1] <= w[0]) {
            return Err(format!("grid not strictly increasing at {}", w[1]));
        }
        let slopes = monotone_slopes(&x, &y);
        Ok(Self { x, y, slopes })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Index k with x in [x_k, x_{k+1}].
    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2)
    }

    pub fn eval_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let k = self.interval(x);
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        if x == x0 {
            return self.y[k];
        }
        if x == x1 {
            return self.y[k + 1];
        }
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn spacing_at(&self, x: f64) -> f64 {
        let k = self.interval(x.clamp(self.x_min(), self.x_max()));
        self.x[k + 1] - self.x[k]
    }
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else if a == b {
            d[k] = a;
        } else {
            // weighted harmonic mean keeps the cubic monotone on uneven grids
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if m0 == 0.0 || d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn two_points_is_linear() {
        let c = MonotoneCubic::new(vec![1.0, 3.0], vec![2.0, 6.0]).unwrap();
        assert_eq!(c.eval_clamped(2.0), 4.0);
        assert_eq!(c.eval_clamped(10.0), 6.0);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x: Vec<f64> = vec![0.0, 0.1, 0.5, 0.6, 2.0, 2.1, 5.0];
        let y: Vec<f64> = vec![0.0, 0.01, 3.0, 3.0, 3.1, 8.0, 8.2];
        let c = MonotoneCubic::new(x, y).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let v = c.eval_clamped(i as f64 * 1e-3);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}

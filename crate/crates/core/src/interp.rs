//! Shape-preserving piecewise-cubic Hermite interpolation (PCHIP).
//!
//! Slopes follow Fritsch-Carlson with the Brodlie weighted harmonic mean, so
//! monotone data produce a monotone interpolant with no overshoot.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// Builds the interpolant. `x` must be strictly increasing with at least
    /// two knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "knot count mismatch: {} abscissae, {} ordinates",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidParameter(
                "interpolation needs at least two knots".into(),
            ));
        }
        if let Some(w) = x.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "knots not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let slopes = pchip_slopes(&x, &y);
        Ok(Self { x, y, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Evaluates the interpolant; `None` outside the knot range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = self.interval(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        if s == 0.0 {
            return Some(self.y[i]);
        }
        if s == 1.0 {
            return Some(self.y[i + 1]);
        }
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(
            h00 * self.y[i]
                + h10 * h * self.slopes[i]
                + h01 * self.y[i + 1]
                + h11 * h * self.slopes[i + 1],
        )
    }

    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i.max(1) - 1).min(n - 2),
        }
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Non-centred three-point estimate, clipped to preserve shape.
fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
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
    use proptest::prelude::*;

    #[test]
    fn reproduces_knots() {
        let p = Pchip::new(vec![0.0, 1.0, 2.5, 4.0], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        for (x, y) in p.knots().iter().zip(p.values()) {
            assert_eq!(p.eval(*x).unwrap(), *y);
        }
    }

    #[test]
    fn two_knots_are_linear() {
        let p = Pchip::new(vec![1.0, 3.0], vec![2.0, 6.0]).unwrap();
        assert!((p.eval(2.0).unwrap() - 4.0).abs() < 1e-15);
        assert!((p.eval(1.5).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_is_none() {
        let p = Pchip::new(vec![1.0, 3.0], vec![2.0, 6.0]).unwrap();
        assert!(p.eval(0.999).is_none());
        assert!(p.eval(3.001).is_none());
        assert!(p.eval(f64::NAN).is_none());
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(Pchip::new(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn exact_for_linear_data() {
        let x: Vec<f64> = (0..7).map(|i| (i as f64).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let p = Pchip::new(x, y).unwrap();
        for i in 0..100 {
            let t = 12.0 * i as f64 / 99.0;
            if let Some(v) = p.eval(t) {
                assert!((v - (3.0 - 0.5 * t)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_data_give_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..2.0, 0.0f64..5.0), 3..12),
            probes in proptest::collection::vec(0.0f64..1.0, 20),
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let p = Pchip::new(x.clone(), y.clone()).unwrap();
            let (lo, hi) = p.domain();
            let mut ts: Vec<f64> = probes.iter().map(|u| lo + u * (hi - lo)).collect();
            ts.sort_by(f64::total_cmp);
            let vals: Vec<f64> = ts.iter().map(|t| p.eval(*t).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            // No overshoot: each value stays inside its bracketing knots.
            for (t, v) in ts.iter().zip(&vals) {
                let i = x.partition_point(|k| k <= t).clamp(1, x.len() - 1);
                let (a, b) = (y[i - 1].min(y[i]), y[i - 1].max(y[i]));
                prop_assert!(*v >= a - 1e-12 && *v <= b + 1e-12);
            }
        }
    }
}

//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidTable(format!(
                "{} knots but {} values",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite entry".into()));
        }
        if x[0] != 0.0 || *x.last().unwrap() != 1.0 {
            return Err(Error::InvalidTable("knots must start at 0 and end at 1".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("knots must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&x, &y);
        Ok(Self { x, y, slopes })
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.x
    }

    pub(crate) fn scaled(&self, k: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * k).collect(),
            slopes: self.slopes.iter().map(|v| v * k).collect(),
        }
    }

    /// Interval index; a knot belongs to the interval on its left (except x = 0).
    fn interval(&self, u: f64, right: bool) -> usize {
        let last = self.x.len() - 2;
        let k = if right {
            self.x.partition_point(|&xk| xk <= u)
        } else {
            self.x.partition_point(|&xk| xk < u)
        };
        k.saturating_sub(1).min(last)
    }

    fn local(&self, u: f64, right: bool) -> (usize, f64, f64) {
        let k = self.interval(u, right);
        let h = self.x[k + 1] - self.x[k];
        (k, h, (u - self.x[k]) / h)
    }

    pub(crate) fn value(&self, u: f64) -> f64 {
        let (k, h, t) = self.local(u, false);
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.y[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    pub(crate) fn d1(&self, u: f64) -> f64 {
        let (k, h, t) = self.local(u, false);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * (self.y[k] - self.y[k + 1])) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[k]
            + (3.0 * t2 - 2.0 * t) * self.slopes[k + 1]
    }

    pub(crate) fn d2(&self, u: f64, right: bool) -> f64 {
        let (k, h, t) = self.local(u, right);
        ((12.0 * t - 6.0) * (self.y[k] - self.y[k + 1])) / (h * h)
            + ((6.0 * t - 4.0) * self.slopes[k] + (6.0 * t - 2.0) * self.slopes[k + 1]) / h
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Non-centered three-point estimate, clipped to preserve shape.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

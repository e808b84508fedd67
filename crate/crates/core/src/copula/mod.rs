//! The copula `D_θ(u, v) = uv / (1 − θ f(u) g(v))`.
//!
//! Two independent validity oracles live here: [`check_validity`] tests the
//! density inequality in numerator form using the analytic derivatives, and
//! [`check_rectangle`] tests rectangle masses using copula values only.

mod quadrature;
mod sampling;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::inequality5;
use crate::conditions::{Condition, ConditionResult, Witness};
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorSpec, Sample, Side};
use crate::scan::{Goal, SquareGrid};
use crate::settings::ScanSettings;

pub use quadrature::{gauss_legendre, integrate_square, QuadratureEstimate};
pub use sampling::{empirical_sup_distance, sample, SampleBatch};

/// Seed of the random rectangles drawn by [`check_rectangle`].
pub const DEFAULT_RECTANGLE_SEED: u64 = 0x5EED_0001;
/// Number of random rectangles added to the adjacent-cell scan.
pub const RANDOM_RECTANGLES: usize = 10_000;

/// JSON model description: `{"f":{…},"g":{…},"theta":-30.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub f: GeneratorSpec,
    pub g: GeneratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    pub f: Generator,
    pub g: Generator,
    pub theta: f64,
}

impl CopulaModel {
    pub fn new(f: Generator, g: Generator, theta: f64) -> Self {
        Self { f, g, theta }
    }

    /// Builds the model and checks `1 − θ f g > 0` at every interior grid point.
    pub fn validated(f: Generator, g: Generator, theta: f64, s: &ScanSettings) -> Result<Self> {
        let m = Self::new(f, g, theta);
        let grid = SquareGrid::new(&m.f, &m.g, s);
        let e = grid.grid_extremum_excluding(
            Goal::Min,
            |a, b| 1.0 - theta * a.value * b.value,
            |u, v| u * v == 0.0,
        );
        if e.value <= 0.0 {
            return Err(Error::NonPositiveDenominator {
                u: e.u,
                v: e.v,
                denominator: e.value,
            });
        }
        Ok(m)
    }

    pub fn from_spec(spec: &ModelSpec, theta: f64) -> Result<Self> {
        Ok(Self::new(
            Generator::from_spec(&spec.f)?,
            Generator::from_spec(&spec.g)?,
            theta,
        ))
    }

    fn denominator(&self, fu: &Sample, gv: &Sample) -> Result<f64> {
        let den = 1.0 - self.theta * fu.value * gv.value;
        if den > 0.0 {
            Ok(den)
        } else {
            Err(Error::NonPositiveDenominator {
                u: fu.x,
                v: gv.x,
                denominator: den,
            })
        }
    }

    fn samples(&self, u: f64, v: f64) -> Result<(Sample, Sample)> {
        for x in [u, v] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::OutOfUnitInterval(x));
            }
        }
        Ok((self.f.sample(u, Side::Default), self.g.sample(v, Side::Default)))
    }

    pub fn value(&self, u: f64, v: f64) -> Result<f64> {
        let (fu, gv) = self.samples(u, v)?;
        self.value_at(&fu, &gv)
    }

    pub(crate) fn value_at(&self, fu: &Sample, gv: &Sample) -> Result<f64> {
        let uv = fu.x * gv.x;
        if uv == 0.0 {
            return Ok(0.0);
        }
        Ok(uv / self.denominator(fu, gv)?)
    }

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        let (fu, gv) = self.samples(u, v)?;
        self.density_at(&fu, &gv)
    }

    pub(crate) fn density_at(&self, fu: &Sample, gv: &Sample) -> Result<f64> {
        let den = self.denominator(fu, gv)?;
        Ok(inequality5(self.theta, fu, gv) / (den * den))
    }

    /// ∂D/∂u = v(1 − θ f g + θ u f′ g) / (1 − θ f g)².
    pub fn partial_u(&self, u: f64, v: f64) -> Result<f64> {
        let (fu, gv) = self.samples(u, v)?;
        self.partial_u_at(&fu, &gv)
    }

    pub(crate) fn partial_u_at(&self, fu: &Sample, gv: &Sample) -> Result<f64> {
        let den = self.denominator(fu, gv)?;
        Ok(gv.x * (den + self.theta * fu.x * fu.d1 * gv.value) / (den * den))
    }
}

pub fn copula_value(m: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    m.value(u, v)
}

pub fn density(m: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    m.density(u, v)
}

pub fn partial_u(m: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    m.partial_u(u, v)
}

fn value_or_nan(m: &CopulaModel, u: f64, v: f64) -> f64 {
    m.value(u, v).unwrap_or(f64::NAN)
}

fn mass(c: [f64; 4]) -> f64 {
    // c = [C(u2,v2), C(u2,v1), C(u1,v2), C(u1,v1)]
    let m = c[0] - c[1] - c[2] + c[3];
    if m.is_nan() {
        f64::NEG_INFINITY
    } else {
        m
    }
}

/// Minimum rectangle mass over adjacent grid cells plus random rectangles.
pub fn check_rectangle(m: &CopulaModel, s: &ScanSettings) -> ConditionResult {
    check_rectangle_seeded(m, s, DEFAULT_RECTANGLE_SEED)
}

pub fn check_rectangle_seeded(m: &CopulaModel, s: &ScanSettings, seed: u64) -> ConditionResult {
    let n = s.grid_n;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let gs: Vec<Sample> = xs.iter().map(|&v| m.g.sample(v, Side::Default)).collect();
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&u| {
            let fu = m.f.sample(u, Side::Default);
            gs.iter()
                .map(|gv| m.value_at(&fu, gv).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();

    let (mut worst, mut at) = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, (0.0, 0.0));
            for j in 1..n {
                let q = mass([rows[i][j], rows[i][j - 1], rows[i - 1][j], rows[i - 1][j - 1]]);
                if q < best.0 {
                    best = (q, (0.5 * (xs[i - 1] + xs[i]), 0.5 * (xs[j - 1] + xs[j])));
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, (0.0, 0.0)), |a, b| if b.0 < a.0 { b } else { a });

    // random rectangles at least one cell wide in each direction
    let h = 1.0 / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut side = || {
        let lo: f64 = rng.gen_range(0.0..1.0 - h);
        let hi: f64 = rng.gen_range(lo + h..=1.0);
        (lo, hi)
    };
    for _ in 0..RANDOM_RECTANGLES {
        let (u1, u2) = side();
        let (v1, v2) = side();
        let q = mass([
            value_or_nan(m, u2, v2),
            value_or_nan(m, u2, v1),
            value_or_nan(m, u1, v2),
            value_or_nan(m, u1, v1),
        ]);
        if q < worst {
            worst = q;
            at = (0.5 * (u1 + u2), 0.5 * (v1 + v2));
        }
    }
    let mut r = ConditionResult::from_margin(Condition::Rectangle, worst, Some(Witness::pair(at.0, at.1)), s);
    r.seed = Some(seed);
    r
}

/// Maximum deviation from `D(u,0) = D(0,v) = 0`, `D(u,1) = u`, `D(1,v) = v` on the grid.
pub fn boundary_error(m: &CopulaModel, n: usize) -> (f64, (f64, f64)) {
    let mut worst = (0.0, (0.0, 0.0));
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let checks = [
            ((t, 0.0), 0.0),
            ((0.0, t), 0.0),
            ((t, 1.0), t),
            ((1.0, t), t),
        ];
        for ((u, v), want) in checks {
            let err = match m.value(u, v) {
                Ok(c) => (c - want).abs(),
                Err(_) => f64::INFINITY,
            };
            if err > worst.0 {
                worst = (err, (u, v));
            }
        }
    }
    worst
}

/// Density inequality over the grid, plus denominator positivity, the range
/// `0 ≤ D ≤ 1` and the boundary identities.
pub fn check_validity(m: &CopulaModel, s: &ScanSettings) -> ConditionResult {
    let grid = SquareGrid::new(&m.f, &m.g, s);
    let theta = m.theta;
    let ineq = grid.extremum(Goal::Min, |a, b| inequality5(theta, a, b));
    let interior = |u: f64, v: f64| u * v == 0.0;
    let den = grid.grid_extremum_excluding(Goal::Min, |a, b| 1.0 - theta * a.value * b.value, interior);
    let d_value = |a: &Sample, b: &Sample| m.value_at(a, b).unwrap_or(f64::NAN);
    let d_min = grid.grid_extremum(Goal::Min, d_value);
    let d_max = grid.grid_extremum(Goal::Max, d_value);
    let (b_err, b_at) = boundary_error(m, s.grid_n);

    let checks = [
        (ineq.value, (ineq.u, ineq.v), (ineq.side_u, ineq.side_v)),
        (den.value, (den.u, den.v), (den.side_u, den.side_v)),
        (d_min.value, (d_min.u, d_min.v), (d_min.side_u, d_min.side_v)),
        (1.0 - d_max.value, (d_max.u, d_max.v), (d_max.side_u, d_max.side_v)),
        (-b_err, b_at, (Side::Default, Side::Default)),
    ];
    let tol = s.tol_condition;
    let failed = checks.iter().find(|c| !(c.0 >= -tol));
    let (margin, at, sides) = failed.copied().unwrap_or(checks[0]);
    let mut r = ConditionResult::from_margin(Condition::Validity, margin, Some(Witness::pair(at.0, at.1)), s);
    if sides != (Side::Default, Side::Default) {
        r.witness_sides = Some([sides.0, sides.1]);
    }
    r
}

/// Spearman's ρ = 12∬D − 3 by graded tensor Gauss–Legendre quadrature.
pub fn spearman_rho(m: &CopulaModel, s: &ScanSettings) -> Result<QuadratureEstimate> {
    let v = check_validity(m, s);
    if !v.holds {
        return Err(Error::InvalidModel(format!(
            "density inequality margin {:e} at {:?}",
            v.margin, v.witness
        )));
    }
    let est = integrate_square(&m.f, &m.g, |a, b| m.value_at(a, b), 1e-8 / 12.0)?;
    Ok(QuadratureEstimate {
        value: 12.0 * est.value - 3.0,
        error: 12.0 * est.error,
    })
}

/// ∬ density over the unit square.
pub fn density_mass(m: &CopulaModel, target: f64) -> Result<QuadratureEstimate> {
    integrate_square(&m.f, &m.g, |a, b| m.density_at(a, b), target)
}

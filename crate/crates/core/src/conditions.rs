//! Admissibility conditions on a generator pair.
//!
//! * B1: `f(0) = g(0) = 1`, `f(1) = g(1) = 0`
//! * B2: `f`, `g` decreasing (flat stretches are reported through `strict`)
//! * B3: `f`, `g` concave
//! * B4: `H = f·(1 − v g′) + g·(1 − u f′) ≤ max{a, b} + 1` with `a = −f′(1)`, `b = −g′(1)`
//! * A3: `f g ≤ 1 − uv`
//!
//! Every check returns a [`ConditionResult`] with a signed margin (positive
//! means satisfied) and the point where the margin is attained.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Generator, Sample, Side};
use crate::scan::{line_extremum, Goal, SquareGrid};
use crate::settings::ScanSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    B1,
    B2,
    B3,
    B4,
    A3,
    Remark4,
    Rectangle,
    Validity,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "B1" => Condition::B1,
            "B2" => Condition::B2,
            "B3" => Condition::B3,
            "B4" => Condition::B4,
            "A3" => Condition::A3,
            "REMARK4" => Condition::Remark4,
            other => return Err(format!("unknown condition `{other}`")),
        })
    }
}

/// A point `(u)` or `(u, v)`; serialized as a JSON array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Point([f64; 1]),
    Pair([f64; 2]),
}

impl Witness {
    pub fn point(u: f64) -> Self {
        Witness::Point([u])
    }

    pub fn pair(u: f64, v: f64) -> Self {
        Witness::Pair([u, v])
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            Witness::Point(p) => p,
            Witness::Pair(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub holds: bool,
    pub margin: f64,
    pub witness: Option<Witness>,
    /// One-sided derivative sheets at the witness when it sits on a kink.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_sides: Option<[Side; 2]>,
    /// B2 only: `false` when the derivative vanishes on a stretch of grid points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    /// Seed of any random probes, for replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub settings_used: ScanSettings,
}

impl ConditionResult {
    pub(crate) fn from_margin(
        condition: Condition,
        margin: f64,
        witness: Option<Witness>,
        settings: &ScanSettings,
    ) -> Self {
        Self {
            condition,
            holds: margin >= -settings.tol_condition,
            margin,
            witness,
            witness_sides: None,
            strict: None,
            seed: None,
            settings_used: *settings,
        }
    }

    fn with_sides(mut self, su: Side, sv: Side) -> Self {
        if su != Side::Default || sv != Side::Default {
            self.witness_sides = Some([su, sv]);
        }
        self
    }

    /// Conjunction of per-generator results: smallest margin wins.
    fn both(a: Self, b: Self) -> Self {
        let strict = match (a.strict, b.strict) {
            (Some(x), Some(y)) => Some(x && y),
            (x, y) => x.or(y),
        };
        let mut worst = if b.margin < a.margin { b } else { a };
        worst.strict = strict;
        worst
    }
}

pub fn check_b1(f: &Generator, s: &ScanSettings) -> ConditionResult {
    let at0 = (f.value(0.0) - 1.0).abs();
    let at1 = f.value(1.0).abs();
    let (dev, u) = if at1 > at0 { (at1, 1.0) } else { (at0, 0.0) };
    ConditionResult::from_margin(Condition::B1, -dev, Some(Witness::point(u)), s)
}

pub fn check_b2(f: &Generator, s: &ScanSettings) -> ConditionResult {
    let (max_d1, u, side) = line_extremum(f, s, Goal::Max, |p| p.d1);
    let flat = |p: &Sample| p.d1 >= -s.tol_condition;
    let grid: Vec<Sample> = (0..s.grid_n)
        .map(|i| f.sample(i as f64 / (s.grid_n - 1) as f64, Side::Default))
        .collect();
    let strict = !grid.windows(2).any(|w| flat(&w[0]) && flat(&w[1]));
    let mut r = ConditionResult::from_margin(Condition::B2, -max_d1, Some(Witness::point(u)), s)
        .with_sides(side, Side::Default);
    r.strict = Some(strict);
    r
}

pub fn check_b3(f: &Generator, s: &ScanSettings) -> ConditionResult {
    if f.has_d2() {
        let (max_d2, u, side) = line_extremum(f, s, Goal::Max, |p| {
            f.d2(p.x, p.side).unwrap_or(f64::NAN)
        });
        return ConditionResult::from_margin(Condition::B3, -max_d2, Some(Witness::point(u)), s)
            .with_sides(side, Side::Default);
    }
    // Midpoint concavity over every pair of grid points.
    let n = s.grid_n;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect();
    let mut worst = (f64::INFINITY, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let mid = 0.5 * (xs[i] + xs[j]);
            let defect = f.value(mid) - 0.5 * (ys[i] + ys[j]);
            if defect < worst.0 {
                worst = (defect, mid);
            }
        }
    }
    ConditionResult::from_margin(Condition::B3, worst.0, Some(Witness::point(worst.1)), s)
}

pub fn check_b1_pair(f: &Generator, g: &Generator, s: &ScanSettings) -> ConditionResult {
    ConditionResult::both(check_b1(f, s), check_b1(g, s))
}

pub fn check_b2_pair(f: &Generator, g: &Generator, s: &ScanSettings) -> ConditionResult {
    ConditionResult::both(check_b2(f, s), check_b2(g, s))
}

pub fn check_b3_pair(f: &Generator, g: &Generator, s: &ScanSettings) -> ConditionResult {
    ConditionResult::both(check_b3(f, s), check_b3(g, s))
}

/// `f(u)·(1 − v g′(v)) + g(v)·(1 − u f′(u))` from pre-evaluated samples.
pub fn h_field(fu: &Sample, gv: &Sample) -> f64 {
    fu.value * (1.0 - gv.x * gv.d1) + gv.value * (1.0 - fu.x * fu.d1)
}

pub fn eval_h(f: &Generator, g: &Generator, u: f64, v: f64) -> f64 {
    eval_h_sided(f, g, u, v, Side::Default, Side::Default)
}

pub fn eval_h_sided(f: &Generator, g: &Generator, u: f64, v: f64, su: Side, sv: Side) -> f64 {
    h_field(&f.sample(u, su), &g.sample(v, sv))
}

/// Negated endpoint slopes `a = −f′(1)`, `b = −g′(1)`.
pub fn endpoint_slopes(f: &Generator, g: &Generator) -> (f64, f64) {
    (-f.d1(1.0, Side::Default), -g.d1(1.0, Side::Default))
}

pub fn check_b4(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<ConditionResult> {
    let b1 = check_b1_pair(f, g, s);
    if !b1.holds {
        return Err(Error::PreconditionFailed {
            condition: "B4".into(),
            reason: format!("B1 fails with margin {:e}, so a and b are undefined", b1.margin),
        });
    }
    let (a, b) = endpoint_slopes(f, g);
    let bound = a.max(b) + 1.0;
    let grid = SquareGrid::new(f, g, s);
    let e = grid.extremum(Goal::Max, h_field);
    Ok(
        ConditionResult::from_margin(Condition::B4, bound - e.value, Some(Witness::pair(e.u, e.v)), s)
            .with_sides(e.side_u, e.side_v),
    )
}

/// `(1 − uv) − f g` in complement form, exact near the origin.
fn a3_slack(fu: &Sample, gv: &Sample) -> f64 {
    let (cf, cg) = (fu.complement, gv.complement);
    cf + cg - cf * cg - fu.x * gv.x
}

// Slack relative to the size of its terms where those are small; near the
// origin both sides of A3 tend to 1 and only the relative slack has a sign
// that survives rounding.
fn a3_scaled_slack(fu: &Sample, gv: &Sample) -> f64 {
    let slack = a3_slack(fu, gv);
    let scale = fu.complement.abs() + gv.complement.abs() + fu.x * gv.x;
    if scale == 0.0 {
        slack
    } else {
        slack / scale.min(1.0)
    }
}

fn is_top_corner(u: f64, v: f64) -> bool {
    u == 1.0 && v == 1.0
}

/// Rays into the origin at dyadic radii down to 2⁻⁴⁸⁰.
fn origin_probes() -> impl Iterator<Item = (f64, f64)> {
    const DIRS: [(f64, f64); 5] = [(1.0, 1.0), (1.0, 0.5), (0.5, 1.0), (1.0, 0.25), (0.25, 1.0)];
    (1..=480).flat_map(|k| {
        let t = 0.5f64.powi(k);
        DIRS.iter().map(move |&(a, b)| (a * t, b * t))
    })
}

pub fn check_a3(f: &Generator, g: &Generator, s: &ScanSettings) -> ConditionResult {
    let grid = SquareGrid::new(f, g, s);
    let mut e = grid.extremum_excluding(Goal::Min, a3_scaled_slack, is_top_corner);
    for (u, v) in origin_probes() {
        let (fu, gv) = (f.sample(u, Side::Default), g.sample(v, Side::Default));
        let val = a3_scaled_slack(&fu, &gv);
        if val < e.value {
            e.value = val;
            e.u = u;
            e.v = v;
            e.side_u = Side::Default;
            e.side_v = Side::Default;
        }
    }
    ConditionResult::from_margin(Condition::A3, e.value, Some(Witness::pair(e.u, e.v)), s)
        .with_sides(e.side_u, e.side_v)
}

/// `f g ≤ α₂ (1 − uv)` over the square minus the corner (1, 1).
pub fn check_remark4(f: &Generator, g: &Generator, alpha2: f64, s: &ScanSettings) -> ConditionResult {
    let grid = SquareGrid::new(f, g, s);
    let slack = |fu: &Sample, gv: &Sample| {
        (alpha2 - 1.0) * (1.0 - fu.x * gv.x) + a3_slack(fu, gv)
    };
    let e = grid.extremum_excluding(Goal::Min, slack, is_top_corner);
    ConditionResult::from_margin(Condition::Remark4, e.value, Some(Witness::pair(e.u, e.v)), s)
        .with_sides(e.side_u, e.side_v)
}

/// Evaluates one of B1–B4 or A3 on a pair.
pub fn check_pair(condition: Condition, f: &Generator, g: &Generator, s: &ScanSettings) -> Result<ConditionResult> {
    Ok(match condition {
        Condition::B1 => check_b1_pair(f, g, s),
        Condition::B2 => check_b2_pair(f, g, s),
        Condition::B3 => check_b3_pair(f, g, s),
        Condition::B4 => check_b4(f, g, s)?,
        Condition::A3 => check_a3(f, g, s),
        other => {
            return Err(Error::PreconditionFailed {
                condition: other.to_string(),
                reason: "not a pair condition; use the copula checks".into(),
            })
        }
    })
}

/// Verdicts for B1, B2, A3, B3, B4 of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConditions {
    pub b1: ConditionResult,
    pub b2: ConditionResult,
    pub a3: ConditionResult,
    pub b3: ConditionResult,
    /// `None` when B1 fails and B4 is undefined.
    pub b4: Option<ConditionResult>,
}

impl PairConditions {
    pub fn evaluate(f: &Generator, g: &Generator, s: &ScanSettings) -> Self {
        Self {
            b1: check_b1_pair(f, g, s),
            b2: check_b2_pair(f, g, s),
            a3: check_a3(f, g, s),
            b3: check_b3_pair(f, g, s),
            b4: check_b4(f, g, s).ok(),
        }
    }

    pub fn b1_to_b3(&self) -> bool {
        self.b1.holds && self.b2.holds && self.b3.holds
    }

    pub fn b1_to_b4(&self) -> bool {
        self.b1_to_b3() && self.b4.as_ref().is_some_and(|r| r.holds)
    }

    /// Names of the conditions among B1–B4 that fail.
    pub fn failed_b(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in [&self.b1, &self.b2, &self.b3] {
            if !r.holds {
                out.push(r.condition.to_string());
            }
        }
        match &self.b4 {
            Some(r) if r.holds => {}
            _ => out.push("B4".into()),
        }
        out
    }
}

/// Width at which [`find_threshold`] stops bisecting.
pub const THRESHOLD_WIDTH: f64 = 1e-3;

/// Parameter value where `condition` switches from holding (at `lo`) to
/// failing (at `hi`), bracketed to [`THRESHOLD_WIDTH`].
pub fn find_threshold<M>(
    make: M,
    condition: Condition,
    lo: f64,
    hi: f64,
    s: &ScanSettings,
) -> Result<f64>
where
    M: Fn(f64) -> Result<(Generator, Generator)>,
{
    let holds = |p: f64| -> Result<bool> {
        let (f, g) = make(p)?;
        Ok(check_pair(condition, &f, &g, s)?.holds)
    };
    let (at_lo, at_hi) = (holds(lo)?, holds(hi)?);
    if !at_lo || at_hi {
        return Err(Error::NoSignChange {
            lo,
            hi,
            detail: format!("{condition} holds at lo: {at_lo}, holds at hi: {at_hi}"),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while (b - a).abs() > THRESHOLD_WIDTH {
        let mid = 0.5 * (a + b);
        if holds(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

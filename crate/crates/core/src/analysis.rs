//! The dependence field `G = (f − u f′)(g − v g′) − 2uv f′ g′`, its extrema
//! α₁ = min G and α₂ = max G, and the θ ranges they induce.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::conditions::{endpoint_slopes, PairConditions};
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::generators::{Generator, Sample, Side};
use crate::scan::{line_extremum, Extremum, Goal, SquareGrid};
use crate::settings::ScanSettings;

/// Growth factor of the geometric θ scan.
pub const SCAN_FACTOR: f64 = 1.05;
/// The scan gives up once |θ| exceeds this multiple of its starting point.
pub const SCAN_FLOOR_FACTOR: f64 = 1e6;
/// Final bracket width of the feasibility bisection.
pub const FEASIBILITY_WIDTH: f64 = 1e-4;
/// Extra scan steps past the first infeasible θ that must stay infeasible.
pub const REENTRY_STEPS: usize = 3;

pub fn g_field(fu: &Sample, gv: &Sample) -> f64 {
    fu.tangent_intercept() * gv.tangent_intercept() - 2.0 * fu.x * gv.x * fu.d1 * gv.d1
}

pub fn eval_g(f: &Generator, g: &Generator, u: f64, v: f64, side: Side) -> f64 {
    eval_g_sided(f, g, u, v, side, side)
}

pub fn eval_g_sided(f: &Generator, g: &Generator, u: f64, v: f64, su: Side, sv: Side) -> f64 {
    g_field(&f.sample(u, su), &g.sample(v, sv))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    /// −f′(1)
    pub a: f64,
    /// −g′(1)
    pub b: f64,
    /// max of f − u f′
    #[serde(rename = "M")]
    pub m: f64,
    /// max of g − v g′
    #[serde(rename = "N")]
    pub n: f64,
    pub boundary_max_g: f64,
    pub boundary_min_g: f64,
}

/// Extremes of G along the four edges, using the exact edge restrictions
/// (e.g. `G(u, 1) = (f − u f′)(g(1) − g′(1)) − 2u f′ g′(1)`).
pub fn boundary_stats(f: &Generator, g: &Generator, s: &ScanSettings) -> BoundaryStats {
    let (a, b) = endpoint_slopes(f, g);
    let (m, _, _) = line_extremum(f, s, Goal::Max, Sample::tangent_intercept);
    let (n, _, _) = line_extremum(g, s, Goal::Max, Sample::tangent_intercept);

    let g0 = g.sample(0.0, Side::Default);
    let g1 = g.sample(1.0, Side::Default);
    let f0 = f.sample(0.0, Side::Default);
    let f1 = f.sample(1.0, Side::Default);
    let edge_u = |fixed: Sample| move |p: &Sample| g_field(p, &fixed);
    let edge_v = |fixed: Sample| move |p: &Sample| g_field(&fixed, p);

    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for goal in [Goal::Max, Goal::Min] {
        let vals = [
            line_extremum(f, s, goal, edge_u(g0)).0,
            line_extremum(f, s, goal, edge_u(g1)).0,
            line_extremum(g, s, goal, edge_v(f0)).0,
            line_extremum(g, s, goal, edge_v(f1)).0,
        ];
        for v in vals {
            match goal {
                Goal::Max => hi = hi.max(v),
                Goal::Min => lo = lo.min(v),
            }
        }
    }
    BoundaryStats {
        a,
        b,
        m,
        n,
        boundary_max_g: hi,
        boundary_min_g: lo,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaResult {
    pub alpha1: f64,
    pub alpha2: f64,
    pub argmin: (f64, f64),
    pub argmax: (f64, f64),
    pub argmin_sides: (Side, Side),
    pub argmax_sides: (Side, Side),
    pub boundary: BoundaryStats,
    pub interior_max_exceeds_boundary: bool,
}

pub fn extremize_g(f: &Generator, g: &Generator, s: &ScanSettings) -> ExtremaResult {
    let grid = SquareGrid::new(f, g, s);
    let lo = grid.extremum(Goal::Min, g_field);
    let hi = grid.extremum(Goal::Max, g_field);
    let boundary = boundary_stats(f, g, s);
    ExtremaResult {
        alpha1: lo.value,
        alpha2: hi.value,
        argmin: (lo.u, lo.v),
        argmax: (hi.u, hi.v),
        argmin_sides: (lo.side_u, lo.side_v),
        argmax_sides: (hi.side_u, hi.side_v),
        boundary,
        interior_max_exceeds_boundary: hi.value > boundary.boundary_max_g + s.tol_extremum,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalSource {
    Numeric,
    ClosedForm,
}

/// `[lo, hi]`; `lo = −∞` when G never goes negative. Non-finite ends serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    pub lo: f64,
    pub hi: f64,
    pub source: IntervalSource,
}

impl ThetaInterval {
    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    pub fn from_extrema(alpha1: f64, alpha2: f64) -> Result<Self> {
        if alpha2 <= 0.0 {
            return Err(Error::DegenerateField(format!(
                "max G = {alpha2} is not positive, so 1/alpha2 has no meaning"
            )));
        }
        let lo = if alpha1 < 0.0 { 1.0 / alpha1 } else { f64::NEG_INFINITY };
        Ok(Self {
            lo,
            hi: 1.0 / alpha2,
            source: IntervalSource::Numeric,
        })
    }
}

pub fn theta_interval(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<ThetaInterval> {
    let e = extremize_g(f, g, s);
    ThetaInterval::from_extrema(e.alpha1, e.alpha2)
}

/// `[−1/(ab), 1/max{a, b}]`, only for pairs that pass B1–B4.
pub fn closed_form_interval(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<ThetaInterval> {
    let conditions = PairConditions::evaluate(f, g, s);
    if !conditions.b1_to_b4() {
        return Err(Error::ConditionsNotVerified(conditions.failed_b()));
    }
    let (a, b) = endpoint_slopes(f, g);
    Ok(ThetaInterval {
        lo: -1.0 / (a * b),
        hi: 1.0 / a.max(b),
        source: IntervalSource::ClosedForm,
    })
}

/// Left side of the density inequality in numerator form,
/// `1 − θ[(f − u f′)(g − v g′) − 2 D_θ f′ g′]`, with `D_θ = 0` on the axes.
pub fn inequality5(theta: f64, fu: &Sample, gv: &Sample) -> f64 {
    let uv = fu.x * gv.x;
    let d = if uv == 0.0 {
        0.0
    } else {
        uv / (1.0 - theta * fu.value * gv.value)
    };
    1.0 - theta * (fu.tangent_intercept() * gv.tangent_intercept() - 2.0 * d * fu.d1 * gv.d1)
}

/// Outcome of testing one θ against the inequality over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityProbe {
    pub theta: f64,
    pub feasible: bool,
    /// Minimum of the inequality's left side.
    pub min_left_side: f64,
    /// Minimum of `1 − θ f g` over the closed grid.
    pub min_denominator: f64,
    pub witness: (f64, f64),
}

/// Grid and polish evaluation of the inequality for a fixed θ.
pub struct FeasibilityOracle<'a> {
    grid: SquareGrid<'a>,
    fg_range: (f64, f64),
    tol: f64,
}

impl<'a> FeasibilityOracle<'a> {
    pub fn new(f: &'a Generator, g: &'a Generator, s: &ScanSettings) -> Self {
        let grid = SquareGrid::new(f, g, s);
        let prod = |a: &Sample, b: &Sample| a.value * b.value;
        let lo = grid.grid_extremum(Goal::Min, prod).value;
        let hi = grid.grid_extremum(Goal::Max, prod).value;
        Self {
            grid,
            fg_range: (lo, hi),
            tol: s.tol_condition,
        }
    }

    pub fn probe(&self, theta: f64) -> FeasibilityProbe {
        let e: Extremum = self
            .grid
            .extremum(Goal::Min, |a, b| inequality5(theta, a, b));
        let worst_fg = if theta >= 0.0 { self.fg_range.1 } else { self.fg_range.0 };
        let min_denominator = 1.0 - theta * worst_fg;
        FeasibilityProbe {
            theta,
            feasible: e.value >= -self.tol && min_denominator >= -self.tol,
            min_left_side: e.value,
            min_denominator,
            witness: (e.u, e.v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

/// A feasibility search with the probes that bracket its answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySearch {
    /// Extreme feasible θ found.
    pub theta: f64,
    /// Starting point (1/α₁ or 1/α₂).
    pub start: f64,
    /// `[feasible, infeasible]` ends of the final bracket.
    pub bracket: (f64, f64),
    pub probes: Vec<FeasibilityProbe>,
}

fn feasibility_search(f: &Generator, g: &Generator, s: &ScanSettings, dir: Direction) -> Result<FeasibilitySearch> {
    let e = extremize_g(f, g, s);
    let start = match dir {
        Direction::Down => {
            if e.alpha1 >= 0.0 {
                return Err(Error::DegenerateField(format!(
                    "min G = {} is not negative; no lower θ bound to search",
                    e.alpha1
                )));
            }
            1.0 / e.alpha1
        }
        Direction::Up => {
            if e.alpha2 <= 0.0 {
                return Err(Error::DegenerateField(format!(
                    "max G = {} is not positive; no upper θ bound to search",
                    e.alpha2
                )));
            }
            1.0 / e.alpha2
        }
    };
    let oracle = FeasibilityOracle::new(f, g, s);
    let mut probes = Vec::new();
    let mut probe = |theta: f64| {
        let p = oracle.probe(theta);
        probes.push(p);
        p.feasible
    };

    // (feasible, infeasible) bracket
    let (mut good, mut bad) = if probe(start) {
        let floor = SCAN_FLOOR_FACTOR * start.abs();
        let mut prev = start;
        let mut theta = start * SCAN_FACTOR;
        loop {
            if theta.abs() > floor {
                return Err(Error::NoInfeasibleTheta {
                    floor: floor.copysign(start),
                });
            }
            if !probe(theta) {
                break;
            }
            prev = theta;
            theta *= SCAN_FACTOR;
        }
        let mut beyond = theta;
        for _ in 0..REENTRY_STEPS {
            beyond *= SCAN_FACTOR;
            if probe(beyond) {
                return Err(Error::ReentrantFeasibility { theta: beyond });
            }
        }
        (prev, theta)
    } else {
        // θ = 0 is always feasible: the left side is identically 1.
        (0.0, start)
    };

    while (bad - good).abs() > FEASIBILITY_WIDTH {
        let mid = 0.5 * (good + bad);
        if probe(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(FeasibilitySearch {
        theta: good,
        start,
        bracket: (good, bad),
        probes,
    })
}

/// Smallest θ for which the density inequality holds on the grid.
pub fn theta_min_feasible(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<f64> {
    Ok(theta_min_search(f, g, s)?.theta)
}

pub fn theta_min_search(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<FeasibilitySearch> {
    feasibility_search(f, g, s, Direction::Down)
}

/// Largest θ for which the density inequality holds on the grid.
pub fn theta_max_feasible(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<f64> {
    Ok(theta_max_search(f, g, s)?.theta)
}

pub fn theta_max_search(f: &Generator, g: &Generator, s: &ScanSettings) -> Result<FeasibilitySearch> {
    feasibility_search(f, g, s, Direction::Up)
}

/// Writes G on an `n × n` grid as CSV with header `u,v,G`.
pub fn write_g_grid_csv<W: Write>(f: &Generator, g: &Generator, n: usize, mut out: W) -> Result<()> {
    writeln!(out, "u,v,G")?;
    for i in 0..n {
        let u = i as f64 / (n - 1) as f64;
        let fu = f.sample(u, Side::Default);
        for j in 0..n {
            let v = j as f64 / (n - 1) as f64;
            let val = g_field(&fu, &g.sample(v, Side::Default));
            writeln!(out, "{},{},{}", sig12(u), sig12(v), sig12(val))?;
        }
    }
    Ok(())
}

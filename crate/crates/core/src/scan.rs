//! Grid extremization on [0, 1] and [0, 1]².
//!
//! A scan evaluates a field on a uniform grid whose axes also contain every
//! generator kink. At a kink both one-sided sheets are evaluated. The best
//! grid point is then polished by a derivative-free search confined to the
//! surrounding grid cells, and the better of the two values is kept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generators::{Generator, Sample, Side};
use crate::settings::ScanSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Min,
    Max,
}

impl Goal {
    /// Maps a value so that smaller is always better; NaN ranks best so it surfaces.
    fn key(self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::NEG_INFINITY;
        }
        match self {
            Goal::Min => v,
            Goal::Max => -v,
        }
    }

    fn better(self, a: f64, b: f64) -> bool {
        self.key(a) < self.key(b)
    }
}

/// Best value of a scan together with where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub u: f64,
    pub v: f64,
    pub side_u: Side,
    pub side_v: Side,
}

/// Grid coordinates along one axis with the generator pre-sampled at each.
#[derive(Debug, Clone)]
pub struct Axis {
    nodes: Vec<f64>,
    samples: Vec<Vec<Sample>>,
}

impl Axis {
    pub fn new(gen: &Generator, n: usize) -> Self {
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        nodes.extend_from_slice(gen.kinks());
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup();
        let samples = nodes
            .iter()
            .map(|&x| {
                if gen.kinks().contains(&x) {
                    vec![gen.sample(x, Side::Left), gen.sample(x, Side::Right)]
                } else {
                    vec![gen.sample(x, Side::Default)]
                }
            })
            .collect();
        Self { nodes, samples }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Neighbouring nodes of node `i`, clipped to the axis.
    fn cell(&self, i: usize) -> (f64, f64) {
        let lo = self.nodes[i.saturating_sub(1)];
        let hi = self.nodes[(i + 1).min(self.nodes.len() - 1)];
        (lo, hi)
    }

    fn index_of(&self, x: f64) -> usize {
        self.nodes
            .partition_point(|&n| n < x)
            .min(self.nodes.len() - 1)
    }
}

/// Pre-sampled tensor grid for a generator pair.
#[derive(Debug, Clone)]
pub struct SquareGrid<'a> {
    f: &'a Generator,
    g: &'a Generator,
    u: Axis,
    v: Axis,
    refine_iters: usize,
}

impl<'a> SquareGrid<'a> {
    pub fn new(f: &'a Generator, g: &'a Generator, settings: &ScanSettings) -> Self {
        Self {
            f,
            g,
            u: Axis::new(f, settings.grid_n),
            v: Axis::new(g, settings.grid_n),
            refine_iters: settings.refine_iters,
        }
    }

    pub fn u_axis(&self) -> &Axis {
        &self.u
    }

    pub fn v_axis(&self) -> &Axis {
        &self.v
    }

    /// Grid pass only.
    pub fn grid_extremum<F>(&self, goal: Goal, field: F) -> Extremum
    where
        F: Fn(&Sample, &Sample) -> f64 + Sync,
    {
        self.grid_extremum_excluding(goal, &field, |_, _| false)
    }

    pub fn grid_extremum_excluding<F, E>(&self, goal: Goal, field: F, exclude: E) -> Extremum
    where
        F: Fn(&Sample, &Sample) -> f64 + Sync,
        E: Fn(f64, f64) -> bool + Sync,
    {
        let vs: Vec<&Sample> = self.v.samples().collect();
        let us: Vec<&Sample> = self.u.samples().collect();
        let init = Extremum {
            value: match goal {
                Goal::Min => f64::INFINITY,
                Goal::Max => f64::NEG_INFINITY,
            },
            u: f64::NAN,
            v: f64::NAN,
            side_u: Side::Default,
            side_v: Side::Default,
        };
        us.par_iter()
            .map(|su| {
                let mut best = init;
                for sv in &vs {
                    if exclude(su.x, sv.x) {
                        continue;
                    }
                    let val = field(su, sv);
                    if goal.better(val, best.value) {
                        best = Extremum {
                            value: val,
                            u: su.x,
                            v: sv.x,
                            side_u: su.side,
                            side_v: sv.side,
                        };
                    }
                }
                best
            })
            .reduce(
                || init,
                |a, b| if goal.better(b.value, a.value) { b } else { a },
            )
    }

    /// Grid pass followed by the cell-confined polish.
    pub fn extremum<F>(&self, goal: Goal, field: F) -> Extremum
    where
        F: Fn(&Sample, &Sample) -> f64 + Sync,
    {
        self.extremum_excluding(goal, field, |_, _| false)
    }

    pub fn extremum_excluding<F, E>(&self, goal: Goal, field: F, exclude: E) -> Extremum
    where
        F: Fn(&Sample, &Sample) -> f64 + Sync,
        E: Fn(f64, f64) -> bool + Sync,
    {
        let coarse = self.grid_extremum_excluding(goal, &field, &exclude);
        if !coarse.value.is_finite() {
            return coarse;
        }
        self.polish(goal, &field, &exclude, coarse)
    }

    fn polish<F, E>(&self, goal: Goal, field: &F, exclude: &E, start: Extremum) -> Extremum
    where
        F: Fn(&Sample, &Sample) -> f64,
        E: Fn(f64, f64) -> bool,
    {
        let (ulo, uhi) = self.u.cell(self.u.index_of(start.u));
        let (vlo, vhi) = self.v.cell(self.v.index_of(start.v));
        let objective = |p: [f64; 2]| {
            let su = self.f.sample(p[0], Side::Default);
            let sv = self.g.sample(p[1], Side::Default);
            goal.key(field(&su, &sv))
        };
        let (p, key) = nelder_mead_box(
            objective,
            [start.u, start.v],
            [ulo, vlo],
            [uhi, vhi],
            self.refine_iters,
        );
        if exclude(p[0], p[1]) || key >= goal.key(start.value) {
            return start;
        }
        Extremum {
            value: field(
                &self.f.sample(p[0], Side::Default),
                &self.g.sample(p[1], Side::Default),
            ),
            u: p[0],
            v: p[1],
            side_u: Side::Default,
            side_v: Side::Default,
        }
    }
}

/// 1-D extremum of `field` over the axis of `gen`, polished by golden section.
pub fn line_extremum<F>(gen: &Generator, settings: &ScanSettings, goal: Goal, field: F) -> (f64, f64, Side)
where
    F: Fn(&Sample) -> f64,
{
    let axis = Axis::new(gen, settings.grid_n);
    let mut best = (
        match goal {
            Goal::Min => f64::INFINITY,
            Goal::Max => f64::NEG_INFINITY,
        },
        f64::NAN,
        Side::Default,
    );
    for s in axis.samples() {
        let val = field(s);
        if goal.better(val, best.0) {
            best = (val, s.x, s.side);
        }
    }
    if !best.0.is_finite() {
        return best;
    }
    let (lo, hi) = axis.cell(axis.index_of(best.1));
    let objective = |x: f64| goal.key(field(&gen.sample(x, Side::Default)));
    let (x, key) = golden_section(objective, lo, hi, settings.refine_iters.max(40));
    if key < goal.key(best.0) {
        best = (field(&gen.sample(x, Side::Default)), x, Side::Default);
    }
    best
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Nelder–Mead minimization in two dimensions with points clamped to a box.
pub(crate) fn nelder_mead_box<F>(
    f: F,
    start: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    iters: usize,
) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> f64,
{
    let clamp = |p: [f64; 2]| [p[0].clamp(lo[0], hi[0]), p[1].clamp(lo[1], hi[1])];
    let step = |k: usize| {
        let up = hi[k] - start[k];
        let down = start[k] - lo[k];
        if up >= down {
            0.5 * up
        } else {
            -0.5 * down
        }
    };
    let mut simplex = [
        start,
        clamp([start[0] + step(0), start[1]]),
        clamp([start[0], start[1] + step(1)]),
    ];
    let mut values = simplex.map(|p| f(p));

    for _ in 0..iters {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let diameter = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| (simplex[i][0] - simplex[j][0]).hypot(simplex[i][1] - simplex[j][1]))
            .fold(0.0, f64::max);
        if diameter < 1e-15 {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let toward = |t: f64| {
            clamp([
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ])
        };

        let reflected = toward(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = toward(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[2] {
            let p = toward(-0.5);
            (p, f(p))
        } else {
            let p = toward(0.5);
            (p, f(p))
        };
        if fc < values[2].min(fr) {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        for i in 1..3 {
            simplex[i] = [
                simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
            ];
            values[i] = f(simplex[i]);
        }
    }

    let best = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[best], values[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum_in_box() {
        let (p, v) = nelder_mead_box(
            |p| (p[0] - 0.31).powi(2) + 2.0 * (p[1] - 0.62).powi(2) - 1.0,
            [0.3, 0.6],
            [0.29, 0.59],
            [0.33, 0.63],
            80,
        );
        assert!((p[0] - 0.31).abs() < 1e-7 && (p[1] - 0.62).abs() < 1e-7, "{p:?}");
        assert!((v + 1.0).abs() < 1e-13);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let (p, _) = nelder_mead_box(|p| p[0] + p[1], [0.5, 0.5], [0.4, 0.45], [0.6, 0.6], 60);
        assert!((p[0] - 0.4).abs() < 1e-9 && (p[1] - 0.45).abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn axis_contains_kinks_with_both_sheets() {
        let h = Generator::piecewise_hm(1.2).unwrap();
        let axis = Axis::new(&h, 101);
        assert_eq!(axis.len(), 102);
        let kink = h.kinks()[0];
        let at_kink: Vec<_> = axis.samples().filter(|s| s.x == kink).collect();
        assert_eq!(at_kink.len(), 2);
        assert_eq!(at_kink[0].d1, 0.0);
        assert_eq!(at_kink[1].d1, -1.2);
    }

    #[test]
    fn line_extremum_polishes_interior_maximum() {
        let f = Generator::linear();
        let s = ScanSettings::with_grid(64).unwrap();
        let (v, x, _) = line_extremum(&f, &s, Goal::Max, |s| -(s.x - 0.123456789).powi(2));
        assert!((x - 0.123456789).abs() < 1e-7);
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn square_grid_min_with_exclusion() {
        let f = Generator::linear();
        let s = ScanSettings::with_grid(65).unwrap();
        let grid = SquareGrid::new(&f, &f, &s);
        let e = grid.extremum_excluding(Goal::Min, |a, b| a.x + b.x, |u, v| u == 0.0 && v == 0.0);
        assert!(e.value > 0.0 && e.value <= 1.0 / 64.0 + 1e-15);
    }
}

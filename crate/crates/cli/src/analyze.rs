//! Full report for one model spec: conditions, G extrema, θ ranges and,
//! when the spec carries θ, the validity verdict.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use ratio_copula::analysis::ExtremaResult;
use ratio_copula::copula::check_rectangle_seeded;
use ratio_copula::fmt::sig12;
use ratio_copula::{
    check_validity, closed_form_interval, extremize_g, ConditionResult, CopulaModel, Generator,
    ModelSpec, PairConditions, ScanSettings, ThetaInterval,
};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub theta: f64,
    pub resolution: usize,
    pub valid: bool,
    /// Which check decides `valid`: the rectangle oracle when a generator has kinks.
    pub decided_by: &'static str,
    pub density_constant: bool,
    pub inequality: ConditionResult,
    pub rectangle: ConditionResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub f: String,
    pub g: String,
    pub grid: usize,
    pub conditions: PairConditions,
    pub extrema: ExtremaResult,
    pub interval: Option<ThetaInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval_error: Option<String>,
    pub closed_form: Option<ThetaInterval>,
    pub validity: Option<ValidityReport>,
}

impl AnalyzeReport {
    /// `false` only when θ was given and the model is not a copula at this resolution.
    pub fn valid(&self) -> bool {
        self.validity.as_ref().map_or(true, |v| v.valid)
    }
}

pub fn analyze(spec: &ModelSpec, s: &ScanSettings, seed: u64) -> Result<AnalyzeReport> {
    let f = Generator::from_spec(&spec.f).context("in `f`")?;
    let g = Generator::from_spec(&spec.g).context("in `g`")?;
    let conditions = PairConditions::evaluate(&f, &g, s);
    let extrema = extremize_g(&f, &g, s);
    let (interval, interval_error) = match ThetaInterval::from_extrema(extrema.alpha1, extrema.alpha2) {
        Ok(i) => (Some(i), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let closed_form = closed_form_interval(&f, &g, s).ok();
    let validity = spec.theta.map(|theta| {
        let kinked = !f.kinks().is_empty() || !g.kinks().is_empty();
        let m = CopulaModel::new(f.clone(), g.clone(), theta);
        let inequality = check_validity(&m, s);
        let rectangle = check_rectangle_seeded(&m, s, seed);
        let (valid, decided_by) = if kinked {
            (rectangle.holds, "rectangle")
        } else {
            (inequality.holds, "inequality")
        };
        ValidityReport {
            theta,
            resolution: s.grid_n,
            valid,
            decided_by,
            density_constant: theta == 0.0,
            inequality,
            rectangle,
        }
    });
    Ok(AnalyzeReport {
        f: spec.f.label(),
        g: spec.g.label(),
        grid: s.grid_n,
        conditions,
        extrema,
        interval,
        interval_error,
        closed_form,
        validity,
    })
}

fn verdict(r: &ConditionResult) -> &'static str {
    if r.holds {
        "holds"
    } else {
        "fails"
    }
}

fn interval_text(i: &ThetaInterval) -> String {
    format!("[{}, {}]", sig12(i.lo), sig12(i.hi))
}

pub fn text(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "f = {}, g = {} (grid {})", r.f, r.g, r.grid);
    let c = &r.conditions;
    for x in [&c.b1, &c.b2, &c.a3, &c.b3] {
        let _ = writeln!(s, "{}: {} (margin {})", x.condition, verdict(x), sig12(x.margin));
    }
    match &c.b4 {
        Some(x) => {
            let _ = writeln!(s, "B4: {} (margin {})", verdict(x), sig12(x.margin));
        }
        None => s.push_str("B4: undefined (B1 fails)\n"),
    }
    let e = &r.extrema;
    let _ = writeln!(s, "alpha1 = {} at ({}, {})", sig12(e.alpha1), sig12(e.argmin.0), sig12(e.argmin.1));
    let _ = writeln!(s, "alpha2 = {} at ({}, {})", sig12(e.alpha2), sig12(e.argmax.0), sig12(e.argmax.1));
    if e.interior_max_exceeds_boundary {
        let _ = writeln!(s, "max G exceeds the boundary maximum {}", sig12(e.boundary.boundary_max_g));
    }
    match (&r.interval, &r.interval_error) {
        (Some(i), _) => {
            let _ = writeln!(s, "theta interval (numeric): {}", interval_text(i));
        }
        (None, Some(err)) => {
            let _ = writeln!(s, "theta interval: {err}");
        }
        _ => {}
    }
    if let Some(i) = &r.closed_form {
        let _ = writeln!(s, "theta interval (closed form): {}", interval_text(i));
    }
    if let Some(v) = &r.validity {
        let state = if v.valid { "valid" } else { "invalid" };
        let _ = writeln!(s, "theta = {}: {state} at resolution {}", v.theta, v.resolution);
        let _ = writeln!(s, "  inequality margin {} ({})", sig12(v.inequality.margin), verdict(&v.inequality));
        let _ = writeln!(s, "  rectangle margin {} ({})", sig12(v.rectangle.margin), verdict(&v.rectangle));
        if !v.valid {
            let w = if v.decided_by == "rectangle" { &v.rectangle } else { &v.inequality };
            if let Some(w) = &w.witness {
                let _ = writeln!(s, "  witness {:?}", w.coords());
            }
        }
        if v.density_constant {
            s.push_str("  density is constant 1 (independence)\n");
        }
    }
    s
}

pub fn csv(r: &AnalyzeReport) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    let c = &r.conditions;
    for x in [Some(&c.b1), Some(&c.b2), Some(&c.a3), Some(&c.b3), c.b4.as_ref()].into_iter().flatten() {
        rows.push((format!("{}_holds", x.condition), x.holds.to_string()));
        rows.push((format!("{}_margin", x.condition), sig12(x.margin)));
    }
    let e = &r.extrema;
    rows.push(("alpha1".into(), sig12(e.alpha1)));
    rows.push(("alpha1_u".into(), sig12(e.argmin.0)));
    rows.push(("alpha1_v".into(), sig12(e.argmin.1)));
    rows.push(("alpha2".into(), sig12(e.alpha2)));
    rows.push(("alpha2_u".into(), sig12(e.argmax.0)));
    rows.push(("alpha2_v".into(), sig12(e.argmax.1)));
    if let Some(i) = &r.interval {
        rows.push(("theta_lo".into(), sig12(i.lo)));
        rows.push(("theta_hi".into(), sig12(i.hi)));
    }
    if let Some(i) = &r.closed_form {
        rows.push(("closed_form_lo".into(), sig12(i.lo)));
        rows.push(("closed_form_hi".into(), sig12(i.hi)));
    }
    if let Some(v) = &r.validity {
        rows.push(("theta".into(), sig12(v.theta)));
        rows.push(("valid".into(), v.valid.to_string()));
        rows.push(("resolution".into(), v.resolution.to_string()));
    }
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

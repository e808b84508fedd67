//! The benchmark matrix of condition verdicts for the classic generator pairs.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use ratio_copula::{Generator, GeneratorSpec, PairConditions, ScanSettings};
use serde::Serialize;

const EXPECTED: &str = include_str!("../fixtures/table1_expected.csv");

/// Column order of the matrix.
pub const COLUMNS: [&str; 5] = ["B1", "B2", "A3", "B3", "B4"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    #[serde(rename = "B1")]
    pub b1: bool,
    #[serde(rename = "B2")]
    pub b2: bool,
    #[serde(rename = "A3")]
    pub a3: bool,
    #[serde(rename = "B3")]
    pub b3: bool,
    #[serde(rename = "B4")]
    pub b4: bool,
}

impl Verdicts {
    pub fn as_array(&self) -> [bool; 5] {
        [self.b1, self.b2, self.a3, self.b3, self.b4]
    }

    fn from_array(v: [bool; 5]) -> Self {
        Self {
            b1: v[0],
            b2: v[1],
            a3: v[2],
            b3: v[3],
            b4: v[4],
        }
    }

    fn from_conditions(c: &PairConditions) -> Self {
        Self {
            b1: c.b1.holds,
            b2: c.b2.holds,
            a3: c.a3.holds,
            b3: c.b3.holds,
            b4: c.b4.as_ref().is_some_and(|r| r.holds),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub f_spec: GeneratorSpec,
    pub g_spec: GeneratorSpec,
    pub param_note: String,
    /// Key of the expected-matrix row this probe belongs to.
    pub regime: String,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone)]
pub struct ExpectedRow {
    pub regime: String,
    pub f: String,
    pub g: String,
    pub conditions: String,
    pub verdicts: Verdicts,
}

fn tf(s: &str) -> Result<bool> {
    match s.trim() {
        "T" => Ok(true),
        "F" => Ok(false),
        other => bail!("expected T or F, found `{other}`"),
    }
}

pub fn expected() -> Result<Vec<ExpectedRow>> {
    EXPECTED
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                bail!("malformed fixture line `{line}`");
            }
            let v = [tf(cells[4])?, tf(cells[5])?, tf(cells[6])?, tf(cells[7])?, tf(cells[8])?];
            Ok(ExpectedRow {
                regime: cells[0].into(),
                f: cells[1].into(),
                g: cells[2].into(),
                conditions: cells[3].into(),
                verdicts: Verdicts::from_array(v),
            })
        })
        .collect()
}

/// Probe points: every regime at representative values, plus the values on
/// either side of each stated split.
pub fn probes() -> Vec<(GeneratorSpec, GeneratorSpec, String, &'static str)> {
    let same = |s: GeneratorSpec| (s.clone(), s);
    let mut out = Vec::new();
    let mut push = |(f, g): (GeneratorSpec, GeneratorSpec), note: String, regime: &'static str| {
        out.push((f, g, note, regime))
    };
    for n in [1.0, 1.5, 2.0] {
        push(same(GeneratorSpec::power(n)), format!("n = {n}"), "power-low");
    }
    for n in [2.5, 3.0] {
        push(same(GeneratorSpec::power(n)), format!("n = {n}"), "power-high");
    }
    for b in [2.0, 10.0, 41.0, 42.0] {
        push(same(GeneratorSpec::log_b(b)), format!("b = {b}"), "log-log");
    }
    push(same(GeneratorSpec::cosine()), String::new(), "cos-cos");
    for b in [2.0, 10.0, 41.0] {
        push((GeneratorSpec::linear(), GeneratorSpec::log_b(b)), format!("b = {b}"), "linear-log-low");
    }
    for b in [42.0, 100.0] {
        push((GeneratorSpec::linear(), GeneratorSpec::log_b(b)), format!("b = {b}"), "linear-log-high");
    }
    push((GeneratorSpec::cosine(), GeneratorSpec::linear()), String::new(), "cos-linear");
    for b in [2.0, 10.0] {
        push((GeneratorSpec::log_b(b), GeneratorSpec::cosine()), format!("b = {b}"), "log-cos");
    }
    for c in [0.0, 0.5, 1.0] {
        push(same(GeneratorSpec::exp_shift(c)), format!("c = {c}"), "exp-shift");
    }
    for a in [1.0, 3.7] {
        push(same(GeneratorSpec::exp_ratio(a)), format!("a = {a}"), "exp-ratio-low");
    }
    for a in [3.8, 4.0] {
        push(same(GeneratorSpec::exp_ratio(a)), format!("a = {a}"), "exp-ratio-high");
    }
    for m in [1.2, 1.5] {
        push(same(GeneratorSpec::piecewise_hm(m)), format!("M = {m}"), "hm");
    }
    out
}

pub fn evaluate(s: &ScanSettings) -> Result<Vec<ReportRow>> {
    probes()
        .into_par_iter()
        .map(|(f_spec, g_spec, param_note, regime)| {
            let f = Generator::from_spec(&f_spec).with_context(|| f_spec.label())?;
            let g = Generator::from_spec(&g_spec).with_context(|| g_spec.label())?;
            let c = PairConditions::evaluate(&f, &g, s);
            Ok(ReportRow {
                f_spec,
                g_spec,
                param_note,
                regime: regime.to_string(),
                verdicts: Verdicts::from_conditions(&c),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub f: String,
    pub g: String,
    pub param_note: String,
    pub condition: String,
    pub expected: bool,
    pub found: bool,
}

pub fn diff(rows: &[ReportRow]) -> Result<Vec<Mismatch>> {
    let expected = expected()?;
    let mut out = Vec::new();
    for row in rows {
        let want = expected
            .iter()
            .find(|e| e.regime == row.regime)
            .with_context(|| format!("no expected row for regime `{}`", row.regime))?;
        for ((name, w), got) in COLUMNS.iter().zip(want.verdicts.as_array()).zip(row.verdicts.as_array()) {
            if w != got {
                out.push(Mismatch {
                    f: row.f_spec.label(),
                    g: row.g_spec.label(),
                    param_note: row.param_note.clone(),
                    condition: name.to_string(),
                    expected: w,
                    found: got,
                });
            }
        }
    }
    Ok(out)
}

fn letter(b: bool) -> char {
    if b {
        'T'
    } else {
        'F'
    }
}

pub fn markdown(rows: &[ReportRow]) -> String {
    let mut s = String::from("| f | g | parameters | B1 | B2 | A3 | B3 | B4 |\n|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let v = r.verdicts.as_array();
        let _ = write!(s, "| {} | {} | {} |", r.f_spec.label(), r.g_spec.label(), r.param_note);
        for b in v {
            let _ = write!(s, " {} |", letter(b));
        }
        s.push('\n');
    }
    s
}

pub fn csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("f,g,parameters,B1,B2,A3,B3,B4\n");
    for r in rows {
        let _ = write!(
            s,
            "{},{},{}",
            crate::csv_field(&r.f_spec.label()),
            crate::csv_field(&r.g_spec.label()),
            crate::csv_field(&r.param_note)
        );
        for b in r.verdicts.as_array() {
            let _ = write!(s, ",{}", letter(b));
        }
        s.push('\n');
    }
    s
}

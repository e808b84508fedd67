//! Data behind the cubic counterexample and the h_M failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ratio_copula::analysis::{eval_g, eval_g_sided, extremize_g, inequality5, theta_min_search, FeasibilitySearch};
use ratio_copula::fmt::sig12;
use ratio_copula::{Generator, ScanSettings, Side};
use serde::Serialize;

/// θ of the inequality surface export.
pub const SURFACE_THETA: f64 = -30.0;
pub const HM_M: f64 = 1.2;

pub const G_DIAGONAL: &str = "g_diagonal.csv";
pub const SURFACE: &str = "inequality_theta_-30.csv";
pub const THETA_MIN: &str = "theta_min.json";
pub const HM_DIAGONAL: &str = "hm_diagonal.csv";

#[derive(Debug, Clone, Serialize)]
pub struct ThetaMinReport {
    pub grid: usize,
    pub alpha1: f64,
    pub inverse_alpha1: f64,
    pub argmin: (f64, f64),
    pub theta_min: f64,
    pub search: FeasibilitySearch,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub alpha1: f64,
    pub inverse_alpha1: f64,
    pub argmin: (f64, f64),
    pub theta_min: f64,
    pub theta_min_bracket: (f64, f64),
    pub hm_diagonal_max: f64,
    pub hm_diagonal_argmax: f64,
    pub hm_boundary_max: f64,
    pub files: Vec<PathBuf>,
}

fn diagonal_points(n: usize, extra: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    u.extend_from_slice(extra);
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
    let p = dir.join(name);
    let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
    Ok((BufWriter::new(f), p))
}

pub fn run(s: &ScanSettings, surface_n: usize, dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let cubic = Generator::reflected_power(3.0)?;
    let mut files = Vec::new();

    let (mut w, p) = create(dir, G_DIAGONAL)?;
    writeln!(w, "u,G")?;
    for u in diagonal_points(s.grid_n, &[4.0 / 7.0]) {
        writeln!(w, "{},{}", sig12(u), sig12(eval_g(&cubic, &cubic, u, u, Side::Default)))?;
    }
    w.flush()?;
    files.push(p);

    let (mut w, p) = create(dir, SURFACE)?;
    writeln!(w, "u,v,inequality")?;
    let xs = diagonal_points(surface_n, &[]);
    for &u in &xs {
        let fu = cubic.sample(u, Side::Default);
        for &v in &xs {
            let gv = cubic.sample(v, Side::Default);
            writeln!(w, "{},{},{}", sig12(u), sig12(v), sig12(inequality5(SURFACE_THETA, &fu, &gv)))?;
        }
    }
    w.flush()?;
    files.push(p);

    let e = extremize_g(&cubic, &cubic, s);
    let search = theta_min_search(&cubic, &cubic, s)?;
    let report = ThetaMinReport {
        grid: s.grid_n,
        alpha1: e.alpha1,
        inverse_alpha1: 1.0 / e.alpha1,
        argmin: e.argmin,
        theta_min: search.theta,
        search: search.clone(),
    };
    let (mut w, p) = create(dir, THETA_MIN)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    files.push(p);

    let h = Generator::piecewise_hm(HM_M)?;
    let kink = 1.0 - 1.0 / HM_M;
    let (mut w, p) = create(dir, HM_DIAGONAL)?;
    writeln!(w, "u,G_left,G_right,boundary_max")?;
    let (mut best, mut at) = (f64::NEG_INFINITY, 0.0);
    for u in diagonal_points(s.grid_n, &[kink]) {
        let left = eval_g_sided(&h, &h, u, u, Side::Left, Side::Left);
        let right = eval_g_sided(&h, &h, u, u, Side::Right, Side::Right);
        for g in [left, right] {
            if g > best {
                best = g;
                at = u;
            }
        }
        writeln!(w, "{},{},{},{}", sig12(u), sig12(left), sig12(right), sig12(HM_M))?;
    }
    w.flush()?;
    files.push(p);

    Ok(Summary {
        alpha1: e.alpha1,
        inverse_alpha1: 1.0 / e.alpha1,
        argmin: e.argmin,
        theta_min: search.theta,
        theta_min_bracket: search.bracket,
        hm_diagonal_max: best,
        hm_diagonal_argmax: at,
        hm_boundary_max: HM_M,
        files,
    })
}

pub fn text(s: &Summary) -> String {
    let mut out = format!(
        "alpha1 = {} at ({}, {})\n1/alpha1 = {}\ntheta_min = {} (bracket [{}, {}])\nh_{HM_M} diagonal max G = {} at u = {} (boundary max {})\n",
        sig12(s.alpha1),
        sig12(s.argmin.0),
        sig12(s.argmin.1),
        sig12(s.inverse_alpha1),
        sig12(s.theta_min),
        sig12(s.theta_min_bracket.0),
        sig12(s.theta_min_bracket.1),
        sig12(s.hm_diagonal_max),
        sig12(s.hm_diagonal_argmax),
        sig12(s.hm_boundary_max),
    );
    for f in &s.files {
        out.push_str(&format!("wrote {}\n", f.display()));
    }
    out
}

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueHint};
use ratio_copula::copula::DEFAULT_RECTANGLE_SEED;
use ratio_copula::fmt::sig12;
use ratio_copula::settings::{DEFAULT_GRID, MIN_GRID};
use ratio_copula::{find_threshold, sample, Condition, CopulaModel, Error, Generator, ScanSettings};
use ratio_copula_cli::{analyze, counterexample, read_model, substitute, table1, EXIT_DOMAIN, EXIT_ERROR};
use serde::Serialize;

const DEFAULT_SAMPLE_SEED: u64 = 1;

/// Separate ratio-type copulas: conditions, θ ranges, validity and sampling.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Grid points per axis for every scan.
    #[arg(long, global = true, env = "RATIO_COPULA_GRID", default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Tolerance for condition verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for random probes and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Output file (a directory for `counterexample`).
    #[arg(long, global = true, value_hint = ValueHint::AnyPath)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Conditions, G extrema, θ interval and validity for a model spec.
    Analyze {
        #[arg(value_hint = ValueHint::FilePath)]
        spec: PathBuf,
    },
    /// The benchmark matrix of condition verdicts.
    Table1 {
        /// Compare against the expected matrix and exit 2 on any mismatch.
        #[arg(long)]
        diff: bool,
    },
    /// Export the counterexample data (G diagonal, inequality surface, θ_min, h_M diagonal).
    Counterexample {
        /// Points per axis of the inequality surface.
        #[arg(long, default_value_t = 201)]
        surface_grid: usize,
    },
    /// Draw pairs from a model spec by conditional inversion.
    Sample {
        #[arg(value_hint = ValueHint::FilePath)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Crossover of a condition as one generator parameter varies.
    Threshold {
        #[arg(value_hint = ValueHint::FilePath)]
        spec: PathBuf,
        /// Parameter name, replaced in every generator that has it.
        #[arg(long)]
        param: String,
        #[arg(long, default_value = "A3")]
        condition: Condition,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
    },
}

impl Global {
    fn settings(&self) -> Result<ScanSettings> {
        if self.grid < MIN_GRID {
            bail!("--grid must be at least {MIN_GRID}");
        }
        let s = ScanSettings {
            grid_n: self.grid,
            tol_condition: self.tol,
            ..ScanSettings::default()
        };
        Ok(s.validated()?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<String> {
        Ok(serde_json::to_string_pretty(value)? + "\n")
    }
}

fn run_analyze(g: &Global, spec: &Path) -> Result<u8> {
    let s = g.settings()?;
    let seed = g.seed.unwrap_or(DEFAULT_RECTANGLE_SEED);
    let report = analyze::analyze(&read_model(spec)?, &s, seed)?;
    let text = if g.json {
        g.json(&report)?
    } else if g.csv {
        analyze::csv(&report)
    } else {
        analyze::text(&report)
    };
    g.emit(&text)?;
    Ok(if report.valid() { 0 } else { EXIT_DOMAIN })
}

fn run_table1(g: &Global, diff: bool) -> Result<u8> {
    let s = g.settings()?;
    let rows = table1::evaluate(&s)?;
    let text = if g.json {
        g.json(&rows)?
    } else if g.csv {
        table1::csv(&rows)
    } else {
        table1::markdown(&rows)
    };
    g.emit(&text)?;
    if !diff {
        return Ok(0);
    }
    let mismatches = table1::diff(&rows)?;
    if mismatches.is_empty() {
        eprintln!("table1: all {} rows match the expected matrix", rows.len());
        return Ok(0);
    }
    for m in &mismatches {
        eprintln!(
            "mismatch: {} / {} {}: {} expected {} found {}",
            m.f,
            m.g,
            m.param_note,
            m.condition,
            if m.expected { 'T' } else { 'F' },
            if m.found { 'T' } else { 'F' }
        );
    }
    Ok(EXIT_DOMAIN)
}

fn run_counterexample(g: &Global, surface_grid: usize) -> Result<u8> {
    let s = g.settings()?;
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("counterexample"));
    let summary = counterexample::run(&s, surface_grid.max(2), &dir)?;
    let text = if g.json {
        g.json(&summary)?
    } else {
        counterexample::text(&summary)
    };
    io::stdout().write_all(text.as_bytes())?;
    Ok(0)
}

fn run_sample(g: &Global, spec: &Path, n: usize) -> Result<u8> {
    let s = g.settings()?;
    let spec = read_model(spec)?;
    let theta = spec.theta.context("the model spec needs `theta` to sample")?;
    let m = CopulaModel::from_spec(&spec, theta)?;
    let seed = g.seed.unwrap_or(DEFAULT_SAMPLE_SEED);
    match sample(&m, n, seed, &s) {
        Ok(batch) => {
            let mut buf = Vec::new();
            batch.write_csv(&mut buf)?;
            g.emit(std::str::from_utf8(&buf)?)?;
            Ok(0)
        }
        Err(Error::InvalidModel(why)) => {
            eprintln!("refusing to sample: θ = {theta} is not valid at resolution {}: {why}", s.grid_n);
            Ok(EXIT_DOMAIN)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct ThresholdReport {
    condition: Condition,
    param: String,
    lo: f64,
    hi: f64,
    crossover: f64,
}

fn run_threshold(g: &Global, spec: &Path, param: &str, condition: Condition, lo: f64, hi: f64) -> Result<u8> {
    let s = g.settings()?;
    let spec = read_model(spec)?;
    if substitute(&spec, param, lo).1 == 0 {
        bail!("neither generator has a parameter `{param}`");
    }
    let make = |p: f64| {
        let (m, _) = substitute(&spec, param, p);
        Ok((Generator::from_spec(&m.f)?, Generator::from_spec(&m.g)?))
    };
    match find_threshold(make, condition, lo, hi, &s) {
        Ok(t) => {
            let report = ThresholdReport {
                condition,
                param: param.to_string(),
                lo,
                hi,
                crossover: t,
            };
            let text = if g.json {
                g.json(&report)?
            } else if g.csv {
                format!("condition,param,lo,hi,crossover\n{condition},{param},{},{},{}\n", sig12(lo), sig12(hi), sig12(t))
            } else {
                format!("{condition} crossover for {param} in [{lo}, {hi}]: {}\n", sig12(t))
            };
            g.emit(&text)?;
            Ok(0)
        }
        Err(e @ Error::NoSignChange { .. }) => {
            eprintln!("{e}");
            Ok(EXIT_DOMAIN)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match cli.command {
        Command::Analyze { spec } => run_analyze(g, &spec),
        Command::Table1 { diff } => run_table1(g, diff),
        Command::Counterexample { surface_grid } => run_counterexample(g, surface_grid),
        Command::Sample { spec, n } => run_sample(g, &spec, n),
        Command::Threshold {
            spec,
            param,
            condition,
            lo,
            hi,
        } => run_threshold(g, &spec, &param, condition, lo, hi),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratio_copula::analysis::eval_g;
    use ratio_copula::copula::empirical_sup_distance;
    use ratio_copula::{SampleBatch, Side};
    use serde_json::Value;
    use tempfile::TempDir;

    fn spec(dir: &TempDir, name: &str, json: &str) -> String {
        let p = dir.path().join(name);
        fs::write(&p, json).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn call(args: &[&str]) -> u8 {
        let mut full = vec!["ratio-copula", "--grid", "201"];
        full.extend_from_slice(args);
        run(Cli::try_parse_from(full).unwrap()).unwrap()
    }

    fn json_out(dir: &TempDir, args: &[&str]) -> (u8, Value) {
        let out = dir.path().join("out.json").to_string_lossy().into_owned();
        let mut a = args.to_vec();
        a.extend_from_slice(&["--json", "--out", &out]);
        let code = call(&a);
        (code, serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap())
    }

    const CUBIC: &str = r#"{"f":{"family":"reflected_power","params":{"n":3}},"g":{"family":"reflected_power","params":{"n":3}}}"#;
    const LINEAR: &str = r#"{"f":{"family":"linear"},"g":{"family":"linear"}}"#;

    #[test]
    fn analyze_cubic_pair() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "cubic.json", CUBIC);
        let (code, v) = json_out(&d, &["analyze", &p]);
        assert_eq!(code, 0);
        let a1 = v["extrema"]["alpha1"].as_f64().unwrap();
        assert!((a1 + 729.0 / 16807.0).abs() < 1e-9, "{a1}");
        assert!((v["interval"]["hi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(v["closed_form"].is_null());
    }

    #[test]
    fn analyze_linear_pair_reports_closed_form() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "lin.json", LINEAR);
        let (code, v) = json_out(&d, &["analyze", &p]);
        assert_eq!(code, 0);
        assert_eq!(v["closed_form"]["source"], "closed_form");
        assert_eq!(v["closed_form"]["lo"].as_f64(), Some(-1.0));
        assert_eq!(v["closed_form"]["hi"].as_f64(), Some(1.0));
    }

    #[test]
    fn analyze_exit_codes_follow_validity() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "zero.json", r#"{"f":{"family":"linear"},"g":{"family":"cosine"},"theta":0}"#);
        let (code, v) = json_out(&d, &["analyze", &p]);
        assert_eq!(code, 0);
        assert_eq!(v["validity"]["valid"], true);
        assert_eq!(v["validity"]["density_constant"], true);
        assert_eq!(v["validity"]["resolution"], 201);

        let p = spec(&d, "bad.json", r#"{"f":{"family":"linear"},"g":{"family":"linear"},"theta":1.5}"#);
        assert_eq!(call(&["analyze", &p, "--out", &spec(&d, "o.txt", "")]), EXIT_DOMAIN);

        let p = spec(&d, "typo.json", r#"{"f":{"family":"power","params":{"m":2}},"g":{"family":"linear"}}"#);
        let err = run(Cli::try_parse_from(["ratio-copula", "analyze", &p]).unwrap()).unwrap_err();
        assert!(format!("{err:#}").contains("`m`"), "{err:#}");
    }

    #[test]
    fn table1_rows() {
        let d = TempDir::new().unwrap();
        let (_, v) = json_out(&d, &["table1"]);
        let rows = v.as_array().unwrap();
        let find = |note: &str, family: &str| {
            rows.iter()
                .find(|r| r["param_note"] == note && r["f_spec"]["family"] == family)
                .unwrap()["verdicts"]
                .clone()
        };
        let all_true = serde_json::json!({"B1":true,"B2":true,"A3":true,"B3":true,"B4":true});
        assert_eq!(find("n = 1.5", "power"), all_true);
        assert_eq!(
            find("a = 4", "exp_ratio"),
            serde_json::json!({"B1":true,"B2":true,"A3":false,"B3":true,"B4":true})
        );
        let hm = find("M = 1.5", "piecewise_hM");
        assert_eq!(hm["B4"], false);
        for c in ["B1", "B2", "B3"] {
            assert_eq!(hm[c], true);
        }
        let keys: Vec<&String> = rows[0]["verdicts"].as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 5);
    }

    #[test]
    fn counterexample_bundle() {
        let d = TempDir::new().unwrap();
        let out = d.path().join("cx");
        let out = out.to_string_lossy();
        assert_eq!(call(&["counterexample", "--out", &out, "--surface-grid", "21"]), 0);
        let dir = Path::new(out.as_ref());
        let tm: Value = serde_json::from_str(&fs::read_to_string(dir.join(counterexample::THETA_MIN)).unwrap()).unwrap();
        assert!((tm["inverse_alpha1"].as_f64().unwrap() + 23.05).abs() <= 0.01);
        assert!(tm["search"]["probes"].as_array().unwrap().len() > 3);

        let cubic = Generator::reflected_power(3.0).unwrap();
        let diag = fs::read_to_string(dir.join(counterexample::G_DIAGONAL)).unwrap();
        let mut lines = diag.lines();
        assert_eq!(lines.next(), Some("u,G"));
        let mut saw_min = false;
        for l in lines {
            let x: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
            let g = eval_g(&cubic, &cubic, x[0], x[0], Side::Default);
            assert!((g - x[1]).abs() <= 5e-12 * g.abs().max(1e-3), "{l}");
            saw_min |= (x[0] - 4.0 / 7.0).abs() < 1e-12 && (x[1] + 729.0 / 16807.0).abs() < 1e-12;
        }
        assert!(saw_min);

        let surface = fs::read_to_string(dir.join(counterexample::SURFACE)).unwrap();
        assert_eq!(surface.lines().count(), 1 + 21 * 21);
        let min = surface
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 0.0);

        let hm = fs::read_to_string(dir.join(counterexample::HM_DIAGONAL)).unwrap();
        let best = hm
            .lines()
            .skip(1)
            .map(|l| {
                let x: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
                assert_eq!(x[3], 1.2);
                (x[1].max(x[2]), x[0])
            })
            .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        assert!((best.0 - 1.36).abs() < 1e-9 && (best.1 - 1.0 / 6.0).abs() < 1e-9, "{best:?}");
    }

    fn read_batch(path: &Path) -> SampleBatch {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("u,v"));
        let pairs: Vec<(f64, f64)> = lines
            .map(|l| {
                let (u, v) = l.split_once(',').unwrap();
                (u.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        SampleBatch {
            n: pairs.len(),
            pairs,
            seed: 0,
        }
    }

    #[test]
    fn sample_independence_and_reproducibility() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "ind.json", r#"{"f":{"family":"linear"},"g":{"family":"linear"},"theta":0}"#);
        let a = d.path().join("a.csv");
        let b = d.path().join("b.csv");
        for out in [&a, &b] {
            assert_eq!(call(&["sample", &p, "--n", "1000", "--seed", "9", "--out", &out.to_string_lossy()]), 0);
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let batch = read_batch(&a);
        assert_eq!(batch.pairs.len(), 1000);
        let l = Generator::linear();
        let m = CopulaModel::new(l.clone(), l, 0.0);
        assert!(empirical_sup_distance(&batch, &m, 10).unwrap() < 0.06);
    }

    #[test]
    fn sample_refuses_invalid_theta() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "bad.json", r#"{"f":{"family":"cosine"},"g":{"family":"cosine"},"theta":-0.9}"#);
        let out = d.path().join("s.csv");
        assert_eq!(call(&["sample", &p, "--out", &out.to_string_lossy()]), EXIT_DOMAIN);
        assert!(!out.exists());
    }

    #[test]
    fn threshold_command() {
        let d = TempDir::new().unwrap();
        let p = spec(&d, "er.json", r#"{"f":{"family":"exp_ratio","params":{"a":1}},"g":{"family":"exp_ratio","params":{"a":1}}}"#);
        let (code, v) = json_out(&d, &["threshold", &p, "--param", "a", "--lo", "1", "--hi", "10"]);
        assert_eq!(code, 0);
        let t = v["crossover"].as_f64().unwrap();
        assert!((3.6..=3.8).contains(&t), "{t}");
        assert_eq!(call(&["threshold", &p, "--param", "a", "--lo", "1", "--hi", "2"]), EXIT_DOMAIN);
        assert!(run(Cli::try_parse_from(["ratio-copula", "threshold", &p, "--param", "zz", "--lo", "1", "--hi", "2"]).unwrap()).is_err());
    }

    #[test]
    fn grid_flag_and_env() {
        let cli = Cli::try_parse_from(["ratio-copula", "--grid", "300", "table1"]).unwrap();
        assert_eq!(cli.global.settings().unwrap().grid_n, 300);
        assert!(Cli::try_parse_from(["ratio-copula", "--grid", "10", "table1"]).unwrap().global.settings().is_err());
        assert!(Cli::try_parse_from(["ratio-copula", "table1", "--json", "--csv"]).is_err());
        std::env::set_var("RATIO_COPULA_GRID", "333");
        let cli = Cli::try_parse_from(["ratio-copula", "table1"]).unwrap();
        std::env::remove_var("RATIO_COPULA_GRID");
        assert_eq!(cli.global.grid, 333);
    }
}

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratio_copula::analysis::extremize_g;
use ratio_copula::conditions::{check_b4, check_remark4, eval_h, h_field};
use ratio_copula::copula::{boundary_error, density_mass, empirical_sup_distance};
use ratio_copula::generators::catalog;
use ratio_copula::scan::{Goal, SquareGrid};
use ratio_copula::{
    check_rectangle, check_validity, closed_form_interval, find_threshold, sample, theta_interval, theta_max_feasible,
    theta_min_feasible, Condition, CopulaModel, Generator, PairConditions, ScanSettings, Side,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(label: &str, elapsed: Duration, limit: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit {
        Ok(())
    } else {
        Err(format!("{label} took {:.1} s, limit {limit} s", elapsed.as_secs_f64()))
    }
}

fn cubic() -> Generator {
    Generator::reflected_power(3.0).unwrap()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let f = cubic();
    let e = extremize_g(&f, &f, &ScanSettings::default());
    let elapsed = t.elapsed();
    let want = -729.0 / 16807.0;
    let detail = format!(
        "alpha1 = {:.12} (want {:.12}), argmin = ({:.7}, {:.7}), 1/alpha1 = {:.6}, {:.2} s",
        e.alpha1,
        want,
        e.argmin.0,
        e.argmin.1,
        1.0 / e.alpha1,
        elapsed.as_secs_f64()
    );
    within("extremize", elapsed, 5.0).map_err(|m| format!("{detail}; {m}"))?;
    let q = 4.0 / 7.0;
    check(
        (e.alpha1 - want).abs() <= 1e-9
            && (e.argmin.0 - q).abs() <= 1e-5
            && (e.argmin.1 - q).abs() <= 1e-5
            && (1.0 / e.alpha1 + 23.0549).abs() <= 5e-4,
        detail,
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let f = cubic();
    let theta = theta_min_feasible(&f, &f, &ScanSettings::with_grid(2001).unwrap()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let detail = format!("theta_min = {theta:.5} at grid 2001, {:.2} s", elapsed.as_secs_f64());
    within("theta_min", elapsed, 60.0).map_err(|m| format!("{detail}; {m}"))?;
    check((theta + 36.1903).abs() <= 0.01, detail)
}

fn criterion_3() -> Outcome {
    let f = cubic();
    let s = ScanSettings::default();
    let v = check_validity(&CopulaModel::new(f.clone(), f.clone(), -30.0), &s);
    let i = theta_interval(&f, &f, &s).map_err(|e| e.to_string())?;
    check(
        v.holds && -30.0 < i.lo,
        format!("validity at -30 holds = {} (margin {:.3e}), 1/alpha1 = {:.4}", v.holds, v.margin, i.lo),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let s = ScanSettings::default();
    let mut pairs: Vec<(Generator, Generator)> = Vec::new();
    for n in [1.5, 2.0] {
        pairs.push((Generator::power(n).unwrap(), Generator::power(n).unwrap()));
    }
    for b in [2.0, 10.0] {
        pairs.push((Generator::log_b(b).unwrap(), Generator::log_b(b).unwrap()));
    }
    pairs.push((Generator::cosine(), Generator::cosine()));
    pairs.push((Generator::linear(), Generator::linear()));
    for c in [0.0, 0.5, 1.0] {
        pairs.push((Generator::exp_shift(c).unwrap(), Generator::exp_shift(c).unwrap()));
    }
    let mut worst_feasible: f64 = 0.0;
    let mut worst_relative: f64 = 0.0;
    let mut failures = Vec::new();
    for (f, g) in &pairs {
        let closed = closed_form_interval(f, g, &s).map_err(|e| format!("{}: {e}", f.label()))?;
        let lo = theta_min_feasible(f, g, &s).map_err(|e| format!("{}: {e}", f.label()))?;
        let hi = theta_max_feasible(f, g, &s).map_err(|e| format!("{}: {e}", f.label()))?;
        let numeric = theta_interval(f, g, &s).map_err(|e| e.to_string())?;
        let dev = (lo - closed.lo).abs().max((hi - closed.hi).abs());
        let rel = ((numeric.lo - closed.lo) / closed.lo).abs().max(((numeric.hi - closed.hi) / closed.hi).abs());
        worst_feasible = worst_feasible.max(dev);
        worst_relative = worst_relative.max(rel);
        if dev > 1e-3 || rel > 1e-6 {
            failures.push(format!("{}: feasible [{lo:.5}, {hi:.5}] vs closed [{:.5}, {:.5}], rel {rel:.2e}", f.label(), closed.lo, closed.hi));
        }
    }
    let elapsed = t.elapsed();
    let detail = format!(
        "{} pairs, max feasibility deviation {worst_feasible:.2e}, max relative endpoint gap {worst_relative:.2e}, {:.1} s{}",
        pairs.len(),
        elapsed.as_secs_f64(),
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    within("round trip", elapsed, 120.0).map_err(|m| format!("{detail}; {m}"))?;
    check(failures.is_empty(), detail)
}

fn criterion_5() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_ratio-copula"))
        .args(["table1", "--diff"])
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    let mismatches: Vec<&str> = stderr.lines().filter(|l| l.starts_with("mismatch")).collect();

    let s = ScanSettings::default();
    let a3 = |f: &Generator, g: &Generator| PairConditions::evaluate(f, g, &s).a3.holds;
    let lin = Generator::linear();
    let probes = [
        ("A3(b=41)", a3(&lin, &Generator::log_b(41.0).unwrap()), true),
        ("A3(b=42)", a3(&lin, &Generator::log_b(42.0).unwrap()), false),
        ("A3(a=3.7)", a3(&Generator::exp_ratio(3.7).unwrap(), &Generator::exp_ratio(3.7).unwrap()), true),
        ("A3(a=3.8)", a3(&Generator::exp_ratio(3.8).unwrap(), &Generator::exp_ratio(3.8).unwrap()), false),
    ];
    let bad_probes: Vec<String> = probes
        .iter()
        .filter(|p| p.1 != p.2)
        .map(|p| format!("{} = {}", p.0, if p.1 { 'T' } else { 'F' }))
        .collect();

    let linear_log = |b: f64| Ok((Generator::linear(), Generator::log_b(b)?));
    let exp_pair = |a: f64| {
        let f = Generator::exp_ratio(a)?;
        Ok((f.clone(), f))
    };
    let b_cross = find_threshold(linear_log, Condition::A3, 2.0, 100.0, &s);
    let a_cross = find_threshold(exp_pair, Condition::A3, 1.0, 10.0, &s);
    let b_ok = matches!(b_cross, Ok(t) if (40.0..=42.0).contains(&t));
    let a_ok = matches!(a_cross, Ok(t) if (3.6..=3.8).contains(&t));

    let detail = format!(
        "table1 --diff exit {:?}, {} mismatching cells{}; probe disagreements: {}; b crossover {}; a crossover {}",
        out.status.code(),
        mismatches.len(),
        if mismatches.is_empty() { String::new() } else { format!(" [{}]", mismatches.join(" | ")) },
        if bad_probes.is_empty() { "none".to_string() } else { bad_probes.join(", ") },
        match &b_cross {
            Ok(t) => format!("{t:.3}"),
            Err(e) => e.to_string(),
        },
        match &a_cross {
            Ok(t) => format!("{t:.3}"),
            Err(e) => e.to_string(),
        },
    );
    check(out.status.success() && bad_probes.is_empty() && b_ok && a_ok, detail)
}

fn criterion_6() -> Outcome {
    let f = Generator::power(3.0).unwrap();
    let g = Generator::power(2.0).unwrap();
    let s = ScanSettings::default();
    let e = SquareGrid::new(&f, &g, &s).extremum(Goal::Max, h_field);
    let (u0, v0) = (0.2f64.powf(1.0 / 3.0), 0.4f64.sqrt());
    let h0 = eval_h(&f, &g, u0, v0);
    let step = 1e-6;
    let du = (eval_h(&f, &g, u0 + step, v0) - eval_h(&f, &g, u0 - step, v0)) / (2.0 * step);
    let dv = (eval_h(&f, &g, u0, v0 + step) - eval_h(&f, &g, u0, v0 - step)) / (2.0 * step);
    let detail = format!(
        "max H = {:.12} at ({:.6}, {:.6}); H(u0, v0) = {h0:.12}, gradient ({du:.1e}, {dv:.1e})",
        e.value, e.u, e.v
    );
    check(
        (e.value - 4.0).abs() <= 1e-8
            && (e.u - 1.0).abs() <= 1e-6
            && e.v.abs() <= 1e-6
            && (h0 - 2.4).abs() <= 1e-8
            && du.abs().max(dv.abs()) <= 1e-6,
        detail,
    )
}

fn criterion_7() -> Outcome {
    let h = Generator::piecewise_hm(1.2).unwrap();
    let s = ScanSettings::default();
    let e = extremize_g(&h, &h, &s);
    let b4 = check_b4(&h, &h, &s).map_err(|e| e.to_string())?;
    let w = b4.witness.clone().ok_or("B4 has no witness")?;
    let (wu, wv) = (w.coords()[0], w.coords()[1]);
    let kink = 1.0 - 1.0 / 1.2;
    let near = (wu - wv).abs() <= 0.01 && (wu - kink).abs() <= 0.01;
    check(
        e.interior_max_exceeds_boundary
            && (e.alpha2 - 1.36).abs() <= 1e-3
            && (e.boundary.boundary_max_g - 1.2).abs() <= 1e-9
            && !b4.holds
            && near,
        format!(
            "alpha2 = {:.6} vs boundary max {:.6}, interior exceeds = {}; B4 holds = {} with margin {:.4} at ({wu:.5}, {wv:.5})",
            e.alpha2, e.boundary.boundary_max_g, e.interior_max_exceeds_boundary, b4.holds, b4.margin
        ),
    )
}

fn b4_pool() -> Vec<(Generator, Generator)> {
    vec![
        (Generator::linear(), Generator::linear()),
        (Generator::power(1.5).unwrap(), Generator::power(1.5).unwrap()),
        (Generator::power(3.0).unwrap(), Generator::power(2.0).unwrap()),
        (Generator::log_b(10.0).unwrap(), Generator::log_b(10.0).unwrap()),
        (Generator::cosine(), Generator::cosine()),
        (Generator::cosine(), Generator::linear()),
        (Generator::exp_shift(0.5).unwrap(), Generator::exp_shift(0.5).unwrap()),
    ]
}

fn random_model(rng: &mut ChaCha8Rng, inside: bool) -> CopulaModel {
    let pool = b4_pool();
    let (f, g) = pool[rng.gen_range(0..pool.len())].clone();
    let i = closed_form_interval(&f, &g, &ScanSettings::with_grid(201).unwrap()).unwrap();
    let end = if rng.gen::<bool>() { i.lo } else { i.hi };
    let theta = if inside {
        end * rng.gen_range(0.0..0.95)
    } else {
        end * rng.gen_range(1.2..2.0)
    };
    CopulaModel::new(f, g, theta)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = ScanSettings::with_grid(201).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;

    let mut disagree = 0;
    for k in 0..20 {
        let m = random_model(&mut rng, k % 2 == 0);
        if check_validity(&m, &s).holds != check_rectangle(&m, &s).holds {
            disagree += 1;
        }
    }
    ok &= disagree == 0;
    parts.push(format!("(a) {disagree}/20 oracle disagreements"));

    let mut worst_mass: f64 = 0.0;
    for _ in 0..10 {
        let m = random_model(&mut rng, true);
        match density_mass(&m, 1e-8) {
            Ok(e) => worst_mass = worst_mass.max((e.value - 1.0).abs()),
            Err(e) => return Err(format!("(b) {e}")),
        }
    }
    ok &= worst_mass <= 1e-6;
    parts.push(format!("(b) max |mass - 1| = {worst_mass:.1e}"));

    let mut worst_boundary: f64 = 0.0;
    for _ in 0..20 {
        worst_boundary = worst_boundary.max(boundary_error(&random_model(&mut rng, true), 1001).0);
    }
    ok &= worst_boundary <= 1e-12;
    parts.push(format!("(c) max boundary error {worst_boundary:.1e}"));

    let h = 1e-6;
    let mut worst_fd: f64 = 0.0;
    for gen in catalog() {
        for _ in 0..1000 {
            let u = rng.gen_range(h..1.0 - h);
            if gen.kinks().iter().any(|k| (u - k).abs() < 2.0 * h) {
                continue;
            }
            let d1 = gen.d1(u, Side::Default);
            let fd = (gen.value(u + h) - gen.value(u - h)) / (2.0 * h);
            worst_fd = worst_fd.max((d1 - fd).abs() / (1.0 + d1.abs()));
            if let Some(d2) = gen.d2(u, Side::Default) {
                let fd2 = (gen.d1(u + h, Side::Default) - gen.d1(u - h, Side::Default)) / (2.0 * h);
                worst_fd = worst_fd.max((d2 - fd2).abs() / (1.0 + d2.abs()));
            }
        }
    }
    ok &= worst_fd <= 1e-6;
    parts.push(format!("(d) max scaled derivative error {worst_fd:.1e}"));

    let mut worst_scale: f64 = 0.0;
    for (f, g) in b4_pool() {
        let (kf, kg) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
        let (sf, sg) = (f.scaled(kf).unwrap(), g.scaled(kg).unwrap());
        let (nf, a) = sf.normalize().unwrap();
        let (ng, b) = sg.normalize().unwrap();
        let theta = 0.5 / (kf * kg);
        let scaled = CopulaModel::new(sf, sg, theta);
        let normal = CopulaModel::new(nf, ng, a * b * theta);
        for _ in 0..1000 {
            let (u, v) = (rng.gen::<f64>(), rng.gen::<f64>());
            let d = (scaled.value(u, v).map_err(|e| e.to_string())? - normal.value(u, v).map_err(|e| e.to_string())?).abs();
            worst_scale = worst_scale.max(d);
        }
    }
    ok &= worst_scale <= 1e-12;
    parts.push(format!("(e) max scale discrepancy {worst_scale:.1e}"));

    let cat = catalog();
    let (mut checked, mut failed) = (0, Vec::new());
    for (i, f) in cat.iter().enumerate() {
        for g in &cat[i..] {
            if !PairConditions::evaluate(f, g, &s).b1_to_b3() {
                continue;
            }
            checked += 1;
            let alpha2 = extremize_g(f, g, &s).alpha2;
            if !check_remark4(f, g, alpha2, &s).holds {
                failed.push(format!("{}/{}", f.label(), g.label()));
            }
        }
    }
    ok &= failed.is_empty() && checked > 0;
    parts.push(format!("(f) fg <= alpha2(1 - uv) on {checked} pairs, {} failures", failed.len()));

    check(ok, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let l = Generator::linear();
    let m = CopulaModel::new(l.clone(), l, 1.0);
    let s = ScanSettings::default();
    let batch = sample(&m, 100_000, 20_241_015, &s).map_err(|e| e.to_string())?;
    let d = empirical_sup_distance(&batch, &m, 100).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let detail = format!("sup distance {d:.4} with seed 20241015, {:.2} s", elapsed.as_secs_f64());
    within("sampling", elapsed, 30.0).map_err(|m| format!("{detail}; {m}"))?;
    check(d <= 0.01, detail)
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        match f() {
            Ok(d) => println!("criterion {n}: PASS ({d})"),
            Err(d) => {
                failed += 1;
                println!("criterion {n}: FAIL ({d})");
            }
        }
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

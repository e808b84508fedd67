//! Conditional-inverse sampling and the empirical-copula check.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_validity, CopulaModel};
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::generators::Side;
use crate::settings::ScanSettings;

/// Pairs drawn per PRNG stream.
const CHUNK: usize = 4096;
const INVERSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub n: usize,
}

impl SampleBatch {
    /// CSV with header `u,v`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "u,v")?;
        for (u, v) in &self.pairs {
            writeln!(out, "{},{}", sig12(*u), sig12(*v))?;
        }
        Ok(())
    }
}

/// Solves ∂D/∂u (u, v) = w for v by bisection.
fn invert_conditional(m: &CopulaModel, u: f64, w: f64) -> f64 {
    let fu = m.f.sample(u, Side::Default);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > INVERSION_TOL {
        let mid = 0.5 * (lo + hi);
        let gv = m.g.sample(mid, Side::Default);
        match m.partial_u_at(&fu, &gv) {
            Ok(p) if p < w => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

/// Draws `n` pairs. Each block of 4096 pairs has its own ChaCha stream, so the
/// output does not depend on how the blocks are scheduled.
pub fn sample(m: &CopulaModel, n: usize, seed: u64, s: &ScanSettings) -> Result<SampleBatch> {
    let v = check_validity(m, s);
    if !v.holds {
        return Err(Error::InvalidModel(format!(
            "density inequality margin {:e} at {:?}",
            v.margin, v.witness
        )));
    }
    let chunks = n.div_ceil(CHUNK);
    let pairs = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let w: f64 = rng.gen();
                    (u, invert_conditional(m, u, w))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleBatch { pairs, seed, n })
}

fn ranks(xs: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut idx: Vec<(usize, f64)> = xs.enumerate().collect();
    idx.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut r = vec![0; idx.len()];
    for (rank, (i, _)) in idx.into_iter().enumerate() {
        r[i] = rank + 1;
    }
    r
}

/// max over the k×k lattice {i/k}² of |C_n − D_θ|, where C_n is the
/// empirical copula of the batch built from rank pseudo-observations.
pub fn empirical_sup_distance(batch: &SampleBatch, m: &CopulaModel, k: usize) -> Result<f64> {
    let n = batch.pairs.len();
    if n == 0 || k == 0 {
        return Err(Error::InvalidSettings("empty batch or lattice".into()));
    }
    let ru = ranks(batch.pairs.iter().map(|p| p.0));
    let rv = ranks(batch.pairs.iter().map(|p| p.1));
    // bin i holds ranks r with (i−1)/k < r/n ≤ i/k
    let bin = |r: usize| (r * k).div_ceil(n);
    let mut counts = vec![vec![0usize; k + 1]; k + 1];
    for (a, b) in ru.iter().zip(&rv) {
        counts[bin(*a)][bin(*b)] += 1;
    }
    for i in 0..=k {
        for j in 1..=k {
            counts[i][j] += counts[i][j - 1];
        }
    }
    for i in 1..=k {
        for j in 0..=k {
            counts[i][j] += counts[i - 1][j];
        }
    }
    let mut worst = 0.0_f64;
    for i in 1..=k {
        for j in 1..=k {
            let (u, v) = (i as f64 / k as f64, j as f64 / k as f64);
            let emp = counts[i][j] as f64 / n as f64;
            worst = worst.max((emp - m.value(u, v)?).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Generator;

    fn lin(theta: f64) -> CopulaModel {
        CopulaModel::new(Generator::linear(), Generator::linear(), theta)
    }

    #[test]
    fn same_seed_same_batch() {
        let s = ScanSettings::with_grid(101).unwrap();
        let a = sample(&lin(0.5), 5000, 7, &s).unwrap();
        let b = sample(&lin(0.5), 5000, 7, &s).unwrap();
        let c = sample(&lin(0.5), 5000, 8, &s).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.pairs, c.pairs);
        assert_eq!(a.pairs.len(), 5000);
        assert!(a.pairs.iter().all(|&(u, v)| (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn conditional_inverse_roundtrips() {
        let m = lin(0.8);
        for (u, w) in [(0.1, 0.3), (0.5, 0.5), (0.9, 0.99)] {
            let v = invert_conditional(&m, u, w);
            assert!((m.partial_u(u, v).unwrap() - w).abs() < 1e-8);
        }
    }

    #[test]
    fn independence_sample_is_close_to_uv() {
        let s = ScanSettings::with_grid(101).unwrap();
        let b = sample(&lin(0.0), 20_000, 1, &s).unwrap();
        assert!(empirical_sup_distance(&b, &lin(0.0), 50).unwrap() < 0.02);
    }

    #[test]
    fn refuses_invalid_model() {
        let s = ScanSettings::with_grid(101).unwrap();
        assert!(matches!(sample(&lin(-1.5), 10, 1, &s), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn csv_has_header() {
        let b = SampleBatch {
            pairs: vec![(0.5, 0.25)],
            seed: 1,
            n: 1,
        };
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "u,v\n5.00000000000e-1,2.50000000000e-1\n");
    }
}

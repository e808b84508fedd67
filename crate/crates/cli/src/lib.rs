//! Command implementations behind the `ratio-copula` binary.

pub mod analyze;
pub mod counterexample;
pub mod table1;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ratio_copula::ModelSpec;

/// Exit code for a negative domain verdict (invalid model, failed diff, no crossover).
pub const EXIT_DOMAIN: u8 = 2;
/// Exit code for usage and I/O errors.
pub const EXIT_ERROR: u8 = 1;

pub fn read_model(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Quotes a CSV field when it contains a comma or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Replaces `param` in whichever generators carry it. Returns how many did.
pub fn substitute(spec: &ModelSpec, param: &str, value: f64) -> (ModelSpec, usize) {
    let mut out = spec.clone();
    let mut hits = 0;
    for g in [&mut out.f, &mut out.g] {
        if let Some(p) = g.params.get_mut(param) {
            *p = value;
            hits += 1;
        }
    }
    (out, hits)
}

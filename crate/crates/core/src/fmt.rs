//! Number formatting shared by every CSV writer.

/// Twelve significant digits in scientific notation; parses back with `str::parse`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

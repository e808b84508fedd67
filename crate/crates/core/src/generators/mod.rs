//! Generator families for the separable dependence term `f(u)·g(v)`.
//!
//! Every family carries exact analytic first derivatives (and second
//! derivatives where the family is twice differentiable). Piecewise
//! generators expose their interior kinks; derivative queries at a kink take
//! a [`Side`] so callers can reach both one-sided limits.
//!
//! | family         | f(u)                              | params      |
//! |----------------|-----------------------------------|-------------|
//! | `power`        | 1 − uⁿ                            | n ≥ 1       |
//! | `reflected_power` | (1 − u)ⁿ                       | n ≥ 1       |
//! | `log_b`        | log_b(u + b(1 − u))               | b > 1       |
//! | `cosine`       | cos(πu/2)                         |             |
//! | `linear`       | 1 − u                             |             |
//! | `exp_shift`    | (1 − u)·e^{cu}                    | 0 ≤ c ≤ 1   |
//! | `exp_ratio`    | (e^{au} − e^a)/(1 − e^a)          | a > 0       |
//! | `piecewise_hM` | 1 on [0, 1−1/M], M(1 − u) after   | M ≥ 1       |
//! | `custom_table` | monotone cubic through knots      | `table`     |

mod spec;
mod table;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use spec::{GeneratorSpec, TableSpec};
use table::MonotoneCubic;

/// Which one-sided limit to take at a kink. `Default` is the left limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Default,
    Left,
    Right,
}

impl Side {
    fn is_right(self) -> bool {
        self == Side::Right
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Power { n: f64 },
    Reflected { n: f64 },
    LogB { b: f64, ln_b: f64 },
    Cosine,
    Linear,
    ExpShift { c: f64 },
    ExpRatio { a: f64, expm1_neg_a: f64 },
    Hm { m: f64, kink: f64 },
    Table(MonotoneCubic),
}

/// An immutable univariate generator on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    spec: GeneratorSpec,
    shape: Shape,
    scale: f64,
    kinks: Vec<f64>,
}

/// Value, slope and complement of a generator at one point and side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub side: Side,
    pub value: f64,
    pub d1: f64,
    /// `1 − value`, evaluated without cancellation where the family allows it.
    pub complement: f64,
}

impl Sample {
    pub fn new(gen: &Generator, x: f64, side: Side) -> Self {
        Self {
            x,
            side,
            value: gen.value(x),
            d1: gen.d1(x, side),
            complement: gen.complement(x),
        }
    }

    /// `f − x·f′`, the per-axis factor of the dependence field.
    pub fn tangent_intercept(&self) -> f64 {
        self.value - self.x * self.d1
    }
}

fn param(spec: &GeneratorSpec, name: &str) -> Result<f64> {
    spec.params
        .get(name)
        .copied()
        .ok_or_else(|| Error::MissingParam {
            family: spec.family.clone(),
            param: name.to_string(),
        })
}

fn only_params(spec: &GeneratorSpec, allowed: &[&str]) -> Result<()> {
    match spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::UnknownParam {
            family: spec.family.clone(),
            param: k.clone(),
        }),
        None => Ok(()),
    }
}

fn check_domain(spec: &GeneratorSpec, name: &str, value: f64, ok: bool, bound: &str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::ParamOutOfDomain {
            family: spec.family.clone(),
            param: name.to_string(),
            value,
            bound: bound.to_string(),
        })
    }
}

/// Builds a generator from its spec, validating the parameter domain.
pub fn make_generator(spec: &GeneratorSpec) -> Result<Generator> {
    let family = spec.family.as_str();
    if spec.table.is_some() && family != "custom_table" && family != "custom-table" {
        return Err(Error::InvalidTable(format!(
            "`table` is only accepted by custom_table, not `{family}`"
        )));
    }
    let shape = match family {
        "power" => {
            only_params(spec, &["n"])?;
            let n = param(spec, "n")?;
            check_domain(spec, "n", n, n >= 1.0, "n >= 1")?;
            Shape::Power { n }
        }
        "reflected_power" => {
            only_params(spec, &["n"])?;
            let n = param(spec, "n")?;
            check_domain(spec, "n", n, n >= 1.0, "n >= 1")?;
            Shape::Reflected { n }
        }
        "log_b" => {
            only_params(spec, &["b"])?;
            let b = param(spec, "b")?;
            check_domain(spec, "b", b, b > 1.0, "b > 1")?;
            Shape::LogB { b, ln_b: b.ln() }
        }
        "cosine" => {
            only_params(spec, &[])?;
            Shape::Cosine
        }
        "linear" => {
            only_params(spec, &[])?;
            Shape::Linear
        }
        "exp_shift" => {
            only_params(spec, &["c"])?;
            let c = param(spec, "c")?;
            check_domain(spec, "c", c, (0.0..=1.0).contains(&c), "0 <= c <= 1")?;
            Shape::ExpShift { c }
        }
        "exp_ratio" => {
            only_params(spec, &["a"])?;
            let a = param(spec, "a")?;
            check_domain(spec, "a", a, a > 0.0, "a > 0")?;
            Shape::ExpRatio {
                a,
                expm1_neg_a: (-a).exp_m1(),
            }
        }
        "piecewise_hM" => {
            only_params(spec, &["M"])?;
            let m = param(spec, "M")?;
            check_domain(spec, "M", m, m >= 1.0, "M >= 1")?;
            Shape::Hm {
                m,
                kink: 1.0 - 1.0 / m,
            }
        }
        "custom_table" | "custom-table" => {
            only_params(spec, &[])?;
            let t = spec
                .table
                .as_ref()
                .ok_or_else(|| Error::InvalidTable("custom_table requires `table`".into()))?;
            Shape::Table(MonotoneCubic::new(t.u.clone(), t.value.clone())?)
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    let scale = spec.scale.unwrap_or(1.0);
    if !(scale.is_finite() && scale != 0.0) {
        return Err(Error::ParamOutOfDomain {
            family: spec.family.clone(),
            param: "scale".into(),
            value: scale,
            bound: "finite and nonzero".into(),
        });
    }
    let kinks = match shape {
        Shape::Hm { kink, .. } if kink > 0.0 && kink < 1.0 => vec![kink],
        _ => Vec::new(),
    };
    Ok(Generator {
        spec: spec.clone(),
        shape,
        scale,
        kinks,
    })
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval(u))
    }
}

impl Generator {
    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        make_generator(spec)
    }

    pub fn power(n: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::power(n))
    }

    /// `(1 − u)ⁿ`, convex for n > 1.
    pub fn reflected_power(n: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::reflected_power(n))
    }

    pub fn log_b(b: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::log_b(b))
    }

    pub fn cosine() -> Self {
        make_generator(&GeneratorSpec::cosine()).expect("cosine has no parameters")
    }

    pub fn linear() -> Self {
        make_generator(&GeneratorSpec::linear()).expect("linear has no parameters")
    }

    pub fn exp_shift(c: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::exp_shift(c))
    }

    pub fn exp_ratio(a: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::exp_ratio(a))
    }

    pub fn piecewise_hm(m: f64) -> Result<Self> {
        make_generator(&GeneratorSpec::piecewise_hm(m))
    }

    pub fn custom_table(u: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        make_generator(&GeneratorSpec::custom_table(u, value))
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }

    /// Interior points where the first derivative jumps, in increasing order.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Kinks make a.e. second derivatives useless for concavity, so such
    /// generators report none.
    pub fn has_d2(&self) -> bool {
        !matches!(self.shape, Shape::Hm { .. })
    }

    /// Same shape multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        match &self.shape {
            Shape::Table(t) => {
                let t = t.scaled(k);
                spec.table = Some(TableSpec {
                    u: t.knots().to_vec(),
                    value: t.values().to_vec(),
                });
                spec.scale = self.spec.scale;
            }
            _ => spec.scale = Some(self.scale * k),
        }
        make_generator(&spec)
    }

    /// Returns `self / self.value(0)` and the divisor.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let v0 = self.value(0.0);
        if v0 == 0.0 {
            return Err(Error::ZeroAtOrigin);
        }
        if v0 == 1.0 {
            return Ok((self.clone(), 1.0));
        }
        Ok((self.scaled(1.0 / v0)?, v0))
    }

    pub fn eval_value(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(self.value(u))
    }

    pub fn eval_d1(&self, u: f64, side: Side) -> Result<f64> {
        check_unit(u)?;
        Ok(self.d1(u, side))
    }

    pub fn eval_d2(&self, u: f64, side: Side) -> Result<f64> {
        check_unit(u)?;
        self.d2(u, side)
            .ok_or_else(|| Error::NoSecondDerivative(self.label()))
    }

    /// Unchecked value; `u` is assumed to lie in [0, 1].
    pub fn value(&self, u: f64) -> f64 {
        self.scale * self.base_value(u)
    }

    /// Unchecked first derivative with one-sided semantics at kinks.
    pub fn d1(&self, u: f64, side: Side) -> f64 {
        self.scale * self.base_d1(u, side)
    }

    pub fn d2(&self, u: f64, side: Side) -> Option<f64> {
        self.base_d2(u, side).map(|v| self.scale * v)
    }

    /// `1 − value(u)`.
    pub fn complement(&self, u: f64) -> f64 {
        (1.0 - self.scale) + self.scale * self.base_complement(u)
    }

    pub fn sample(&self, u: f64, side: Side) -> Sample {
        Sample::new(self, u, side)
    }

    fn base_value(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Power { n } => 1.0 - u.powf(*n),
            Shape::Reflected { n } => (1.0 - u).powf(*n),
            Shape::LogB { b, ln_b } => (b - (b - 1.0) * u).ln() / ln_b,
            Shape::Cosine => (FRAC_PI_2 * (1.0 - u)).sin(),
            Shape::Linear => 1.0 - u,
            Shape::ExpShift { c } => (1.0 - u) * (c * u).exp(),
            Shape::ExpRatio { a, expm1_neg_a } => (a * (u - 1.0)).exp_m1() / expm1_neg_a,
            Shape::Hm { m, kink } => {
                if u <= *kink {
                    1.0
                } else {
                    m * (1.0 - u)
                }
            }
            Shape::Table(t) => t.value(u),
        }
    }

    fn base_d1(&self, u: f64, side: Side) -> f64 {
        match &self.shape {
            Shape::Power { n } => {
                if *n == 1.0 {
                    -1.0
                } else {
                    -n * u.powf(n - 1.0)
                }
            }
            Shape::Reflected { n } => {
                if *n == 1.0 {
                    -1.0
                } else {
                    -n * (1.0 - u).powf(n - 1.0)
                }
            }
            Shape::LogB { b, ln_b } => (1.0 - b) / ((b - (b - 1.0) * u) * ln_b),
            Shape::Cosine => -FRAC_PI_2 * (FRAC_PI_2 * u).sin(),
            Shape::Linear => -1.0,
            Shape::ExpShift { c } => (c * u).exp() * (c * (1.0 - u) - 1.0),
            Shape::ExpRatio { a, expm1_neg_a } => a * (a * (u - 1.0)).exp() / expm1_neg_a,
            Shape::Hm { m, kink } => {
                let on_flat = *kink > 0.0 && if side.is_right() { u < *kink } else { u <= *kink };
                if on_flat {
                    0.0
                } else {
                    -m
                }
            }
            Shape::Table(t) => t.d1(u),
        }
    }

    fn base_d2(&self, u: f64, side: Side) -> Option<f64> {
        Some(match &self.shape {
            Shape::Power { n } => {
                if *n == 1.0 {
                    0.0
                } else if u == 0.0 && *n < 2.0 {
                    f64::NEG_INFINITY
                } else {
                    -n * (n - 1.0) * u.powf(n - 2.0)
                }
            }
            Shape::Reflected { n } => {
                if *n == 1.0 {
                    0.0
                } else if u == 1.0 && *n < 2.0 {
                    f64::INFINITY
                } else {
                    n * (n - 1.0) * (1.0 - u).powf(n - 2.0)
                }
            }
            Shape::LogB { b, ln_b } => {
                let w = b - (b - 1.0) * u;
                -(b - 1.0) * (b - 1.0) / (w * w * ln_b)
            }
            Shape::Cosine => -PI * PI / 4.0 * (FRAC_PI_2 * (1.0 - u)).sin(),
            Shape::Linear => 0.0,
            Shape::ExpShift { c } => c * (c * u).exp() * (c * (1.0 - u) - 2.0),
            Shape::ExpRatio { a, expm1_neg_a } => a * a * (a * (u - 1.0)).exp() / expm1_neg_a,
            Shape::Hm { .. } => return None,
            Shape::Table(t) => t.d2(u, side.is_right()),
        })
    }

    fn base_complement(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Power { n } => u.powf(*n),
            Shape::Reflected { n } => -(n * (-u).ln_1p()).exp_m1(),
            Shape::LogB { b, ln_b } => -(-(b - 1.0) / b * u).ln_1p() / ln_b,
            Shape::Cosine => 2.0 * (FRAC_PI_4 * u).sin().powi(2),
            Shape::Linear => u,
            Shape::ExpShift { c } => exp_shift_complement(*c, u),
            Shape::ExpRatio { a, .. } if *a < 700.0 => (a * u).exp_m1() / a.exp_m1(),
            Shape::Hm { m, kink } => {
                if u <= *kink {
                    0.0
                } else {
                    1.0 - m * (1.0 - u)
                }
            }
            _ => 1.0 - self.base_value(u),
        }
    }
}

// 1 − (1 − u)e^{cu} = Σ_{k≥1} c^{k−1}/(k−1)! · (1 − c/k) · u^k, all terms ≥ 0 for c ≤ 1.
fn exp_shift_complement(c: f64, u: f64) -> f64 {
    if c * u > 0.5 || u > 0.5 {
        return 1.0 - (1.0 - u) * (c * u).exp();
    }
    let mut power = u; // c^{k−1}/(k−1)! · u^k
    let mut sum = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        let term = power * (1.0 - c / kf);
        sum += term;
        if power <= 1e-18 * sum.abs() {
            break;
        }
        power *= c * u / kf;
    }
    sum
}

/// Every family of the benchmark catalog with representative parameters.
pub fn catalog() -> Vec<Generator> {
    let specs = [
        GeneratorSpec::power(1.0),
        GeneratorSpec::power(1.5),
        GeneratorSpec::power(2.0),
        GeneratorSpec::power(3.0),
        GeneratorSpec::reflected_power(3.0),
        GeneratorSpec::log_b(2.0),
        GeneratorSpec::log_b(10.0),
        GeneratorSpec::log_b(41.0),
        GeneratorSpec::cosine(),
        GeneratorSpec::linear(),
        GeneratorSpec::exp_shift(0.0),
        GeneratorSpec::exp_shift(0.5),
        GeneratorSpec::exp_shift(1.0),
        GeneratorSpec::exp_ratio(1.0),
        GeneratorSpec::exp_ratio(3.7),
        GeneratorSpec::exp_ratio(4.0),
        GeneratorSpec::piecewise_hm(1.2),
        GeneratorSpec::piecewise_hm(1.5),
    ];
    specs
        .iter()
        .map(|s| make_generator(s).expect("catalog parameters are in domain"))
        .collect()
}

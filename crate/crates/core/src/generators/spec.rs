use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Serializable description of a generator: `{"family":"power","params":{"n":3.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Knots of a `custom_table` generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
    /// Constant multiplier applied to the family's shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub u: Vec<f64>,
    pub value: Vec<f64>,
}

impl GeneratorSpec {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            params: BTreeMap::new(),
            table: None,
            scale: None,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn power(n: f64) -> Self {
        Self::new("power").with_param("n", n)
    }

    pub fn reflected_power(n: f64) -> Self {
        Self::new("reflected_power").with_param("n", n)
    }

    pub fn log_b(b: f64) -> Self {
        Self::new("log_b").with_param("b", b)
    }

    pub fn cosine() -> Self {
        Self::new("cosine")
    }

    pub fn linear() -> Self {
        Self::new("linear")
    }

    pub fn exp_shift(c: f64) -> Self {
        Self::new("exp_shift").with_param("c", c)
    }

    pub fn exp_ratio(a: f64) -> Self {
        Self::new("exp_ratio").with_param("a", a)
    }

    pub fn piecewise_hm(m: f64) -> Self {
        Self::new("piecewise_hM").with_param("M", m)
    }

    pub fn custom_table(u: Vec<f64>, value: Vec<f64>) -> Self {
        Self {
            table: Some(TableSpec { u, value }),
            ..Self::new("custom_table")
        }
    }

    /// Short human-readable label, e.g. `power(n=3)`.
    pub fn label(&self) -> String {
        let mut s = self.family.clone();
        if !self.params.is_empty() {
            let ps: Vec<String> = self
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            s.push_str(&format!("({})", ps.join(",")));
        }
        if let Some(k) = self.scale {
            if k != 1.0 {
                s = format!("{k}*{s}");
            }
        }
        s
    }
}

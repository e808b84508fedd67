//! Separate ratio-type copulas `D_θ(u, v) = uv / (1 − θ f(u) g(v))`.
//!
//! The crate checks the admissibility conditions of a generator pair,
//! computes the valid θ range from the extrema of the dependence field
//! `G = (f − u f′)(g − v g′) − 2uv f′ g′`, and validates concrete models with
//! two independent oracles (the density inequality and rectangle masses).

pub mod analysis;
pub mod conditions;
pub mod copula;
pub mod error;
pub mod fmt;
pub mod generators;
pub mod scan;
pub mod settings;

pub use analysis::{
    closed_form_interval, extremize_g, theta_interval, theta_max_feasible, theta_min_feasible, ExtremaResult,
    ThetaInterval,
};
pub use conditions::{check_pair, find_threshold, Condition, ConditionResult, PairConditions, Witness};
pub use copula::{check_rectangle, check_validity, sample, spearman_rho, CopulaModel, ModelSpec, SampleBatch};
pub use error::{Error, Result};
pub use generators::{make_generator, Generator, GeneratorSpec, Sample, Side};
pub use settings::ScanSettings;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown generator family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` is missing parameter `{param}`")]
    MissingParam { family: String, param: String },

    #[error("family `{family}` does not accept parameter `{param}`")]
    UnknownParam { family: String, param: String },

    #[error("parameter `{param}` = {value} of family `{family}` violates {bound}")]
    ParamOutOfDomain {
        family: String,
        param: String,
        value: f64,
        bound: String,
    },

    #[error("invalid generator table: {0}")]
    InvalidTable(String),

    #[error("point {0} lies outside [0, 1]")]
    OutOfUnitInterval(f64),

    #[error("generator `{0}` has no second derivative")]
    NoSecondDerivative(String),

    #[error("cannot normalize a generator with value(0) = 0")]
    ZeroAtOrigin,

    #[error("invalid scan settings: {0}")]
    InvalidSettings(String),

    #[error("1 - theta*f*g = {denominator} is not positive at ({u}, {v})")]
    NonPositiveDenominator { u: f64, v: f64, denominator: f64 },

    #[error("condition {condition} failed upstream: {reason}")]
    PreconditionFailed { condition: String, reason: String },

    #[error("closed-form interval refused, failed conditions: {}", .0.join(", "))]
    ConditionsNotVerified(Vec<String>),

    #[error("degenerate dependence field: {0}")]
    DegenerateField(String),

    #[error("no infeasible theta found before the floor {floor}")]
    NoInfeasibleTheta { floor: f64 },

    #[error("feasible theta set is not connected: theta = {theta} is feasible beyond an infeasible one")]
    ReentrantFeasibility { theta: f64 },

    #[error("no sign change of the condition over [{lo}, {hi}]: {detail}")]
    NoSignChange { lo: f64, hi: f64, detail: String },

    #[error("model is not a valid copula: {0}")]
    InvalidModel(String),

    #[error("quadrature did not reach the requested accuracy (estimate {estimate:e})")]
    QuadratureAccuracy { estimate: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LevyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("finite activity: total mass {mass} is finite, no density guarantee")]
    FiniteActivity { mass: f64 },

    #[error("{what} failed near {at}: error estimate {err:e} after {depth} subdivisions")]
    QuadratureFailure {
        what: &'static str,
        at: f64,
        err: f64,
        depth: usize,
    },

    #[error("density construction is not monotone at r = {r}: F'(r) = {derivative:e}")]
    MonotonicityViolation { r: f64, derivative: f64 },

    #[error("condition A violated: psi_U/psi_L grows to {ratio} at xi = {xi}")]
    ConditionAViolated { ratio: f64, xi: f64 },

    #[error("growth floor violated: c_floor = {0:e}")]
    FloorViolated(f64),

    #[error("no bracket: target {target} not reached below xi = {cap:e}")]
    BracketFailure { target: f64, cap: f64 },

    #[error("Poisson series truncation insufficient: tail {tail:e} > tolerance {tol:e} at m_max = {m_max}")]
    TruncationInsufficient { tail: f64, tol: f64, m_max: usize },

    #[error("frequency cutoff cap exceeded (Xi = {xi:e}, tail bound {tail:e})")]
    TruncationUnreachable { xi: f64, tail: f64 },

    #[error("maximum of the density lies on the grid boundary at x = {0}")]
    MaxOnBoundary(f64),

    #[error("no finite constants: {0}")]
    NoFiniteConstants(String),

    #[error("precondition failed at t = {t}, v = {v}: {detail}")]
    PreconditionFailed { t: f64, v: f64, detail: String },

    #[error("small-jump cut too coarse: sigma/delta = {ratio} < 5")]
    DeltaTooCoarse { ratio: f64 },

    #[error("density grid covers only {covered:.5} of the samples")]
    GridCoverageInsufficient { covered: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LevyError>;

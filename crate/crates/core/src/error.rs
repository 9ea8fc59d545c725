use thiserror::Error;

/// Errors surfaced by the numerical engine.
///
/// Support violations in divergences are *not* errors: they are reported as
/// `f64::INFINITY` so that suprema and bound families stay well-defined.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e} at entry ({row},{col}))")]
    NotHermitian {
        max_asymmetry: f64,
        row: usize,
        col: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} exceeds the dense-calculus cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("trace is {trace:.17}, expected 1 within {tol:.1e}")]
    InvalidTrace { trace: f64, tol: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not unitary (max |U\u{2020}U - I| entry {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("inverse temperature must be positive, got {beta}")]
    InvalidBeta { beta: f64 },

    #[error("partition function must be positive, got {z}")]
    InvalidPartition { z: f64 },

    #[error("spectral function left its domain at eigenvalue {eigenvalue} (value {value})")]
    FunctionDomain { eigenvalue: f64, value: f64 },

    #[error("piecewise drive segment {index} does not match the protocol endpoint {endpoint} (max deviation {deviation:.3e})")]
    SegmentEndpointMismatch {
        index: usize,
        endpoint: &'static str,
        deviation: f64,
    },

    #[error("piecewise drive needs at least one segment")]
    EmptyDrive,

    #[error("segment duration must be finite and nonnegative, got {duration}")]
    InvalidDuration { duration: f64 },

    #[error("moment order {order} exceeds cap {cap}")]
    MomentOrder { order: usize, cap: usize },

    #[error("cumulant order must be in 1..=4, got {order}")]
    CumulantOrder { order: usize },

    #[error("work probability {probability:.3e} is negative beyond tolerance")]
    NegativeProbability { probability: f64 },

    #[error("work probabilities sum to {total:.17}, expected 1 within {tol:.1e}")]
    NotNormalized { total: f64, tol: f64 },

    #[error("distribution has no atoms")]
    EmptyDistribution,

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("Renyi order must be nonnegative, got {alpha}")]
    NegativeAlpha { alpha: f64 },

    #[error("Renyi order {alpha} is outside the admissible set for this operation")]
    AlphaOutOfRange { alpha: f64 },

    #[error("finite-difference step {h} is outside [{min:.1e}, {max:.1e}]")]
    StepOutOfRange { h: f64, min: f64, max: f64 },

    #[error("operation requires full-rank states (min eigenvalue {min_eigenvalue:.3e})")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("eta = {eta} is a limit point: use the direct CGF at 0 and the Jarzynski value -beta*dF at beta = {beta}")]
    LimitPoint { eta: f64, beta: f64 },

    #[error("eta grid must exclude 0")]
    EtaZeroInGrid,

    #[error("eta = {eta} must lie strictly inside (0, beta = {beta})")]
    EtaOutsideInterval { eta: f64, beta: f64 },

    #[error("initial state does not commute with the initial Hamiltonian (max commutator entry {residual:.3e})")]
    NonCommutingInitialState { residual: f64 },

    #[error("initial state is not thermal (max deviation from the Gibbs state {deviation:.3e})")]
    NotThermal { deviation: f64 },

    #[error("spectral gap {gap} between levels ({m},{n}) is not an integer multiple of the ladder spacing {delta}")]
    IncommensurateGap {
        gap: f64,
        delta: f64,
        m: usize,
        n: usize,
    },

    #[error("margin {margin} is smaller than the largest ladder shift {required}")]
    MarginTooSmall { margin: usize, required: usize },

    #[error("margin {margin} leaves no non-wrapping ladder window for dimension {dim_b}")]
    EmptyWindow { margin: usize, dim_b: usize },

    #[error("initial rung {j0} would wrap the ladder (shift {shift}, dimension {dim_b})")]
    RungOutOfMargin { j0: usize, shift: i64, dim_b: usize },

    #[error("gamma must be nonzero")]
    ZeroGamma,

    #[error("negative power of a singular operator (min eigenvalue {min_eigenvalue:.3e})")]
    SingularPower { min_eigenvalue: f64 },

    #[error("energy {value} is not an eigenvalue of the ladder Hamiltonian")]
    EigenvalueNotInSpectrum { value: f64 },

    #[error("failure probability must lie in (0,1), got {eps}")]
    InvalidEpsilon { eps: f64 },

    #[error("copy count must be at least 1")]
    InvalidCopies,

    #[error("alpha grid is missing the required order {missing}")]
    AlphaGridIncomplete { missing: &'static str },

    #[error("every alpha order was excluded by support violations")]
    AllAlphaExcluded,

    #[error("grid must be non-empty")]
    EmptyGrid,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario '{name}' failed during {stage}: {source}")]
    Scenario {
        name: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_scenario(self, name: &str, stage: &'static str) -> Error {
        Error::Scenario {
            name: name.to_owned(),
            stage,
            source: Box::new(self),
        }
    }
}

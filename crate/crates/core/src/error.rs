use thiserror::Error;

/// Everything that can go wrong while building or analysing a problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("delta spikes are not supported in the background potential Q")]
    UnsupportedBackground,

    #[error("integration failed near x = {abscissa}: {reason}")]
    IntegrationFailure { abscissa: f64, reason: String },

    #[error("the Volterra series path requires an integrable V; delta spikes are measures")]
    MeasureUnsupported,

    #[error("quadrature did not converge for series coefficient {index} (estimate {estimate:e})")]
    Precision { index: usize, estimate: f64 },

    #[error(
        "reference solution is real-valued up to a constant factor (W[u0, conj u0] = 0); \
         no traveling-wave basis, realify the problem and use the Wronskian b instead"
    )]
    NoTravelingBasis,

    #[error("operation requires a real-valued reference solution; realify the problem first")]
    RequiresRealification,

    #[error("b identically zero")]
    Degenerate,

    #[error("a zero of b lies on or next to the contour |lambda| = {radius}; retry with a perturbed radius")]
    ContourCollision { radius: f64 },

    #[error("argument principle did not settle on an integer at |lambda| = {radius} (defect {defect})")]
    WindingUnresolved { radius: f64, defect: f64 },

    #[error("no tent witness found after exhausting the search schedule (inconclusive)")]
    NoWitness,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

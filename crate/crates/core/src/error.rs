use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown function descriptor `{0}`")]
    UnknownDescriptor(String),

    #[error("degenerate window [{0}, {1}]")]
    DegenerateWindow(f64, f64),

    #[error("infinite mass: nonzero constant extension has no finite L^p norm for p = {0}")]
    InfiniteMass(f64),

    #[error("invalid space parameters: {0}")]
    InvalidSpace(String),

    #[error("grids differ (spacing/origin mismatch); resample explicitly")]
    GridMismatch,

    #[error("negative difference order {0}")]
    NegativeOrder(i64),

    #[error("Fourier path requires zero extension")]
    NeedsZeroExtension,

    #[error("invalid line map: {0}")]
    InvalidMap(String),

    #[error("unbounded preimage: target touches a flat tail at value {0}")]
    UnboundedPreimage(f64),

    #[error("derivative jump {jump:e} at breakpoint x = {at} exceeds the C^1 tolerance")]
    NotC1 { at: f64, jump: f64 },

    #[error("invalid partition-of-unity profile: {0}")]
    InvalidProfile(String),

    #[error("gadget placement outside the window: {0}")]
    OutOfWindow(String),

    #[error("parameter below grid resolution: {0}")]
    BelowResolution(String),

    #[error("empty or degenerate test family: {0}")]
    DegenerateFamily(String),

    /// Parameters fall in a region no characterization covers.
    #[error("parameter range refused: {0}")]
    RangeRefused(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

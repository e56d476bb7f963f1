use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("direction must have unit norm (|n| = {0})")]
    InvalidDirection(f64),
    #[error("ill-conditioned curvature: {0}")]
    IllConditionedCurvature(String),
    #[error("wavelength {wavelength_nm} nm outside tabulated range {lo_nm}-{hi_nm} nm")]
    WavelengthOutOfRange { wavelength_nm: f64, lo_nm: f64, hi_nm: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("no tangential solution between 10 and 500 MHz: {0}")]
    NoSolution(String),
    #[error("no Bragg match anywhere on the frequency grid")]
    EmptyBandshape,
    #[error("ripple of {0} dB is not achievable within the detuning bounds")]
    RippleUnachievable(f64),
    #[error("required prism wedge {0:.2} deg exceeds 45 deg")]
    InfeasiblePrism(f64),
    #[error("propagation grid too coarse: {0}")]
    Resolution(String),
    #[error("invalid transducer: {0}")]
    InvalidTransducer(String),
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),
    #[error("addressing needs {needed} resolvable spots per axis but only {available} are available")]
    ResolvableSpotsExceeded { needed: usize, available: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("root not bracketed on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("`{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("`{name}` must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("unknown dimension tag `{0}` (expected mass, charge, length, time or momentum)")]
    UnknownDimension(String),

    #[error("dipole approximation requires d < R/10 (d = {d:e} m, R = {r:e} m)")]
    DipoleApproximation { d: f64, r: f64 },

    #[error("force difference is zero: the two branches never become distinguishable")]
    NoEntanglement,

    #[error("non-relativistic gate violated: need d < c*t0/3 (d = {d:e} m, c*t0 = {ct0:e} m)")]
    Relativistic { d: f64, ct0: f64 },

    #[error("scenario localization sigma = {sigma:e} m is below the minimum {limit:e} m")]
    BelowLocalizationLimit { sigma: f64, limit: f64 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid wavepacket: {0}")]
    InvalidPacket(String),

    #[error("integral diverges: octave contributions stopped decreasing near omega = {omega:e} (partial value {partial:e})")]
    Divergent { omega: f64, partial: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("displacement functions live on different mode grids")]
    MismatchedGrid,

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("wavefunction reached the grid boundary (edge/peak = {ratio:e})")]
    BoundaryContamination { ratio: f64 },

    #[error("norm drifted by {drift:e} during propagation")]
    NormDrift { drift: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: input problems map to 2, physics failures to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Negative { name, value })
    }
}

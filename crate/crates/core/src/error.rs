use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("profile is not Penrose stable: kappa = {kappa:.3e} (minimum {kappa_min:.1e}), winding = {winding}")]
    Unstable { kappa: f64, kappa_min: f64, winding: i64 },

    #[error("dispersion denominator |1 - phi_hat a| = {value:.3e} below kappa_min = {kappa_min:.1e} at {location}")]
    SmallDenominator { value: f64, kappa_min: f64, location: String },

    #[error("Volterra step not contractive: sup|K| dt = {bound:.3e} >= 1/2")]
    StepContraction { bound: f64 },

    #[error("force did not plateau by R = {r:.1}: relative change {change:.3e}")]
    NonPlateau { r: f64, change: f64 },

    #[error("straightening map is not a contraction: probe Lipschitz constant {lipschitz:.3e}")]
    NonContraction { lipschitz: f64 },

    #[error("fixed point did not converge in {iterations} iterations (last step {step:.3e})")]
    NoConvergence { iterations: usize, step: f64 },

    #[error("marker speed {speed:.3e} exceeds CFL bound {bound:.3e}")]
    Cfl { speed: f64, bound: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

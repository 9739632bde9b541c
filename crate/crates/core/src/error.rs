use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid optical density {0}: must be positive")]
    InvalidAlpha(f64),
    #[error("invalid logistic width zbar={0}: must be positive")]
    InvalidZbar(f64),
    #[error("invalid decay rates: {0}")]
    InvalidRates(String),
    #[error("steady state is singular: no ground-state dephasing and both controls vanish")]
    SingularSystem,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("profile is defined on [0, {profile}] but propagation runs over [0, {alpha}]")]
    ProfileDomainMismatch { profile: f64, alpha: f64 },
    #[error("position {zeta} lies outside [0, {alpha}]")]
    OutOfDomain { zeta: f64, alpha: f64 },
    #[error("root of the optimal-angle equation is not bracketed at alpha={0}")]
    NotBracketed(f64),
    #[error("invalid profile table: {0}")]
    InvalidTable(String),
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("invalid search settings: {0}")]
    InvalidSearch(String),
}

impl Error {
    /// Variant name, stable across message wording changes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::InvalidZbar(_) => "InvalidZbar",
            Error::InvalidRates(_) => "InvalidRates",
            Error::SingularSystem => "SingularSystem",
            Error::NonFinite(_) => "NonFinite",
            Error::ProfileDomainMismatch { .. } => "ProfileDomainMismatch",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::NotBracketed(_) => "NotBracketed",
            Error::InvalidTable(_) => "InvalidTable",
            Error::InvalidOptions(_) => "InvalidOptions",
            Error::InvalidSearch(_) => "InvalidSearch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

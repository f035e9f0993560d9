use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("norm {norm:.3e} exceeds the supported envelope {limit:.3e}")]
    NormOutOfRange { norm: f64, limit: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (matrix hash {hash:016x})")]
    EigenNoConvergence { iterations: usize, hash: u64 },

    #[error("eigenpair residual {residual:.3e} exceeds bound {bound:.3e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("singular matrix")]
    Singular,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argument out of supported envelope: {0}")]
    OutOfEnvelope(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("gapless: |h(k)| vanishes at k = {k}")]
    Gapless { k: f64 },

    #[error("band touching at k = {k}: quasienergies {eps:.3e} coincide with 0 or pi/T")]
    BandTouching { k: f64, eps: f64 },

    #[error("chiral symmetry violated at tau = {tau}: max |<sigma_z>| = {certificate:.3e}")]
    ChiralSymmetryViolated { tau: f64, certificate: f64 },

    #[error("winding residual {residual:.3e} too large (raw {raw})")]
    WindingResidual { raw: f64, residual: f64 },

    #[error("Bessel series for bond {bond} not converged at l = {l_max}: partial sum {partial}, last term {last_term:.3e}")]
    SeriesNotConverged {
        bond: usize,
        l_max: usize,
        partial: f64,
        last_term: f64,
    },

    #[error("no zero-energy edge mode: {0}")]
    NoZeroMode(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `A_n` vanished while the right-hand side of the recurrence did not:
    /// the energy sits on a series pole.
    #[error("series pole at n = {n}: A_n = {a_n:e}, numerator = {numerator:e}")]
    Pole { n: usize, a_n: f64, numerator: f64 },

    #[error("truncation condition violated: delta = {actual}, expected {expected}")]
    InconsistentTruncation { expected: f64, actual: f64 },

    #[error("ratio pole: E + g^2 = {0:e}")]
    RatioPole(f64),

    #[error("z = {z} outside the open interval (-{g}, {g})")]
    OutsideDomain { z: f64, g: f64 },

    #[error("Heun series did not converge after {n_terms} terms (tail {tail_bound:e})")]
    NotConverged { n_terms: usize, tail_bound: f64 },

    #[error("the two forms of K disagree: {first:e} vs {second:e}")]
    KFormMismatch { first: f64, second: f64 },

    #[error("Wronskian mirror identity violated: {value:e} vs {mirror:e}")]
    MirrorMismatch { value: f64, mirror: f64 },

    #[error("Fock expansion tail {tail:e} at n_max = {n_max} exceeds tolerance")]
    Truncation { n_max: usize, tail: f64 },

    #[error("combination vanishes identically at E = {0} (wrong parity for this kind)")]
    VanishingCombination(f64),

    #[error("bracket [{lo}, {hi}] lost its sign change")]
    LostBracket { lo: f64, hi: f64 },

    #[error("only {converged} eigenvalues converged, need {required}")]
    NonConvergence { converged: usize, required: usize },

    #[error("parameters are off the Judd curve (residual {0:e})")]
    OffCurve(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
}

impl Error {
    /// Errors caused by failed convergence rather than by the inputs.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::NonConvergence { .. }
                | Error::Truncation { .. }
                | Error::LostBracket { .. }
        )
    }
}

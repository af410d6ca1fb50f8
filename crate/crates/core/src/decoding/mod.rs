//! Codebooks, decoders and their error probabilities.
//!
//! Error probabilities are computed either exactly, by enumerating every
//! output sequence, or by Monte Carlo with one reproducible random stream
//! per message.

mod codebook;
mod decoder;
mod error_prob;

pub use codebook::Codebook;
pub use decoder::{
    decode, BuiltinMetric, Decision, DecoderKind, DecoderSpec, LikelihoodMetric, Metric, MiMetric, TiePolicy,
};
pub use error_prob::{
    commitment_harness, empirical_exponent, exact_error, exact_error_with_budget, monte_carlo_error,
    stochastic_vs_deterministic, CommitmentRecord, EmpiricalExponent, ErrorReport, FactorTwoRecord, Method,
    DEFAULT_ENUMERATION_BUDGET,
};

//! Error exponents and adversarial constructions for small discrete
//! memoryless channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`probkit`]: probability vectors, types, joint types, entropies and
//!   binary divergences.
//! - [`channels`]: row-stochastic channel matrices, the `W_eps` / `W_hat_eps`
//!   quaternary-output family, the BSC and n-letter products.
//! - [`exponents`]: expurgated, converse and rate-zero random-coding
//!   exponents, the critical crossover and the rate threshold, and the
//!   sampled curves built from them.
//! - [`construction`]: the kappa bijection, confusable output sequences and the
//!   single-symbol modification that defeats MMI decoding.
//! - [`decoding`]: codebooks, ML / MMI / metric decoders, exact enumeration
//!   and Monte Carlo error probabilities.
//! - [`appendix_opt`]: the rate-zero metric-dependent exponent as a
//!   constrained divergence minimisation, with brute-force oracles.
//!
//! All information quantities are in nats. [`Unit`] converts at the edges.

pub mod appendix_opt;
pub mod channels;
pub mod construction;
pub mod decoding;
mod error;
pub mod exponents;
pub mod optim;
pub mod probkit;

pub use channels::{Channel, ChannelSpec};
pub use error::{Error, Result};
pub use exponents::{ExponentCurve, ExponentSearchConfig, Unit};
pub use probkit::{Alphabet, JointType, ProbVec};

//! Online convex optimization with variation-dependent guarantees.
//!
//! The crate implements a family of first-order online algorithms whose
//! regret scales with how much the cost sequence actually changes over
//! time rather than with the horizon alone:
//!
//! * follow-the-regularized-leader for linear costs ([`algorithms::run_ftrl_linear`])
//!   and its realized-gradient variant ([`algorithms::run_ftrl_on_gradients`]),
//! * an improved FTRL that probes the previous cost at an auxiliary
//!   search point ([`algorithms::run_improved_ftrl`]),
//! * a prox-style variant ([`algorithms::run_prox`]) and its mirror-map
//!   generalization ([`algorithms::run_general_prox`]),
//! * a multi-point bandit version that sees only function values
//!   ([`algorithms::run_bandit`]).
//!
//! [`costs`] defines the cost families and the variation quantities the
//! step sizes and bounds are stated in. [`harness`] measures regret
//! against the best fixed decision in hindsight and re-checks the
//! claimed inequalities on concrete traces. [`scenarios`] provides
//! seeded generators used by the experiment CLI and the test suite.
//!
//! Everything is deterministic: randomized pieces draw from an explicit
//! [`rng::SplitMix64`] stream so identical seeds reproduce identical
//! traces bit for bit.

pub mod algorithms;
pub mod costs;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod scenarios;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Library version, echoed into experiment summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Workbench for ordering constraint satisfaction problems.
//!
//! * [`order`]: predicates over permutations, the tie extension, instances
//!   and the value of an ordering.
//! * [`solvers`]: exhaustive search, hill climbing and Monte-Carlo evaluation.
//! * [`distributions`]: the base distributions of the dictatorship tests and
//!   exact verifiers for their properties.
//! * [`reduction`]: Label Cover, the noisy test distribution, the reduction
//!   to OCSP instances, the NBTW overlay, the MAS gadget and influence decoding.
//! * [`analysis`]: noise operator, Efron–Stein decomposition, influences,
//!   bucketing and numeric checks of the soundness bounds.

pub mod analysis;
pub mod distributions;
mod error;
pub mod order;
pub mod rational;
pub mod reduction;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use order::{ordering_value, OcspInstance, Ordering, OrderingPredicate};
pub use rational::Rational;
pub use solvers::{exact_value, local_search, monte_carlo_value, SolveReport};

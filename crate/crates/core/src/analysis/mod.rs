//! Analysis of functions on finite product spaces: noise operator,
//! Efron–Stein decomposition, influences, bucketing, and exact checks of the
//! soundness bounds.

mod bounds;
mod bucketing;
mod fourier;
mod space;

pub use bounds::{
    bucket_cross_influences, bucketed_acceptance, verify_bucketing_loss, verify_decoupling_bound, verify_pair_bound,
    BucketingReport, DecouplingReport, PairBoundReport,
};
pub use bucketing::{bucketize, Bucketing};
pub use fourier::{
    cross_influence, efron_stein, hc_delta, hc_delta_exact, influence, noise_operator, noisy_influence,
    noisy_influences, pair_bound_delta, total_noisy_influence, verify_hc, HcReport, MAX_ES_DIM, NORM_TOLERANCE,
};
pub use space::{FactorFile, FiniteFunction, FunctionFile, ProductSpace, Scalar, MAX_POINTS};

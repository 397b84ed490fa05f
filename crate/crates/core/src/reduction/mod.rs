//! Label Cover, the noisy dictatorship test, the reduction to OCSP
//! instances, the NBTW overlay, the MAS gadget and influence decoding.

mod compile;
mod decode;
mod labelcover;

pub use compile::{
    dictator_assignment, nbtw_components, nbtw_to_mas, overlay_nbtw, reduce_components, reduce_lc, variable_name,
    Assignment, AssignmentFile, Component, ReduceMode, Reduced, ReducedInstance, ReductionSampler, TableVar,
    AUTO_CONSTRAINT_CAP, DEFAULT_VARIABLE_CAP,
};
pub use decode::{
    decode_distribution, decode_labeling, edge_agreements, verify_aggregate_bound, AggregateReport, Decoder,
    EdgeAgreement, LabelDistribution,
};
pub use dict_test::{
    acceptance_probability, acceptance_probability_mc, acceptance_with_pmf, dict_test_pmf, dict_test_sample,
    query_outputs, FunctionTable, QueryPmf, QueryVar, TestDistribution, TestOutcome, TestSampler, MAX_PMF_OUTCOMES,
};
pub use labelcover::{
    generate_lc, lc_exact_value, lc_exact_value_with_cap, Edge, EdgeFile, LabelCoverFile, LabelCoverInstance,
    Labeling, LcGenParams, DEFAULT_LC_CAP,
};

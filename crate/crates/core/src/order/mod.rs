//! Ordering CSP semantics: predicates over permutations, their extension to
//! tied tuples, instances and the value of an ordering.

mod instance;
pub mod perm;
mod predicate;

pub use instance::{ordering_value, Constraint, ConstraintFile, InstanceFile, OcspInstance, Ordering};
pub use perm::natural_order_permutation;
pub use predicate::{OrderingPredicate, PredicateSpec};

use crate::error::Result;
use crate::rational::{self, Rational};

/// Payoff of `pred` on a tuple of ranks that may contain ties.
pub fn extended_predicate_eval(pred: &OrderingPredicate, tuple: &[i64]) -> Result<Rational> {
    pred.extended_eval(tuple)
}

pub fn random_ordering_value(pred: &OrderingPredicate) -> Rational {
    pred.random_ordering_value()
}

/// The arcs of the acyclic-subgraph gadget, in walk order
/// `b → x → a → z → b → y → a`.
pub const GADGET_ARCS: [(&str, &str); 6] = [("b", "x"), ("x", "a"), ("a", "z"), ("z", "b"), ("b", "y"), ("y", "a")];

/// The five-vertex, six-arc gadget graph on `{x, y, z, a, b}` with equal weights.
pub fn gadget_graph() -> OcspInstance {
    let arcs: Vec<(Vec<&str>, usize, Rational)> =
        GADGET_ARCS.iter().map(|(u, v)| (vec![*u, *v], 0, rational::ratio(1, 6))).collect();
    OcspInstance::from_named(&["x", "y", "z", "a", "b"], vec![OrderingPredicate::mas()], &arcs)
        .expect("gadget graph is well formed")
}

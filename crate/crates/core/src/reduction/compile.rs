use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dict_test::{dict_test_pmf, domain_size, FunctionTable, TestDistribution, TestSampler};
use super::labelcover::{LabelCoverInstance, Labeling};
use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::order::{Constraint, OcspInstance, OrderingPredicate};
use crate::rational::{self, Rational};
use crate::rng::SeedRng;
use crate::solvers::{ConstraintSampler, RankAssignment};

/// Default cap on the variable count of a materialized reduction.
pub const DEFAULT_VARIABLE_CAP: usize = 100_000;

/// In [`ReduceMode::Auto`], reductions whose test outcome spaces add up to
/// more than this many points are streamed rather than materialized.
pub const AUTO_CONSTRAINT_CAP: usize = 100_000;

/// Variable `f_u(x)` (left) or `g_v(y)` (right), by vertex and table index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableVar {
    pub right: bool,
    pub vertex: usize,
    pub point: usize,
}

/// Per-vertex tables: `f_u: Q1^L → Z` for `u ∈ U`, `g_v: Q2^R → Z` for `v ∈ V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub left: Vec<FunctionTable>,
    pub right: Vec<FunctionTable>,
}

impl Assignment {
    pub fn check(&self, lc: &LabelCoverInstance, q1: &[i64], q2: &[i64]) -> Result<()> {
        if self.left.len() != lc.left().len() || self.right.len() != lc.right().len() {
            return Err(Error::DomainMismatch("assignment does not cover every vertex".into()));
        }
        for f in &self.left {
            if f.alphabet != q1 || f.dim != lc.l() {
                return Err(Error::DomainMismatch("left table is not defined on Q1^L".into()));
            }
        }
        for g in &self.right {
            if g.alphabet != q2 || g.dim != lc.r() {
                return Err(Error::DomainMismatch("right table is not defined on Q2^R".into()));
            }
        }
        Ok(())
    }

    /// Dense tables keyed by vertex name.
    pub fn to_file(&self, lc: &LabelCoverInstance) -> AssignmentFile {
        AssignmentFile {
            left: lc.left().iter().cloned().zip(self.left.iter().cloned()).collect(),
            right: lc.right().iter().cloned().zip(self.right.iter().cloned()).collect(),
        }
    }

    pub fn from_file(lc: &LabelCoverInstance, file: &AssignmentFile) -> Result<Self> {
        let take = |names: &[String], map: &BTreeMap<String, FunctionTable>| {
            if map.len() != names.len() {
                return Err(Error::DomainMismatch("assignment has tables for unknown vertices".into()));
            }
            names
                .iter()
                .map(|n| map.get(n).cloned().ok_or_else(|| Error::UnrankedVariable(n.clone())))
                .collect::<Result<Vec<_>>>()
        };
        let out = Self { left: take(lc.left(), &file.left)?, right: take(lc.right(), &file.right)? };
        for t in out.left.iter().chain(&out.right) {
            FunctionTable::new(t.alphabet.clone(), t.dim, t.values.clone())?;
        }
        Ok(out)
    }
}

impl RankAssignment<TableVar> for Assignment {
    fn rank(&self, var: &TableVar) -> Result<i64> {
        let tables = if var.right { &self.right } else { &self.left };
        tables
            .get(var.vertex)
            .and_then(|t| t.values.get(var.point))
            .copied()
            .ok_or_else(|| Error::UnrankedVariable(format!("{var:?}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentFile {
    pub left: BTreeMap<String, FunctionTable>,
    pub right: BTreeMap<String, FunctionTable>,
}

/// `f_u(x) = x_{λ(u)}`, `g_v(y) = y_{λ(v)}`.
pub fn dictator_assignment(lc: &LabelCoverInstance, labeling: &Labeling, q1: &[i64], q2: &[i64]) -> Result<Assignment> {
    labeling.check(lc)?;
    Ok(Assignment {
        left: labeling.left.iter().map(|&a| FunctionTable::dictator(q1, lc.l(), a)).collect::<Result<_>>()?,
        right: labeling.right.iter().map(|&b| FunctionTable::dictator(q2, lc.r(), b)).collect::<Result<_>>()?,
    })
}

/// One component of a reduction: a base distribution and the predicate
/// applied to its queries.
#[derive(Debug, Clone)]
pub struct Component {
    pub base: BaseDistribution,
    pub pred: OrderingPredicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceMode {
    /// Materialize when under the caps, otherwise stream.
    Auto,
    Materialize,
    Stream,
}

/// A materialized instance with the table variable behind each instance variable.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub instance: OcspInstance,
    pub vars: Vec<TableVar>,
}

impl ReducedInstance {
    /// Ranks of an assignment in instance-variable order.
    pub fn ranks(&self, assignment: &Assignment) -> Result<Vec<i64>> {
        self.vars.iter().map(|v| assignment.rank(v)).collect()
    }

    pub fn value(&self, assignment: &Assignment) -> Result<Rational> {
        self.instance.value_of_ranks(&self.ranks(assignment)?)
    }
}

pub enum Reduced {
    Materialized(ReducedInstance),
    Streaming(ReductionSampler),
}

/// Draws constraints of the reduction: a uniform component, an edge by
/// weight, then one run of the noisy test on that edge.
#[derive(Debug, Clone)]
pub struct ReductionSampler {
    lc: LabelCoverInstance,
    preds: Vec<OrderingPredicate>,
    /// `samplers[c][e]` for component `c` and edge `e`.
    samplers: Vec<Vec<TestSampler>>,
    edges: WeightedIndex<f64>,
}

impl ReductionSampler {
    pub fn label_cover(&self) -> &LabelCoverInstance {
        &self.lc
    }
}

impl ConstraintSampler for ReductionSampler {
    type Var = TableVar;

    fn predicates(&self) -> &[OrderingPredicate] {
        &self.preds
    }

    fn sample(&self, rng: &mut SeedRng, vars: &mut Vec<TableVar>) -> Result<usize> {
        let c = rng.random_range(0..self.samplers.len());
        let e = self.edges.sample(rng);
        let edge = &self.lc.edges()[e];
        let sampler = &self.samplers[c][e];
        let out = sampler.sample(rng)?;
        let td = sampler.distribution();
        let (k1, k2) = (td.base.q1(), td.base.q2());
        vars.clear();
        for k in 0..td.t() {
            vars.push(TableVar { right: false, vertex: edge.u, point: point_index(k1, &out.x_query(k)) });
        }
        for k in 0..td.m() - td.t() {
            vars.push(TableVar { right: true, vertex: edge.v, point: point_index(k2, &out.y_query(k)) });
        }
        Ok(c)
    }
}

fn point_index(alphabet: &[i64], point: &[i64]) -> usize {
    point.iter().fold(0, |acc, x| acc * alphabet.len() + alphabet.binary_search(x).expect("value in alphabet"))
}

fn render_point(alphabet: &[i64], dim: usize, mut index: usize) -> String {
    let mut digits = vec![0i64; dim];
    for d in digits.iter_mut().rev() {
        *d = alphabet[index % alphabet.len()];
        index /= alphabet.len();
    }
    digits.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

/// Instance-variable name of a table variable: `vertex|x1,…,xk`.
pub fn variable_name(lc: &LabelCoverInstance, q1: &[i64], q2: &[i64], var: &TableVar) -> String {
    if var.right {
        format!("{}|{}", lc.right()[var.vertex], render_point(q2, lc.r(), var.point))
    } else {
        format!("{}|{}", lc.left()[var.vertex], render_point(q1, lc.l(), var.point))
    }
}

fn check_components(components: &[Component]) -> Result<()> {
    let first = components.first().ok_or_else(|| Error::BadParameter("no reduction components".into()))?;
    for c in components {
        if c.pred.arity() != c.base.m() {
            return Err(Error::ArityMismatch { expected: c.base.m(), got: c.pred.arity() });
        }
        if c.base.q1() != first.base.q1() || c.base.q2() != first.base.q2() || c.base.t() != first.base.t() {
            return Err(Error::DomainMismatch("components must share alphabets and split".into()));
        }
    }
    Ok(())
}

/// Uniform mixture of the reductions of `components` over one shared variable set.
pub fn reduce_components(
    lc: &LabelCoverInstance,
    components: &[Component],
    gamma: &Rational,
    mode: ReduceMode,
    variable_cap: usize,
) -> Result<Reduced> {
    check_components(components)?;
    let base = &components[0].base;
    let (q1, q2) = (base.q1().to_vec(), base.q2().to_vec());
    let tds: Vec<Vec<TestDistribution>> = components
        .iter()
        .map(|c| {
            lc.edges()
                .iter()
                .map(|e| TestDistribution::new(c.base.clone(), gamma.clone(), e.pi.clone(), lc.l()))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let left_size = domain_size(q1.len(), lc.l());
    let right_size = domain_size(q2.len(), lc.r());
    let var_count = match (&left_size, &right_size) {
        (Ok(a), Ok(b)) => lc.left().len().checked_mul(*a).and_then(|x| x.checked_add(lc.right().len().checked_mul(*b)?)),
        _ => None,
    };
    let fits = var_count.is_some_and(|n| n <= variable_cap);
    let outcome_points = tds.iter().flatten().try_fold(0usize, |acc, td| {
        let per_test = (q1.len().checked_pow((lc.l() * td.t()) as u32))?
            .checked_mul(q2.len().checked_pow((lc.r() * (td.m() - td.t())) as u32)?)?;
        acc.checked_add(per_test)
    });
    let materialize = match mode {
        ReduceMode::Stream => false,
        ReduceMode::Materialize => {
            if !fits {
                return Err(Error::TooLarge(format!("reduced instance exceeds {variable_cap} variables")));
            }
            true
        }
        ReduceMode::Auto => fits && outcome_points.is_some_and(|n| n <= AUTO_CONSTRAINT_CAP),
    };

    if !materialize {
        let weights: Vec<f64> = lc.edge_probabilities().iter().map(rational::to_f64).collect();
        return Ok(Reduced::Streaming(ReductionSampler {
            lc: lc.clone(),
            preds: components.iter().map(|c| c.pred.clone()).collect(),
            samplers: tds.iter().map(|row| row.iter().map(TestSampler::new).collect()).collect(),
            edges: WeightedIndex::new(&weights).expect("positive edge weights"),
        }));
    }

    let (left_size, right_size) = (left_size?, right_size?);
    let mut vars = Vec::with_capacity(var_count.unwrap());
    for u in 0..lc.left().len() {
        vars.extend((0..left_size).map(|point| TableVar { right: false, vertex: u, point }));
    }
    for v in 0..lc.right().len() {
        vars.extend((0..right_size).map(|point| TableVar { right: true, vertex: v, point }));
    }
    let slot = |var: &TableVar| {
        if var.right {
            lc.left().len() * left_size + var.vertex * right_size + var.point
        } else {
            var.vertex * left_size + var.point
        }
    };

    let share = Rational::one() / rational::int(components.len() as i64);
    let probs = lc.edge_probabilities();
    let mut merged: BTreeMap<(usize, Vec<usize>), Rational> = BTreeMap::new();
    for (c, row) in tds.iter().enumerate() {
        for (e, td) in row.iter().enumerate() {
            let edge = &lc.edges()[e];
            let weight = &share * &probs[e];
            let pmf = match dict_test_pmf(td) {
                Ok(p) => p,
                Err(err) if mode == ReduceMode::Auto => {
                    log::warn!("falling back to streaming reduction: {err}");
                    return reduce_components(lc, components, gamma, ReduceMode::Stream, variable_cap);
                }
                Err(err) => return Err(err),
            };
            for (queries, p) in &pmf.entries {
                let key: Vec<usize> = queries
                    .iter()
                    .enumerate()
                    .map(|(k, &point)| {
                        let var = if k < pmf.t {
                            TableVar { right: false, vertex: edge.u, point }
                        } else {
                            TableVar { right: true, vertex: edge.v, point }
                        };
                        slot(&var)
                    })
                    .collect();
                *merged.entry((c, key)).or_insert_with(Rational::zero) += p * &weight;
            }
        }
    }
    let constraints = merged.into_iter().map(|((pred, vars), weight)| Constraint { vars, pred, weight }).collect();
    let names = vars.iter().map(|v| variable_name(lc, &q1, &q2, v)).collect();
    let instance = OcspInstance::new(names, components.iter().map(|c| c.pred.clone()).collect(), constraints)?;
    Ok(Reduced::Materialized(ReducedInstance { instance, vars }))
}

/// The reduction of `lc` through the noisy test on `base` with predicate `pred`.
pub fn reduce_lc(
    lc: &LabelCoverInstance,
    base: &BaseDistribution,
    gamma: &Rational,
    pred: &OrderingPredicate,
    mode: ReduceMode,
    variable_cap: usize,
) -> Result<Reduced> {
    reduce_components(lc, &[Component { base: base.clone(), pred: pred.clone() }], gamma, mode, variable_cap)
}

/// The three NBTW components `(nbtw_permuted(q, j), NBTW_j)`, `j = 1, 2, 3`.
pub fn nbtw_components(q: usize) -> Result<Vec<Component>> {
    (1..=3)
        .map(|j| Ok(Component { base: BaseDistribution::nbtw_permuted(q, j)?, pred: OrderingPredicate::nbtw_j(j)? }))
        .collect()
}

/// `(1/3) Σ_j` of the NBTW_j reductions over their shared variables.
pub fn overlay_nbtw(
    lc: &LabelCoverInstance,
    q: usize,
    gamma: &Rational,
    mode: ReduceMode,
    variable_cap: usize,
) -> Result<Reduced> {
    reduce_components(lc, &nbtw_components(q)?, gamma, mode, variable_cap)
}

/// Replaces each NBTW constraint on `(x, y, z)` by six arcs
/// `b→x, x→a, a→z, z→b, b→y, y→a` on fresh `a, b`, each carrying a sixth
/// of its weight.
pub fn nbtw_to_mas(inst: &OcspInstance) -> Result<OcspInstance> {
    let nbtw = OrderingPredicate::nbtw();
    let mut names: Vec<String> = inst.variables().to_vec();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut fresh = |stem: String| {
        let mut name = stem.clone();
        let mut k = 0;
        while !taken.insert(name.clone()) {
            k += 1;
            name = format!("{stem}~{k}");
        }
        name
    };
    let sixth = rational::ratio(1, 6);
    let mut arcs = Vec::with_capacity(inst.constraints().len() * 6);
    for (k, c) in inst.constraints().iter().enumerate() {
        let pred = &inst.predicates()[c.pred];
        if pred.arity() != 3 || !pred.same_payoffs(&nbtw) {
            return Err(Error::NotNbtw(k));
        }
        let (x, y, z) = (c.vars[0], c.vars[1], c.vars[2]);
        if x == y || y == z || x == z {
            return Err(Error::NotNbtw(k));
        }
        let a = names.len();
        names.push(fresh(format!("a#{k}")));
        let b = names.len();
        names.push(fresh(format!("b#{k}")));
        let weight = &c.weight * &sixth;
        for (from, to) in [(b, x), (x, a), (a, z), (z, b), (b, y), (y, a)] {
            arcs.push(Constraint { vars: vec![from, to], pred: 0, weight: weight.clone() });
        }
    }
    OcspInstance::new(names, vec![OrderingPredicate::mas()], arcs)
}

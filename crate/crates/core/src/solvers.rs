//! Exact exhaustive search, hill climbing and Monte-Carlo evaluation.

use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{OcspInstance, Ordering, OrderingPredicate};
use crate::rational::{self, Rational};
use crate::rng::{derive_seed, rng_from_seed, SeedRng};

pub const DEFAULT_EXACT_CAP: usize = 10;

/// Samples per Monte-Carlo shard; shards are the unit of seeding.
const MC_SHARD: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Random,
    LocalSearch,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Exact => "exact",
            Method::Random => "random",
            Method::LocalSearch => "local_search",
            Method::MonteCarlo => "monte_carlo",
        };
        f.write_str(s)
    }
}

/// Either an exact rational or a floating-point estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rational::to_f64(r),
            Value::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => s.serialize_str(&rational::format(r)),
            Value::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => rational::parse(&s).map(Value::Exact).map_err(serde::de::Error::custom),
            Raw::F(x) => Ok(Value::Approx(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub method: Method,
    pub best_value: Value,
    pub best_ordering: Option<Ordering>,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_halfwidth: Option<f64>,
    pub seed: Option<u64>,
}

/// Integer-scaled payoff tables for fast repeated evaluation of one instance.
///
/// Each constraint is keyed by its distinct variables; the payoff of every
/// relative order of those variables is precomputed (through the tie
/// extension when the tuple repeats a variable) and scaled by a common
/// denominator so that scores are exact integers.
#[derive(Debug, Clone)]
struct ScaledEvaluator<S> {
    distinct: Vec<Vec<usize>>,
    tables: Vec<Vec<S>>,
    best: Vec<S>,
    by_var: Vec<Vec<usize>>,
    scale: BigInt,
}

trait Score: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> + Send + Sync {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Score for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128()
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Score for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Lexicographic rank of the relative order of distinct `ranks`.
fn pattern_index(ranks: &[i64]) -> usize {
    let k = ranks.len();
    let mut idx = 0;
    for i in 0..k {
        let smaller = ranks[i + 1..].iter().filter(|&&r| r < ranks[i]).count();
        idx = idx * (k - i) + smaller;
    }
    idx
}

impl<S: Score> ScaledEvaluator<S> {
    fn new(inst: &OcspInstance) -> Result<Self> {
        let n = inst.num_variables();
        let mut distinct = Vec::new();
        let mut raw_tables: Vec<Vec<Rational>> = Vec::new();
        for c in inst.constraints() {
            let mut d: Vec<usize> = c.vars.clone();
            d.sort_unstable();
            d.dedup();
            let pred = &inst.predicates()[c.pred];
            let mut table = Vec::new();
            for pattern in crate::order::perm::all_permutations(d.len()) {
                let tuple: Vec<i64> = c
                    .vars
                    .iter()
                    .map(|v| pattern[d.binary_search(v).unwrap()] as i64)
                    .collect();
                table.push(pred.extended_eval(&tuple)? * &c.weight);
            }
            distinct.push(d);
            raw_tables.push(table);
        }
        let scale = raw_tables
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let to_score = |r: &Rational| -> Result<S> {
            let scaled = r * Rational::from_integer(scale.clone());
            S::from_big(&scaled.to_integer())
                .ok_or_else(|| Error::TooLarge("weight denominators overflow the integer score type".into()))
        };
        let tables: Vec<Vec<S>> = raw_tables
            .iter()
            .map(|t| t.iter().map(to_score).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        // total scaled mass is at most `scale`; make sure sums cannot overflow
        S::from_big(&(scale.clone() * 4))
            .ok_or_else(|| Error::TooLarge("weight denominators overflow the integer score type".into()))?;
        let best = tables.iter().map(|t| t.iter().max().cloned().unwrap_or_else(S::zero)).collect();
        let mut by_var = vec![Vec::new(); n];
        for (k, d) in distinct.iter().enumerate() {
            for &v in d {
                by_var[v].push(k);
            }
        }
        Ok(Self { distinct, tables, best, by_var, scale })
    }

    fn constraint_score(&self, k: usize, ranks: &[i64]) -> S {
        let mut buf = [0i64; 16];
        let d = &self.distinct[k];
        for (slot, &v) in d.iter().enumerate() {
            buf[slot] = ranks[v];
        }
        self.tables[k][pattern_index(&buf[..d.len()])].clone()
    }

    fn score(&self, ranks: &[i64]) -> S {
        (0..self.tables.len()).fold(S::zero(), |acc, k| acc + self.constraint_score(k, ranks))
    }

    fn to_rational(&self, s: &BigInt) -> Rational {
        Rational::new(s.clone(), self.scale.clone())
    }
}

struct Search<'a, S> {
    eval: &'a ScaledEvaluator<S>,
    n: usize,
    ranks: Vec<i64>,
    placed: Vec<bool>,
    placed_count: Vec<usize>,
    sequence: Vec<usize>,
    best: Option<(S, Vec<usize>)>,
}

impl<'a, S: Score> Search<'a, S> {
    fn new(eval: &'a ScaledEvaluator<S>, n: usize) -> Self {
        Self {
            eval,
            n,
            ranks: vec![0; n],
            placed: vec![false; n],
            placed_count: vec![0; eval.tables.len()],
            sequence: Vec::with_capacity(n),
            best: None,
        }
    }

    /// Places `v` at the next position; returns the score gained and the
    /// bound lost from completed constraints.
    fn place(&mut self, v: usize) -> (S, S) {
        let pos = self.sequence.len();
        self.ranks[v] = pos as i64;
        self.placed[v] = true;
        self.sequence.push(v);
        let mut gain = S::zero();
        let mut spent = S::zero();
        for &k in &self.eval.by_var[v] {
            self.placed_count[k] += 1;
            if self.placed_count[k] == self.eval.distinct[k].len() {
                gain = gain + self.eval.constraint_score(k, &self.ranks);
                spent = spent + self.eval.best[k].clone();
            }
        }
        (gain, spent)
    }

    fn unplace(&mut self, v: usize) {
        for &k in &self.eval.by_var[v] {
            self.placed_count[k] -= 1;
        }
        self.placed[v] = false;
        self.sequence.pop();
    }

    fn dfs(&mut self, score: S, remaining: S) {
        if self.sequence.len() == self.n {
            let better = match &self.best {
                None => true,
                Some((b, _)) => score > *b,
            };
            if better {
                self.best = Some((score, self.sequence.clone()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if score.clone() + remaining.clone() <= *b {
                return;
            }
        }
        for v in 0..self.n {
            if self.placed[v] {
                continue;
            }
            let (gain, spent) = self.place(v);
            self.dfs(score.clone() + gain, remaining.clone() - spent);
            self.unplace(v);
        }
    }
}

fn exhaustive<S: Score>(inst: &OcspInstance) -> Result<(Rational, Vec<usize>)> {
    let eval = ScaledEvaluator::<S>::new(inst)?;
    let n = inst.num_variables();
    let total_best = eval.best.iter().cloned().fold(S::zero(), |a, b| a + b);
    // one shard per first variable; lexicographic order is preserved by
    // taking the earliest shard among equal scores
    let shards: Vec<Option<(S, Vec<usize>)>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut search = Search::new(&eval, n);
            let (gain, spent) = search.place(first);
            search.dfs(gain, total_best.clone() - spent);
            search.best
        })
        .collect();
    let mut best: Option<(S, Vec<usize>)> = None;
    for (score, seq) in shards.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, seq));
        }
    }
    let (score, seq) = best.expect("at least one variable");
    Ok((eval.to_rational(&score.to_big()), seq))
}

fn ordering_from_sequence(inst: &OcspInstance, seq: &[usize]) -> Ordering {
    let names: Vec<&str> = seq.iter().map(|&v| inst.variables()[v].as_str()).collect();
    Ordering::from_sequence(&names)
}

/// Maximum value over all injective orderings, with the lexicographically
/// smallest optimal variable sequence.
pub fn exact_value(inst: &OcspInstance) -> Result<SolveReport> {
    exact_value_with_cap(inst, DEFAULT_EXACT_CAP)
}

pub fn exact_value_with_cap(inst: &OcspInstance, cap: usize) -> Result<SolveReport> {
    let n = inst.num_variables();
    if n > cap {
        return Err(Error::TooLarge(format!("{n} variables exceed the exhaustive-search cap of {cap}")));
    }
    let report = |value: Rational, seq: Vec<usize>| SolveReport {
        method: Method::Exact,
        best_value: Value::Exact(value),
        best_ordering: Some(ordering_from_sequence(inst, &seq)),
        samples: 0,
        ci_halfwidth: None,
        seed: None,
    };
    if inst.is_empty() || n == 0 {
        log::warn!("instance has no constraints; value defined as 1");
        return Ok(report(Rational::one(), (0..n).collect()));
    }
    let (value, seq) = match exhaustive::<i128>(inst) {
        Ok(r) => r,
        Err(Error::TooLarge(_)) => exhaustive::<BigInt>(inst)?,
        Err(e) => return Err(e),
    };
    Ok(report(value, seq))
}

/// Uniformly random variable sequence derived from `seed`.
pub fn random_start(n: usize, seed: u64) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..n).collect();
    seq.shuffle(&mut rng_from_seed(seed));
    seq
}

fn neighbours(seq: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let n = seq.len();
    let swaps = (0..n.saturating_sub(1)).map(move |i| {
        let mut s = seq.to_vec();
        s.swap(i, i + 1);
        s
    });
    let moves = (0..n).flat_map(move |from| {
        (0..n).filter(move |&to| to != from).map(move |to| {
            let mut s = seq.to_vec();
            let v = s.remove(from);
            s.insert(to, v);
            s
        })
    });
    swaps.chain(moves)
}

fn ranks_of(seq: &[usize]) -> Vec<i64> {
    let mut ranks = vec![0; seq.len()];
    for (pos, &v) in seq.iter().enumerate() {
        ranks[v] = pos as i64;
    }
    ranks
}

/// Best-improvement hill climbing over adjacent transpositions and
/// single-element reinsertions from a given start sequence.
pub fn local_search_from(inst: &OcspInstance, start: &[usize], max_iters: u64) -> Result<SolveReport> {
    let eval = ScaledEvaluator::<BigInt>::new(inst)?;
    let mut current = start.to_vec();
    let mut score = eval.score(&ranks_of(&current));
    let mut iters = 0;
    while iters < max_iters {
        let mut improved: Option<(BigInt, Vec<usize>)> = None;
        for cand in neighbours(&current) {
            let s = eval.score(&ranks_of(&cand));
            let beats = match &improved {
                None => s > score,
                Some((b, _)) => s > *b,
            };
            if beats {
                improved = Some((s, cand));
            }
        }
        match improved {
            Some((s, cand)) => {
                score = s;
                current = cand;
                iters += 1;
            }
            None => break,
        }
    }
    let value = if inst.is_empty() { Rational::one() } else { eval.to_rational(&score) };
    Ok(SolveReport {
        method: Method::LocalSearch,
        best_value: Value::Exact(value),
        best_ordering: Some(ordering_from_sequence(inst, &current)),
        samples: iters,
        ci_halfwidth: None,
        seed: None,
    })
}

pub fn local_search(inst: &OcspInstance, seed: u64, max_iters: u64) -> Result<SolveReport> {
    let start = random_start(inst.num_variables(), seed);
    let mut report = local_search_from(inst, &start, max_iters)?;
    report.seed = Some(seed);
    Ok(report)
}

/// Value of a single uniformly random ordering.
pub fn random_ordering(inst: &OcspInstance, seed: u64) -> Result<SolveReport> {
    let seq = random_start(inst.num_variables(), seed);
    let value = inst.value_of_ranks(&ranks_of(&seq))?;
    Ok(SolveReport {
        method: Method::Random,
        best_value: Value::Exact(if inst.is_empty() { Rational::one() } else { value }),
        best_ordering: Some(ordering_from_sequence(inst, &seq)),
        samples: 1,
        ci_halfwidth: None,
        seed: Some(seed),
    })
}

/// A source of random constraints: each draw names a predicate and the
/// variables it is applied to.
pub trait ConstraintSampler: Sync {
    type Var;

    fn predicates(&self) -> &[OrderingPredicate];

    /// Fills `vars` with one sampled tuple and returns its predicate index.
    fn sample(&self, rng: &mut SeedRng, vars: &mut Vec<Self::Var>) -> Result<usize>;
}

/// Integer ranks for sampler variables (an ordering or a table assignment).
pub trait RankAssignment<V>: Sync {
    fn rank(&self, var: &V) -> Result<i64>;
}

impl RankAssignment<usize> for [i64] {
    fn rank(&self, var: &usize) -> Result<i64> {
        self.get(*var)
            .copied()
            .ok_or_else(|| Error::UnrankedVariable(format!("#{var}")))
    }
}

impl RankAssignment<usize> for Vec<i64> {
    fn rank(&self, var: &usize) -> Result<i64> {
        self.as_slice().rank(var)
    }
}

/// Draws constraints of a materialized instance according to their weights.
pub struct InstanceSampler<'a> {
    inst: &'a OcspInstance,
    index: WeightedIndex<f64>,
}

impl<'a> InstanceSampler<'a> {
    pub fn new(inst: &'a OcspInstance) -> Result<Self> {
        let weights: Vec<f64> = inst.constraints().iter().map(|c| rational::to_f64(&c.weight)).collect();
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidInstance(format!("cannot sample constraints: {e}")))?;
        Ok(Self { inst, index })
    }
}

impl ConstraintSampler for InstanceSampler<'_> {
    type Var = usize;

    fn predicates(&self) -> &[OrderingPredicate] {
        self.inst.predicates()
    }

    fn sample(&self, rng: &mut SeedRng, vars: &mut Vec<usize>) -> Result<usize> {
        let c = &self.inst.constraints()[self.index.sample(rng)];
        vars.clear();
        vars.extend_from_slice(&c.vars);
        Ok(c.pred)
    }
}

/// Monte-Carlo estimate of the expected extended payoff of `assignment` on
/// constraints drawn from `sampler`, with a 3σ normal half-width.
///
/// Samples are split into fixed-size shards seeded from `(seed, shard)`, so
/// the estimate does not depend on the number of worker threads.
pub fn monte_carlo_value<S, A>(sampler: &S, assignment: &A, n_samples: u64, seed: u64) -> Result<SolveReport>
where
    S: ConstraintSampler,
    A: RankAssignment<S::Var> + ?Sized,
{
    if n_samples == 0 {
        return Err(Error::BadParameter("n_samples must be at least 1".into()));
    }
    let shards = n_samples.div_ceil(MC_SHARD);
    let partial: Vec<Result<(f64, f64)>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = MC_SHARD.min(n_samples - shard * MC_SHARD);
            let mut rng = rng_from_seed(derive_seed(seed, shard));
            let mut vars = Vec::new();
            let mut ranks = Vec::new();
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for _ in 0..count {
                let pred = sampler.sample(&mut rng, &mut vars)?;
                ranks.clear();
                for v in &vars {
                    ranks.push(assignment.rank(v)?);
                }
                let x = sampler.predicates()[pred].extended_eval_f64(&ranks)?;
                sum += x;
                sumsq += x * x;
            }
            Ok((sum, sumsq))
        })
        .collect();
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for p in partial {
        let (s, q) = p?;
        sum += s;
        sumsq += q;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 { ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(SolveReport {
        method: Method::MonteCarlo,
        best_value: Value::Approx(mean),
        best_ordering: None,
        samples: n_samples,
        ci_halfwidth: Some(3.0 * var.sqrt() / n.sqrt()),
        seed: Some(seed),
    })
}

//! Base distributions over `Q1^t × Q2^(m−t)` for the dictatorship tests,
//! their decoupled versions, and exhaustive property checks.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::perm::{all_permutations, for_each_linear_extension, lex_rank};
use crate::order::OrderingPredicate;
use crate::rational::{self, int, ratio, Rational};
use crate::rng::SeedRng;

pub const MAX_ATOMS: usize = 1_000_000;

/// Exact finite distribution over `Q1^t × Q2^(m−t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseDistribution {
    t: usize,
    m: usize,
    q1: Vec<i64>,
    q2: Vec<i64>,
    /// Sorted by tuple, strictly positive masses.
    atoms: Vec<(Vec<i64>, Rational)>,
}

fn check_alphabet(name: &str, a: &[i64]) -> Result<Vec<i64>> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() != a.len() {
        return Err(Error::InvalidDistribution(format!("{name} must be a non-empty set of distinct integers")));
    }
    Ok(sorted)
}

impl BaseDistribution {
    pub fn from_atoms(
        t: usize,
        m: usize,
        q1: &[i64],
        q2: &[i64],
        atoms: impl IntoIterator<Item = (Vec<i64>, Rational)>,
    ) -> Result<Self> {
        if t == 0 || t >= m {
            return Err(Error::InvalidDistribution(format!("split t={t} must satisfy 1 <= t < m={m}")));
        }
        let q1 = check_alphabet("Q1", q1)?;
        let q2 = check_alphabet("Q2", q2)?;
        let mut merged: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (tuple, p) in atoms {
            if tuple.len() != m {
                return Err(Error::ArityMismatch { expected: m, got: tuple.len() });
            }
            for (i, x) in tuple.iter().enumerate() {
                let alphabet = if i < t { &q1 } else { &q2 };
                if alphabet.binary_search(x).is_err() {
                    return Err(Error::InvalidDistribution(format!(
                        "coordinate {} of {tuple:?} is outside its alphabet",
                        i + 1
                    )));
                }
            }
            if p.is_negative() {
                return Err(Error::InvalidDistribution(format!("negative mass at {tuple:?}")));
            }
            *merged.entry(tuple).or_insert_with(Rational::zero) += p;
            if merged.len() > MAX_ATOMS {
                return Err(Error::TooLarge(format!("more than {MAX_ATOMS} atoms")));
            }
        }
        let atoms: Vec<_> = merged.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let total: Rational = atoms.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { t, m, q1, q2, atoms })
    }

    /// `x1 ∈ {−1, q}`, `y2 ∈ [q]`, `y3 = y2 + 1 mod q` when `x1 = q` and
    /// `y2 − 1 mod q` otherwise.
    pub fn btw_base(q: usize) -> Result<Self> {
        check_q(q)?;
        let qi = q as i64;
        let mass = ratio(1, 2 * qi);
        let mut atoms = Vec::new();
        for x1 in [-1, qi] {
            for y2 in 0..qi {
                let y3 = if x1 == qi { (y2 + 1).rem_euclid(qi) } else { (y2 - 1).rem_euclid(qi) };
                atoms.push((vec![x1, y2, y3], mass.clone()));
            }
        }
        Self::from_atoms(1, 3, &[-1, qi], &(0..qi).collect::<Vec<_>>(), atoms)
    }

    /// `x1, x2` uniform on `[q]`, `x3 = x1 + x2 mod q`.
    pub fn nbtw_base(q: usize) -> Result<Self> {
        Self::nbtw_permuted(q, 3)
    }

    /// The NBTW base distribution with coordinate `j` swapped with the third,
    /// so that coordinate `j` is the sum of the other two.
    pub fn nbtw_permuted(q: usize, j: usize) -> Result<Self> {
        check_q(q)?;
        if !(1..=3).contains(&j) {
            return Err(Error::BadParameter(format!("NBTW permutation index {j} not in 1..=3")));
        }
        let qi = q as i64;
        let mass = ratio(1, qi * qi);
        let mut atoms = Vec::new();
        for x1 in 0..qi {
            for x2 in 0..qi {
                let mut tuple = vec![x1, x2, (x1 + x2) % qi];
                tuple.swap(j - 1, 2);
                atoms.push((tuple, mass.clone()));
            }
        }
        let alphabet: Vec<i64> = (0..qi).collect();
        Self::from_atoms(1, 3, &alphabet, &alphabet, atoms)
    }

    /// `x_1..x_t` uniform on `[q1]`, `z` uniform on `[q2]`, `y_j = x_j + z mod q2`.
    pub fn so_base(t: usize, q1: usize, q2: usize) -> Result<Self> {
        if t == 0 || q1 < 2 || q1 >= q2 {
            return Err(Error::BadParameter(format!("need t >= 1 and 2 <= q1 < q2 (t={t}, q1={q1}, q2={q2})")));
        }
        let count = (q1 as u128).checked_pow(t as u32).and_then(|c| c.checked_mul(q2 as u128));
        if count.is_none_or(|c| c > MAX_ATOMS as u128) {
            return Err(Error::TooLarge(format!("so_base support exceeds {MAX_ATOMS} atoms")));
        }
        let mass = Rational::one() / int(count.unwrap() as i64);
        let (q1i, q2i) = (q1 as i64, q2 as i64);
        let mut atoms = Vec::new();
        let mut xs = vec![0i64; t];
        loop {
            for z in 0..q2i {
                let mut tuple = xs.clone();
                tuple.extend(xs.iter().map(|x| (x + z) % q2i));
                atoms.push((tuple, mass.clone()));
            }
            if !increment(&mut xs, q1i) {
                break;
            }
        }
        Self::from_atoms(t, 2 * t, &(0..q1i).collect::<Vec<_>>(), &(0..q2i).collect::<Vec<_>>(), atoms)
    }

    /// Parses `btw:q`, `nbtw:q`, `nbtw:q:j` or `so:t:q1:q2`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse(format!("bad number {s:?} in distribution {spec:?}")))
        };
        match parts.as_slice() {
            ["btw", q] => Self::btw_base(num(q)?),
            ["nbtw", q] => Self::nbtw_base(num(q)?),
            ["nbtw", q, j] => Self::nbtw_permuted(num(q)?, num(j)?),
            ["so", t, q1, q2] => Self::so_base(num(t)?, num(q1)?, num(q2)?),
            _ => Err(Error::Parse(format!("unknown distribution {spec:?}"))),
        }
    }

    /// Product of the prefix and suffix marginals.
    pub fn decouple(&self) -> Self {
        let prefix = self.prefix_marginal();
        let suffix = self.suffix_marginal();
        let mut atoms = Vec::with_capacity(prefix.len() * suffix.len());
        for (x, px) in &prefix {
            for (y, py) in &suffix {
                let mut tuple = x.clone();
                tuple.extend_from_slice(y);
                atoms.push((tuple, px * py));
            }
        }
        Self::from_atoms(self.t, self.m, &self.q1, &self.q2, atoms).expect("product of marginals is a distribution")
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q1(&self) -> &[i64] {
        &self.q1
    }

    pub fn q2(&self) -> &[i64] {
        &self.q2
    }

    /// Alphabet of 0-based coordinate `i`.
    pub fn alphabet(&self, i: usize) -> &[i64] {
        if i < self.t {
            &self.q1
        } else {
            &self.q2
        }
    }

    pub fn atoms(&self) -> &[(Vec<i64>, Rational)] {
        &self.atoms
    }

    pub fn mass(&self, tuple: &[i64]) -> Rational {
        self.atoms
            .binary_search_by(|(a, _)| a.as_slice().cmp(tuple))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    fn projection(&self, coords: &[usize]) -> BTreeMap<Vec<i64>, Rational> {
        let mut out: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (tuple, p) in &self.atoms {
            let key: Vec<i64> = coords.iter().map(|&i| tuple[i]).collect();
            *out.entry(key).or_insert_with(Rational::zero) += p;
        }
        out
    }

    pub fn prefix_marginal(&self) -> BTreeMap<Vec<i64>, Rational> {
        self.projection(&(0..self.t).collect::<Vec<_>>())
    }

    pub fn suffix_marginal(&self) -> BTreeMap<Vec<i64>, Rational> {
        self.projection(&(self.t..self.m).collect::<Vec<_>>())
    }

    /// Marginal of 0-based coordinate `i`.
    pub fn marginal(&self, i: usize) -> BTreeMap<i64, Rational> {
        self.projection(&[i]).into_iter().map(|(k, p)| (k[0], p)).collect()
    }

    /// Suffix distribution conditioned on the prefix block.
    pub fn conditional_suffix(&self, prefix: &[i64]) -> Result<Vec<(Vec<i64>, Rational)>> {
        let rows: Vec<_> = self.atoms.iter().filter(|(a, _)| &a[..self.t] == prefix).collect();
        let total: Rational = rows.iter().map(|(_, p)| p).sum();
        if total.is_zero() {
            return Err(Error::ConditioningFailure(prefix.to_vec()));
        }
        Ok(rows.into_iter().map(|(a, p)| (a[self.t..].to_vec(), p / &total)).collect())
    }

    /// Exact `E[pred(x)]` with the tie extension.
    pub fn expected_payoff(&self, pred: &OrderingPredicate) -> Result<Rational> {
        let mut total = Rational::zero();
        for (tuple, p) in &self.atoms {
            total += pred.extended_eval(tuple)? * p;
        }
        Ok(total)
    }

    pub fn to_file(&self) -> DistributionFile {
        DistributionFile {
            t: self.t,
            m: self.m,
            q1: self.q1.clone(),
            q2: self.q2.clone(),
            atoms: self.atoms.iter().map(|(tuple, p)| AtomFile { tuple: tuple.clone(), p: p.clone() }).collect(),
        }
    }

    pub fn from_file(f: &DistributionFile) -> Result<Self> {
        Self::from_atoms(f.t, f.m, &f.q1, &f.q2, f.atoms.iter().map(|a| (a.tuple.clone(), a.p.clone())))
    }
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::BadParameter(format!("q must be at least 2, got {q}")));
    }
    Ok(())
}

/// Odometer increment over `[base]^n`; false once it wraps to zero.
fn increment(digits: &mut [i64], base: i64) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub t: usize,
    pub m: usize,
    #[serde(rename = "Q1")]
    pub q1: Vec<i64>,
    #[serde(rename = "Q2")]
    pub q2: Vec<i64>,
    pub atoms: Vec<AtomFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub tuple: Vec<i64>,
    #[serde(with = "rational::as_string")]
    pub p: Rational,
}

/// Seeded sampling from a [`BaseDistribution`], jointly or conditionally on
/// the prefix block.
#[derive(Debug, Clone)]
pub struct DistributionSampler {
    t: usize,
    atoms: Vec<Vec<i64>>,
    joint: WeightedIndex<f64>,
    prefixes: Vec<Vec<i64>>,
    prefix_index: WeightedIndex<f64>,
    conditional: BTreeMap<Vec<i64>, (Vec<Vec<i64>>, WeightedIndex<f64>)>,
}

fn weighted(weights: &[Rational]) -> WeightedIndex<f64> {
    let w: Vec<f64> = weights.iter().map(rational::to_f64).collect();
    WeightedIndex::new(&w).expect("positive masses")
}

impl DistributionSampler {
    pub fn new(d: &BaseDistribution) -> Self {
        let masses: Vec<Rational> = d.atoms.iter().map(|(_, p)| p.clone()).collect();
        let prefix = d.prefix_marginal();
        let mut conditional = BTreeMap::new();
        for x in prefix.keys() {
            let rows = d.conditional_suffix(x).expect("prefix in support");
            let (suffixes, ps): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            conditional.insert(x.clone(), (suffixes, weighted(&ps)));
        }
        let (prefixes, pm): (Vec<_>, Vec<_>) = prefix.into_iter().unzip();
        Self {
            t: d.t,
            atoms: d.atoms.iter().map(|(a, _)| a.clone()).collect(),
            joint: weighted(&masses),
            prefix_index: weighted(&pm),
            prefixes,
            conditional,
        }
    }

    pub fn sample(&self, rng: &mut SeedRng) -> &[i64] {
        &self.atoms[self.joint.sample(rng)]
    }

    pub fn sample_prefix(&self, rng: &mut SeedRng) -> &[i64] {
        &self.prefixes[self.prefix_index.sample(rng)]
    }

    pub fn sample_suffix_given(&self, prefix: &[i64], rng: &mut SeedRng) -> Result<&[i64]> {
        let (suffixes, index) = self
            .conditional
            .get(prefix)
            .ok_or_else(|| Error::ConditioningFailure(prefix.to_vec()))?;
        Ok(&suffixes[index.sample(rng)])
    }

    pub fn split(&self) -> usize {
        self.t
    }
}

/// Result of the exhaustive property checks on a base distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyReport {
    pub uniform_marginals: bool,
    pub coords_gt_t_independent_of_prefix: bool,
    pub pairwise_independent: bool,
    /// 1-based suffix coordinate pairs whose joint law is exchange symmetric.
    pub exchange_symmetric_pairs: Vec<(usize, usize)>,
    /// For `m = 2t`: every `σ ∈ S_t` has tie-extended probability `1/t!` on
    /// both halves.
    pub order_projection_uniform: Option<bool>,
    #[serde(with = "rational::as_string")]
    pub expected_payoff: Rational,
    pub witnesses: Vec<String>,
}

impl PropertyReport {
    pub fn exchange_symmetric(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.exchange_symmetric_pairs.contains(&key)
    }
}

/// Checks uniform marginals, independence of each suffix coordinate from the
/// prefix block, pairwise independence, exchange symmetry of suffix pairs,
/// the order-projection identity for `m = 2t`, and computes `E[pred]`.
pub fn verify_distribution(d: &BaseDistribution, pred: &OrderingPredicate) -> Result<PropertyReport> {
    let mut witnesses = Vec::new();

    let mut uniform_marginals = true;
    for i in 0..d.m {
        let alphabet = d.alphabet(i);
        let expected = ratio(1, alphabet.len() as i64);
        let marginal = d.marginal(i);
        for a in alphabet {
            let p = marginal.get(a).cloned().unwrap_or_else(Rational::zero);
            if p != expected {
                uniform_marginals = false;
                witnesses.push(format!("coordinate {}: P(={a}) = {p}, expected {expected}", i + 1));
                break;
            }
        }
    }

    let prefix_coords: Vec<usize> = (0..d.t).collect();
    let prefix = d.projection(&prefix_coords);
    let mut independent = true;
    for i in d.t..d.m {
        let mut coords = prefix_coords.clone();
        coords.push(i);
        let joint = d.projection(&coords);
        let marginal = d.marginal(i);
        'outer: for (x, px) in &prefix {
            for a in d.alphabet(i) {
                let mut key = x.clone();
                key.push(*a);
                let pj = joint.get(&key).cloned().unwrap_or_else(Rational::zero);
                let pa = marginal.get(a).cloned().unwrap_or_else(Rational::zero);
                if pj != px * &pa {
                    independent = false;
                    witnesses.push(format!("coordinate {} depends on prefix {x:?} (value {a})", i + 1));
                    break 'outer;
                }
            }
        }
    }

    let mut pairwise = true;
    for i in 0..d.m {
        for j in i + 1..d.m {
            let joint = d.projection(&[i, j]);
            let (mi, mj) = (d.marginal(i), d.marginal(j));
            let ok = d.alphabet(i).iter().all(|a| {
                d.alphabet(j).iter().all(|b| {
                    let pj = joint.get(&vec![*a, *b]).cloned().unwrap_or_else(Rational::zero);
                    let pa = mi.get(a).cloned().unwrap_or_else(Rational::zero);
                    let pb = mj.get(b).cloned().unwrap_or_else(Rational::zero);
                    pj == pa * pb
                })
            });
            if !ok {
                pairwise = false;
                witnesses.push(format!("coordinates {} and {} are dependent", i + 1, j + 1));
            }
        }
    }

    let mut exchange_symmetric_pairs = Vec::new();
    for i in d.t..d.m {
        for j in i + 1..d.m {
            let joint = d.projection(&[i, j]);
            let symmetric = joint.iter().all(|(k, p)| {
                joint.get(&vec![k[1], k[0]]).is_some_and(|q| q == p)
            });
            if symmetric {
                exchange_symmetric_pairs.push((i + 1, j + 1));
            }
        }
    }

    let order_projection_uniform = (d.m == 2 * d.t).then(|| {
        let target = ratio(1, rational::factorial(d.t) as i64);
        let halves = [(0..d.t).collect::<Vec<_>>(), (d.t..d.m).collect::<Vec<_>>()];
        let mut ok = true;
        for (h, coords) in halves.iter().enumerate() {
            let probs = order_probabilities(&d.projection(coords), d.t);
            for (k, p) in probs.iter().enumerate() {
                if *p != target {
                    ok = false;
                    let sigma = &all_permutations(d.t)[k];
                    witnesses.push(format!("half {}: P(order {sigma:?}) = {p}, expected {target}", h + 1));
                }
            }
        }
        ok
    });

    Ok(PropertyReport {
        uniform_marginals,
        coords_gt_t_independent_of_prefix: independent,
        pairwise_independent: pairwise,
        exchange_symmetric_pairs,
        order_projection_uniform,
        expected_payoff: d.expected_payoff(pred)?,
        witnesses,
    })
}

/// Tie-extended probability of each relative order `σ ∈ S_k` (in
/// lexicographic order) under a distribution over `k`-tuples.
pub fn order_probabilities(law: &BTreeMap<Vec<i64>, Rational>, k: usize) -> Vec<Rational> {
    let mut probs = vec![Rational::zero(); rational::factorial(k) as usize];
    for (tuple, p) in law {
        let mut count = 0i64;
        let mut hits = vec![0i64; probs.len()];
        for_each_linear_extension(tuple, |sigma| {
            hits[lex_rank(sigma)] += 1;
            count += 1;
        });
        for (slot, h) in probs.iter_mut().zip(hits) {
            if h > 0 {
                *slot += p * ratio(h, count);
            }
        }
    }
    probs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn btw_q2_support() {
        let d = BaseDistribution::btw_base(2).unwrap();
        let mut expected = vec![vec![2, 0, 1], vec![2, 1, 0], vec![-1, 0, 1], vec![-1, 1, 0]];
        expected.sort();
        let atoms: Vec<_> = d.atoms().iter().map(|(a, _)| a.clone()).collect();
        assert_eq!(atoms, expected);
        assert!(d.atoms().iter().all(|(_, p)| *p == ratio(1, 4)));
    }

    #[test]
    fn btw_expected_payoff_and_x1_marginal() {
        let d = BaseDistribution::btw_base(4).unwrap();
        assert_eq!(d.expected_payoff(&OrderingPredicate::btw()).unwrap(), ratio(3, 4));
        for q in 2..=6 {
            let m = BaseDistribution::btw_base(q).unwrap().marginal(0);
            assert_eq!(m.get(&-1), Some(&ratio(1, 2)));
            assert_eq!(m.get(&(q as i64)), Some(&ratio(1, 2)));
        }
    }

    #[test]
    fn nbtw_examples() {
        let d = BaseDistribution::nbtw_base(2).unwrap();
        assert_eq!(d.expected_payoff(&OrderingPredicate::nbtw()).unwrap(), ratio(2, 3));
        let p1 = BaseDistribution::nbtw_permuted(3, 1).unwrap();
        assert_eq!(p1.mass(&[1, 0, 1]), ratio(1, 9));
        assert_eq!(BaseDistribution::nbtw_permuted(5, 3).unwrap(), BaseDistribution::nbtw_base(5).unwrap());
        for q in 2..=6 {
            let r = verify_distribution(&BaseDistribution::nbtw_base(q).unwrap(), &OrderingPredicate::nbtw()).unwrap();
            assert!(r.pairwise_independent && r.uniform_marginals);
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(BaseDistribution::btw_base(1), Err(Error::BadParameter(_))));
        assert!(matches!(BaseDistribution::nbtw_permuted(3, 4), Err(Error::BadParameter(_))));
        assert!(matches!(BaseDistribution::so_base(2, 5, 5), Err(Error::BadParameter(_))));
        assert!(matches!(BaseDistribution::so_base(0, 2, 5), Err(Error::BadParameter(_))));
        assert!(BaseDistribution::from_name("cube:3").is_err());
    }

    #[test]
    fn so_marginals_and_projection() {
        let d = BaseDistribution::so_base(2, 3, 5).unwrap();
        assert_eq!(d.atoms().len(), 9 * 5);
        let r = verify_distribution(&d, &OrderingPredicate::same_order(2).unwrap()).unwrap();
        assert!(r.uniform_marginals);
        assert!(r.coords_gt_t_independent_of_prefix);
        assert_eq!(r.order_projection_uniform, Some(true));
        for j in 2..4 {
            let m = d.marginal(j);
            assert!(m.values().all(|p| *p == ratio(1, 5)));
        }
    }

    #[test]
    fn so_completeness_example() {
        let d = BaseDistribution::so_base(2, 8, 24).unwrap();
        let e = d.expected_payoff(&OrderingPredicate::same_order(2).unwrap()).unwrap();
        assert!(e >= int(1) - ratio(4, 16) - ratio(8, 24));
    }

    #[test]
    fn decouple_examples() {
        let d = BaseDistribution::nbtw_base(3).unwrap().decouple();
        assert_eq!(d.atoms().len(), 27);
        assert!(d.atoms().iter().all(|(_, p)| *p == ratio(1, 27)));
        assert_eq!(d.decouple(), d);
        // q = 2: y3 = y2 + 1 = y2 - 1, so the suffix block has two atoms.
        let b = BaseDistribution::btw_base(2).unwrap().decouple();
        assert_eq!(b.mass(&[2, 0, 1]), ratio(1, 4));
        let b = BaseDistribution::btw_base(3).unwrap().decouple();
        assert_eq!(b.atoms().len(), 12);
        assert_eq!(b.mass(&[-1, 0, 1]), ratio(1, 12));
    }

    #[test]
    fn btw_exchange_symmetry() {
        let r = verify_distribution(&BaseDistribution::btw_base(5).unwrap(), &OrderingPredicate::btw()).unwrap();
        assert!(r.exchange_symmetric(2, 3));
        assert!(r.coords_gt_t_independent_of_prefix);
        assert!(!r.pairwise_independent);
    }

    #[test]
    fn skewed_pmf_is_flagged() {
        let d = BaseDistribution::from_atoms(
            1,
            2,
            &[0, 1],
            &[0, 1],
            vec![(vec![0, 0], ratio(1, 2)), (vec![0, 1], ratio(1, 4)), (vec![1, 1], ratio(1, 4))],
        )
        .unwrap();
        let r = verify_distribution(&d, &OrderingPredicate::mas()).unwrap();
        assert!(!r.uniform_marginals);
        assert!(r.witnesses.iter().any(|w| w.starts_with("coordinate 1")));
    }

    #[test]
    fn rejects_invalid_pmfs() {
        let bad_sum = BaseDistribution::from_atoms(1, 2, &[0, 1], &[0, 1], vec![(vec![0, 0], ratio(1, 2))]);
        assert!(matches!(bad_sum, Err(Error::InvalidDistribution(_))));
        let bad_alpha = BaseDistribution::from_atoms(1, 2, &[0, 1], &[0, 1], vec![(vec![0, 2], int(1))]);
        assert!(bad_alpha.is_err());
    }

    #[test]
    fn conditional_suffix_of_btw() {
        let d = BaseDistribution::btw_base(3).unwrap();
        let rows = d.conditional_suffix(&[3]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|(y, p)| (y[0] + 1) % 3 == y[1] && *p == ratio(1, 3)));
        assert!(matches!(d.conditional_suffix(&[0]), Err(Error::ConditioningFailure(_))));
    }

    #[test]
    fn sampler_matches_pmf_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for d in [
            BaseDistribution::btw_base(5).unwrap(),
            BaseDistribution::nbtw_permuted(4, 2).unwrap(),
            BaseDistribution::so_base(2, 2, 5).unwrap(),
        ] {
            let sampler = DistributionSampler::new(&d);
            let mut rng = rng_from_seed(11);
            let n = 100_000;
            let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
            for _ in 0..n {
                *counts.entry(sampler.sample(&mut rng).to_vec()).or_default() += 1;
            }
            let stat: f64 = d
                .atoms()
                .iter()
                .map(|(a, p)| {
                    let e = n as f64 * rational::to_f64(p);
                    let o = *counts.get(a).unwrap_or(&0) as f64;
                    (o - e).powi(2) / e
                })
                .sum();
            let df = (d.atoms().len() - 1) as f64;
            let q999 = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
            assert!(stat < q999, "chi-square {stat} >= {q999}");
        }
    }

    #[test]
    fn named_constructors_and_json() {
        let d = BaseDistribution::from_name("so:2:3:5").unwrap();
        let json = serde_json::to_string(&d.to_file()).unwrap();
        assert!(json.contains("\"Q1\""));
        let back = BaseDistribution::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, d);
        assert_eq!(BaseDistribution::from_name("nbtw:4:2").unwrap(), BaseDistribution::nbtw_permuted(4, 2).unwrap());
    }
}

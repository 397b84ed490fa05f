use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::bucketing::{bucketize, Bucketing};
use super::fourier::{cross_influence, noise_operator, pair_bound_delta};
use super::space::FiniteFunction;
use crate::error::{Error, Result};
use crate::order::OrderingPredicate;
use crate::rational::{self, int, Rational};
use crate::reduction::dict_test::check_arity;
use crate::reduction::{acceptance_with_pmf, dict_test_pmf, FunctionTable, QueryPmf, TestDistribution};

/// Bucketed payoffs are averaged over at most this many value combinations.
pub const MAX_BUCKET_COMBINATIONS: usize = 1_000_000;

/// Expected payoff when every output is replaced by the value of an
/// independent uniform member of its bucket.
fn bucketed_payoff(
    pred: &OrderingPredicate,
    counts: &[&BTreeMap<i64, usize>],
    bucket_sizes: &[usize],
) -> Result<Rational> {
    let combos = counts.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    if combos.is_none_or(|c| c > MAX_BUCKET_COMBINATIONS) {
        return Err(Error::TooLarge("too many bucket value combinations".into()));
    }
    let lists: Vec<Vec<(i64, usize)>> = counts.iter().map(|c| c.iter().map(|(&v, &n)| (v, n)).collect()).collect();
    let denom: Rational = bucket_sizes.iter().map(|&s| int(s as i64)).product();
    let mut picks = vec![0usize; lists.len()];
    let mut total = Rational::zero();
    let mut outputs = vec![0i64; lists.len()];
    loop {
        let mut weight = 1i64;
        for (k, list) in lists.iter().enumerate() {
            outputs[k] = list[picks[k]].0;
            weight *= list[picks[k]].1 as i64;
        }
        total += pred.extended_eval(&outputs)? * int(weight);
        let mut k = lists.len();
        loop {
            if k == 0 {
                return Ok(total / denom);
            }
            k -= 1;
            picks[k] += 1;
            if picks[k] < lists[k].len() {
                break;
            }
            picks[k] = 0;
        }
    }
}

fn bucketed_with_pmf(
    f: &FunctionTable,
    g: &FunctionTable,
    bf: &Bucketing,
    bg: &Bucketing,
    pmf: &QueryPmf,
    pred: &OrderingPredicate,
) -> Result<Rational> {
    let (cf, cg) = (bf.value_counts(&f.values), bg.value_counts(&g.values));
    let (sf, sg) = (f.len() / bf.buckets, g.len() / bg.buckets);
    let mut memo: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut total = Rational::zero();
    for (queries, p) in &pmf.entries {
        let key: Vec<usize> =
            queries.iter().enumerate().map(|(k, &q)| if k < pmf.t { bf.index[q] } else { bg.index[q] }).collect();
        if !memo.contains_key(&key) {
            let counts: Vec<&BTreeMap<i64, usize>> =
                key.iter().enumerate().map(|(k, &a)| if k < pmf.t { &cf[a] } else { &cg[a] }).collect();
            let sizes: Vec<usize> = (0..key.len()).map(|k| if k < pmf.t { sf } else { sg }).collect();
            memo.insert(key.clone(), bucketed_payoff(pred, &counts, &sizes)?);
        }
        total += &memo[&key] * p;
    }
    Ok(total)
}

/// Exact bucketed acceptance probability of `(f, g)` with `buckets` buckets per table.
pub fn bucketed_acceptance(
    f: &FunctionTable,
    g: &FunctionTable,
    td: &TestDistribution,
    pred: &OrderingPredicate,
    buckets: usize,
) -> Result<Rational> {
    td.check_tables(f, g)?;
    check_arity(td, pred)?;
    let (bf, bg) = (bucketize(&f.values, buckets)?, bucketize(&g.values, buckets)?);
    bucketed_with_pmf(f, g, &bf, &bg, &dict_test_pmf(td)?, pred)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketingReport {
    pub buckets: usize,
    #[serde(with = "rational::as_string")]
    pub acceptance: Rational,
    #[serde(with = "rational::as_string")]
    pub bucketed: Rational,
    pub difference: f64,
    pub delta: f64,
    /// `m² Γ^{−δ}`.
    pub bound: f64,
    pub overlap_count: usize,
    pub holds: bool,
}

/// Compares the exact and bucketed acceptance probabilities against `m² Γ^{−δ}`.
pub fn verify_bucketing_loss(
    f: &FunctionTable,
    g: &FunctionTable,
    td: &TestDistribution,
    pred: &OrderingPredicate,
    buckets: usize,
) -> Result<BucketingReport> {
    td.check_tables(f, g)?;
    check_arity(td, pred)?;
    let (bf, bg) = (bucketize(&f.values, buckets)?, bucketize(&g.values, buckets)?);
    let pmf = dict_test_pmf(td)?;
    let acceptance = acceptance_with_pmf(f, g, &pmf, pred)?;
    let bucketed = bucketed_with_pmf(f, g, &bf, &bg, &pmf, pred)?;
    let delta = pair_bound_delta(rational::to_f64(&td.gamma), &[td.base.q1().len(), td.base.q2().len()])?;
    let m = td.m() as f64;
    let bound = m * m * (buckets as f64).powf(-delta);
    let difference = rational::to_f64(&(&acceptance - &bucketed)).abs();
    Ok(BucketingReport {
        buckets,
        acceptance,
        bucketed,
        difference,
        delta,
        bound,
        overlap_count: bf.overlap_count(&bg),
        holds: difference <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBoundReport {
    pub buckets: usize,
    #[serde(with = "rational::as_string")]
    pub lhs: Rational,
    pub delta: f64,
    /// `Γ^{−(1+δ)}`.
    pub rhs: f64,
    pub holds: bool,
}

fn indicator_buckets(f: &FiniteFunction<Rational>) -> Result<usize> {
    if f.values().iter().any(|v| !v.is_zero() && !v.is_one()) {
        return Err(Error::DomainMismatch("expected a 0/1 indicator".into()));
    }
    let mean = f.expectation();
    if mean.is_zero() || !mean.numer().is_one() {
        return Err(Error::MeanMismatch { expected: "1/Γ".into(), actual: rational::format(&mean) });
    }
    usize::try_from(mean.denom()).map_err(|_| Error::BadParameter("bucket count too large".into()))
}

/// `E[F(x)G(y)]` under the pair law with each coordinate independently
/// resampled with probability `γ`, against `Γ^{−(1+δ)}`.
///
/// `pair` lists `(x index, y index, mass)`; both marginals must be uniform.
pub fn verify_pair_bound(
    big_f: &FiniteFunction<Rational>,
    big_g: &FiniteFunction<Rational>,
    pair: &[(usize, usize, Rational)],
    gamma: &Rational,
) -> Result<PairBoundReport> {
    let buckets = indicator_buckets(big_f)?;
    let gb = indicator_buckets(big_g)?;
    if gb != buckets {
        return Err(Error::MeanMismatch {
            expected: format!("1/{buckets}"),
            actual: format!("1/{gb}"),
        });
    }
    let (nx, ny) = (big_f.space().len(), big_g.space().len());
    let mut mx = vec![Rational::zero(); nx];
    let mut my = vec![Rational::zero(); ny];
    for (x, y, p) in pair {
        if *x >= nx || *y >= ny {
            return Err(Error::DomainMismatch("pair outcome outside the function domains".into()));
        }
        mx[*x] += p;
        my[*y] += p;
    }
    for (i, p) in mx.iter().enumerate() {
        if *p != big_f.space().prob(i) {
            return Err(Error::InvalidDistribution("pair law does not have uniform x-marginal".into()));
        }
    }
    for (j, p) in my.iter().enumerate() {
        if *p != big_g.space().prob(j) {
            return Err(Error::InvalidDistribution("pair law does not have uniform y-marginal".into()));
        }
    }
    let rho = Rational::one() - gamma;
    let (tf, tg) = (noise_operator(big_f, &rho), noise_operator(big_g, &rho));
    let lhs: Rational = pair.iter().map(|(x, y, p)| p * &tf.values()[*x] * &tg.values()[*y]).sum();
    let mut sizes = big_f.space().sizes();
    sizes.extend(big_g.space().sizes());
    let delta = pair_bound_delta(rational::to_f64(gamma), &sizes)?;
    let rhs = (buckets as f64).powf(-(1.0 + delta));
    Ok(PairBoundReport { buckets, holds: rational::to_f64(&lhs) <= rhs, lhs, delta, rhs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecouplingReport {
    pub buckets: usize,
    #[serde(with = "rational::as_string")]
    pub lhs: Rational,
    /// `Σ_{a,b} Coinf(F^a, G^b)^{1/2}` over bucket indicators.
    pub coinf_sqrt_sum: f64,
    pub delta: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Σ_{a,b} Coinf(F^a, G^b)` terms for the bucket indicators of `f` and `g`.
pub fn bucket_cross_influences(
    f: &FunctionTable,
    g: &FunctionTable,
    pi: &[usize],
    gamma: &Rational,
    buckets: usize,
) -> Result<Vec<Rational>> {
    let (bf, bg) = (bucketize(&f.values, buckets)?, bucketize(&g.values, buckets)?);
    let (fs, gs) = (bf.indicators(&f.space()?)?, bg.indicators(&g.space()?)?);
    let mut out = Vec::with_capacity(buckets * buckets);
    for fa in &fs {
        for gb in &gs {
            out.push(cross_influence(fa, gb, pi, gamma)?);
        }
    }
    Ok(out)
}

/// `|acc(D) − acc(D⊥)|` against
/// `γ^{−1/2} m^{1/2} 4^m Γ^m Σ_{a,b} Coinf(F^a,G^b)^{1/2} + 2Γ^{−δ}m²`.
pub fn verify_decoupling_bound(
    f: &FunctionTable,
    g: &FunctionTable,
    td: &TestDistribution,
    pred: &OrderingPredicate,
    buckets: usize,
) -> Result<DecouplingReport> {
    let acc = crate::reduction::acceptance_probability(f, g, td, pred)?;
    let acc_dec = crate::reduction::acceptance_probability(f, g, &td.decoupled(), pred)?;
    let lhs = (&acc - &acc_dec).abs();
    let coinf_sqrt_sum: f64 =
        bucket_cross_influences(f, g, &td.pi, &td.gamma, buckets)?.iter().map(|c| rational::to_f64(c).max(0.0).sqrt()).sum();
    let gamma = rational::to_f64(&td.gamma);
    let delta = pair_bound_delta(gamma, &[td.base.q1().len(), td.base.q2().len()])?;
    let (m, big) = (td.m() as f64, buckets as f64);
    let rhs = gamma.powf(-0.5) * m.sqrt() * 4f64.powf(m) * big.powf(m) * coinf_sqrt_sum + 2.0 * big.powf(-delta) * m * m;
    Ok(DecouplingReport { buckets, holds: rational::to_f64(&lhs) <= rhs, lhs, coinf_sqrt_sum, delta, rhs })
}

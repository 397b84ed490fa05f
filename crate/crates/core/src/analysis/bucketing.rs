use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::space::{FiniteFunction, ProductSpace};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// An order-respecting partition of a table's domain into `Γ` equal blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucketing {
    pub buckets: usize,
    /// Bucket of each domain point.
    pub index: Vec<usize>,
    /// Smallest integer interval `[lo, hi]` containing each bucket's values.
    pub intervals: Vec<(i64, i64)>,
    /// Domain points of each bucket, in sorted order.
    pub members: Vec<Vec<usize>>,
}

/// Sorts the domain by `(value, point index)` and cuts it into `buckets`
/// blocks of equal size.
pub fn bucketize(values: &[i64], buckets: usize) -> Result<Bucketing> {
    let n = values.len();
    if buckets == 0 || n % buckets != 0 {
        return Err(Error::DivisibilityError { buckets, domain: n });
    }
    let size = n / buckets;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (values[i], i));
    let mut index = vec![0; n];
    let mut intervals = Vec::with_capacity(buckets);
    let mut members = Vec::with_capacity(buckets);
    for (a, block) in order.chunks(size).enumerate() {
        for &p in block {
            index[p] = a;
        }
        intervals.push((values[block[0]], values[block[size - 1]]));
        members.push(block.to_vec());
    }
    Ok(Bucketing { buckets, index, intervals, members })
}

impl Bucketing {
    /// Number of pairs `(a, b)` whose intervals intersect.
    pub fn overlap_count(&self, other: &Bucketing) -> usize {
        self.intervals
            .iter()
            .map(|&(lo, hi)| other.intervals.iter().filter(|&&(lo2, hi2)| lo.max(lo2) <= hi.min(hi2)).count())
            .sum()
    }

    /// 0/1 indicator of bucket `a` on `space`.
    pub fn indicator(&self, a: usize, space: &ProductSpace) -> Result<FiniteFunction<Rational>> {
        FiniteFunction::new(space.clone(), self.index.iter().map(|&b| int((a == b) as i64)).collect())
    }

    pub fn indicators(&self, space: &ProductSpace) -> Result<Vec<FiniteFunction<Rational>>> {
        (0..self.buckets).map(|a| self.indicator(a, space)).collect()
    }

    /// Distinct values in each bucket with their multiplicities.
    pub fn value_counts(&self, values: &[i64]) -> Vec<BTreeMap<i64, usize>> {
        self.members
            .iter()
            .map(|block| {
                let mut counts = BTreeMap::new();
                for &p in block {
                    *counts.entry(values[p]).or_insert(0) += 1;
                }
                counts
            })
            .collect()
    }
}

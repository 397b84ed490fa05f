use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::perm::{all_permutations, for_each_linear_extension, is_permutation, lex_rank, natural_order_permutation};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A width-`m` ordering predicate: a payoff in `[0,1]` for each permutation
/// of `{1..m}`, extended to tuples with ties by averaging over the
/// consistent permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPredicate {
    name: Option<String>,
    arity: usize,
    /// Indexed by lexicographic rank of the permutation.
    payoff: Vec<Rational>,
    payoff_f64: Vec<f64>,
}

impl OrderingPredicate {
    pub fn from_payoff(arity: usize, payoff: Vec<Rational>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidPredicate("arity must be positive".into()));
        }
        if arity > 10 {
            return Err(Error::InvalidPredicate(format!("arity {arity} exceeds 10")));
        }
        let n = rational::factorial(arity) as usize;
        if payoff.len() != n {
            return Err(Error::InvalidPredicate(format!(
                "payoff has {} entries, need {n}",
                payoff.len()
            )));
        }
        if let Some(bad) = payoff.iter().find(|p| !rational::in_unit_interval(p)) {
            return Err(Error::InvalidPredicate(format!("payoff {bad} outside [0,1]")));
        }
        let payoff_f64 = payoff.iter().map(rational::to_f64).collect();
        Ok(Self { name: None, arity, payoff, payoff_f64 })
    }

    /// 0/1 predicate accepting exactly the listed permutations.
    pub fn from_accepting(arity: usize, accepting: &[Vec<usize>]) -> Result<Self> {
        if arity == 0 || arity > 10 {
            return Err(Error::InvalidPredicate(format!("unsupported arity {arity}")));
        }
        let mut payoff = vec![Rational::zero(); rational::factorial(arity) as usize];
        for perm in accepting {
            if perm.len() != arity || !is_permutation(perm) {
                return Err(Error::InvalidPredicate(format!("{perm:?} is not a permutation of 1..{arity}")));
            }
            payoff[lex_rank(perm)] = Rational::one();
        }
        Self::from_payoff(arity, payoff)
    }

    fn from_rule(arity: usize, accept: impl Fn(&[usize]) -> bool) -> Self {
        let accepting: Vec<_> = all_permutations(arity).into_iter().filter(|p| accept(p)).collect();
        Self::from_accepting(arity, &accepting).expect("rule-built predicate is valid")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// `u ≺ v`.
    pub fn mas() -> Self {
        Self::from_accepting(2, &[vec![1, 2]]).unwrap().with_name("MAS")
    }

    /// Third argument strictly between the first two.
    pub fn btw() -> Self {
        Self::from_accepting(3, &[vec![1, 3, 2], vec![3, 1, 2]]).unwrap().with_name("BTW")
    }

    pub fn nbtw() -> Self {
        Self::nbtw_j(3).unwrap()
    }

    /// Accepts when the `j`-th argument (1-based) is not between the other two.
    pub fn nbtw_j(j: usize) -> Result<Self> {
        if !(1..=3).contains(&j) {
            return Err(Error::BadParameter(format!("NBTW index {j} not in 1..=3")));
        }
        let name = if j == 3 { "NBTW".to_string() } else { format!("NBTW{j}") };
        Ok(Self::from_rule(3, |p| p[j - 1] != 2).with_name(name))
    }

    /// Same-order predicate on `2t` arguments: the first `t` entries are
    /// relatively ordered exactly like the last `t`.
    pub fn same_order(t: usize) -> Result<Self> {
        if t == 0 || 2 * t > 10 {
            return Err(Error::BadParameter(format!("SO half-width {t} unsupported")));
        }
        let pred = Self::from_rule(2 * t, |p| {
            let first: Vec<i64> = p[..t].iter().map(|&x| x as i64).collect();
            let last: Vec<i64> = p[t..].iter().map(|&x| x as i64).collect();
            natural_order_permutation(&first).unwrap() == natural_order_permutation(&last).unwrap()
        });
        Ok(pred.with_name(format!("SO{}", 2 * t)))
    }

    /// Predicate with payoff 1 everywhere.
    pub fn trivial(arity: usize) -> Result<Self> {
        let n = rational::factorial(arity) as usize;
        Ok(Self::from_payoff(arity, vec![Rational::one(); n])?.with_name(format!("TRUE{arity}")))
    }

    /// Looks up a named predicate: `MAS`, `BTW`, `NBTW`, `NBTW1..3`, `SO<2t>`.
    pub fn by_name(name: &str) -> Result<Self> {
        let upper = name.to_ascii_uppercase();
        match upper.as_str() {
            "MAS" => Ok(Self::mas()),
            "BTW" => Ok(Self::btw()),
            "NBTW" | "NBTW3" => Ok(Self::nbtw()),
            "NBTW1" => Self::nbtw_j(1),
            "NBTW2" => Self::nbtw_j(2),
            _ => {
                if let Some(width) = upper.strip_prefix("SO") {
                    let w: usize = width.parse().map_err(|_| Error::UnknownPredicate(name.into()))?;
                    if w % 2 == 0 {
                        return Self::same_order(w / 2);
                    }
                }
                if let Some(width) = upper.strip_prefix("TRUE") {
                    let w: usize = width.parse().map_err(|_| Error::UnknownPredicate(name.into()))?;
                    return Self::trivial(w);
                }
                Err(Error::UnknownPredicate(name.into()))
            }
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn payoff(&self, perm: &[usize]) -> &Rational {
        &self.payoff[lex_rank(perm)]
    }

    /// Payoffs in lexicographic permutation order.
    pub fn payoffs(&self) -> &[Rational] {
        &self.payoff
    }

    pub fn is_zero_one(&self) -> bool {
        self.payoff.iter().all(|p| p.is_zero() || p.is_one())
    }

    /// Permutations with payoff exactly one.
    pub fn accepting(&self) -> Vec<Vec<usize>> {
        all_permutations(self.arity)
            .into_iter()
            .filter(|p| self.payoff(p).is_one())
            .collect()
    }

    /// Same payoff table, ignoring names.
    pub fn same_payoffs(&self, other: &Self) -> bool {
        self.arity == other.arity && self.payoff == other.payoff
    }

    /// Expected payoff of one constraint on distinct variables under a
    /// uniformly random ordering.
    pub fn random_ordering_value(&self) -> Rational {
        let sum: Rational = self.payoff.iter().sum();
        sum / rational::int(self.payoff.len() as i64)
    }

    /// Payoff of a tuple of ranks, ties resolved by averaging over every
    /// consistent permutation.
    pub fn extended_eval(&self, tuple: &[i64]) -> Result<Rational> {
        self.check_arity(tuple.len())?;
        if let Ok(sigma) = natural_order_permutation(tuple) {
            return Ok(self.payoff(&sigma).clone());
        }
        let mut sum = Rational::zero();
        let mut count = 0i64;
        for_each_linear_extension(tuple, |sigma| {
            sum += &self.payoff[lex_rank(sigma)];
            count += 1;
        });
        Ok(sum / rational::int(count))
    }

    /// Floating-point version of [`Self::extended_eval`] for sampling loops.
    pub fn extended_eval_f64(&self, tuple: &[i64]) -> Result<f64> {
        self.check_arity(tuple.len())?;
        let mut sum = 0.0;
        let mut count = 0usize;
        for_each_linear_extension(tuple, |sigma| {
            sum += self.payoff_f64[lex_rank(sigma)];
            count += 1;
        });
        Ok(sum / count as f64)
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got });
        }
        Ok(())
    }
}

/// JSON form: either a named predicate or an explicit table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredicateSpec {
    Named { name: String },
    Accepting { arity: usize, accepting: Vec<Vec<usize>> },
    Payoff { arity: usize, payoff: Vec<String> },
}

impl PredicateSpec {
    pub fn build(&self) -> Result<OrderingPredicate> {
        match self {
            PredicateSpec::Named { name } => OrderingPredicate::by_name(name),
            PredicateSpec::Accepting { arity, accepting } => OrderingPredicate::from_accepting(*arity, accepting),
            PredicateSpec::Payoff { arity, payoff } => {
                let payoff = payoff.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?;
                OrderingPredicate::from_payoff(*arity, payoff)
            }
        }
    }
}

impl From<&OrderingPredicate> for PredicateSpec {
    fn from(p: &OrderingPredicate) -> Self {
        if let Some(name) = &p.name {
            if OrderingPredicate::by_name(name).map(|q| q.same_payoffs(p)).unwrap_or(false) {
                return PredicateSpec::Named { name: name.clone() };
            }
        }
        if p.is_zero_one() {
            PredicateSpec::Accepting { arity: p.arity, accepting: p.accepting() }
        } else {
            PredicateSpec::Payoff { arity: p.arity, payoff: p.payoff.iter().map(rational::format).collect() }
        }
    }
}

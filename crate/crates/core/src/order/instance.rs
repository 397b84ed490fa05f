use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::predicate::{OrderingPredicate, PredicateSpec};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// One weighted constraint: a predicate applied to a tuple of variable indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub pred: usize,
    pub weight: Rational,
}

/// An OCSP instance: variables and a finite distribution over constraints.
///
/// Weights are normalized to sum to one on construction. Constraints may
/// repeat a variable; such tuples are always evaluated through the tie
/// extension of their predicate.
#[derive(Debug, Clone)]
pub struct OcspInstance {
    variables: Vec<String>,
    index: HashMap<String, usize>,
    predicates: Vec<OrderingPredicate>,
    constraints: Vec<Constraint>,
}

impl OcspInstance {
    pub fn new(
        variables: Vec<String>,
        predicates: Vec<OrderingPredicate>,
        mut constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate variable {v:?}")));
            }
        }
        let mut total = Rational::zero();
        for (k, c) in constraints.iter().enumerate() {
            let pred = predicates
                .get(c.pred)
                .ok_or_else(|| Error::InvalidInstance(format!("constraint {k} references predicate {}", c.pred)))?;
            if c.vars.len() != pred.arity() {
                return Err(Error::ArityMismatch { expected: pred.arity(), got: c.vars.len() });
            }
            if let Some(&bad) = c.vars.iter().find(|&&v| v >= variables.len()) {
                return Err(Error::InvalidInstance(format!("constraint {k} references variable #{bad}")));
            }
            if c.weight.is_negative() {
                return Err(Error::InvalidInstance(format!("constraint {k} has negative weight")));
            }
            total += &c.weight;
        }
        if !constraints.is_empty() {
            if total.is_zero() {
                return Err(Error::InvalidInstance("total constraint weight is zero".into()));
            }
            for c in &mut constraints {
                c.weight = &c.weight / &total;
            }
        }
        Ok(Self { variables, index, predicates, constraints })
    }

    /// Convenience constructor taking constraints as variable names.
    pub fn from_named<S: AsRef<str>>(
        variables: &[S],
        predicates: Vec<OrderingPredicate>,
        constraints: &[(Vec<&str>, usize, Rational)],
    ) -> Result<Self> {
        let variables: Vec<String> = variables.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let constraints = constraints
            .iter()
            .map(|(vars, pred, w)| {
                let vars = vars
                    .iter()
                    .map(|v| lookup.get(v).copied().ok_or_else(|| Error::UnknownVariable(v.to_string())))
                    .collect::<Result<_>>()?;
                Ok(Constraint { vars, pred: *pred, weight: w.clone() })
            })
            .collect::<Result<_>>()?;
        Self::new(variables, predicates, constraints)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn predicates(&self) -> &[OrderingPredicate] {
        &self.predicates
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Value of a complete rank vector indexed like [`Self::variables`].
    pub fn value_of_ranks(&self, ranks: &[i64]) -> Result<Rational> {
        if ranks.len() != self.variables.len() {
            return Err(Error::ArityMismatch { expected: self.variables.len(), got: ranks.len() });
        }
        let mut total = Rational::zero();
        let mut tuple = Vec::new();
        for c in &self.constraints {
            tuple.clear();
            tuple.extend(c.vars.iter().map(|&v| ranks[v]));
            total += self.predicates[c.pred].extended_eval(&tuple)? * &c.weight;
        }
        Ok(total)
    }

    /// Same as [`Self::value_of_ranks`] but in floating point.
    pub fn value_of_ranks_f64(&self, ranks: &[i64]) -> Result<f64> {
        let mut total = 0.0;
        let mut tuple = Vec::new();
        for c in &self.constraints {
            tuple.clear();
            tuple.extend(c.vars.iter().map(|&v| ranks[v]));
            total += self.predicates[c.pred].extended_eval_f64(&tuple)? * rational::to_f64(&c.weight);
        }
        Ok(total)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            predicates: self.predicates.iter().map(PredicateSpec::from).collect(),
            variables: self.variables.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    vars: c.vars.iter().map(|&v| self.variables[v].clone()).collect(),
                    pred: c.pred,
                    weight: c.weight.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let predicates = file.predicates.iter().map(PredicateSpec::build).collect::<Result<Vec<_>>>()?;
        let lookup: HashMap<&str, usize> = file.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let constraints = file
            .constraints
            .iter()
            .map(|c| {
                let vars = c
                    .vars
                    .iter()
                    .map(|v| lookup.get(v.as_str()).copied().ok_or_else(|| Error::UnknownVariable(v.clone())))
                    .collect::<Result<_>>()?;
                Ok(Constraint { vars, pred: c.pred, weight: c.weight.clone() })
            })
            .collect::<Result<_>>()?;
        Self::new(file.variables.clone(), predicates, constraints)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub predicates: Vec<PredicateSpec>,
    pub variables: Vec<String>,
    pub constraints: Vec<ConstraintFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub vars: Vec<String>,
    pub pred: usize,
    #[serde(with = "rational::as_string")]
    pub weight: Rational,
}

/// Integer ranks for variables; ties are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ordering {
    pub ranks: BTreeMap<String, i64>,
}

impl Ordering {
    /// Ranks `0, 1, 2, ...` in the given sequence.
    pub fn from_sequence<S: AsRef<str>>(seq: &[S]) -> Self {
        Self {
            ranks: seq.iter().enumerate().map(|(i, v)| (v.as_ref().to_string(), i as i64)).collect(),
        }
    }

    pub fn from_ranks(inst: &OcspInstance, ranks: &[i64]) -> Self {
        Self {
            ranks: inst.variables().iter().cloned().zip(ranks.iter().copied()).collect(),
        }
    }

    /// Rank vector aligned with `inst`'s variables.
    pub fn ranks_for(&self, inst: &OcspInstance) -> Result<Vec<i64>> {
        inst.variables()
            .iter()
            .map(|v| self.ranks.get(v).copied().ok_or_else(|| Error::UnrankedVariable(v.clone())))
            .collect()
    }

    /// Variables sorted by rank (ties by name).
    pub fn sequence(&self) -> Vec<String> {
        let mut v: Vec<(&String, &i64)> = self.ranks.iter().collect();
        v.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)));
        v.into_iter().map(|(k, _)| k.clone()).collect()
    }
}

/// Weighted average of the extended predicate payoffs under `ord`.
pub fn ordering_value(inst: &OcspInstance, ord: &Ordering) -> Result<Rational> {
    let ranks = ord.ranks_for(inst)?;
    inst.value_of_ranks(&ranks)
}

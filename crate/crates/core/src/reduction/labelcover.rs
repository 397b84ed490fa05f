use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::rng::rng_from_seed;

/// Right labelings enumerated by [`lc_exact_value`] are capped at this count.
pub const DEFAULT_LC_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Projection `[R] → [L]`.
    pub pi: Vec<usize>,
    pub weight: Rational,
}

/// Bipartite projection game with left labels `[L]` and right labels `[R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCoverInstance {
    l: usize,
    r: usize,
    left: Vec<String>,
    right: Vec<String>,
    edges: Vec<Edge>,
}

impl LabelCoverInstance {
    pub fn new(l: usize, r: usize, left: Vec<String>, right: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if l == 0 || r == 0 {
            return Err(Error::InvalidInstance("label sets must be non-empty".into()));
        }
        let mut seen = HashMap::new();
        for name in left.iter().chain(&right) {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidInstance(format!("vertex name {name:?} used twice")));
            }
        }
        if edges.is_empty() {
            return Err(Error::InvalidInstance("label cover instance has no edges".into()));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.u >= left.len() || e.v >= right.len() {
                return Err(Error::InvalidInstance(format!("edge {k} has a missing endpoint")));
            }
            if e.pi.len() != r {
                return Err(Error::InvalidInstance(format!("edge {k}: projection has {} entries, R = {r}", e.pi.len())));
            }
            if let Some(bad) = e.pi.iter().find(|&&a| a >= l) {
                return Err(Error::InvalidInstance(format!("edge {k}: projection value {bad} not in [L] = [{l}]")));
            }
            if !e.weight.is_positive() {
                return Err(Error::InvalidInstance(format!("edge {k} has non-positive weight")));
            }
        }
        Ok(Self { l, r, left, right, edges })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn left(&self) -> &[String] {
        &self.left
    }

    pub fn right(&self) -> &[String] {
        &self.right
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> Rational {
        self.edges.iter().map(|e| &e.weight).sum()
    }

    /// Edge weights normalized to a probability distribution.
    pub fn edge_probabilities(&self) -> Vec<Rational> {
        let total = self.total_weight();
        self.edges.iter().map(|e| &e.weight / &total).collect()
    }

    /// Weighted fraction of edges with `π(λ(v)) = λ(u)`.
    pub fn value(&self, labeling: &Labeling) -> Result<Rational> {
        labeling.check(self)?;
        let sat: Rational = self
            .edges
            .iter()
            .filter(|e| e.pi[labeling.right[e.v]] == labeling.left[e.u])
            .map(|e| &e.weight)
            .sum();
        Ok(sat / self.total_weight())
    }

    pub fn to_file(&self) -> LabelCoverFile {
        let uniform = self.edges.iter().all(|e| e.weight == self.edges[0].weight);
        LabelCoverFile {
            l: self.l,
            r: self.r,
            u: self.left.clone(),
            v: self.right.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    u: self.left[e.u].clone(),
                    v: self.right[e.v].clone(),
                    pi: e.pi.clone(),
                    weight: (!uniform).then(|| e.weight.clone()),
                })
                .collect(),
        }
    }

    pub fn from_file(f: &LabelCoverFile) -> Result<Self> {
        let lookup = |names: &[String], name: &str| {
            names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let edges = f
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    u: lookup(&f.u, &e.u)?,
                    v: lookup(&f.v, &e.v)?,
                    pi: e.pi.clone(),
                    weight: e.weight.clone().unwrap_or_else(Rational::one),
                })
            })
            .collect::<Result<_>>()?;
        Self::new(f.l, f.r, f.u.clone(), f.v.clone(), edges)
    }
}

/// `{"L","R","U","V","edges":[{"u","v","pi","weight"?}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelCoverFile {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "U")]
    pub u: Vec<String>,
    #[serde(rename = "V")]
    pub v: Vec<String>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub u: String,
    pub v: String,
    pub pi: Vec<usize>,
    #[serde(default, with = "rational::as_opt_string", skip_serializing_if = "Option::is_none")]
    pub weight: Option<Rational>,
}

/// Labels for left vertices (in `[L]`) and right vertices (in `[R]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Labeling {
    pub fn check(&self, lc: &LabelCoverInstance) -> Result<()> {
        if self.left.len() != lc.left.len() || self.right.len() != lc.right.len() {
            return Err(Error::DomainMismatch("labeling does not cover every vertex".into()));
        }
        if self.left.iter().any(|&a| a >= lc.l) || self.right.iter().any(|&b| b >= lc.r) {
            return Err(Error::DomainMismatch("label out of range".into()));
        }
        Ok(())
    }

    /// Vertex name → label.
    pub fn to_map(&self, lc: &LabelCoverInstance) -> BTreeMap<String, usize> {
        lc.left
            .iter()
            .zip(&self.left)
            .chain(lc.right.iter().zip(&self.right))
            .map(|(n, &l)| (n.clone(), l))
            .collect()
    }

    pub fn from_map(lc: &LabelCoverInstance, map: &BTreeMap<String, usize>) -> Result<Self> {
        let get = |n: &String| map.get(n).copied().ok_or_else(|| Error::UnrankedVariable(n.clone()));
        let labeling = Self {
            left: lc.left.iter().map(get).collect::<Result<_>>()?,
            right: lc.right.iter().map(get).collect::<Result<_>>()?,
        };
        labeling.check(lc)?;
        Ok(labeling)
    }
}

/// Exact Label Cover value by enumerating right labelings; each left vertex
/// then takes its best label independently.
pub fn lc_exact_value(lc: &LabelCoverInstance) -> Result<(Rational, Labeling)> {
    lc_exact_value_with_cap(lc, DEFAULT_LC_CAP)
}

pub fn lc_exact_value_with_cap(lc: &LabelCoverInstance, cap: u64) -> Result<(Rational, Labeling)> {
    let count = (lc.r as u64).checked_pow(lc.right.len() as u32);
    if count.is_none_or(|c| c > cap) {
        return Err(Error::TooLarge(format!("{}^{} right labelings exceed cap {cap}", lc.r, lc.right.len())));
    }
    let mut incident: Vec<Vec<&Edge>> = vec![Vec::new(); lc.left.len()];
    for e in &lc.edges {
        incident[e.u].push(e);
    }
    let mut right = vec![0usize; lc.right.len()];
    let mut best: Option<(Rational, Labeling)> = None;
    loop {
        let mut total = Rational::zero();
        let mut left = Vec::with_capacity(lc.left.len());
        for edges in &incident {
            let mut score = vec![Rational::zero(); lc.l];
            for e in edges {
                score[e.pi[right[e.v]]] += &e.weight;
            }
            let (label, s) = score
                .into_iter()
                .enumerate()
                .fold((0, Rational::zero()), |acc, (a, s)| if s > acc.1 { (a, s) } else { acc });
            total += s;
            left.push(label);
        }
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, Labeling { left, right: right.clone() }));
        }
        if !advance(&mut right, lc.r) {
            break;
        }
    }
    let (score, labeling) = best.expect("at least one labeling");
    Ok((score / lc.total_weight(), labeling))
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Parameters of the random Label Cover generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcGenParams {
    pub l: usize,
    pub r: usize,
    pub left: usize,
    pub right: usize,
    pub edges: usize,
    /// Plant a labeling satisfying every edge.
    pub planted: bool,
}

/// Random instance with uniformly chosen endpoints and projections. With
/// `planted`, labels are drawn first and each projection maps the right
/// label onto the left one, so the returned labeling satisfies all edges.
pub fn generate_lc(params: &LcGenParams, seed: u64) -> Result<(LabelCoverInstance, Option<Labeling>)> {
    let LcGenParams { l, r, left, right, edges, planted } = *params;
    if l == 0 || r == 0 || left == 0 || right == 0 || edges == 0 {
        return Err(Error::BadParameter("label sets, vertex sets and edge count must be positive".into()));
    }
    if planted && r < l {
        return Err(Error::BadParameter(format!("planted instances need R >= L (got L={l}, R={r})")));
    }
    let mut rng = rng_from_seed(seed);
    let labeling = planted.then(|| Labeling {
        left: (0..left).map(|_| rng.random_range(0..l)).collect(),
        right: (0..right).map(|_| rng.random_range(0..r)).collect(),
    });
    let labels: Vec<usize> = (0..l).collect();
    let mut out = Vec::with_capacity(edges);
    for _ in 0..edges {
        let u = rng.random_range(0..left);
        let v = rng.random_range(0..right);
        let mut pi: Vec<usize> = (0..r).map(|_| *labels.choose(&mut rng).unwrap()).collect();
        if let Some(lab) = &labeling {
            pi[lab.right[v]] = lab.left[u];
        }
        out.push(Edge { u, v, pi, weight: Rational::one() });
    }
    let lc = LabelCoverInstance::new(
        l,
        r,
        (0..left).map(|i| format!("u{i}")).collect(),
        (0..right).map(|i| format!("v{i}")).collect(),
        out,
    )?;
    Ok((lc, labeling))
}

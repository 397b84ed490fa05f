use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Dense tables are limited to this many points.
pub const MAX_POINTS: usize = 1 << 20;

/// Field used for function values: exact rationals or floats.
pub trait Scalar: Clone + Send + Sync + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
}

/// A finite product probability space `Ω_1 × … × Ω_n`.
///
/// Points are indexed row-major: the last coordinate varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    factors: Vec<Vec<Rational>>,
    strides: Vec<usize>,
    len: usize,
}

impl ProductSpace {
    pub fn new(factors: Vec<Vec<Rational>>) -> Result<Self> {
        let mut len = 1usize;
        for (i, f) in factors.iter().enumerate() {
            if f.is_empty() || f.iter().any(|p| p.is_negative()) {
                return Err(Error::InvalidDistribution(format!("factor {i} is empty or has a negative mass")));
            }
            let total: Rational = f.iter().sum();
            if !total.is_one() {
                return Err(Error::InvalidDistribution(format!("factor {i} sums to {total}")));
            }
            len = len
                .checked_mul(f.len())
                .filter(|&l| l <= MAX_POINTS)
                .ok_or_else(|| Error::TooLarge(format!("product space exceeds {MAX_POINTS} points")))?;
        }
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].len();
        }
        Ok(Self { factors, strides, len })
    }

    pub fn uniform(sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidDistribution("alphabet of size 0".into()));
        }
        Self::new(sizes.iter().map(|&k| vec![rational::ratio(1, k as i64); k]).collect())
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    pub fn factor(&self, i: usize) -> &[Rational] {
        &self.factors[i]
    }

    pub fn point(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for i in 0..self.dim() {
            out[i] = index / self.strides[i];
            index %= self.strides[i];
        }
        out
    }

    pub fn index(&self, point: &[usize]) -> usize {
        point.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    fn digit(&self, index: usize, i: usize) -> usize {
        (index / self.strides[i]) % self.factors[i].len()
    }

    pub fn prob(&self, index: usize) -> Rational {
        let mut p = Rational::one();
        for i in 0..self.dim() {
            p *= &self.factors[i][self.digit(index, i)];
        }
        p
    }

    /// Smallest nonzero atom over all factors.
    pub fn min_atom(&self) -> Rational {
        self.factors
            .iter()
            .flatten()
            .filter(|p| !p.is_zero())
            .min()
            .cloned()
            .unwrap_or_else(Rational::one)
    }

    pub fn to_file(&self) -> Vec<FactorFile> {
        self.factors.iter().map(|f| FactorFile { size: f.len(), p: f.clone() }).collect()
    }
}

/// A real function on a [`ProductSpace`], stored as a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunction<T> {
    space: ProductSpace,
    values: Vec<T>,
}

impl<T: Scalar> FiniteFunction<T> {
    pub fn new(space: ProductSpace, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DomainMismatch(format!(
                "table has {} entries, space has {} points",
                values.len(),
                space.len()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn from_fn(space: ProductSpace, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let values = (0..space.len()).map(|i| f(&space.point(i))).collect();
        Self { space, values }
    }

    pub fn constant(space: ProductSpace, c: T) -> Self {
        let values = vec![c; space.len()];
        Self { space, values }
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    fn weights(&self) -> Vec<T> {
        (0..self.space.len()).map(|i| T::from_rational(&self.space.prob(i))).collect()
    }

    pub fn expectation(&self) -> T {
        self.weights().iter().zip(&self.values).fold(T::zero(), |acc, (w, v)| acc.add(&w.mul(v)))
    }

    /// `E[f·g]`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.space != other.space {
            return Err(Error::DomainMismatch("functions live on different spaces".into()));
        }
        Ok(self
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .fold(T::zero(), |acc, (w, (a, b))| acc.add(&w.mul(&a.mul(b)))))
    }

    pub fn variance(&self) -> T {
        let mean = self.expectation();
        self.inner(self).expect("same space").sub(&mean.mul(&mean))
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self { space: self.space.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::DomainMismatch("functions live on different spaces".into()));
        }
        Ok(Self {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// `(E_i f)(x) = E[f(x) | x_j, j ≠ i]`: averages out coordinate `i`.
    pub fn average_out(&self, i: usize) -> Result<Self> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim() });
        }
        let mu: Vec<T> = self.space.factors[i].iter().map(T::from_rational).collect();
        let stride = self.space.strides[i];
        let k = mu.len();
        let mut values = Vec::with_capacity(self.values.len());
        for idx in 0..self.values.len() {
            let base = idx - self.space.digit(idx, i) * stride;
            let v = (0..k).fold(T::zero(), |acc, a| acc.add(&mu[a].mul(&self.values[base + a * stride])));
            values.push(v);
        }
        Ok(Self { space: self.space.clone(), values })
    }

    /// `E[f | x_T]` for the coordinate set given as a bitmask.
    pub fn conditional_expectation(&self, keep: u64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            if keep & (1 << i) == 0 {
                out = out.average_out(i).expect("coordinate in range");
            }
        }
        out
    }

    /// `L_p` norm `E[|f|^p]^{1/p}`, in floating point.
    pub fn norm(&self, p: f64) -> f64 {
        let total: f64 = (0..self.values.len())
            .map(|i| rational::to_f64(&self.space.prob(i)) * self.values[i].to_f64().abs().powf(p))
            .sum();
        total.powf(1.0 / p)
    }

    pub fn to_f64(&self) -> FiniteFunction<f64> {
        FiniteFunction { space: self.space.clone(), values: self.values.iter().map(Scalar::to_f64).collect() }
    }
}

impl FiniteFunction<Rational> {
    pub fn to_file(&self) -> FunctionFile {
        FunctionFile { factors: self.space.to_file(), values: self.values.iter().map(rational::format).collect() }
    }
}

impl FunctionFile {
    pub fn build(&self) -> Result<FiniteFunction<Rational>> {
        for (i, f) in self.factors.iter().enumerate() {
            if f.p.len() != f.size {
                return Err(Error::InvalidDistribution(format!("factor {i}: size {} but {} masses", f.size, f.p.len())));
            }
        }
        let space = ProductSpace::new(self.factors.iter().map(|f| f.p.clone()).collect())?;
        let values = self.values.iter().map(|v| rational::parse(v)).collect::<Result<_>>()?;
        FiniteFunction::new(space, values)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorFile {
    pub size: usize,
    #[serde(with = "rational::as_string_vec")]
    pub p: Vec<Rational>,
}

/// `{"factors":[{"size":k,"p":[..]}],"values":[..]}` with row-major values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub factors: Vec<FactorFile>,
    pub values: Vec<String>,
}

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::space::{FiniteFunction, Scalar};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Efron–Stein decomposition is limited to this many coordinates.
pub const MAX_ES_DIM: usize = 16;

/// `T_ρ f`: each coordinate is kept with probability `ρ` and otherwise
/// resampled from its factor.
pub fn noise_operator<T: Scalar>(f: &FiniteFunction<T>, rho: &Rational) -> FiniteFunction<T> {
    let keep = T::from_rational(rho);
    let fresh = T::from_rational(&(Rational::one() - rho));
    let mut out = f.clone();
    for i in 0..f.dim() {
        let avg = out.average_out(i).expect("coordinate in range");
        out = out
            .zip_with(&avg, |a, b| keep.mul(a).add(&fresh.mul(b)))
            .expect("same space");
    }
    out
}

/// Efron–Stein parts `f_S`, indexed by the bitmask of `S` (bit `i` is
/// coordinate `i`).
pub fn efron_stein<T: Scalar>(f: &FiniteFunction<T>) -> Result<Vec<FiniteFunction<T>>> {
    let n = f.dim();
    if n > MAX_ES_DIM {
        return Err(Error::TooLarge(format!("Efron–Stein over {n} > {MAX_ES_DIM} coordinates")));
    }
    let full = (1usize << n) - 1;
    // cond[T] = E[f | x_T], built downwards from T = [n].
    let mut parts: Vec<Option<FiniteFunction<T>>> = vec![None; 1 << n];
    parts[full] = Some(f.clone());
    for mask in (0..full).rev() {
        let i = (!mask).trailing_zeros() as usize;
        let parent = parts[mask | (1 << i)].as_ref().expect("supersets come first");
        parts[mask] = Some(parent.average_out(i)?);
    }
    let mut parts: Vec<FiniteFunction<T>> = parts.into_iter().map(Option::unwrap).collect();
    // Möbius inversion over the subset lattice.
    for i in 0..n {
        for mask in 0..=full {
            if mask & (1 << i) != 0 {
                let lower = parts[mask ^ (1 << i)].clone();
                parts[mask] = parts[mask].zip_with(&lower, |a, b| a.sub(b))?;
            }
        }
    }
    Ok(parts)
}

/// `Inf_i(f) = E[Var_{x_i} f]`.
pub fn influence<T: Scalar>(f: &FiniteFunction<T>, i: usize) -> Result<T> {
    let avg = f.average_out(i)?;
    let diff = f.zip_with(&avg, |a, b| a.sub(b))?;
    diff.inner(&diff)
}

pub fn noisy_influence<T: Scalar>(f: &FiniteFunction<T>, i: usize, gamma: &Rational) -> Result<T> {
    if i >= f.dim() {
        return Err(Error::IndexOutOfRange { index: i, dim: f.dim() });
    }
    influence(&noise_operator(f, &(Rational::one() - gamma)), i)
}

/// All noisy influences `Inf^{1−γ}_i(f)`, one per coordinate.
pub fn noisy_influences<T: Scalar>(f: &FiniteFunction<T>, gamma: &Rational) -> Vec<T> {
    let noised = noise_operator(f, &(Rational::one() - gamma));
    (0..f.dim()).map(|i| influence(&noised, i).expect("coordinate in range")).collect()
}

pub fn total_noisy_influence<T: Scalar>(f: &FiniteFunction<T>, gamma: &Rational) -> T {
    noisy_influences(f, gamma).iter().fold(T::zero(), |acc, x| acc.add(x))
}

/// `Σ_{(i,j): π(j)=i} Inf^{1−γ}_i(f) · Inf^{1−γ}_j(g)` with `π: [dim g] → [dim f]`.
pub fn cross_influence<T: Scalar>(
    f: &FiniteFunction<T>,
    g: &FiniteFunction<T>,
    pi: &[usize],
    gamma: &Rational,
) -> Result<T> {
    if pi.len() != g.dim() {
        return Err(Error::DomainMismatch(format!("projection has {} entries, g has dimension {}", pi.len(), g.dim())));
    }
    if let Some(&bad) = pi.iter().find(|&&i| i >= f.dim()) {
        return Err(Error::IndexOutOfRange { index: bad, dim: f.dim() });
    }
    let inf_f = noisy_influences(f, gamma);
    let inf_g = noisy_influences(g, gamma);
    Ok(pi.iter().zip(&inf_g).fold(T::zero(), |acc, (&i, ig)| acc.add(&inf_f[i].mul(ig))))
}

fn is_half(alpha: f64) -> bool {
    (alpha - 0.5).abs() < 1e-12
}

fn check_gamma_alpha(gamma: f64, alpha: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::BadParameter(format!("γ = {gamma} must lie in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha <= 0.5 + 1e-12) {
        return Err(Error::BadParameter(format!("α = {alpha} must lie in (0, 1/2]")));
    }
    Ok(())
}

/// The hypercontractivity exponent gap `δ(γ, α)` from the closed forms:
/// `γ(2−γ)/(1−γ)²` for `α = 1/2` (valid for `γ < 1/2`), and
/// `2(log((1−γ)^{−2}) − 1)/log A` with `A = (1−α)/α` otherwise (valid for
/// `γ < 1 − A^{−1/2}`). Parameters outside the validity range, or giving a
/// non-positive `δ`, are rejected.
pub fn hc_delta(gamma: f64, alpha: f64) -> Result<f64> {
    check_gamma_alpha(gamma, alpha)?;
    if is_half(alpha) {
        if gamma >= 0.5 {
            return Err(Error::BadParameter(format!("closed form for α = 1/2 needs γ < 1/2, got {gamma}")));
        }
        return Ok(gamma * (2.0 - gamma) / (1.0 - gamma).powi(2));
    }
    let a = (1.0 - alpha) / alpha;
    let limit = 1.0 - a.powf(-0.5);
    if gamma >= limit {
        return Err(Error::BadParameter(format!("γ = {gamma} not below 1 − A^(-1/2) = {limit:.6}")));
    }
    let delta = 2.0 * ((1.0 - gamma).powi(-2).ln() - 1.0) / a.ln();
    if delta <= 0.0 {
        return Err(Error::BadParameter(format!("δ({gamma}, {alpha}) = {delta:.6} is not positive")));
    }
    Ok(delta)
}

/// `q − 2` where `q` solves `(1−γ)² = ρ(q, α)²` for the two-point
/// hypercontractivity constant, `2 log A / log((1+ρ²A)/(1+ρ²/A)) − 2`.
/// Equals the `α = 1/2` closed form in the limit `A → 1`.
pub fn hc_delta_exact(gamma: f64, alpha: f64) -> Result<f64> {
    check_gamma_alpha(gamma, alpha)?;
    if is_half(alpha) {
        return Ok(gamma * (2.0 - gamma) / (1.0 - gamma).powi(2));
    }
    let a = (1.0 - alpha) / alpha;
    let r2 = (1.0 - gamma).powi(2);
    Ok(2.0 * a.ln() / ((1.0 + r2 * a) / (1.0 + r2 / a)).ln() - 2.0)
}

/// Exponent gap used by the pair and bucketing bounds: with
/// `δ' = min(δ_exact(γ, 1/min Q), δ_exact(γ, 1/max Q))` the pair bound reads
/// `E[FG] ≤ Γ^{−(1 + δ'/(2(2+δ')))}`.
pub fn pair_bound_delta(gamma: f64, alphabet_sizes: &[usize]) -> Result<f64> {
    let lo = *alphabet_sizes.iter().min().ok_or_else(|| Error::BadParameter("no alphabets".into()))?;
    let hi = *alphabet_sizes.iter().max().unwrap();
    if lo < 2 {
        return Err(Error::BadParameter("alphabets need at least two symbols".into()));
    }
    let d = hc_delta_exact(gamma, 1.0 / lo as f64)?.min(hc_delta_exact(gamma, 1.0 / hi as f64)?);
    Ok(d / (2.0 * (2.0 + d)))
}

/// Outcome of checking `‖T_{1−γ} f‖_{2+δ} ≤ ‖f‖_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HcReport {
    pub gamma: f64,
    pub alpha: f64,
    pub delta: f64,
    /// `δ` from [`hc_delta`] when its parameters are valid.
    pub closed_form_delta: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const NORM_TOLERANCE: f64 = 1e-9;

/// Checks hypercontractivity at the exact exponent for the space's minimum
/// atom (which dominates the closed-form exponent whenever that is valid).
pub fn verify_hc<T: Scalar>(f: &FiniteFunction<T>, gamma: f64) -> Result<HcReport> {
    let alpha = rational::to_f64(&f.space().min_atom()).min(0.5);
    let delta = hc_delta_exact(gamma, alpha)?;
    let rho = rational::from_f64(1.0 - gamma)?;
    let noised = noise_operator(&f.to_f64(), &rho);
    let lhs = noised.norm(2.0 + delta);
    let rhs = f.to_f64().norm(2.0);
    Ok(HcReport {
        gamma,
        alpha,
        delta,
        closed_form_delta: hc_delta(gamma, alpha).ok(),
        lhs,
        rhs,
        holds: lhs <= rhs + NORM_TOLERANCE,
    })
}

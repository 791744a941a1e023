//! Dimensional constants: sphere volumes, Gamma, multinomials.

use crate::error::{NodalError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ambient dimension `n` and codimension `r` with `1 <= r <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimPair {
    pub n: usize,
    pub r: usize,
}

impl DimPair {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 || r > n {
            return Err(NodalError::InvalidDimensions { n, r });
        }
        Ok(Self { n, r })
    }

    /// All pairs `1 <= r <= n <= n_max`, ordered by `n` then `r`.
    pub fn all_up_to(n_max: usize) -> Vec<DimPair> {
        (1..=n_max)
            .flat_map(|n| (1..=n).map(move |r| DimPair { n, r }))
            .collect()
    }

    pub fn is_full_rank(&self) -> bool {
        self.r == self.n
    }
}

impl std::fmt::Display for DimPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, r={})", self.n, self.r)
    }
}

// Above this dimension the product recurrence would underflow; switch to log-Gamma.
const RECURRENCE_LIMIT: usize = 300;

/// Volume of the unit sphere `S^k` in `R^{k+1}`.
///
/// Uses the two-step recurrence `vol(S^{k+2}) = 2π vol(S^k)/(k+1)` from `S^0`, `S^1`,
/// which keeps the relative error at a few ulps; very large `k` falls back to log-Gamma.
pub fn sphere_volume(k: usize) -> f64 {
    if k > RECURRENCE_LIMIT {
        return ln_sphere_volume(k).exp();
    }
    let mut v = if k.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = k % 2;
    while j < k {
        v *= 2.0 * PI / (j as f64 + 1.0);
        j += 2;
    }
    v
}

/// `ln vol(S^k) = ln 2 + ((k+1)/2) ln π − ln Γ((k+1)/2)`.
pub fn ln_sphere_volume(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    std::f64::consts::LN_2 + h * PI.ln() - statrs::function::gamma::ln_gamma(h)
}

/// Volume of real projective space with the quotient round metric, `vol(S^n)/2`.
pub fn projective_volume(n: usize) -> f64 {
    0.5 * sphere_volume(n)
}

/// Euler's Gamma function on `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(NodalError::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    if x > 171.0 {
        return Ok(f64::INFINITY);
    }
    // reduce to [1, 2] and recur, which keeps the error at a few ulps per step
    let mut y = x;
    let mut scale = 1.0;
    while y < 1.0 {
        scale /= y;
        y += 1.0;
    }
    while y > 2.0 {
        y -= 1.0;
        scale *= y;
    }
    Ok(scale * statrs::function::gamma::gamma(y))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(NodalError::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// Multinomial coefficient `d!/(α_0!…α_m!)`. Exact for `d <= 20`, log-space otherwise.
pub fn multinomial(d: usize, alpha: &[usize]) -> Result<f64> {
    let total: usize = alpha.iter().sum();
    if total != d {
        return Err(NodalError::LengthMismatch { expected: d, got: total });
    }
    if d <= 20 {
        let fact = |k: usize| (1..=k as u64).product::<u64>();
        let den: u64 = alpha.iter().map(|&a| fact(a)).product();
        return Ok((fact(d) / den) as f64);
    }
    Ok(ln_multinomial(d, alpha)?.exp())
}

/// `ln(d!/α!)`.
pub fn ln_multinomial(d: usize, alpha: &[usize]) -> Result<f64> {
    let total: usize = alpha.iter().sum();
    if total != d {
        return Err(NodalError::LengthMismatch { expected: d, got: total });
    }
    Ok(ln_factorial(d) - alpha.iter().map(|&a| ln_factorial(a)).sum::<f64>())
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Falling factorial `m!/(m−k)!` as a float.
pub fn falling_factorial(m: usize, k: usize) -> f64 {
    ((m - k + 1)..=m).map(|j| j as f64).product()
}

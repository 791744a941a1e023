//! Direct simulation of KSS zero sets: real-root counts on `RP¹` and Crofton length on `RP²`.
//!
//! Three counters are provided. The companion-matrix eigensolve (balanced, real Schur) is the
//! reference float method; a sign scan on the projective circle handles high degree, where
//! KSS coefficients span many orders of magnitude; Sturm sequences in exact integer arithmetic
//! serve as the oracle for both.

use crate::error::{NodalError, Result};
use crate::gaussian::{std_normal, RngStream};
use crate::kostlan_model::{KostlanBasis, KostlanSample};
use crate::parallel::run_batches;
use crate::stats::Moments;
use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest degree for which [`CounterMethod::Auto`] uses the companion matrix.
pub const AUTO_COMPANION_MAX_DEGREE: usize = 32;

/// Two real roots closer than this (relative to `max(1, |x|)`) raise the ill-conditioned flag.
pub const CLOSE_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterMethod {
    Companion,
    Scan,
    Auto,
}

impl std::str::FromStr for CounterMethod {
    type Err = NodalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "companion" => Ok(Self::Companion),
            "scan" => Ok(Self::Scan),
            "auto" => Ok(Self::Auto),
            _ => Err(NodalError::Domain(format!("unknown counter '{s}' (companion|scan|auto)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCount {
    pub count: usize,
    pub ill_conditioned: bool,
}

fn check_leading(coeffs: &[f64]) -> Result<usize> {
    match coeffs.last() {
        None => Err(NodalError::Shape("empty coefficient vector".into())),
        Some(&c) if c == 0.0 || !c.is_finite() => Err(NodalError::Domain("leading coefficient must be nonzero".into())),
        Some(_) => Ok(coeffs.len() - 1),
    }
}

/// Distinct real roots of `Σ c_k x^k` (ascending coefficients).
pub fn count_real_roots(coeffs: &[f64]) -> Result<RootCount> {
    count_real_roots_with(coeffs, CounterMethod::Auto)
}

pub fn count_real_roots_with(coeffs: &[f64], method: CounterMethod) -> Result<RootCount> {
    let d = check_leading(coeffs)?;
    match method {
        CounterMethod::Scan => Ok(RootCount { count: scan_count(coeffs)?, ill_conditioned: false }),
        CounterMethod::Companion => companion_count(coeffs),
        CounterMethod::Auto if d <= AUTO_COMPANION_MAX_DEGREE => companion_count(coeffs),
        CounterMethod::Auto => Ok(RootCount { count: scan_count(coeffs)?, ill_conditioned: false }),
    }
}

/// Real roots from the eigenvalues of the balanced companion matrix, sorted and merged.
/// The second value flags two roots closer than [`CLOSE_ROOT_TOL`].
pub fn companion_real_roots(coeffs: &[f64]) -> Result<(Vec<f64>, bool)> {
    let d = check_leading(coeffs)?;
    if d == 0 {
        return Ok((vec![], false));
    }
    let lead = coeffs[d];
    let mut m = DMatrix::zeros(d, d);
    for k in 0..d {
        m[(0, k)] = -coeffs[d - 1 - k] / lead;
        if k + 1 < d {
            m[(k + 1, k)] = 1.0;
        }
    }
    balance_parlett_reinsch(&mut m);
    let norm = m.norm();
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| NodalError::Domain("companion Schur iteration did not converge".into()))?;
    let tol = 1e-8 * norm.max(1.0);
    let mut roots: Vec<f64> = schur.complex_eigenvalues().iter().filter(|z| z.im.abs() <= tol).map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    let mut close = false;
    for x in roots {
        if let Some(&last) = merged.last() {
            if (x - last).abs() <= CLOSE_ROOT_TOL * last.abs().max(1.0) {
                close = true;
                continue;
            }
        }
        merged.push(x);
    }
    Ok((merged, close))
}

fn companion_count(coeffs: &[f64]) -> Result<RootCount> {
    match companion_real_roots(coeffs) {
        Ok((r, close)) => Ok(RootCount { count: r.len(), ill_conditioned: close }),
        // an unconverged eigensolve falls back to the scan and is flagged
        Err(NodalError::Domain(_)) => Ok(RootCount { count: scan_count(coeffs)?, ill_conditioned: true }),
        Err(e) => Err(e),
    }
}

// p(x) and p'(x) by Horner
#[inline]
fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Sign-relevant value and angular derivative of `G(θ) = P(cos θ, sin θ)` up to positive factors.
struct CircleForm<'a> {
    c: &'a [f64],
    rev: Vec<f64>,
    d: f64,
}

impl<'a> CircleForm<'a> {
    fn new(c: &'a [f64]) -> Self {
        Self { c, rev: c.iter().rev().cloned().collect(), d: (c.len() - 1) as f64 }
    }

    // θ ∈ [−π/4, 3π/4]; tan on the first quarter-turn, cot on the second
    #[inline]
    fn eval(&self, theta: f64) -> (f64, f64) {
        if theta <= PI / 4.0 {
            let x = theta.tan();
            let (p, dp) = horner(self.c, x);
            (p, dp * (1.0 + x * x) - self.d * x * p)
        } else {
            let y = 1.0 / theta.tan();
            let (q, dq) = horner(&self.rev, y);
            (q, self.d * y * q - dq * (1.0 + y * y))
        }
    }
}

/// Count sign changes of `G` on a grid over a half-turn; cells where `|G|` has an interior
/// local minimum without a sign change are refined by bisection on `G′` and add two roots
/// when the minimum crosses zero.
pub fn scan_count(coeffs: &[f64]) -> Result<usize> {
    let d = check_leading(coeffs)?;
    if d == 0 {
        return Ok(0);
    }
    let g = CircleForm::new(coeffs);
    let cells = {
        let m = (32.0 * (d as f64).sqrt() + 64.0).ceil() as usize;
        m + m % 2
    };
    let step = PI / cells as f64;
    // offset so that roots at rational slopes never land on a node
    let theta = |k: usize| -PI / 4.0 + (k as f64 + 0.381_966_011_250_105) * step;
    let mut count = 0;
    let (mut v0, mut h0) = g.eval(theta(0));
    for k in 1..=cells {
        let (v1, h1) = g.eval(theta(k));
        let s0 = v0 >= 0.0;
        if s0 != (v1 >= 0.0) {
            count += 1;
        } else {
            // |G| falls then rises inside the cell
            let sg = if s0 { 1.0 } else { -1.0 };
            if sg * h0 < 0.0 && sg * h1 > 0.0 {
                let (mut a, mut b) = (theta(k - 1), theta(k));
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if b - a <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
                        break;
                    }
                    if sg * g.eval(m).1 < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                if (g.eval(0.5 * (a + b)).0 >= 0.0) != s0 {
                    count += 2;
                }
            }
        }
        v0 = v1;
        h0 = h1;
    }
    Ok(count)
}

type Poly = Vec<BigInt>;

// exact integer image of the coefficients after a common power-of-two scaling
fn to_integer_poly(coeffs: &[f64]) -> Poly {
    let parts: Vec<(u64, i16, i8)> = coeffs.iter().map(|c| Float::integer_decode(*c)).collect();
    let emin = parts.iter().filter(|p| p.0 != 0).map(|p| p.1).min().unwrap_or(0);
    let mut poly: Poly = parts
        .iter()
        .map(|&(m, e, s)| {
            if m == 0 {
                BigInt::zero()
            } else {
                let v = BigInt::from(m) << ((e - emin) as usize);
                if s < 0 {
                    -v
                } else {
                    v
                }
            }
        })
        .collect();
    trim(&mut poly);
    poly
}

fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &Poly) -> Poly {
    let mut d: Poly = p.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    if d.is_empty() {
        d.push(BigInt::zero());
    }
    d
}

// remainder of a·|lc(b)|^k by b, so the sign of the remainder is that of the true one
fn positive_pseudo_rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lb = b[db].clone();
    let lb_abs = lb.abs();
    let sb = if lb.is_negative() { -BigInt::from(1) } else { BigInt::from(1) };
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let lr = r.last().cloned().expect("non-empty");
        for c in r.iter_mut() {
            *c *= &lb_abs;
        }
        let f = &sb * &lr;
        for (k, c) in b.iter().enumerate() {
            r[k + shift] -= &f * c;
        }
        r.pop();
        if r.is_empty() {
            r.push(BigInt::zero());
        }
        trim(&mut r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    r
}

fn primitive(p: &mut Poly) {
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && g != BigInt::from(1) {
        for c in p.iter_mut() {
            *c /= &g;
        }
    }
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut prev = 0i8;
    let mut n = 0;
    for s in signs.filter(|s| *s != 0) {
        if prev != 0 && s != prev {
            n += 1;
        }
        prev = s;
    }
    n
}

/// Exact count of distinct real roots by a Sturm sequence over the integers.
pub fn sturm_count(coeffs: &[f64]) -> Result<usize> {
    check_leading(coeffs)?;
    let p0 = to_integer_poly(coeffs);
    if p0.len() == 1 {
        return Ok(0);
    }
    let mut seq = vec![p0.clone(), derivative(&p0)];
    loop {
        let n = seq.len();
        let r = positive_pseudo_rem(&seq[n - 2], &seq[n - 1]);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        let mut next: Poly = r.into_iter().map(|c| -c).collect();
        primitive(&mut next);
        seq.push(next);
    }
    let sgn = |c: &BigInt| if c.is_positive() { 1i8 } else if c.is_negative() { -1 } else { 0 };
    let at_pos = sign_changes(seq.iter().map(|p| sgn(p.last().expect("non-empty"))));
    let at_neg = sign_changes(seq.iter().map(|p| {
        let s = sgn(p.last().expect("non-empty"));
        if (p.len() - 1) % 2 == 1 {
            -s
        } else {
            s
        }
    }));
    Ok(at_neg - at_pos)
}

/// Empirical statistics of a per-sample quantity (a root count or a length estimate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStats {
    pub d: usize,
    pub samples: u64,
    pub mean: f64,
    /// 99% half-width
    pub mean_ci: f64,
    pub var: f64,
    /// 99% half-width from the fourth central moment
    pub var_ci: f64,
    pub var_over_sqrt_d: f64,
    pub seed: u64,
    /// draws violating parity or `0 ≤ count ≤ d`
    pub violations: u64,
    pub ill_conditioned: u64,
    /// `histogram[k]` = number of draws with `k` roots (root counts only)
    pub histogram: Vec<u64>,
}

impl ZeroStats {
    fn from_moments(d: usize, m: &Moments, seed: u64, violations: u64, ill: u64, histogram: Vec<u64>) -> Self {
        let var = m.variance();
        Self {
            d,
            samples: m.count,
            mean: m.mean,
            mean_ci: m.mean_ci99(),
            var,
            var_ci: m.variance_ci99(),
            var_over_sqrt_d: var / (d as f64).sqrt(),
            seed,
            violations,
            ill_conditioned: ill,
            histogram,
        }
    }

    pub fn mean_stderr(&self) -> f64 {
        self.mean_ci / crate::stats::Z99
    }
}

#[derive(Default)]
struct Tally {
    m: Moments,
    violations: u64,
    ill: u64,
    hist: Vec<u64>,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.m.merge(&o.m);
        self.violations += o.violations;
        self.ill += o.ill;
        if self.hist.len() < o.hist.len() {
            self.hist.resize(o.hist.len(), 0);
        }
        for (a, b) in self.hist.iter_mut().zip(&o.hist) {
            *a += b;
        }
        self
    }
}

/// Count the real roots on `RP¹` of one KSS draw; a zero leading coefficient is redrawn.
pub fn kss_root_count<R: Rng + ?Sized>(basis: &Arc<KostlanBasis>, method: CounterMethod, rng: &mut R) -> RootCount {
    loop {
        let s = basis.sample(1, rng);
        let c = s.univariate_coefficients(0).expect("basis is univariate");
        if let Ok(rc) = count_real_roots_with(&c, method) {
            return rc;
        }
    }
}

/// Mean and variance of the number of real roots of degree-`d` KSS polynomials on `RP¹`.
pub fn empirical_root_stats(d: usize, samples: u64, stream: RngStream, method: CounterMethod) -> Result<ZeroStats> {
    if samples < 1000 {
        return Err(NodalError::Domain(format!("need at least 1000 samples, got {samples}")));
    }
    let basis = Arc::new(KostlanBasis::new(1, d)?);
    let parts = run_batches(samples, stream, |rng, count, _| {
        let mut t = Tally { hist: vec![0; d + 1], ..Default::default() };
        for _ in 0..count {
            let rc = kss_root_count(&basis, method, rng);
            if rc.count > d || rc.count % 2 != d % 2 {
                t.violations += 1;
            }
            t.ill += rc.ill_conditioned as u64;
            if rc.count <= d {
                t.hist[rc.count] += 1;
            }
            t.m.push(rc.count as f64);
        }
        t
    });
    let t = parts.into_iter().fold(Tally::default(), Tally::merge);
    Ok(ZeroStats::from_moments(d, &t.m, stream.seed, t.violations, t.ill, t.hist))
}

/// Orthonormal `u, v ∈ R³` spanning a uniformly random plane (Gram–Schmidt of two Gaussians).
pub fn random_plane<R: Rng + ?Sized>(rng: &mut R) -> ([f64; 3], [f64; 3]) {
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| std_normal(rng));
        let b: [f64; 3] = std::array::from_fn(|_| std_normal(rng));
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < 1e-12 {
            continue;
        }
        let u = a.map(|x| x / na);
        let p: f64 = u.iter().zip(&b).map(|(x, y)| x * y).sum();
        let w: [f64; 3] = std::array::from_fn(|i| b[i] - p * u[i]);
        let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nw < 1e-12 {
            continue;
        }
        return (u, w.map(|x| x / nw));
    }
}

// multiply a binary form (coefficients of s^{m−k} t^k) by a·s + b·t
fn mul_linear(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (k, c) in p.iter().enumerate() {
        out[k] += a * c;
        out[k + 1] += b * c;
    }
    out
}

/// Coefficients (ascending in `x = t/s`) of the binary form `(s, t) ↦ P(s·u + t·v)` for a
/// component of an `n = 2` sample.
pub fn restrict_to_plane(sample: &KostlanSample, comp: usize, u: &[f64; 3], v: &[f64; 3]) -> Result<Vec<f64>> {
    if sample.n != 2 {
        return Err(NodalError::Shape(format!("plane restriction needs n = 2, got n = {}", sample.n)));
    }
    let d = sample.d;
    let basis = &sample.basis;
    let coeffs = &sample.coeffs[comp];
    // index of (α₀, α₁, α₂) in the basis: lexicographic in (α₁, α₂) with α₁ + α₂ ≤ d
    let offset = |a1: usize| a1 * (d + 1) - a1 * (a1.saturating_sub(1)) / 2;
    let index = |a1: usize, a2: usize| offset(a1) + a2;
    // powers of ℓ₀ = u₀ s + v₀ t
    let mut pow0 = vec![vec![1.0]];
    for k in 0..d {
        let next = mul_linear(&pow0[k], u[0], v[0]);
        pow0.push(next);
    }
    // G_{α₂} = Σ_{α₀+α₁=d−α₂} b_α ℓ₀^{α₀} ℓ₁^{α₁}, Horner in ℓ₁; then Horner in ℓ₂
    let mut acc: Vec<f64> = Vec::new();
    for a2 in (0..=d).rev() {
        let m = d - a2;
        let c = |a1: usize| {
            let k = index(a1, a2);
            coeffs[k] * basis.relative_weight(k)
        };
        let mut g = vec![c(m)];
        for a1 in (0..m).rev() {
            g = mul_linear(&g, u[1], v[1]);
            let w = c(a1);
            for (gi, pi) in g.iter_mut().zip(&pow0[m - a1]) {
                *gi += w * pi;
            }
        }
        acc = if acc.is_empty() {
            g
        } else {
            let mut r = mul_linear(&acc, u[2], v[2]);
            for (ri, gi) in r.iter_mut().zip(&g) {
                *ri += gi;
            }
            r
        };
    }
    Ok(acc)
}

/// Crofton estimate of the length of the KSS curve in `RP²`: per sample,
/// `π · (mean number of intersections with random projective lines)`.
pub fn crofton_length_stats(
    d: usize,
    samples: u64,
    slices_per_sample: usize,
    stream: RngStream,
    method: CounterMethod,
) -> Result<ZeroStats> {
    if slices_per_sample == 0 {
        return Err(NodalError::Domain("need at least one slice per sample".into()));
    }
    if samples < 2 {
        return Err(NodalError::Domain("need at least two samples".into()));
    }
    let basis = Arc::new(KostlanBasis::new(2, d)?);
    let parts = run_batches(samples, stream, |rng, count, _| {
        let mut t = Tally::default();
        for _ in 0..count {
            let s = basis.sample(1, rng);
            let mut total = 0usize;
            let mut done = 0usize;
            while done < slices_per_sample {
                let (u, v) = random_plane(rng);
                let c = restrict_to_plane(&s, 0, &u, &v).expect("n = 2");
                let Ok(rc) = count_real_roots_with(&c, method) else { continue };
                if rc.count > d || rc.count % 2 != d % 2 {
                    t.violations += 1;
                }
                t.ill += rc.ill_conditioned as u64;
                total += rc.count;
                done += 1;
            }
            t.m.push(PI * total as f64 / slices_per_sample as f64);
        }
        t
    });
    let t = parts.into_iter().fold(Tally::default(), Tally::merge);
    Ok(ZeroStats::from_moments(d, &t.m, stream.seed, t.violations, t.ill, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::CoMoments;
    use proptest::prelude::*;

    #[test]
    fn simple_counts() {
        for m in [CounterMethod::Companion, CounterMethod::Scan] {
            assert_eq!(count_real_roots_with(&[1.0, 0.0, 1.0], m).unwrap().count, 0);
            assert_eq!(count_real_roots_with(&[-1.0, 0.0, 1.0], m).unwrap().count, 2);
            assert_eq!(count_real_roots_with(&[2.0, -3.0], m).unwrap().count, 1);
            // (x−1)(x−2)(x−3)
            assert_eq!(count_real_roots_with(&[-6.0, 11.0, -6.0, 1.0], m).unwrap().count, 3);
        }
        assert_eq!(sturm_count(&[1.0, 0.0, 1.0]).unwrap(), 0);
        assert_eq!(sturm_count(&[-1.0, 0.0, 1.0]).unwrap(), 2);
        assert_eq!(sturm_count(&[-6.0, 11.0, -6.0, 1.0]).unwrap(), 3);
        assert!(count_real_roots(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn double_root_is_counted_once() {
        // (x−1)²(x+2) = x³ − 3x + 2
        assert_eq!(sturm_count(&[2.0, -3.0, 0.0, 1.0]).unwrap(), 2);
        let (roots, _) = companion_real_roots(&[2.0, -3.0, 0.0, 1.0]).unwrap();
        assert!(roots.len() == 2 || roots.len() == 3);
    }

    #[test]
    fn companion_matches_sturm_on_kss_draws() {
        let basis = Arc::new(KostlanBasis::new(1, 30).unwrap());
        let mut rng = RngStream::new(17, 0).rng();
        for i in 0..200 {
            let c = basis.sample(1, &mut rng).univariate_coefficients(0).unwrap();
            let exact = sturm_count(&c).unwrap();
            assert_eq!(count_real_roots_with(&c, CounterMethod::Companion).unwrap().count, exact, "draw {i}");
            assert_eq!(count_real_roots_with(&c, CounterMethod::Scan).unwrap().count, exact, "draw {i}");
        }
    }

    #[test]
    fn scan_matches_sturm_at_high_degree() {
        let basis = Arc::new(KostlanBasis::new(1, 60).unwrap());
        let mut rng = RngStream::new(19, 0).rng();
        for i in 0..8 {
            let c = basis.sample(1, &mut rng).univariate_coefficients(0).unwrap();
            assert_eq!(scan_count(&c).unwrap(), sturm_count(&c).unwrap(), "draw {i}");
        }
    }

    #[test]
    fn scan_finds_close_pairs() {
        // roots at 0.3 ± 1e-4 and at 5: the pair sits inside one grid cell
        let r = [0.3 - 1e-4, 0.3 + 1e-4, 5.0];
        let c = [-r[0] * r[1] * r[2], r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -(r[0] + r[1] + r[2]), 1.0];
        assert_eq!(scan_count(&c).unwrap(), 3);
        assert_eq!(sturm_count(&c).unwrap(), 3);
    }

    #[test]
    fn degree_one_has_one_root() {
        let s = empirical_root_stats(1, 2000, RngStream::new(1, 0), CounterMethod::Auto).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.var, 0.0);
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn mean_is_sqrt_d() {
        for (d, m) in [(4, CounterMethod::Auto), (25, CounterMethod::Auto), (100, CounterMethod::Scan)] {
            let s = empirical_root_stats(d, 20_000, RngStream::new(7, d as u64), m).unwrap();
            let se = s.mean_stderr();
            assert!((s.mean - (d as f64).sqrt()).abs() < 3.0 * se, "d={d}: {} ± {se}", s.mean);
            assert_eq!(s.violations, 0);
            assert_eq!(s.histogram.iter().sum::<u64>(), 20_000);
        }
    }

    #[test]
    fn degree_two_variance() {
        let s = empirical_root_stats(2, 50_000, RngStream::new(8, 0), CounterMethod::Auto).unwrap();
        let exact = 2.0 * 2f64.sqrt() - 2.0;
        assert!((s.var - exact).abs() < s.var_ci, "{} vs {exact}", s.var);
    }

    #[test]
    fn odd_chaos_projections_vanish() {
        // #roots is even in the coefficients, so its projections on odd Hermite functionals vanish
        let d = 20;
        let basis = Arc::new(KostlanBasis::new(1, d).unwrap());
        let mut rng = RngStream::new(23, 0).rng();
        let mut acc = [CoMoments::default(), CoMoments::default(), CoMoments::default()];
        for _ in 0..40_000 {
            let s = basis.sample(1, &mut rng);
            let c = s.univariate_coefficients(0).unwrap();
            let n = count_real_roots(&c).unwrap().count as f64;
            let a = &s.coeffs[0];
            acc[0].push(n, a[3]);
            acc[1].push(n, crate::kostlan_model::hermite(3, a[10]));
            acc[2].push(n, a[0] * a[1] * a[2]);
        }
        for (i, c) in acc.iter().enumerate() {
            // Var(N·H) ≤ E[N²]·E[H²] bounds the stderr
            let bound = (30.0f64 * 6.0 / 40_000.0).sqrt();
            assert!(c.covariance().abs() < 3.0 * bound, "functional {i}: {}", c.covariance());
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn restriction_is_kss() {
        let d = 3;
        let basis = Arc::new(KostlanBasis::new(2, d).unwrap());
        let mut rng = RngStream::new(29, 0).rng();
        let (u, v) = random_plane(&mut rng);
        let scale = basis.weight_scale();
        let norm: Vec<f64> = (0..=d).map(|k| scale / (0.5 * crate::geometry::ln_binomial(d, k)).exp()).collect();
        let samples = 40_000;
        let mut cm = vec![vec![CoMoments::default(); d + 1]; d + 1];
        for _ in 0..samples {
            let s = basis.sample(1, &mut rng);
            let q = restrict_to_plane(&s, 0, &u, &v).unwrap();
            for i in 0..=d {
                for j in 0..=d {
                    cm[i][j].push(q[i] * norm[i], q[j] * norm[j]);
                }
            }
        }
        for i in 0..=d {
            for j in 0..=d {
                let expect = if i == j { 1.0 } else { 0.0 };
                // product of unit normals: variance 2 on the diagonal, 1 off it
                let se = ((1.0 + expect) / samples as f64).sqrt();
                assert!((cm[i][j].covariance() - expect).abs() < 3.0 * se, "({i},{j}): {}", cm[i][j].covariance());
            }
        }
    }

    #[test]
    fn restriction_matches_direct_evaluation() {
        let mut rng = RngStream::new(31, 0).rng();
        let basis = Arc::new(KostlanBasis::new(2, 7).unwrap());
        let s = basis.sample(1, &mut rng);
        let (u, v) = random_plane(&mut rng);
        let q = restrict_to_plane(&s, 0, &u, &v).unwrap();
        let scale = (s.eval_homogeneous(0, &u) / q[0]).abs();
        for th in [0.1f64, 0.9, 2.0] {
            let (c, sn) = (th.cos(), th.sin());
            let x: Vec<f64> = (0..3).map(|i| c * u[i] + sn * v[i]).collect();
            let direct = s.eval_homogeneous(0, &x);
            let via: f64 = q.iter().enumerate().map(|(k, a)| a * c.powi((7 - k) as i32) * sn.powi(k as i32)).sum();
            assert!((direct - scale * via).abs() < 1e-9 * direct.abs().max(scale), "θ={th}");
        }
    }

    #[test]
    fn crofton_degree_one_is_exact() {
        let s = crofton_length_stats(1, 200, 5, RngStream::new(3, 0), CounterMethod::Auto).unwrap();
        assert!((s.mean - PI).abs() < 1e-12);
        assert!(s.var < 1e-20);
    }

    #[test]
    fn crofton_small_degree_mean() {
        let d = 9;
        let s = crofton_length_stats(d, 2000, 10, RngStream::new(4, 0), CounterMethod::Auto).unwrap();
        assert!((s.mean - PI * 3.0).abs() < 3.0 * s.mean_stderr(), "{s:?}");
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn counter_method_parses() {
        assert_eq!("scan".parse::<CounterMethod>().unwrap(), CounterMethod::Scan);
        assert!("eig".parse::<CounterMethod>().is_err());
    }

    proptest! {
        #[test]
        fn counts_are_bounded_with_parity(c in proptest::collection::vec(-10.0f64..10.0, 2..12)) {
            prop_assume!(c.last().unwrap().abs() > 1e-3);
            let d = c.len() - 1;
            let exact = sturm_count(&c).unwrap();
            prop_assert!(exact <= d);
            let s = scan_count(&c).unwrap();
            prop_assert!(s <= d && s % 2 == d % 2);
            let rc = count_real_roots_with(&c, CounterMethod::Companion).unwrap();
            prop_assert!(rc.count <= d);
        }

        #[test]
        fn companion_and_sturm_agree_on_separated_roots(roots in proptest::collection::vec(-5.0f64..5.0, 1..8)) {
            let mut r = roots.clone();
            r.sort_by(f64::total_cmp);
            prop_assume!(r.windows(2).all(|w| w[1] - w[0] > 1e-2));
            // expand Π (x − r_i)(x² + 1)
            let mut c = vec![1.0, 0.0, 1.0];
            for x in &r {
                let mut next = vec![0.0; c.len() + 1];
                for (k, a) in c.iter().enumerate() {
                    next[k + 1] += a;
                    next[k] -= x * a;
                }
                c = next;
            }
            prop_assert_eq!(sturm_count(&c).unwrap(), r.len());
            prop_assert_eq!(count_real_roots_with(&c, CounterMethod::Companion).unwrap().count, r.len());
            // the grid resolves roots whose angular gap exceeds a few cells
            let mut ang: Vec<f64> = r.iter().map(|x| x.atan().rem_euclid(PI)).collect();
            ang.sort_by(f64::total_cmp);
            let cells = 32.0 * ((c.len() - 1) as f64).sqrt() + 64.0;
            if ang.windows(2).all(|w| w[1] - w[0] > 3.0 * PI / cells) && PI - (ang[ang.len() - 1] - ang[0]) > 3.0 * PI / cells {
                prop_assert_eq!(scan_count(&c).unwrap(), r.len());
            }
        }
    }
}

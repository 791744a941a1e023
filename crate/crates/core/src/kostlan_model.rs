//! Kostlan–Shub–Smale (KSS) polynomials in the affine chart `[1 : z₁ : … : zₙ]` of `RPⁿ`.
//!
//! A KSS polynomial of degree `d` is `κ Σ_{|α|=d} a_α √(d choose α) X^α` with i.i.d. standard
//! `a_α` and `κ² = (d+n)!/(πⁿ d!)`. Its normalized correlation in the chart is the kernel
//! `ξ_d(w, z) = ((1+⟨w,z⟩)/(√(1+‖w‖²)√(1+‖z‖²)))^d`.
//!
//! Normalizations: `t_d = s/κ` and `L_d = ∇s/(κ√d)` (orthonormal coframe) have unit variance.
//! Raw covariances are recovered by multiplying value entries by `κ` and jet entries by `κ√d`,
//! see [`JetCovarianceBlocks::assembled_raw`]. The Kac–Rice density is reported with the
//! `d^r` factor restored: `D_d(t) = d^r (E[odet L(0) odet L(z) | t(0)=t(z)=0]/det(A_d)^{r/2} − B0²)`.

use crate::error::{NodalError, Result};
use crate::gaussian::{condition_on_zero, expected_odet_standard, odet_rows, std_normal, RngStream, SymmetricMatrix};
use crate::geometry::{ln_multinomial, projective_volume, sphere_volume, DimPair};
use crate::jacobian_moments::{fold, DnrSampler, XyCoefficients};
use crate::limit_model::KernelJet;
use crate::parallel::run_batches;
use crate::quadrature::{gauss_legendre, integrate_adaptive, map_rule};
use crate::stats::Moments;
use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Multi-indices `|α| = d` in `n+1` variables with their square-root multinomial weights.
///
/// Ordering is lexicographic in `(α₁, …, αₙ)` with `α₀ = d − Σαᵢ`; for `n = 1` index `k`
/// is the coefficient of `x^k` in the dehomogenized polynomial.
#[derive(Debug, Clone)]
pub struct KostlanBasis {
    pub n: usize,
    pub d: usize,
    /// Row-major `len × (n+1)` exponents.
    exponents: Vec<u32>,
    /// `√(d choose α)` divided by the largest such weight.
    rel_weights: Vec<f64>,
    /// `ln κ + ½ ln max_α (d choose α)`.
    ln_scale: f64,
}

impl KostlanBasis {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(NodalError::Domain(format!("need n ≥ 1 and d ≥ 1, got n={n}, d={d}")));
        }
        let mut exponents = Vec::new();
        let mut tail = vec![0usize; n];
        enumerate(&mut tail, 0, d, &mut |t| {
            let s: usize = t.iter().sum();
            exponents.push((d - s) as u32);
            exponents.extend(t.iter().map(|&a| a as u32));
        });
        let len = exponents.len() / (n + 1);
        let half_ln: Vec<f64> = (0..len)
            .map(|k| {
                let a: Vec<usize> = exponents[k * (n + 1)..(k + 1) * (n + 1)].iter().map(|&e| e as usize).collect();
                0.5 * ln_multinomial(d, &a).expect("exponents sum to d")
            })
            .collect();
        let top = half_ln.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            n,
            d,
            exponents,
            rel_weights: half_ln.iter().map(|h| (h - top).exp()).collect(),
            ln_scale: 0.5 * ln_kappa_sq(n, d) + top,
        })
    }

    /// Number of coefficients, `C(d+n, n)`.
    pub fn len(&self) -> usize {
        self.rel_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel_weights.is_empty()
    }

    pub fn exponent(&self, k: usize) -> &[u32] {
        &self.exponents[k * (self.n + 1)..(k + 1) * (self.n + 1)]
    }

    /// Relative weight `√(d choose α)/max_β √(d choose β)` of coefficient `k`.
    pub fn relative_weight(&self, k: usize) -> f64 {
        self.rel_weights[k]
    }

    /// `max_α √(d choose α)`, the factor removed from the stored weights.
    pub fn weight_scale(&self) -> f64 {
        (self.ln_scale - 0.5 * ln_kappa_sq(self.n, self.d)).exp()
    }

    /// `κ² = (d+n)!/(πⁿ d!)`, the pointwise variance of a KSS polynomial on the unit sphere.
    pub fn kappa_sq(&self) -> f64 {
        ln_kappa_sq(self.n, self.d).exp()
    }

    pub fn sample<R: Rng + ?Sized>(self: &Arc<Self>, r: usize, rng: &mut R) -> KostlanSample {
        let coeffs = (0..r).map(|_| (0..self.len()).map(|_| std_normal(rng)).collect()).collect();
        KostlanSample { n: self.n, d: self.d, r, coeffs, basis: Arc::clone(self) }
    }
}

fn ln_kappa_sq(n: usize, d: usize) -> f64 {
    ((d + 1)..=(d + n)).map(|j| (j as f64).ln()).sum::<f64>() - n as f64 * PI.ln()
}

fn enumerate(tail: &mut [usize], pos: usize, budget: usize, f: &mut impl FnMut(&[usize])) {
    if pos == tail.len() {
        f(tail);
        return;
    }
    for a in 0..=budget {
        tail[pos] = a;
        enumerate(tail, pos + 1, budget - a, f);
    }
    tail[pos] = 0;
}

/// `r` independent KSS polynomials: `coeffs[i][k]` is the standard Gaussian `a_α` of component `i`.
#[derive(Debug, Clone)]
pub struct KostlanSample {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub coeffs: Vec<Vec<f64>>,
    pub basis: Arc<KostlanBasis>,
}

pub fn sample_kostlan<R: Rng + ?Sized>(n: usize, d: usize, r: usize, rng: &mut R) -> Result<KostlanSample> {
    DimPair::new(n, r)?;
    Ok(Arc::new(KostlanBasis::new(n, d)?).sample(r, rng))
}

impl KostlanSample {
    /// `Σ a_α w_α X^α` with the relative weights; the overall scale is `exp(ln_scale)`.
    fn raw_sum(&self, comp: usize, x: &[f64]) -> f64 {
        let b = &self.basis;
        self.coeffs[comp]
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let m: f64 = b.exponent(k).iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product();
                a * b.rel_weights[k] * m
            })
            .sum()
    }

    /// `s(X)` for `X ∈ R^{n+1}`, normalization included.
    pub fn eval_homogeneous(&self, comp: usize, x: &[f64]) -> f64 {
        self.basis.ln_scale.exp() * self.raw_sum(comp, x)
    }

    /// Value of the section at `[1 : z]` in the unit real frame: `(1+‖z‖²)^{−d/2} s(1, z)`.
    pub fn eval_chart(&self, comp: usize, z: &[f64]) -> f64 {
        let (p, _) = self.chart_poly(comp, z);
        let t: f64 = z.iter().map(|v| v * v).sum();
        (self.basis.ln_scale - 0.5 * self.d as f64 * t.ln_1p()).exp() * p
    }

    // relative-weight dehomogenized polynomial and its chart gradient
    fn chart_poly(&self, comp: usize, z: &[f64]) -> (f64, Vec<f64>) {
        let b = &self.basis;
        let n = self.n;
        let mut p = 0.0;
        let mut g = vec![0.0; n];
        for (k, a) in self.coeffs[comp].iter().enumerate() {
            let e = &b.exponent(k)[1..];
            let c = a * b.rel_weights[k];
            let pw: Vec<f64> = e.iter().zip(z).map(|(&ei, &zi)| zi.powi(ei as i32)).collect();
            p += c * pw.iter().product::<f64>();
            for i in 0..n {
                if e[i] == 0 {
                    continue;
                }
                let mut m = c * e[i] as f64 * z[i].powi(e[i] as i32 - 1);
                for (j, v) in pw.iter().enumerate() {
                    if j != i {
                        m *= v;
                    }
                }
                g[i] += m;
            }
        }
        (p, g)
    }

    /// Normalized 1-jet `(t_d(z), L_d(z))` of component `comp` at chart point `z`;
    /// `L_d` is expressed in an orthonormal coframe of the Fubini–Study metric.
    pub fn chart_jet(&self, comp: usize, z: &[f64]) -> (f64, Vec<f64>) {
        let (p, g) = self.chart_poly(comp, z);
        let d = self.d as f64;
        let t: f64 = z.iter().map(|v| v * v).sum();
        let scale = (self.basis.ln_scale - 0.5 * ln_kappa_sq(self.n, self.d) - 0.5 * d * t.ln_1p()).exp();
        let value = scale * p;
        // chart gradient of (1+‖z‖²)^{−d/2} p
        let grad: Vec<f64> = g.iter().zip(z).map(|(gi, zi)| scale * (gi - d * zi * p / (1.0 + t))).collect();
        // g^{−1/2} = √(1+t)(I + (√(1+t) − 1) ẑẑᵗ)
        let s = (1.0 + t).sqrt();
        let radial: f64 = if t > 0.0 { grad.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / t } else { 0.0 };
        let jet = grad
            .iter()
            .zip(z)
            .map(|(gi, zi)| s * (gi + (s - 1.0) * radial * zi) / d.sqrt())
            .collect();
        (value, jet)
    }

    /// Dehomogenized univariate coefficients (ascending powers of `x = X₁/X₀`) for `n = 1`,
    /// up to a positive constant.
    pub fn univariate_coefficients(&self, comp: usize) -> Result<Vec<f64>> {
        if self.n != 1 {
            return Err(NodalError::Shape(format!("univariate coefficients need n = 1, got n = {}", self.n)));
        }
        Ok(self.coeffs[comp].iter().zip(&self.basis.rel_weights).map(|(a, w)| a * w).collect())
    }
}

/// `ξ_d(w, z)`; a signed power when `1 + ⟨w, z⟩ ≤ 0`.
pub fn xi_d(w: &[f64], z: &[f64], d: usize) -> f64 {
    let (base, _, _) = xi_base(w, z);
    if base > 0.0 {
        (d as f64 * base.ln()).exp()
    } else {
        base.powi(d as i32)
    }
}

fn xi_base(w: &[f64], z: &[f64]) -> (f64, f64, f64) {
    let pwz = 1.0 + w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let nw = 1.0 + w.iter().map(|a| a * a).sum::<f64>();
    let nz = 1.0 + z.iter().map(|a| a * a).sum::<f64>();
    (pwz / (nw.sqrt() * nz.sqrt()), nw, nz)
}

/// First and mixed derivatives of `ξ_d`, in the closed form
/// `∂xᵢξ = dξ (zᵢ/P − wᵢ/(1+‖w‖²))`, `P = 1 + ⟨w,z⟩`, and likewise for the others.
pub fn xi_d_jet(w: &[f64], z: &[f64], d: usize) -> KernelJet {
    let n = w.len();
    let xi = xi_d(w, z, d);
    let df = d as f64;
    let p = 1.0 + w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let nw = 1.0 + w.iter().map(|a| a * a).sum::<f64>();
    let nz = 1.0 + z.iter().map(|a| a * a).sum::<f64>();
    KernelJet {
        grad_x: (0..n).map(|i| df * xi * (z[i] / p - w[i] / nw)).collect(),
        grad_y: (0..n).map(|j| df * xi * (w[j] / p - z[j] / nz)).collect(),
        hess_xy: DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            xi * (df * delta / p - df * df * w[i] * w[j] / (p * nw) - df * df * z[i] * z[j] / (p * nz)
                + df * df * w[i] * z[j] / (nw * nz)
                + (df * df - df) * z[i] * w[j] / (p * p))
        }),
    }
}

/// Covariance blocks of `(t(0), t(z))`, `(L₁(0), L₁(z))` (radial) and `(Lⱼ(0), Lⱼ(z))`, `j ≥ 2`,
/// as functions of `t = ‖z‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetCovarianceBlocks {
    pub t: f64,
    pub d: usize,
    /// values
    pub a: Matrix2<f64>,
    /// rows `L₁(0), L₁(z)` against columns `t(0), t(z)`
    pub b: Matrix2<f64>,
    /// tangential jets
    pub c: Matrix2<f64>,
    /// radial jets
    pub dd: Matrix2<f64>,
}

/// `(1+t)^{−d/2}` in log space.
fn value_corr(t: f64, d: f64) -> f64 {
    (-0.5 * d * t.ln_1p()).exp()
}

pub fn jet_covariance_blocks(t: f64, d: usize) -> Result<JetCovarianceBlocks> {
    if !(t >= 0.0) || d == 0 {
        return Err(NodalError::Domain(format!("need t ≥ 0 and d ≥ 1, got t={t}, d={d}")));
    }
    let df = d as f64;
    let c = value_corr(t, df);
    let bt = (df * t).sqrt() * c;
    let ct = (0.5 * (1.0 - df) * t.ln_1p()).exp();
    let dt = (1.0 + t - df * t) * c;
    Ok(JetCovarianceBlocks {
        t,
        d,
        a: Matrix2::new(1.0, c, c, 1.0),
        b: Matrix2::new(0.0, bt, -bt, 0.0),
        c: Matrix2::new(1.0, ct, ct, 1.0),
        dd: Matrix2::new(1.0, dt, dt, 1.0),
    })
}

impl JetCovarianceBlocks {
    /// Normalized `(2n+2)×(2n+2)` covariance of `(t(0), t(z), L₁(0), L₁(z), …, Lₙ(0), Lₙ(z))`.
    pub fn assembled(&self, n: usize) -> Result<SymmetricMatrix> {
        let dim = 2 * n + 2;
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = self.a[(i, j)];
                m[(2 + i, j)] = self.b[(i, j)];
                m[(j, 2 + i)] = self.b[(i, j)];
                m[(2 + i, 2 + j)] = self.dd[(i, j)];
                for k in 2..=n {
                    m[(2 * k + i, 2 * k + j)] = self.c[(i, j)];
                }
            }
        }
        SymmetricMatrix::new(m)
    }

    /// The same covariance for the raw section: values scaled by `κ`, jets by `κ√d`.
    pub fn assembled_raw(&self, n: usize) -> Result<SymmetricMatrix> {
        let norm = self.assembled(n)?;
        let kappa = (0.5 * ln_kappa_sq(n, self.d)).exp();
        let s: Vec<f64> = (0..2 * n + 2).map(|i| if i < 2 { kappa } else { kappa * (self.d as f64).sqrt() }).collect();
        SymmetricMatrix::from_fn(2 * n + 2, |i, j| s[i] * norm.get(i, j) * s[j])
    }
}

/// `F_d(τ) = (1+τ/d)^{−d}((1+τ/d−τ)² + (n−1)(1+τ/d) − 2nτ + n²)`.
pub fn f_d(tau: f64, n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let u = 1.0 + tau / d;
    (-d * (tau / d).ln_1p()).exp() * ((u - tau).powi(2) + (nf - 1.0) * u - 2.0 * nf * tau + nf * nf)
}

/// Pointwise `d → ∞` limit of `F_d`: `(τ² − 2τ(n+1) + n(n+1)) e^{−τ}`.
pub fn f_limit(tau: f64, n: usize) -> f64 {
    let nf = n as f64;
    (tau * tau - 2.0 * tau * (nf + 1.0) + nf * (nf + 1.0)) * (-tau).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JnrConfig {
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for JnrConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JnrResult {
    pub d: f64,
    pub pair: DimPair,
    /// `∫₀^∞ F_d(t) t^{(n−2)/2} (1+t/d)^{−(n+1)/2} dt`
    pub bare: f64,
    /// `d^{−n/2} r vol(S^{n−1}) · bare`
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// `J_{n,r}(d)` by adaptive Gauss–Kronrod after `t = c x²/(1−x)²`, `c = n/2 + 2`, which
/// removes the `t^{−1/2}` endpoint singularity at `n = 1` and compactifies the tail.
pub fn jnr_integral(d: f64, pair: DimPair, cfg: &JnrConfig) -> Result<JnrResult> {
    let n = pair.n;
    let threshold = n as f64 / 2.0 + 2.0;
    if !(d >= threshold) {
        return Err(NodalError::Integrability(format!("J_{{n,r}}(d) needs d ≥ n/2 + 2 = {threshold}, got d = {d}")));
    }
    let c = threshold;
    let h = (n as f64 - 2.0) / 2.0;
    let f = |x: f64| {
        let one_m = 1.0 - x;
        let t = c * x * x / (one_m * one_m);
        let jac = 2.0 * c * x / (one_m * one_m * one_m);
        // t^{(n−2)/2}·jac folded analytically to avoid 0·∞ at x → 0
        let tw = if n == 2 { jac } else { (h * t.ln()).exp() * jac };
        let v = f_d(t, n, d) * (-(n as f64 + 1.0) / 2.0 * (t / d).ln_1p()).exp() * tw;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let q = integrate_adaptive(f, 0.0, 1.0, cfg.rel_tol, 0.0, cfg.max_intervals);
    let pre = d.powf(-(n as f64) / 2.0) * pair.r as f64 * sphere_volume(n - 1);
    Ok(JnrResult { d, pair, bare: q.value, value: pre * q.value, error: pre * q.error, converged: q.converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondChaos {
    pub d: f64,
    pub pair: DimPair,
    pub j: f64,
    /// `Var[Vol Z_d[2]] = d^r vol(S^{n−r})²/(8n² vol Sⁿ) · J_{n,r}(d)`
    pub var: f64,
    /// `d^{n/2−r} · var`
    pub normalized_var: f64,
    pub limit: f64,
    pub rel_err: f64,
    /// Quadrature error estimate on `j`.
    pub j_error: f64,
    pub converged: bool,
}

/// `r(1 + 2/n) π^{n/2} vol(S^{n−r})²/(16 vol Sⁿ)`.
pub fn second_chaos_limit(pair: DimPair) -> f64 {
    let (n, r) = (pair.n as f64, pair.r as f64);
    r * (1.0 + 2.0 / n) * PI.powf(n / 2.0) * sphere_volume(pair.n - pair.r).powi(2) / (16.0 * sphere_volume(pair.n))
}

pub fn second_chaos_variance(d: f64, pair: DimPair) -> Result<SecondChaos> {
    let j = jnr_integral(d, pair, &JnrConfig::default())?;
    let (n, r) = (pair.n as f64, pair.r as f64);
    let pre = sphere_volume(pair.n - pair.r).powi(2) / (8.0 * n * n * sphere_volume(pair.n));
    let var = d.powf(r) * pre * j.value;
    // same quantity without the d^r·d^{−n/2} round trip
    let normalized_var = pre * r * sphere_volume(pair.n - 1) * j.bare;
    let limit = second_chaos_limit(pair);
    Ok(SecondChaos {
        d,
        pair,
        j: j.value,
        var,
        normalized_var,
        limit,
        rel_err: (normalized_var - limit) / limit,
        j_error: j.error,
        converged: j.converged,
    })
}

/// Chaos coefficients of `odet` of a standard `r×n` Gaussian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosCoefficients {
    pub pair: DimPair,
    pub b0: f64,
    pub b2: f64,
}

pub fn chaos_coefficients(pair: DimPair) -> ChaosCoefficients {
    let b0 = expected_odet_standard(pair);
    ChaosCoefficients { pair, b0, b2: b0 / (pair.n as f64 * 2f64.sqrt()) }
}

/// Monte Carlo of `B₂ = E[odet(G) H₂(G₁₁)]/√2`; returns `(mean, stderr)`.
pub fn chaos_b2_monte_carlo(pair: DimPair, samples: u64, stream: RngStream) -> (f64, f64) {
    let (r, n) = (pair.r, pair.n);
    let parts = run_batches(samples, stream, |rng, count, _| {
        let mut m = Moments::new();
        let mut buf = vec![0.0; r * n];
        for _ in 0..count {
            buf.iter_mut().for_each(|v| *v = std_normal(rng));
            let g11 = buf[0];
            m.push(odet_rows(&mut buf, r, n) * hermite(2, g11) / 2f64.sqrt());
        }
        m
    });
    let m = fold(parts);
    (m.mean, m.stderr())
}

/// Probabilists' Hermite polynomial by `H_{k+1} = x H_k − k H_{k−1}`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Mixing weights of the conditional Jacobian pair at chart separation `t`, and
/// `1/det(A_d)^{r/2}`. The conditional law comes from a Schur complement of the assembled jets.
pub fn kss_conditional_law(t: f64, d: usize, pair: DimPair) -> Result<(XyCoefficients, f64)> {
    if !(t >= 1e-10) {
        return Err(NodalError::SingularBlock(t));
    }
    let blocks = jet_covariance_blocks(t, d)?;
    let n = pair.n.max(2);
    let cond = condition_on_zero(&blocks.assembled(n)?, 2)?;
    let first = (0.5 * (cond.get(0, 0) + cond.get(1, 1)), cond.get(0, 1));
    let rest = (0.5 * (cond.get(2, 2) + cond.get(3, 3)), cond.get(2, 3));
    let coeffs = XyCoefficients::from_covariances(first, rest)?;
    // det A_d = 1 − (1+t)^{−d}
    let det = -(-(d as f64) * t.ln_1p()).exp_m1();
    Ok((coeffs, det.powf(-(pair.r as f64) / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KssDensityEstimate {
    pub t: f64,
    pub d: usize,
    pub value: f64,
    pub stderr: f64,
}

fn kss_sampler(ts: &[f64], d: usize, pair: DimPair) -> Result<DnrSampler> {
    let mut coeffs = Vec::with_capacity(ts.len());
    let mut scales = Vec::with_capacity(ts.len());
    for &t in ts {
        let (c, s) = kss_conditional_law(t, d, pair)?;
        coeffs.push(c);
        scales.push(s);
    }
    // the linear control pays off once the points decorrelate, d·t ≳ 1
    let linear = ts.iter().map(|&t| d as f64 * t >= 1.0).collect();
    DnrSampler::from_parts(pair, coeffs, scales, linear)
}

/// Monte Carlo Kac–Rice two-point density `D_d(t)` of the KSS zero set, `t = ‖z‖²`.
pub fn kac_rice_density_kss(t: f64, d: usize, pair: DimPair, samples: u64, stream: RngStream) -> Result<KssDensityEstimate> {
    kss_sampler(&[t], d, pair)?;
    let parts = run_batches(samples, stream, |rng, count, _| {
        let mut s = kss_sampler(&[t], d, pair).expect("validated above");
        let mut m = Moments::new();
        let mut out = [0.0];
        for _ in 0..count {
            s.sample(rng, &mut out);
            m.push(out[0]);
        }
        m
    });
    let m = fold(parts);
    let dr = (d as f64).powi(pair.r as i32);
    Ok(KssDensityEstimate { t, d, value: dr * m.mean, stderr: dr * m.stderr() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KacRiceVariance {
    pub d: usize,
    pub pair: DimPair,
    pub variance: f64,
    pub stderr: f64,
    /// `(2π)^{−r} vol(RPⁿ) vol(S^{n−1}) ∫₀^{π/2} D_d(tan²θ) sin^{n−1}θ dθ`
    pub off_diagonal: f64,
    /// `δ_{rn} d^{r/2} vol(RPⁿ) vol(S^{n−r})/vol(Sⁿ)`, the expected number of points when `r = n`
    pub diagonal: f64,
    pub nodes: usize,
    pub samples: u64,
    pub seed: u64,
}

/// Nodes and weights in `θ` for `∫₀^{π/2}`: panels of width `0.5/√d` up to `10/√d`,
/// then one panel to `π/2`, 16 Gauss–Legendre nodes each.
pub fn kac_rice_theta_rule(d: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(16);
    let h = 0.5 / (d as f64).sqrt();
    let end = (20.0 * h).min(PI / 2.0);
    let mut edges = vec![0.0];
    while *edges.last().expect("non-empty") + h < end - 1e-12 {
        let next = edges.last().expect("non-empty") + h;
        edges.push(next);
    }
    edges.push(end);
    if end < PI / 2.0 {
        edges.push(PI / 2.0);
    }
    edges
        .windows(2)
        .flat_map(|e| {
            let (xs, ws) = map_rule(&x, &w, e[0], e[1]);
            xs.into_iter().zip(ws)
        })
        .collect()
}

/// Variance of the KSS zero-set volume by Kac–Rice, with common random numbers across nodes.
pub fn kac_rice_variance(d: usize, pair: DimPair, samples_per_node: u64, stream: RngStream) -> Result<KacRiceVariance> {
    if samples_per_node < 1000 {
        return Err(NodalError::Domain(format!("need at least 1000 samples, got {samples_per_node}")));
    }
    let rule = kac_rice_theta_rule(d);
    let ts: Vec<f64> = rule.iter().map(|(th, _)| th.tan().powi(2)).collect();
    let weights: Vec<f64> = rule.iter().map(|(th, w)| w * th.sin().powi(pair.n as i32 - 1)).collect();
    kss_sampler(&ts, d, pair)?;
    let parts = run_batches(samples_per_node, stream, |rng, count, _| {
        let mut s = kss_sampler(&ts, d, pair).expect("validated above");
        let mut out = vec![0.0; ts.len()];
        let mut m = Moments::new();
        for _ in 0..count {
            s.sample(rng, &mut out);
            m.push(out.iter().zip(&weights).map(|(v, w)| v * w).sum());
        }
        m
    });
    let m = fold(parts);
    let (n, r) = (pair.n, pair.r);
    let pre = (2.0 * PI).powi(-(r as i32)) * projective_volume(n) * sphere_volume(n - 1) * (d as f64).powi(r as i32);
    let diagonal = if pair.is_full_rank() {
        (d as f64).powf(r as f64 / 2.0) * projective_volume(n) * sphere_volume(0) / sphere_volume(n)
    } else {
        0.0
    };
    let off = pre * m.mean;
    Ok(KacRiceVariance {
        d,
        pair,
        variance: off + diagonal,
        stderr: pre * m.stderr(),
        off_diagonal: off,
        diagonal,
        nodes: ts.len(),
        samples: samples_per_node,
        seed: stream.seed,
    })
}

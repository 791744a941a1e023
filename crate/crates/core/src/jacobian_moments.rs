//! Moments `E[|det⊥X(t)| |det⊥Y(t)|]` of the correlated Jacobian pair and the integrand
//! `D_{n,r}(t)`.
//!
//! The pair `(X, Y)` is built entrywise from independent standard matrices `A`, `B`:
//! `X = αA + βB`, `Y = βA + αB` on the first column and `(γ, δ)` on the others.

use crate::error::{NodalError, Result};
use crate::gaussian::{expected_odet_standard, odet_rows, std_normal, RngStream, SymmetricMatrix, NOT_PSD_TOL};
use crate::geometry::{falling_factorial, DimPair};
use crate::limit_model::{lambda_tilde, theta_core, ScalarFamilies};
use crate::parallel::run_batches;
use crate::stats::Moments;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Entrywise mixing weights at separation `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl XyCoefficients {
    pub fn at(t: f64) -> Self {
        let s = ScalarFamilies::at(t);
        let (r1, r2) = (s.u1.sqrt(), s.u2.sqrt());
        let e = (-0.5 * t).exp();
        let (p, m) = ((1.0 + e).sqrt(), (-(-0.5 * t).exp_m1()).sqrt());
        Self {
            alpha: 0.5 * (r2 + r1),
            beta: 0.5 * (r2 - r1),
            gamma: 0.5 * (p + m),
            delta: 0.5 * (p - m),
        }
    }

    /// Weights reproducing exchangeable 2×2 covariances `[[v, c], [c, v]]` on the first
    /// column and on the remaining columns.
    pub fn from_covariances(first: (f64, f64), rest: (f64, f64)) -> Result<Self> {
        let split = |(v, c): (f64, f64)| -> Result<(f64, f64)> {
            let tol = NOT_PSD_TOL * v.abs().max(1.0);
            if v + c < -tol || v - c < -tol {
                return Err(NodalError::NotPsd((v - c.abs()).min(v + c)));
            }
            let (p, m) = ((v + c).max(0.0).sqrt(), (v - c).max(0.0).sqrt());
            Ok((0.5 * (p + m), 0.5 * (p - m)))
        };
        let (alpha, beta) = split(first)?;
        let (gamma, delta) = split(rest)?;
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Fill row-major `r×n` buffers `x`, `y` from standard draws `a`, `b`.
    #[inline]
    pub fn mix(&self, a: &[f64], b: &[f64], r: usize, n: usize, x: &mut [f64], y: &mut [f64]) {
        for i in 0..r {
            for j in 0..n {
                let k = i * n + j;
                let (c0, c1) = if j == 0 { (self.alpha, self.beta) } else { (self.gamma, self.delta) };
                x[k] = c0 * a[k] + c1 * b[k];
                y[k] = c1 * a[k] + c0 * b[k];
            }
        }
    }
}

/// Law of `(X(t), Y(t))` with its full `2rn×2rn` covariance.
///
/// Flat index of `X_ij` is `(2j)·r + i` and of `Y_ij` is `(2j + 1)·r + i`.
#[derive(Debug, Clone)]
pub struct XyLaw {
    pub t: f64,
    pub pair: DimPair,
    pub lambda_hat: SymmetricMatrix,
    pub coefficients: XyCoefficients,
}

impl XyLaw {
    pub fn new(t: f64, pair: DimPair) -> Result<Self> {
        if !(t > 0.0) {
            return Err(NodalError::Domain(format!("t must be positive, got {t}")));
        }
        let (r, n) = (pair.r, pair.n);
        let lt = lambda_tilde(t);
        let tc = theta_core(t);
        let dim = 2 * r * n;
        let m = DMatrix::from_fn(dim, dim, |p, q| {
            let (op, ip) = (p / r, p % r);
            let (oq, iq) = (q / r, q % r);
            let (jp, sp) = (op / 2, op % 2);
            let (jq, sq) = (oq / 2, oq % 2);
            if ip != iq || jp != jq {
                return 0.0;
            }
            if jp == 0 {
                lt[(sp, sq)]
            } else {
                tc[(sp, sq)]
            }
        });
        Ok(Self { t, pair, lambda_hat: SymmetricMatrix::new(m)?, coefficients: XyCoefficients::at(t) })
    }

    pub fn flat_index(&self, is_y: bool, i: usize, j: usize) -> usize {
        (2 * j + is_y as usize) * self.pair.r + i
    }
}

pub fn sample_xy<R: Rng + ?Sized>(law: &XyLaw, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, n) = (law.pair.r, law.pair.n);
    let a: Vec<f64> = (0..r * n).map(|_| std_normal(rng)).collect();
    let b: Vec<f64> = (0..r * n).map(|_| std_normal(rng)).collect();
    let mut x = vec![0.0; r * n];
    let mut y = vec![0.0; r * n];
    law.coefficients.mix(&a, &b, r, n, &mut x, &mut y);
    (DMatrix::from_row_slice(r, n, &x), DMatrix::from_row_slice(r, n, &y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianMomentEstimate {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Fresh `(A, B)` for every grid point.
    Independent,
    /// One `(A, B)` per sample shared by all grid points.
    CommonRandomNumbers,
}

const MIN_SAMPLES: u64 = 1000;

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(NodalError::Domain(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// Per-sample scratch for odet evaluation.
struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Scratch {
    fn new(k: usize) -> Self {
        Self { a: vec![0.0; k], b: vec![0.0; k], x: vec![0.0; k], y: vec![0.0; k] }
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.a.iter_mut().for_each(|v| *v = std_normal(rng));
        self.b.iter_mut().for_each(|v| *v = std_normal(rng));
    }

    #[inline]
    fn product(&mut self, c: &XyCoefficients, pair: DimPair) -> f64 {
        c.mix(&self.a, &self.b, pair.r, pair.n, &mut self.x, &mut self.y);
        odet_rows(&mut self.x, pair.r, pair.n) * odet_rows(&mut self.y, pair.r, pair.n)
    }

    /// `odet(A)·odet(B)`, whose mean is exactly `B0²`.
    fn control(&mut self, pair: DimPair) -> f64 {
        self.x.copy_from_slice(&self.a);
        self.y.copy_from_slice(&self.b);
        odet_rows(&mut self.x, pair.r, pair.n) * odet_rows(&mut self.y, pair.r, pair.n)
    }
}

/// Monte Carlo estimate of `E[|det⊥X(t)| |det⊥Y(t)|]`.
pub fn moment_odet_pair(t: f64, pair: DimPair, samples: u64, stream: RngStream) -> Result<JacobianMomentEstimate> {
    Ok(moment_curve(&[t], pair, samples, stream, SamplingMode::Independent)?.remove(0))
}

/// Moments over a grid of `t`; in CRN mode the curve is smooth in `t`.
pub fn moment_curve(
    ts: &[f64],
    pair: DimPair,
    samples: u64,
    stream: RngStream,
    mode: SamplingMode,
) -> Result<Vec<JacobianMomentEstimate>> {
    check_samples(samples)?;
    for &t in ts {
        if !(t > 0.0) {
            return Err(NodalError::Domain(format!("t must be positive, got {t}")));
        }
    }
    let coeffs: Vec<XyCoefficients> = ts.iter().map(|&t| XyCoefficients::at(t)).collect();
    let k = pair.r * pair.n;
    let moments: Vec<Moments> = match mode {
        SamplingMode::CommonRandomNumbers => {
            let parts = run_batches(samples, stream, |rng, count, _| {
                let mut acc = vec![Moments::new(); ts.len()];
                let mut s = Scratch::new(k);
                for _ in 0..count {
                    s.draw(rng);
                    for (m, c) in acc.iter_mut().zip(&coeffs) {
                        m.push(s.product(c, pair));
                    }
                }
                acc
            });
            fold_vec(parts, ts.len())
        }
        SamplingMode::Independent => coeffs
            .iter()
            .enumerate()
            .map(|(g, c)| {
                let parts = run_batches(samples, stream.child(g as u64), |rng, count, _| {
                    let mut m = Moments::new();
                    let mut s = Scratch::new(k);
                    for _ in 0..count {
                        s.draw(rng);
                        m.push(s.product(c, pair));
                    }
                    m
                });
                fold(parts)
            })
            .collect(),
    };
    Ok(ts
        .iter()
        .zip(moments)
        .map(|(&t, m)| JacobianMomentEstimate { t, mean: m.mean, stderr: m.stderr(), samples, seed: stream.seed })
        .collect())
}

pub(crate) fn fold(parts: Vec<Moments>) -> Moments {
    parts.iter().fold(Moments::new(), |mut acc, m| {
        acc.merge(m);
        acc
    })
}

pub(crate) fn fold_vec(parts: Vec<Vec<Moments>>, len: usize) -> Vec<Moments> {
    let mut acc = vec![Moments::new(); len];
    for p in &parts {
        for (a, m) in acc.iter_mut().zip(p) {
            a.merge(m);
        }
    }
    acc
}

/// `B0² = (2π)^r (vol S^{n−r}/vol S^n)²`, the decorrelated limit of the moment.
pub fn moment_limit_large_t(pair: DimPair) -> f64 {
    expected_odet_standard(pair).powi(2)
}

/// Small-`t` behaviour of the moment: `(n−1)!/(n−r−1)!` if `r < n`, `(n!/2)·t` if `r = n`.
pub fn moment_limit_small_t(pair: DimPair, t: f64) -> f64 {
    if pair.r < pair.n {
        falling_factorial(pair.n - 1, pair.r)
    } else {
        falling_factorial(pair.n, pair.n) / 2.0 * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DnrEstimate {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub moment: JacobianMomentEstimate,
    /// `t < 1e-6` with `r = n`: a 0/0 regime where the value is mostly noise.
    pub unreliable: bool,
}

fn dnr_from_moment(m: JacobianMomentEstimate, pair: DimPair) -> DnrEstimate {
    let scale = (-(-m.t).exp_m1()).powf(-(pair.r as f64) / 2.0);
    DnrEstimate {
        t: m.t,
        value: m.mean * scale - moment_limit_large_t(pair),
        stderr: m.stderr * scale,
        moment: m,
        unreliable: m.t < 1e-6 && pair.is_full_rank(),
    }
}

/// `D_{n,r}(t) = E[odet X odet Y]/(1−e^{−t})^{r/2} − B0²`.
pub fn dnr(t: f64, pair: DimPair, samples: u64, stream: RngStream) -> Result<DnrEstimate> {
    Ok(dnr_from_moment(moment_odet_pair(t, pair, samples, stream)?, pair))
}

pub fn dnr_curve(ts: &[f64], pair: DimPair, samples: u64, stream: RngStream, mode: SamplingMode) -> Result<Vec<DnrEstimate>> {
    Ok(moment_curve(ts, pair, samples, stream, mode)?.into_iter().map(|m| dnr_from_moment(m, pair)).collect())
}

/// Per-sample evaluator of the control-variated integrand at a fixed set of nodes.
///
/// Two zero-mean corrections are subtracted from `odet X(t)·odet Y(t)/(1−e^{−t})^{r/2}`:
///
/// * `odet A·odet B`, whose mean is exactly `B0²` (so the result estimates `D_{n,r}`);
/// * on nodes with `t ≥ linear_from`, the first-order cross term
///   `(1−e^{−t})^{−r/2} odet A·odet B·(β(t)·s₁ + δ(t)·s_rest)`, with
///   `s = ⟨(AAᵗ)⁻¹A, B⟩ + ⟨(BBᵗ)⁻¹B, A⟩` split by column. It is odd in `B` (resp. `A`),
///   hence has mean zero, and it cancels the leading `O(e^{−t/2})` fluctuation.
pub struct DnrSampler {
    pair: DimPair,
    coeffs: Vec<XyCoefficients>,
    scales: Vec<f64>,
    linear: Vec<bool>,
    scratch: Scratch,
}

impl DnrSampler {
    pub fn new(pair: DimPair, ts: &[f64]) -> Self {
        Self::with_linear_control(pair, ts, f64::INFINITY)
    }

    pub fn with_linear_control(pair: DimPair, ts: &[f64], linear_from: f64) -> Self {
        Self {
            pair,
            coeffs: ts.iter().map(|&t| XyCoefficients::at(t)).collect(),
            scales: ts.iter().map(|&t| (-(-t).exp_m1()).powf(-(pair.r as f64) / 2.0)).collect(),
            linear: ts.iter().map(|&t| t >= linear_from).collect(),
            scratch: Scratch::new(pair.r * pair.n),
        }
    }

    /// General form: per-node mixing weights, multiplicative scales and linear-control flags.
    pub fn from_parts(pair: DimPair, coeffs: Vec<XyCoefficients>, scales: Vec<f64>, linear: Vec<bool>) -> Result<Self> {
        if scales.len() != coeffs.len() {
            return Err(NodalError::LengthMismatch { expected: coeffs.len(), got: scales.len() });
        }
        if linear.len() != coeffs.len() {
            return Err(NodalError::LengthMismatch { expected: coeffs.len(), got: linear.len() });
        }
        Ok(Self { pair, coeffs, scales, linear, scratch: Scratch::new(pair.r * pair.n) })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Draw one `(A, B)` and write the integrand at every node into `out`.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        self.scratch.draw(rng);
        let control = self.scratch.control(self.pair);
        let (s1, srest) = if self.linear.iter().any(|&b| b) {
            let (r, n) = (self.pair.r, self.pair.n);
            let (a1, ar) = cross_terms(&self.scratch.a, &self.scratch.b, r, n);
            let (b1, br) = cross_terms(&self.scratch.b, &self.scratch.a, r, n);
            (a1 + b1, ar + br)
        } else {
            (0.0, 0.0)
        };
        for (k, o) in out.iter_mut().enumerate() {
            let c = &self.coeffs[k];
            let s = self.scales[k];
            let mut v = self.scratch.product(c, self.pair) * s - control;
            if self.linear[k] {
                v -= s * control * (c.beta * s1 + c.delta * srest);
            }
            *o = v;
        }
    }
}

/// `⟨(MMᵗ)⁻¹M, N⟩` split into the first column and the rest, for row-major `r×n` buffers.
fn cross_terms(m: &[f64], other: &[f64], r: usize, n: usize) -> (f64, f64) {
    let mm = DMatrix::from_row_slice(r, n, m);
    let g = &mm * mm.transpose();
    let Some(ch) = g.cholesky() else {
        return (0.0, 0.0);
    };
    let grad = ch.solve(&mm);
    let mut first = 0.0;
    let mut rest = 0.0;
    for i in 0..r {
        for j in 0..n {
            let v = grad[(i, j)] * other[i * n + j];
            if j == 0 {
                first += v;
            } else {
                rest += v;
            }
        }
    }
    (first, rest)
}

/// Closed form of `E|XY|` for the `r = n = 1` pair, used as an oracle.
#[cfg(any(test, feature = "oracle"))]
pub mod oracle {
    use crate::limit_model::lambda_tilde;
    use std::f64::consts::PI;

    /// `E|XY|` for a centred pair with equal variances `σ²` and correlation `ρ`.
    pub fn e_abs_product(sigma2: f64, rho: f64) -> f64 {
        sigma2 * (2.0 / PI) * ((1.0 - rho * rho).max(0.0).sqrt() + rho * rho.asin())
    }

    /// `E[|X₁₁(t)||Y₁₁(t)|]` for `n = r = 1`.
    pub fn moment_n1r1(t: f64) -> f64 {
        let l = lambda_tilde(t);
        e_abs_product(l[(0, 0)], l[(0, 1)] / l[(0, 0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::CoMoments;

    fn pair(n: usize, r: usize) -> DimPair {
        DimPair::new(n, r).unwrap()
    }

    #[test]
    fn oracle_matches_2d_quadrature() {
        use crate::quadrature::integrate_adaptive;
        use std::f64::consts::PI;
        // E|XY| = ∫∫ |x y| φ_ρ(x,y): integrate the inner Gaussian integral analytically in y
        for rho in [-0.6f64, 0.0, 0.3, 0.8] {
            let s = (1.0 - rho * rho).sqrt();
            let inner = |x: f64| {
                // E|Y| for Y ~ N(ρx, s²)
                let m = rho * x;
                let phi = (-0.5 * (m / s).powi(2)).exp() / (2.0 * PI).sqrt();
                let big_phi = 0.5 * statrs::function::erf::erfc(-m / (s * 2f64.sqrt()));
                s * 2.0 * phi + m * (2.0 * big_phi - 1.0)
            };
            let f = |x: f64| x.abs() * inner(x) * (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            let q = integrate_adaptive(f, -12.0, 0.0, 1e-12, 0.0, 400).value
                + integrate_adaptive(f, 0.0, 12.0, 1e-12, 0.0, 400).value;
            assert!((q - oracle::e_abs_product(1.0, rho)).abs() < 1e-9, "rho={rho}");
        }
    }

    #[test]
    fn lambda_hat_layout() {
        let law = XyLaw::new(1.0, pair(3, 2)).unwrap();
        let lt = lambda_tilde(1.0);
        let e = (-0.5f64).exp();
        let m = law.lambda_hat.as_matrix();
        assert_eq!(m.nrows(), 12);
        let (x11, y11) = (law.flat_index(false, 0, 0), law.flat_index(true, 0, 0));
        assert!((m[(x11, y11)] - lt[(0, 1)]).abs() < 1e-15);
        let (x12, y12) = (law.flat_index(false, 1, 2), law.flat_index(true, 1, 2));
        assert!((m[(x12, y12)] - e).abs() < 1e-15);
        assert_eq!(m[(x11, law.flat_index(true, 1, 0))], 0.0);
        assert!(law.lambda_hat.min_eigenvalue() > 0.0);
    }

    #[test]
    fn sampler_covariances() {
        let law = XyLaw::new(1.0, pair(2, 1)).unwrap();
        let mut rng = RngStream::new(21, 0).rng();
        let mut c11 = CoMoments::default();
        let mut v11 = Moments::new();
        let mut c12 = CoMoments::default();
        let mut w12 = Moments::new();
        let n = 1_000_000;
        for _ in 0..n {
            let (x, y) = sample_xy(&law, &mut rng);
            c11.push(x[(0, 0)], y[(0, 0)]);
            v11.push(x[(0, 0)] * x[(0, 0)]);
            c12.push(x[(0, 1)], y[(0, 1)]);
            w12.push(x[(0, 1)] * y[(0, 1)]);
        }
        let lt = lambda_tilde(1.0);
        assert!((v11.mean - lt[(0, 0)]).abs() < 3.0 * v11.stderr());
        let se = 2.0 / (n as f64).sqrt();
        assert!((c11.covariance() - lt[(0, 1)]).abs() < 3.0 * se);
        assert!((c12.covariance() - (-0.5f64).exp()).abs() < 3.0 * w12.stderr());

        // decorrelation at t = 50
        let law = XyLaw::new(50.0, pair(2, 1)).unwrap();
        let mut m = Moments::new();
        for _ in 0..100_000 {
            let (x, y) = sample_xy(&law, &mut rng);
            m.push(x[(0, 1)] * y[(0, 1)]);
        }
        assert!((m.mean - (-25.0f64).exp()).abs() < 3.0 * m.stderr());
    }

    #[test]
    fn full_covariance_matches_lambda_hat() {
        let law = XyLaw::new(1.0, pair(2, 2)).unwrap();
        let mut rng = RngStream::new(22, 0).rng();
        let dim = 8;
        let n = 200_000;
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        let mut sq = DMatrix::<f64>::zeros(dim, dim);
        for _ in 0..n {
            let (x, y) = sample_xy(&law, &mut rng);
            let mut v = vec![0.0; dim];
            for i in 0..2 {
                for j in 0..2 {
                    v[law.flat_index(false, i, j)] = x[(i, j)];
                    v[law.flat_index(true, i, j)] = y[(i, j)];
                }
            }
            for p in 0..dim {
                for q in 0..dim {
                    let prod = v[p] * v[q];
                    acc[(p, q)] += prod;
                    sq[(p, q)] += prod * prod;
                }
            }
        }
        let nf = n as f64;
        for p in 0..dim {
            for q in 0..dim {
                let mean = acc[(p, q)] / nf;
                let se = ((sq[(p, q)] / nf - mean * mean) / nf).sqrt();
                assert!((mean - law.lambda_hat.get(p, q)).abs() < 4.0 * se + 1e-12, "({p},{q})");
            }
        }
    }

    #[test]
    fn n1r1_against_closed_form() {
        for (i, t) in [0.1, 1.0, 10.0].into_iter().enumerate() {
            let est = moment_odet_pair(t, pair(1, 1), 200_000, RngStream::new(5, i as u64)).unwrap();
            let exact = oracle::moment_n1r1(t);
            assert!((est.mean - exact).abs() < 3.0 * est.stderr, "t={t}: {} vs {exact}", est.mean);
        }
    }

    #[test]
    fn exchange_symmetry() {
        let law = XyLaw::new(0.7, pair(3, 2)).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        let (mut a, mut b) = (Moments::new(), Moments::new());
        for _ in 0..2000 {
            let (x, y) = sample_xy(&law, &mut rng);
            let ox = crate::gaussian::odet(&x).unwrap();
            let oy = crate::gaussian::odet(&y).unwrap();
            a.push(ox * oy);
            b.push(oy * ox);
        }
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn crn_and_independent_agree() {
        let ts = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
        let p = pair(1, 1);
        let s = RngStream::new(31, 0);
        let crn = moment_curve(&ts, p, 50_000, s, SamplingMode::CommonRandomNumbers).unwrap();
        let ind = moment_curve(&ts, p, 50_000, s.child(99), SamplingMode::Independent).unwrap();
        for (a, b) in crn.iter().zip(&ind) {
            assert!((a.mean - b.mean).abs() < 3.0 * a.stderr.hypot(b.stderr));
        }
        // monotone on the coarse grid within joint error
        for w in crn.windows(2) {
            assert!(w[1].mean > w[0].mean - 3.0 * w[0].stderr.hypot(w[1].stderr));
        }
    }

    #[test]
    fn dnr_limits() {
        let p = pair(1, 1);
        let d = dnr(40.0, p, 50_000, RngStream::new(2, 0)).unwrap();
        assert!(d.value.abs() < 3.0 * d.stderr + 1e-3);
        let d = dnr(1e-3, p, 100_000, RngStream::new(2, 1)).unwrap();
        let target = -2.0 / std::f64::consts::PI;
        // the leading correction is O(√t)
        assert!((d.value - target).abs() < 3.0 * d.stderr + 0.05, "{} vs {target}", d.value);
        assert!(dnr(1e-7, pair(2, 2), 1000, RngStream::new(1, 0)).unwrap().unreliable);
        assert!(moment_odet_pair(1.0, p, 10, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn control_variate_is_unbiased() {
        let p = pair(2, 1);
        let ts = [0.3, 3.0];
        let mut sampler = DnrSampler::with_linear_control(p, &ts, 0.0);
        let mut rng = RngStream::new(77, 0).rng();
        let mut ms = [Moments::new(), Moments::new()];
        let mut out = [0.0; 2];
        for _ in 0..200_000 {
            sampler.sample(&mut rng, &mut out);
            ms.iter_mut().zip(out).for_each(|(m, v)| m.push(v));
        }
        for (i, &t) in ts.iter().enumerate() {
            let plain = dnr(t, p, 200_000, RngStream::new(78, i as u64)).unwrap();
            let diff = ms[i].mean - plain.value;
            assert!(diff.abs() < 3.0 * ms[i].stderr().hypot(plain.stderr), "t={t}");
        }
    }

    #[test]
    fn coefficients_from_covariances() {
        let t = 0.7;
        let c = XyCoefficients::at(t);
        let l = lambda_tilde(t);
        let tc = theta_core(t);
        let g = XyCoefficients::from_covariances((l[(0, 0)], l[(0, 1)]), (tc[(0, 0)], tc[(0, 1)])).unwrap();
        assert!((c.alpha - g.alpha).abs() < 1e-12 && (c.beta - g.beta).abs() < 1e-12);
        assert!((c.gamma - g.gamma).abs() < 1e-12 && (c.delta - g.delta).abs() < 1e-12);
        assert!(XyCoefficients::from_covariances((1.0, 1.5), (1.0, 0.0)).is_err());
    }

    #[test]
    fn linear_control_reduces_variance_at_moderate_t() {
        let p = pair(4, 2);
        let ts = [4.0];
        let mut rng = RngStream::new(3, 0).rng();
        let mut plain = DnrSampler::new(p, &ts);
        let mut lin = DnrSampler::with_linear_control(p, &ts, 1.0);
        let (mut a, mut b) = (Moments::new(), Moments::new());
        let mut out = [0.0];
        for _ in 0..20_000 {
            plain.sample(&mut rng, &mut out);
            a.push(out[0]);
        }
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..20_000 {
            lin.sample(&mut rng, &mut out);
            b.push(out[0]);
        }
        assert!(b.variance() < 0.2 * a.variance(), "{} vs {}", b.variance(), a.variance());
        assert!((a.mean - b.mean).abs() < 3.0 * a.stderr().hypot(b.stderr()));
    }
}

//! The universal constant `I_{n,r} = ½∫₀^∞ D_{n,r}(t) t^{(n−2)/2} dt`, the leading variance
//! constant built from it, and the positivity table against the explicit lower bound.
//!
//! Quadrature: a first panel on `(0, t_split]` (optionally under `t = s²`), then log-spaced
//! Gauss–Legendre panels up to `t_max`. Every sample draws one `(A, B)` and evaluates the
//! integrand at all nodes (common random numbers), so the per-sample quadratures are i.i.d.
//! and the Monte Carlo error of `I` is exactly their standard error. The refinement delta
//! compares the rule with half as many nodes on the same samples. Variance is cut by the
//! zero-mean controls of [`DnrSampler`]; the linear one is applied above `t_split`.

use crate::error::{NodalError, Result};
use crate::gaussian::RngStream;
use crate::geometry::{sphere_volume, DimPair};
use crate::jacobian_moments::{fold_vec, DnrSampler};
use crate::parallel::run_batches;
use crate::quadrature::{gauss_legendre, map_rule};
use crate::stats::Moments;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    /// `t = s²` on the first panel, integrating `s` from 0.
    SqrtMap,
    /// Plain Gauss–Legendre on `[t_min, t_split]`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub t_min: f64,
    pub t_split: f64,
    pub t_max: f64,
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub mc_samples_per_node: u64,
    pub substitution: Substitution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-6,
            t_split: 1.0,
            t_max: 60.0,
            nodes_per_panel: 32,
            panels: 8,
            mc_samples_per_node: 200_000,
            substitution: Substitution::SqrtMap,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.t_min && self.t_min < self.t_split && self.t_split < self.t_max) {
            return Err(NodalError::Domain("need 0 < t_min < t_split < t_max".into()));
        }
        if self.nodes_per_panel < 4 || self.panels == 0 {
            return Err(NodalError::Domain("need nodes_per_panel >= 4 and panels >= 1".into()));
        }
        if self.mc_samples_per_node < 2 {
            return Err(NodalError::Domain("need at least 2 samples".into()));
        }
        Ok(())
    }

    /// `(t, weight)` pairs of the composite rule with `m` nodes per panel, weights including
    /// the factor `½ t^{(n−2)/2}` and any Jacobian.
    pub fn rule(&self, n: usize, m: usize) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(m);
        let power = (n as f64 - 2.0) / 2.0;
        let mut out = Vec::with_capacity(m * (self.panels + 1));
        match self.substitution {
            Substitution::SqrtMap => {
                // ½ D(s²) s^{n−2} · 2s ds
                let (s, ws) = map_rule(&x, &w, 0.0, self.t_split.sqrt());
                for (s, ws) in s.into_iter().zip(ws) {
                    out.push((s * s, ws * s.powi(n as i32 - 1)));
                }
            }
            Substitution::None => {
                let (t, wt) = map_rule(&x, &w, self.t_min, self.t_split);
                for (t, wt) in t.into_iter().zip(wt) {
                    out.push((t, 0.5 * wt * t.powf(power)));
                }
            }
        }
        let ratio = self.t_max / self.t_split;
        for k in 0..self.panels {
            let a = self.t_split * ratio.powf(k as f64 / self.panels as f64);
            let b = self.t_split * ratio.powf((k + 1) as f64 / self.panels as f64);
            let (t, wt) = map_rule(&x, &w, a, b);
            for (t, wt) in t.into_iter().zip(wt) {
                out.push((t, 0.5 * wt * t.powf(power)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InrResult {
    pub pair: DimPair,
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    pub stderr: f64,
    /// `|I(m nodes) − I(m/2 nodes)|` on the same samples.
    pub quad_delta: f64,
    /// Bound on `½∫_{t_max}^∞`, from an `e^{−t/4}` envelope fitted on the last panel.
    pub tail_bound: f64,
    /// `quad_delta + 2·stderr + tail_bound`.
    pub error_estimate: f64,
    pub converged: bool,
    pub samples: u64,
    pub seed: u64,
}

/// Estimate `I_{n,r}`.
pub fn inr(pair: DimPair, cfg: &QuadratureConfig, stream: RngStream) -> Result<InrResult> {
    cfg.validate()?;
    let fine = cfg.rule(pair.n, cfg.nodes_per_panel);
    let coarse = cfg.rule(pair.n, cfg.nodes_per_panel / 2);
    let nodes: Vec<f64> = fine.iter().chain(&coarse).map(|p| p.0).collect();
    let nf = fine.len();
    // slots: 0 = fine integral, 1 = fine − coarse, 2.. = per-node integrand (fine rule)
    let slots = 2 + nf;
    let parts = run_batches(cfg.mc_samples_per_node, stream, |rng, count, _| {
        let mut sampler = DnrSampler::with_linear_control(pair, &nodes, cfg.t_split);
        let mut g = vec![0.0; nodes.len()];
        let mut acc = vec![Moments::new(); slots];
        for _ in 0..count {
            sampler.sample(rng, &mut g);
            let i_f: f64 = fine.iter().zip(&g[..nf]).map(|(p, v)| p.1 * v).sum();
            let i_c: f64 = coarse.iter().zip(&g[nf..]).map(|(p, v)| p.1 * v).sum();
            acc[0].push(i_f);
            acc[1].push(i_f - i_c);
            for (m, v) in acc[2..].iter_mut().zip(&g[..nf]) {
                m.push(*v);
            }
        }
        acc
    });
    let acc = fold_vec(parts, slots);
    let value = acc[0].mean;
    let stderr = acc[0].stderr();
    let quad_delta = acc[1].mean.abs();

    // envelope |½ D(t) t^{(n−2)/2}| ≤ C e^{−t/4} fitted on the last panel
    let power = (pair.n as f64 - 2.0) / 2.0;
    let last = &fine[nf - cfg.nodes_per_panel..];
    let c = last
        .iter()
        .zip(&acc[2 + nf - cfg.nodes_per_panel..])
        .map(|(p, m)| 0.5 * (m.mean.abs() + 2.0 * m.stderr()) * p.0.powf(power) * (p.0 / 4.0).exp())
        .fold(0.0, f64::max);
    let tail_bound = 4.0 * c * (-cfg.t_max / 4.0).exp();
    let mc = 2.0 * stderr + tail_bound;
    Ok(InrResult {
        pair,
        value,
        stderr,
        quad_delta,
        tail_bound,
        error_estimate: quad_delta + mc,
        converged: quad_delta <= 3.0 * mc.max(1e-12),
        samples: cfg.mc_samples_per_node,
        seed: stream.seed,
    })
}

fn leading_scale(pair: DimPair) -> f64 {
    sphere_volume(pair.n - 1) / (2.0 * PI).powi(pair.r as i32)
}

/// `c_{n,r} = vol(S^{n−1})/(2π)^r · I_{n,r} + δ_{rn}·2/vol(S^n)`.
pub fn leading_constant(pair: DimPair, i_nr: f64) -> f64 {
    let delta = if pair.is_full_rank() { 2.0 / sphere_volume(pair.n) } else { 0.0 };
    leading_scale(pair) * i_nr + delta
}

/// `(r/8)(1 + 2/n) π^{n/2} (vol S^{n−r}/vol S^n)²`.
pub fn lower_bound(pair: DimPair) -> f64 {
    let (n, r) = (pair.n as f64, pair.r as f64);
    let ratio = sphere_volume(pair.n - pair.r) / sphere_volume(pair.n);
    r / 8.0 * (1.0 + 2.0 / n) * PI.powf(n / 2.0) * ratio * ratio
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub pair: DimPair,
    pub i_nr: f64,
    pub i_stderr: f64,
    pub quad_delta: f64,
    pub tail_bound: f64,
    /// Total error on `I`: refinement delta + 2·stderr + tail.
    pub i_err: f64,
    pub leading_constant: f64,
    /// `i_err` propagated to the leading constant.
    pub leading_err: f64,
    pub lower_bound: f64,
    /// `leading_constant − 2·leading_err > 0`.
    pub positive: bool,
    /// `leading_constant ≥ lower_bound − 3·leading_err`.
    pub above_lower_bound: bool,
    pub converged: bool,
    pub samples: u64,
    pub seed: u64,
}

pub fn constant_report(pair: DimPair, res: &InrResult) -> ConstantReport {
    let c = leading_constant(pair, res.value);
    let err = leading_scale(pair) * res.error_estimate;
    let lb = lower_bound(pair);
    ConstantReport {
        pair,
        i_nr: res.value,
        i_stderr: res.stderr,
        quad_delta: res.quad_delta,
        tail_bound: res.tail_bound,
        i_err: res.error_estimate,
        leading_constant: c,
        leading_err: err,
        lower_bound: lb,
        positive: c - 2.0 * err > 0.0,
        above_lower_bound: c >= lb - 3.0 * err,
        converged: res.converged,
        samples: res.samples,
        seed: res.seed,
    }
}

/// Stream for one table cell; independent of which other cells are computed.
pub fn cell_stream(seed: u64, pair: DimPair) -> RngStream {
    RngStream::new(seed, 0).labeled("inr").child((pair.n * 1024 + pair.r) as u64)
}

/// Every `1 ≤ r ≤ n ≤ n_max`; non-convergence is reported per cell, never fatal.
pub fn positivity_report(n_max: usize, cfg: &QuadratureConfig, seed: u64) -> Result<Vec<ConstantReport>> {
    cfg.validate()?;
    DimPair::all_up_to(n_max)
        .into_iter()
        .map(|pair| Ok(constant_report(pair, &inr(pair, cfg, cell_stream(seed, pair))?)))
        .collect()
}

//! One-pass moment accumulation with deterministic merging.

use serde::{Deserialize, Serialize};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Running count, mean and central moments up to order four.
///
/// Updates follow Welford; `merge` uses the pairwise formulas of Chan and Pébay, so a
/// fixed merge order gives bit-identical results regardless of how work was scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count as f64 - 1.0)).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.std_dev() / (self.count as f64).sqrt()
    }

    /// Fourth central moment (biased, `m4/n`).
    pub fn central_m4(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m4 / self.count as f64
        }
    }

    /// Asymptotic standard error of the sample variance, `sqrt((μ4 − σ⁴)/n)`.
    pub fn variance_stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let v = self.variance();
        ((self.central_m4() - v * v).max(0.0) / self.count as f64).sqrt()
    }

    pub fn mean_ci99(&self) -> f64 {
        Z99 * self.stderr()
    }

    pub fn variance_ci99(&self) -> f64 {
        Z99 * self.variance_stderr()
    }
}

/// Running covariance of a pair, for MC covariance checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoMoments {
    pub count: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    cxy: f64,
}

impl CoMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        self.mean_y += (y - self.mean_y) / n;
        self.cxy += dx * (y - self.mean_y);
    }

    pub fn covariance(&self) -> f64 {
        self.cxy / (self.count as f64 - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        (m, v, m4)
    }

    #[test]
    fn known_values() {
        let mut m = Moments::new();
        for x in [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0] {
            m.push(x);
        }
        assert!((m.mean - 5.0).abs() < 1e-15);
        assert!((m.variance() - 32.0 / 7.0).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in proptest::collection::vec(-50.0f64..50.0, 4..200), split in 1usize..150) {
            let split = split.min(xs.len() - 1);
            let mut all = Moments::new();
            xs.iter().for_each(|&x| all.push(x));
            let mut a = Moments::new();
            let mut b = Moments::new();
            xs[..split].iter().for_each(|&x| a.push(x));
            xs[split..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            let (m, v, m4) = naive(&xs);
            prop_assert!((a.mean - m).abs() < 1e-9);
            prop_assert!((a.variance() - v).abs() < 1e-8 * (1.0 + v));
            prop_assert!((a.central_m4() - m4).abs() < 1e-7 * (1.0 + m4));
            prop_assert!((all.central_m4() - m4).abs() < 1e-7 * (1.0 + m4));
        }
    }
}

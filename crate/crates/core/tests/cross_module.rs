//! Consistency checks that tie independent routes together.

use nodal_core::kostlan_model::{kac_rice_variance, second_chaos_variance};
use nodal_core::universal_constants::{cell_stream, inr, leading_constant, QuadratureConfig};
use nodal_core::zero_set_mc::{empirical_root_stats, CounterMethod};
use nodal_core::{DimPair, RngStream};
use std::f64::consts::PI;

fn pair(n: usize, r: usize) -> DimPair {
    DimPair::new(n, r).unwrap()
}

#[test]
fn kac_rice_diagonal_is_expected_count() {
    for d in [1, 9, 50] {
        let k = kac_rice_variance(d, pair(1, 1), 1000, RngStream::new(1, d as u64)).unwrap();
        assert!((k.diagonal - (d as f64).sqrt()).abs() < 1e-12 * (d as f64).sqrt());
    }
}

#[test]
fn second_chaos_is_below_total_variance() {
    // Var = Σ_q Var[Z[q]]; only the second chaos is computed in closed form
    for d in [9usize, 30, 50] {
        let k = kac_rice_variance(d, pair(1, 1), 20_000, RngStream::new(2, d as u64)).unwrap();
        let c = second_chaos_variance(d as f64, pair(1, 1)).unwrap();
        assert!(c.var <= k.variance + 3.0 * k.stderr, "d={d}: {} vs {}", c.var, k.variance);
        assert!(c.var > 0.0);
    }
}

#[test]
fn kac_rice_matches_simulation_at_moderate_degree() {
    let d = 16;
    let k = kac_rice_variance(d, pair(1, 1), 50_000, RngStream::new(3, 0)).unwrap();
    let s = empirical_root_stats(d, 40_000, RngStream::new(3, 1), CounterMethod::Auto).unwrap();
    let se = (k.stderr.powi(2) + (s.var_ci / 2.576).powi(2)).sqrt();
    assert!((k.variance - s.var).abs() < 4.0 * se, "{} vs {} ± {se}", k.variance, s.var);
}

#[test]
fn kac_rice_approaches_universal_constant() {
    // Var/√d → π c_{1,1} = 1 + I_{1,1}; at d = 400 the finite-d correction is below a few percent
    let cfg = QuadratureConfig { mc_samples_per_node: 20_000, ..Default::default() };
    let p = pair(1, 1);
    let i = inr(p, &cfg, cell_stream(4, p)).unwrap();
    let sigma2 = PI * leading_constant(p, i.value);
    assert!((sigma2 - (1.0 + i.value)).abs() < 1e-12);
    let d = 400;
    let k = kac_rice_variance(d, p, 20_000, RngStream::new(4, 1)).unwrap();
    let ratio = k.variance / (d as f64).sqrt();
    assert!((ratio - sigma2).abs() < 0.03, "{ratio} vs {sigma2} ± {}", i.error_estimate);
}

#[test]
fn second_inr_cell_meets_error_target_at_default_budget() {
    let p = pair(2, 1);
    let i = inr(p, &QuadratureConfig::default(), cell_stream(5, p)).unwrap();
    assert!(i.error_estimate < 1e-2, "{i:?}");
    assert!(i.converged);
}

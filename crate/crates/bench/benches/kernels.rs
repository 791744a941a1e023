use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nodal_core::gaussian::{odet_rows, std_normal};
use nodal_core::jacobian_moments::DnrSampler;
use nodal_core::kostlan_model::{jnr_integral, KostlanBasis, JnrConfig};
use nodal_core::limit_model::identity_suite;
use nodal_core::zero_set_mc::{count_real_roots_with, sturm_count, CounterMethod};
use nodal_core::{DimPair, RngStream};
use std::sync::Arc;

fn odet(c: &mut Criterion) {
    let mut g = c.benchmark_group("odet_rows");
    let mut rng = RngStream::new(1, 0).rng();
    for (r, n) in [(1, 1), (2, 3), (3, 6), (6, 6)] {
        let m: Vec<f64> = (0..r * n).map(|_| std_normal(&mut rng)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(format!("{r}x{n}")), &m, |b, m| {
            let mut buf = m.clone();
            b.iter(|| {
                buf.copy_from_slice(m);
                black_box(odet_rows(&mut buf, r, n))
            })
        });
    }
    g.finish();
}

fn dnr_sampler(c: &mut Criterion) {
    let ts: Vec<f64> = (1..=64).map(|k| k as f64 * 0.5).collect();
    let mut g = c.benchmark_group("dnr_sampler_64_nodes");
    for (n, r) in [(1, 1), (3, 2), (6, 3)] {
        let pair = DimPair::new(n, r).unwrap();
        let mut s = DnrSampler::with_linear_control(pair, &ts, 1.0);
        let mut out = vec![0.0; ts.len()];
        let mut rng = RngStream::new(2, 0).rng();
        g.bench_function(format!("({n},{r})"), |b| {
            b.iter(|| {
                s.sample(&mut rng, &mut out);
                black_box(out[0])
            })
        });
    }
    g.finish();
}

fn root_counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("root_count");
    for d in [10usize, 50, 200] {
        let basis = Arc::new(KostlanBasis::new(1, d).unwrap());
        let mut rng = RngStream::new(3, 0).rng();
        let polys: Vec<Vec<f64>> =
            (0..16).map(|_| basis.sample(1, &mut rng).univariate_coefficients(0).unwrap()).collect();
        for m in [CounterMethod::Scan, CounterMethod::Companion] {
            g.bench_with_input(BenchmarkId::new(format!("{m:?}"), d), &polys, |b, ps| {
                let mut i = 0;
                b.iter(|| {
                    i = (i + 1) % ps.len();
                    black_box(count_real_roots_with(&ps[i], m).unwrap().count)
                })
            });
        }
        if d <= 50 {
            g.bench_with_input(BenchmarkId::new("Sturm", d), &polys, |b, ps| {
                b.iter(|| black_box(sturm_count(&ps[0]).unwrap()))
            });
        }
    }
    g.finish();
}

fn kostlan_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("kostlan_sample");
    for (n, d) in [(1usize, 400usize), (2, 25)] {
        let basis = Arc::new(KostlanBasis::new(n, d).unwrap());
        let mut rng = RngStream::new(4, 0).rng();
        g.bench_function(format!("n={n},d={d}"), |b| b.iter(|| black_box(basis.sample(1, &mut rng).coeffs[0][0])));
    }
    g.finish();
}

fn deterministic(c: &mut Criterion) {
    c.bench_function("identity_suite", |b| b.iter(|| black_box(identity_suite().unwrap().len())));
    let cfg = JnrConfig::default();
    c.bench_function("jnr_integral_n3_d1e5", |b| {
        b.iter(|| black_box(jnr_integral(1e5, DimPair::new(3, 2).unwrap(), &cfg).unwrap().bare))
    });
}

criterion_group!(benches, odet, dnr_sampler, root_counting, kostlan_sampling, deterministic);
criterion_main!(benches);

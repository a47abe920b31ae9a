use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use gpfp_bench::{fp2, power_laws};
use gpfp_core::dist::make_eta;
use gpfp_core::fid::{cumulants_by_quadrature, cumulants_eta, eta_threshold, hankel_witness};
use gpfp_core::holomorphic::{log_polar_probes, ui_verify};
use gpfp_core::nc_lattice::moments_to_cumulants;
use gpfp_core::quad::{moment_quadrature, AlignedSpec};
use gpfp_core::scalar::ratio;
use gpfp_core::QuadratureRule;

fn moments(c: &mut Criterion) {
    let spec = fp2();
    let rule = QuadratureRule::default();
    c.bench_function("moment_quadrature/fp2_s2.5", |b| {
        b.iter(|| moment_quadrature(&spec, Complex64::new(2.5, 0.0), &rule).unwrap())
    });
    let aligned = AlignedSpec::from_spec(&spec).unwrap();
    c.bench_function("exact_moments/fp2_n10", |b| {
        b.iter(|| aligned.moments(10).unwrap())
    });
    let m = aligned.moments(10).unwrap();
    c.bench_function("moments_to_cumulants/n10", |b| {
        b.iter(|| moments_to_cumulants(&m).unwrap())
    });
}

fn certificates(c: &mut Criterion) {
    let eta = make_eta(0.7, 0.15).unwrap();
    let rule = QuadratureRule::default();
    c.bench_function("cumulants_by_quadrature/eta_k4", |b| {
        b.iter(|| cumulants_by_quadrature(&eta, 4, &rule).unwrap())
    });
    let k = cumulants_eta(&ratio(3, 20)).unwrap();
    c.bench_function("hankel_witness/eta_order2", |b| {
        b.iter(|| hankel_witness(&k, 2).unwrap())
    });
    c.bench_function("eta_threshold", |b| b.iter(|| eta_threshold().unwrap()));
}

fn univalence(c: &mut Criterion) {
    let probes = log_polar_probes(1e-2, 20).unwrap();
    let mut group = c.benchmark_group("ui_verify");
    group.sample_size(10);
    for (name, law) in power_laws() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &law, |b, law| {
            b.iter(|| ui_verify(law, 1e-2, &probes).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, moments, certificates, univalence);
criterion_main!(benches);

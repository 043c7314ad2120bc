//! Parallel map versus its sequential reference on the crate's three
//! sweep shapes: ensemble sampling with eigendecomposition (coarse units,
//! seconds of LAPACK per item), DQC1 shot simulation (medium units, pure
//! RNG), and form-factor series evaluation (fine units, short trig
//! loops). Units derive their RNG stream from their index, so both maps
//! produce identical results and the comparison is pure scheduling
//! overhead versus speedup.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qchaos::dqc1::{dqc1_estimate, Dqc1Config};
use qchaos::ensembles::{sample_cue, sample_poisson};
use qchaos::exec;
use qchaos::rng;
use qchaos::spectral::form_factor_series;

fn ensemble_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble_sweep_dim48");
    group.sample_size(10);
    for &samples in &[4usize, 16] {
        let work = |i: usize| {
            let mut stream = rng::stream(1, i as u64);
            let spectrum = sample_cue(48, &mut stream).unwrap().eigenphases().unwrap();
            spectrum.phases().iter().sum::<f64>()
        };
        group.bench_with_input(BenchmarkId::new("parallel", samples), &samples, |b, &s| {
            b.iter(|| exec::map_indexed(s, work))
        });
        group.bench_with_input(BenchmarkId::new("sequential", samples), &samples, |b, &s| {
            b.iter(|| exec::map_indexed_seq(s, work))
        });
    }
    group.finish();
}

fn dqc1_shot_sweep(c: &mut Criterion) {
    let f = sample_cue(32, &mut rng::stream(2, 0)).unwrap();
    let config = Dqc1Config::sampled(32, 1, 20_000).unwrap();
    let mut group = c.benchmark_group("dqc1_shots_20k");
    group.sample_size(10);
    for &trials in &[4usize, 16] {
        let work = |i: usize| {
            let mut stream = rng::stream(3, i as u64);
            dqc1_estimate(&f, &config, &mut stream).unwrap().re
        };
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| exec::map_indexed(t, work))
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| exec::map_indexed_seq(t, work))
        });
    }
    group.finish();
}

fn form_factor_sweep(c: &mut Criterion) {
    let spectra: Vec<_> = (0..64)
        .map(|i| {
            sample_poisson(600, &mut rng::stream(4, i)).unwrap().eigenphases().unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("form_factor_series_n600_nmax100");
    group.sample_size(20);
    let work = |i: usize| form_factor_series(&spectra[i], 100).values().iter().sum::<f64>();
    group.bench_function("parallel", |b| b.iter(|| exec::map_indexed(spectra.len(), work)));
    group.bench_function("sequential", |b| {
        b.iter(|| exec::map_indexed_seq(spectra.len(), work))
    });
    group.finish();
}

criterion_group!(benches, ensemble_sweep, dqc1_shot_sweep, form_factor_sweep);
criterion_main!(benches);

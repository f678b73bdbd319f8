//! Sequential vs parallel execution of the numeric kernels on large alphabets.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use visabs::alphabet::kl_divergence_with;
use visabs::channel::{bayes_inverse_with, compose_with, potential_distortion_with, push_forward_with};
use visabs::costbenefit::{pipeline_cost_benefit_with, Pipeline, Recon, Stage};
use visabs::{make_quantized_range, make_uniform_count, Channel, Pmf, Strategy};

const SIZES: [usize; 3] = [10_000, 100_000, 1_000_000];

/// A grid of `n + 1` values quantized onto a 1001-height canvas, then thresholded.
fn bar_chart(n: usize) -> (Pmf, Channel, Channel) {
    let d = make_quantized_range("D", 0.0, n as f64, 1.0).unwrap();
    let v = make_uniform_count("V", 1001).unwrap();
    let t = make_uniform_count("T", 2).unwrap();
    let plot = Channel::quantizer("plot", &d, &v, 1000).unwrap();
    let read = Channel::deterministic("read", &v, &t, (0..1001).map(|h| usize::from(h >= 500)).collect()).unwrap();
    (d.pmf().clone(), plot, read)
}

fn kernels(c: &mut Criterion) {
    for n in SIZES {
        let (prior, plot, read) = bar_chart(n);
        let skewed = Pmf::from_raw(prior.letters().clone(), {
            let w: Vec<f64> = (0..prior.len()).map(|i| 1.0 + (i % 7) as f64).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        });
        let inverse = bayes_inverse_with(&plot, &prior, Strategy::Sequential).unwrap();
        let pipeline = Pipeline::new(
            "p",
            vec![
                Stage::new("plot", plot.clone(), Recon::Bayes, 1.0).unwrap(),
                Stage::new("read", read.clone(), Recon::Bayes, 1.0).unwrap(),
            ],
            prior.clone(),
        )
        .unwrap();

        let mut group = c.benchmark_group(format!("n={n}"));
        group.throughput(Throughput::Elements(prior.len() as u64));
        group.sample_size(20);
        for &s in Strategy::all() {
            group.bench_with_input(BenchmarkId::new("entropy", s.name()), &s, |b, &s| {
                b.iter(|| black_box(prior.entropy_with(s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("kl_divergence", s.name()), &s, |b, &s| {
                b.iter(|| black_box(kl_divergence_with(&skewed, &prior, s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("push_forward", s.name()), &s, |b, &s| {
                b.iter(|| black_box(push_forward_with(&prior, &plot, s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("compose", s.name()), &s, |b, &s| {
                b.iter(|| black_box(compose_with(&plot, &read, s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("bayes_inverse", s.name()), &s, |b, &s| {
                b.iter(|| black_box(bayes_inverse_with(&plot, &prior, s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("potential_distortion", s.name()), &s, |b, &s| {
                b.iter(|| black_box(potential_distortion_with(&prior, &plot, &inverse, s).unwrap()))
            });
            group.bench_with_input(BenchmarkId::new("pipeline", s.name()), &s, |b, &s| {
                b.iter(|| black_box(pipeline_cost_benefit_with(&pipeline, s).unwrap()))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, kernels);
criterion_main!(benches);

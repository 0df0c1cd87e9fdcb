use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use judgecal_bench::{all_tallies, calibration_fixture, default_smoothing};
use judgecal_core::calibrate::{fit_drps, grid_oracle, FitConfig};
use judgecal_core::{bayes_action, compute_features, davidson_probs, DavidsonParams, ParamBox};

fn closed_form(c: &mut Criterion) {
    let tallies = all_tallies(20);
    let smoothing = default_smoothing();
    let theta = DavidsonParams::new(1.0, 3.0, 1.0).unwrap();
    c.bench_function("aggregate 231 tallies", |b| {
        b.iter(|| {
            for counts in &tallies {
                let d = davidson_probs(&compute_features(black_box(counts), &smoothing), &theta);
                black_box(bayes_action(&d));
            }
        })
    });
}

fn calibration(c: &mut Criterion) {
    let theta = DavidsonParams::new(1.0, 1.0, 1.0).unwrap();
    let items = calibration_fixture(500, theta, 1);
    let mut group = c.benchmark_group("calibration");
    group.sample_size(20);
    group.bench_function("fit_drps 500 items", |b| {
        b.iter_batched(
            FitConfig::default,
            |cfg| black_box(fit_drps(&items, &cfg).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("grid_oracle 500 items res 12", |b| {
        b.iter(|| black_box(grid_oracle(&items, &ParamBox::default(), 12).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, closed_form, calibration);
criterion_main!(benches);

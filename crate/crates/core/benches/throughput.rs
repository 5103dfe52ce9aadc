//! Sequential vs parallel execution of the data-parallel loops.
//!
//! Without the `parallel` feature both variants run the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hueshift_core::analysis::discriminability_curves_with;
use hueshift_core::colorspace::{srgb_decode, Jnd, SRgb8};
use hueshift_core::cvd::CvdType;
use hueshift_core::image::{rotate_image_with, simulate_image_with, Image};
use hueshift_core::par::Exec;
use hueshift_core::psychophysics::{make_study_config, run_study_with, SimulatedObserver};
use hueshift_core::rotation::RotationAngle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn frame(w: u32, h: u32) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let px = (0..w * h).map(|_| SRgb8::new(rng.random(), rng.random(), rng.random())).collect();
    Image::new(w, h, px).unwrap()
}

fn images(c: &mut Criterion) {
    let img = frame(1920, 1080);
    let mut g = c.benchmark_group("rotate_1080p");
    g.throughput(Throughput::Elements(u64::from(img.width() * img.height())));
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rotate_image_with(black_box(&img), RotationAngle::from_degrees(37.0), exec))
        });
    }
    g.finish();

    let img = frame(640, 360);
    let mut g = c.benchmark_group("simulate_360p");
    g.throughput(Throughput::Elements(u64::from(img.width() * img.height())));
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_image_with(black_box(&img), CvdType::Deutan, exec))
        });
    }
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let gray = srgb_decode(SRgb8::new(136, 136, 136));
    let mut g = c.benchmark_group("discriminability_curves");
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| discriminability_curves_with(black_box(gray), CvdType::Protan, 5.0, 13, 1.0, exec).unwrap())
        });
    }
    g.finish();
}

fn study(c: &mut Criterion) {
    let o = SimulatedObserver::new(CvdType::Deutan, Jnd(1.0), 0.0).unwrap();
    let cfg = make_study_config(7);
    let mut g = c.benchmark_group("study_64_sequences");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_study_with(&o, black_box(&cfg), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, images, analysis, study);
criterion_main!(benches);

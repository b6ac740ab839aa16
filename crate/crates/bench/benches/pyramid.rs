use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nspyr::decimation::solve_gamma;
use nspyr::geometry::{
    anomaly_localize, circularity_report, perturb_quadrant, sample_circle, AnomalyOptions,
};
use nspyr::pyramid::{analyze, PyramidConfig, PyramidPlan};
use nspyr::sequences::{PeriodicSeq, Seq};
use nspyr::subdivision::{masks, SchemeFamily};

fn signal(n: usize) -> Seq {
    let v = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            t.sin() + 0.3 * (5.0 * t).cos()
        })
        .collect();
    Seq::Periodic(PeriodicSeq::new(v).unwrap())
}

fn families() -> Vec<(&'static str, SchemeFamily)> {
    let v = (2.0 * PI / 16.0).cos();
    vec![
        (
            "bspline",
            SchemeFamily::Stationary {
                taps: masks::cubic_bspline(),
            },
        ),
        (
            "ns4pt",
            SchemeFamily::Ns4Point {
                theta: 2.0 * PI / 16.0,
            },
        ),
        ("conic", SchemeFamily::Conic { v_init: v }),
    ]
}

fn filters(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_gamma");
    for (name, fam) in families() {
        let mask = fam.mask_at_level(0).unwrap();
        g.bench_function(name, |b| b.iter(|| solve_gamma(black_box(&mask), 1e-15).unwrap()));
    }
    g.finish();
}

fn round_trip(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze_synthesize");
    for (name, fam) in families() {
        for n in [1024usize, 16384] {
            let data = signal(n);
            let cfg = PyramidConfig::new(fam.clone(), 6).periodic();
            let plan = PyramidPlan::new(&cfg, Some(n)).unwrap();
            g.bench_with_input(BenchmarkId::new(name, n), &data, |b, data| {
                b.iter(|| {
                    let p = nspyr::pyramid::analyze_with_plan(std::slice::from_ref(data), &plan).unwrap();
                    p.synthesize().unwrap()
                })
            });
        }
    }
    g.finish();
}

fn analyze_cold(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze_including_filter_solve");
    let data = signal(4096);
    for (name, fam) in families() {
        let cfg = PyramidConfig::new(fam, 6).periodic();
        g.bench_function(name, |b| {
            b.iter(|| analyze(std::slice::from_ref(&data), &cfg).unwrap())
        });
    }
    g.finish();
}

fn geometry(c: &mut Criterion) {
    let circle = sample_circle(256, 1.0, [0.0, 0.0]).unwrap();
    let bumpy = perturb_quadrant(&circle, 0.05, 24).unwrap();
    c.bench_function("circularity_256_j4", |b| {
        b.iter(|| circularity_report(black_box(&circle), 4, 1e-15).unwrap())
    });
    c.bench_function("anomaly_256_j4", |b| {
        b.iter(|| anomaly_localize(black_box(&bumpy), 4, 1e-15, &AnomalyOptions::default()).unwrap())
    });
}

criterion_group!(benches, filters, round_trip, analyze_cold, geometry);
criterion_main!(benches);

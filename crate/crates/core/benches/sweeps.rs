use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsg_core::analytics::ctm_spacing_batch;
use qsg_core::models::{build_qec_mpo, build_xyz_mpo, ChainLength, QecParams, XyzParams};
use qsg_core::mps::{run_finite_dmrg_report, DmrgSchedule, IdmrgRun};
use qsg_core::par::force_sequential;

const BACKENDS: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn finite_sweeps(c: &mut Criterion) {
    let h = build_xyz_mpo(&XyzParams::new(1.0, 0.9, 0.5), ChainLength::Finite(24)).unwrap();
    let sched = DmrgSchedule::fixed(32).with_max_sweeps(2);
    let mut g = c.benchmark_group("finite_dmrg_xyz_l24_chi32");
    g.sample_size(10);
    for (name, seq) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            force_sequential(seq);
            b.iter(|| black_box(run_finite_dmrg_report(&h, 24, &sched).unwrap().energy));
        });
    }
    force_sequential(false);
    g.finish();
}

fn idmrg_steps(c: &mut Criterion) {
    let p = QecParams { e_j: 1.55, e_j0: 0.016, ..QecParams::default() };
    let h = build_qec_mpo(&p, ChainLength::Infinite).unwrap();
    let sched = DmrgSchedule::fixed(24).with_max_sweeps(12);
    let mut g = c.benchmark_group("idmrg_qec_12_steps_chi24");
    g.sample_size(10);
    for (name, seq) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            force_sequential(seq);
            b.iter(|| {
                let mut run = IdmrgRun::new(&h, &sched).unwrap();
                run.run().unwrap();
                black_box(run.energy_density())
            });
        });
    }
    force_sequential(false);
    g.finish();
}

fn ctm_batch(c: &mut Criterion) {
    let ls: Vec<f64> = (0..64).map(|i| 10f64.powf(-3.0 - 5.0 * i as f64 / 63.0)).collect();
    let beta2 = 0.063 * 8.0 * std::f64::consts::PI;
    let mut g = c.benchmark_group("ctm_spacing_batch_64");
    for (name, seq) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            force_sequential(seq);
            b.iter(|| black_box(ctm_spacing_batch(&ls, beta2)));
        });
    }
    force_sequential(false);
    g.finish();
}

criterion_group!(benches, finite_sweeps, idmrg_steps, ctm_batch);
criterion_main!(benches);

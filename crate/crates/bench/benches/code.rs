use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gaugecode::hamiltonian::{build_full_h, ground_state_iterative, strong_coupling_ground, HamiltonianParams};
use gaugecode::qecc::{
    error_set_a, error_set_tree_gauge_fix, error_set_tree_u, evaluate_recovery, kl_check, u_distance, RecoveryPlan,
};
use gaugecode::{Boundary, ConstraintSet, Lattice};
use gaugecode_bench::{holonomy_states, space, tree_qrf};

fn kl(c: &mut Criterion) {
    let q = tree_qrf(&[2, 2], Boundary::Periodic, 3);
    let set = error_set_tree_gauge_fix(&q).unwrap();
    let code = q.constraints().physical_basis(q.tree());
    c.bench_function("kl_gauge_fix_2x2_periodic_d3", |b| {
        b.iter(|| black_box(kl_check(q.space(), &set, &code, 1e-10).unwrap().max_deviation))
    });
}

fn recovery(c: &mut Criterion) {
    let q = tree_qrf(&[2, 2], Boundary::Smooth, 3);
    let set = error_set_tree_u(&q);
    let plan = RecoveryPlan::tree(&q);
    let basis = holonomy_states(&q, 64);
    c.bench_function("tree_recovery_2x2_smooth_d3", |b| {
        b.iter(|| black_box(evaluate_recovery(&set, &plan, &basis, 20, 1).unwrap().worst))
    });

    let h = space(&[2, 2], Boundary::Smooth, 4, true);
    let alpha = [0.3, 1.1, 2.0, 4.4];
    let set = error_set_a(&h, &alpha, true).unwrap();
    let plan = RecoveryPlan::fermion(&h, &alpha).unwrap();
    let cs = ConstraintSet::new(&h);
    let tree = gaugecode::SpanningTree::new(h.lattice(), 0).unwrap();
    let basis: Vec<_> =
        cs.physical_basis(&tree).iter().take(64).map(|&i| gaugecode::StateVector::basis(&h, i)).collect();
    c.bench_function("flip_recovery_2x2_smooth_d4", |b| {
        b.iter(|| black_box(evaluate_recovery(&set, &plan, &basis, 20, 1).unwrap().worst))
    });
}

fn distance(c: &mut Criterion) {
    let lat = Lattice::new(&[3, 3], Boundary::Periodic).unwrap();
    c.bench_function("u_distance_3x3_periodic_d2_w4", |b| b.iter(|| black_box(u_distance(&lat, 2, 4).unwrap())));
}

fn lanczos(c: &mut Criterion) {
    let h = space(&[2, 2], Boundary::Smooth, 3, true);
    let op = build_full_h(&h, &HamiltonianParams { g: 1.0, a: 1.0, m: 1.0, jw: true }).unwrap();
    let start = strong_coupling_ground(&h);
    c.bench_function("ground_state_2x2_smooth_d3_matter", |b| {
        b.iter(|| black_box(ground_state_iterative(&op, &start, 1e-9, 2000).unwrap().energy))
    });
}

criterion_group!(benches, kl, recovery, distance, lanczos);
criterion_main!(benches);

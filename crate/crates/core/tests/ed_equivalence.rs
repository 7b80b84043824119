use qsg_core::models::{
    build_qec_mpo, build_xyz_mpo, charge_operator, pauli, vertex_operator_matrix, ChainLength, Pauli, QecParams,
    XyzParams,
};
use qsg_core::mps::{exact_ground_state, measure_local, run_finite_dmrg, DmrgSchedule, MpoOperator};
use qsg_core::tensor::DenseTensor;

fn check(h: &MpoOperator<f64>, len: usize, chi: usize, ops: &[DenseTensor<f64>]) {
    let ed = exact_ground_state(h).unwrap();
    let r = run_finite_dmrg(h, len, &DmrgSchedule::fixed(chi).with_max_sweeps(40)).unwrap();
    let rel = ((r.energy - ed.energy) / ed.energy).abs();
    assert!(rel < 1e-8, "L={len}: {} vs {} (rel {rel:e})", r.energy, ed.energy);
    r.state.audit(1e-10).unwrap();
    // Observables are only well defined for a non-degenerate ground state.
    if ed.gap < 1e-6 {
        return;
    }
    for op in ops {
        for site in 0..len {
            let a = measure_local(&r.state, op, site).unwrap().re;
            let b = ed.local(op, site).unwrap();
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-2), "L={len} site {site}: {a} vs {b}");
        }
    }
}

#[test]
fn xyz_chains_up_to_eight_sites() {
    let pm = pauli(Pauli::Plus).matmul(&pauli(Pauli::Minus)).unwrap();
    for p in [XyzParams::new(1.0, 0.999937, 0.981), XyzParams::new(1.0, 0.7, -0.4), XyzParams::new(1.0, 1.0, 0.0)] {
        for len in 2..=8 {
            let h = build_xyz_mpo(&p, ChainLength::Finite(len)).unwrap();
            check(&h, len, 16, &[pm.clone(), pauli(Pauli::Z)]);
        }
    }
}

#[test]
fn qec_chains_up_to_four_sites() {
    let s_dag = vertex_operator_matrix(1).unwrap().adjoint().unwrap();
    for (ej, ej0) in [(1.55, 0.0), (1.55, 0.016), (0.55, 0.3)] {
        let p = QecParams { n_max: 1, e_j: ej, e_j0: ej0, ..QecParams::default() };
        for len in 2..=4 {
            let h = build_qec_mpo(&p, ChainLength::Finite(len)).unwrap();
            check(&h, len, 27, &[s_dag.clone(), charge_operator(1).unwrap()]);
        }
    }
}

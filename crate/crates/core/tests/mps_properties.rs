use proptest::prelude::*;
use qsg_core::models::{build_xyz_mpo, pauli, ChainLength, Pauli, XyzParams};
use qsg_core::mps::{
    correlation_length, entanglement_entropy, entanglement_spectrum, measure_local, measure_product,
    measure_two_point, run_finite_dmrg_report, DmrgSchedule, IdmrgRun, EntanglementSpectrum, MpsState,
};
use qsg_core::tensor::{DenseTensor, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_invertible(n: usize, seed: u64) -> (DenseTensor<C64>, DenseTensor<C64>) {
    use faer::linalg::solvers::DenseSolveCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DenseTensor::from_fn(vec![n, n], |i| {
        let diag = if i[0] == i[1] { 2.0 } else { 0.0 };
        C64::new(diag + rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let inv = g.as_mat().unwrap().partial_piv_lu().inverse();
    (g.clone(), DenseTensor::from_mat(inv.as_ref()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_forms_pass_audit(len in 2usize..8, d in 2usize..4, chi in 1usize..7, seed in any::<u64>()) {
        let mut s = MpsState::<C64>::random(len, d, chi, seed).unwrap();
        s.audit(1e-10).unwrap();
        s.canonicalize_left().unwrap();
        s.audit(1e-10).unwrap();
        let v = s.to_dense_vector().unwrap();
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_survives_bond_gauge(len in 3usize..7, chi in 2usize..6, seed in any::<u64>(), bond_pick in 0usize..100) {
        let s = MpsState::<C64>::random(len, 2, chi, seed).unwrap();
        let bond = 1 + bond_pick % (len - 1);
        let k = s.site(bond).shape()[0];
        let (g, gi) = random_invertible(k, seed ^ 0x5a5a);
        let mut t = s.clone();
        t.apply_bond_gauge(bond, &g, &gi).unwrap();
        for b in 0..=len {
            let a = entanglement_spectrum(&s, b).unwrap();
            let c = entanglement_spectrum(&t, b).unwrap();
            prop_assert_eq!(a.levels.len(), c.levels.len());
            for (x, y) in a.levels.iter().zip(&c.levels) {
                prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
            }
            prop_assert!((entanglement_entropy(&s, b).unwrap() - entanglement_entropy(&t, b).unwrap()).abs() < 1e-10);
        }
        let total: f64 = entanglement_spectrum(&t, bond).unwrap().probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reused_environments_match_direct_products(len in 6usize..10, chi in 1usize..6, seed in any::<u64>()) {
        let s = MpsState::<C64>::random(len, 2, chi, seed).unwrap();
        let (x, z) = (pauli(Pauli::X), pauli(Pauli::Z));
        let to_c = |m: &DenseTensor<f64>| DenseTensor::from_fn(m.shape().to_vec(), |i| C64::new(m.get(i), 0.0));
        let (xc, zc) = (to_c(&x), to_c(&z));
        let rmax = (len - len / 2 - 1).min(4);
        let series = measure_two_point(&s, &xc, &zc, rmax).unwrap();
        let i = len / 2;
        for (r, v) in series {
            let direct = measure_product(&s, &[(i, &xc), (i + r, &zc)]).unwrap();
            prop_assert!((v - direct).norm() < 1e-10, "r = {}: {} vs {}", r, v, direct);
        }
    }

    #[test]
    fn identity_correlator_is_one(len in 4usize..9, chi in 1usize..5, seed in any::<u64>()) {
        let s = MpsState::<C64>::random(len, 3, chi, seed).unwrap();
        let id = DenseTensor::<C64>::eye(3);
        for (_, v) in measure_two_point(&s, &id, &id, len - len / 2 - 1).unwrap() {
            prop_assert!((v - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
        prop_assert!((measure_local(&s, &id, 0).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn levels_are_sorted_and_anchored(raw in proptest::collection::vec(1e-6f64..1.0, 1..20)) {
        let es = EntanglementSpectrum::from_schmidt(&raw);
        prop_assert_eq!(es.levels[0], 0.0);
        prop_assert!(es.levels.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(es.multiplicities.iter().sum::<usize>(), es.levels.len());
        let total: f64 = es.probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn product_state_limits() {
    let s = MpsState::<f64>::product(&[0, 1, 0, 1], 2).unwrap();
    let es = entanglement_spectrum(&s, 2).unwrap();
    assert_eq!(es.levels, vec![0.0]);
    assert_eq!(entanglement_entropy(&s, 2).unwrap(), 0.0);
    // Ising ferromagnet: the iDMRG fixed point is a product state.
    let h = build_xyz_mpo(&XyzParams::new(0.0, 0.0, 1.0), ChainLength::Infinite).unwrap();
    let run = IdmrgRun::new(&h, &DmrgSchedule::fixed(4).with_max_sweeps(40)).unwrap();
    let mut run = run.with_pinning(&h, &pauli(Pauli::Z), 0.1, 2).unwrap();
    assert!(run.run().unwrap());
    let r = run.result().unwrap();
    assert!((r.energy_density + 0.5).abs() < 1e-12);
    assert_eq!(r.state.max_bond(), 1);
    assert_eq!(correlation_length(&r.state).unwrap(), 0.0);
}

#[test]
fn singlet_cut_has_two_equal_levels() {
    // Antiferromagnetic Heisenberg dimer: Jx = Jy = Jz = −1.
    let h = build_xyz_mpo(&XyzParams::new(-1.0, -1.0, -1.0), ChainLength::Finite(2)).unwrap();
    let r = run_finite_dmrg_report(&h, 2, &DmrgSchedule::fixed(2)).unwrap();
    let es = entanglement_spectrum(&r.state, 1).unwrap();
    assert_eq!(es.levels.len(), 2);
    assert!(es.levels[1].abs() < 1e-10);
    assert!((entanglement_entropy(&r.state, 1).unwrap() - 2f64.ln()).abs() < 1e-10);
}

#[test]
fn idmrg_restart_is_idempotent() {
    let h = build_xyz_mpo(&XyzParams::new(1.0, 0.5, 0.2), ChainLength::Infinite).unwrap();
    let s = DmrgSchedule::fixed(16).with_max_sweeps(400);
    let mut run = IdmrgRun::new(&h, &s).unwrap().with_pinning(&h, &pauli(Pauli::X), 0.05, 4).unwrap();
    assert!(run.run().unwrap());
    let e = run.energy_density().unwrap();
    run.extend(10);
    for _ in 0..10 {
        run.step().unwrap();
    }
    assert!((run.energy_density().unwrap() - e).abs() < s.energy_tol);
}

use std::sync::Arc;

use gaugecode::gauge::gauge_transform_operator;
use gaugecode::hilbert::{representative, Factor, Window};
use gaugecode::{
    Boundary, ChargeVector, ConstraintSet, HilbertSpace, Lattice, LinearOperator, Monomial, SpanningTree, StateVector,
    Truncation,
};
use proptest::prelude::*;

fn space(dims: &[usize], b: Boundary, d: u32, matter: bool) -> Arc<HilbertSpace> {
    let lat = Arc::new(Lattice::new(dims, b).unwrap());
    HilbertSpace::new(lat, Truncation::new(d, matter).unwrap()).unwrap()
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Periodic), Just(Boundary::Smooth)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_decode_round_trip(b in boundary(), d in 2u32..6, matter: bool, seed: u64) {
        let h = space(&[3, 3], b, d, matter);
        let idx = seed % h.dim();
        prop_assert_eq!(h.encode(&h.decode(idx)).unwrap(), idx);
    }

    #[test]
    fn representatives_stay_in_window(k in -50i64..50, d in 2u32..9) {
        let r = representative(k, d, Window::Symmetric);
        let di = i64::from(d);
        prop_assert!(-(di / 2) <= r && r < (di + 1) / 2);
        prop_assert_eq!((r - k).rem_euclid(di), 0);
        let r = representative(k, d, Window::Residue);
        prop_assert!((0..di).contains(&r));
    }

    #[test]
    fn gauge_transformations_compose(
        d in 2u32..5,
        matter: bool,
        lam in prop::collection::vec(0u32..4, 4),
        mu in prop::collection::vec(0u32..4, 4),
        idx: u64,
    ) {
        let h = space(&[2, 2], Boundary::Smooth, d, matter);
        let lam: Vec<u32> = lam.iter().map(|x| x % d).collect();
        let mu: Vec<u32> = mu.iter().map(|x| x % d).collect();
        let sum: Vec<u32> = lam.iter().zip(&mu).map(|(a, b)| (a + b) % d).collect();
        let g = |l: &[u32]| LinearOperator::from(gauge_transform_operator(&h, l).unwrap());
        let s = StateVector::basis(&h, idx % h.dim());
        let two = g(&lam).apply(&g(&mu).apply(&s));
        let one = g(&sum).apply(&s);
        prop_assert!(two.max_abs_diff(&one).unwrap() < 1e-12);
    }

    #[test]
    fn gauge_transform_is_exp_of_constraints(
        d in 2u32..5,
        matter: bool,
        lam in prop::collection::vec(0u32..4, 6),
        idx: u64,
    ) {
        let h = space(&[2, 3], Boundary::Smooth, d, matter);
        let lam: Vec<u32> = lam.iter().map(|x| x % d).collect();
        let g = LinearOperator::from(gauge_transform_operator(&h, &lam).unwrap());
        let e = ConstraintSet::new(&h).exp_constraints(&lam).unwrap();
        let s = StateVector::basis(&h, idx % h.dim());
        prop_assert!(g.apply(&s).max_abs_diff(&e.apply(&s)).unwrap() < 1e-12);
    }

    #[test]
    fn shift_errors_create_their_boundary_charges(
        b in boundary(),
        d in 2u32..5,
        exps in prop::collection::vec(-3i64..4, 12),
    ) {
        let h = space(&[3, 3], b, d, false);
        let lat = h.lattice().clone();
        let cs = ConstraintSet::new(&h);
        let chain: Vec<i64> = (0..lat.num_links()).map(|l| exps[l % exps.len()]).collect();
        let m = Monomial::new(chain.iter().enumerate().map(|(link, &m)| Factor::Shift { link, m }).collect());
        let (idx, _) = m.apply_basis(&h, 0).unwrap();
        let bd = lat.boundary_of(&chain);
        let want = ChargeVector::from_integers(&bd.iter().map(|x| -x).collect::<Vec<_>>(), d);
        prop_assert_eq!(cs.charges(idx), want);
    }

    #[test]
    fn tree_solve_lands_in_requested_sector(
        b in boundary(),
        d in 2u32..5,
        seed: u64,
        q in prop::collection::vec(0u32..4, 8),
    ) {
        let h = space(&[3, 3], b, d, false);
        let lat = h.lattice().clone();
        let tree = SpanningTree::new(&lat, (seed % 9) as usize).unwrap();
        let cs = ConstraintSet::new(&h);
        let mut q: Vec<u32> = q.iter().map(|x| x % d).collect();
        let rest: u32 = q.iter().sum::<u32>() % d;
        q.push((d - rest) % d);
        let q = ChargeVector(q);
        let out = cs.solve_tree(&tree, seed % h.dim(), &q).unwrap();
        prop_assert_eq!(cs.charges(out), q);
        for l in tree.non_tree_links() {
            prop_assert_eq!(h.flux(out, l), h.flux(seed % h.dim(), l));
        }
    }

    #[test]
    fn physical_projection_is_idempotent(d in 2u32..4, picks in prop::collection::vec(any::<u64>(), 1..8)) {
        let h = space(&[2, 2], Boundary::Smooth, d, true);
        let cs = ConstraintSet::new(&h);
        let amps = picks.iter().enumerate().map(|(k, &i)| (i % h.dim(), num_complex::Complex64::new(1.0, k as f64)));
        let s = StateVector::from_amplitudes(&h, amps.collect::<Vec<_>>());
        let p = cs.project_physical(&s);
        prop_assert!(cs.project_physical(&p).max_abs_diff(&p).unwrap() < 1e-14);
        let avg = cs.project_physical_group_average(&s).unwrap();
        prop_assert!(avg.max_abs_diff(&p).unwrap() < 1e-10);
    }
}

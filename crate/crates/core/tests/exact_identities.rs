use mpvlasov_core::corpus::{
    random_graded, random_npart, random_phase_poly, random_spair, random_sym, CorpusShape, Lcg64,
};
use mpvlasov_core::phasealg::{
    act_left_phase, act_right_phase, canonical_bracket, decompose_phase, gccl, hamiltonian_field,
    jacobi_lie_bracket, kappa, kappa_inv, kappa_s, kappa_sym,
};
use mpvlasov_core::schouten::{
    act_left, act_right, compat_residuals, double_cross_bracket, embed, schouten_bracket,
    schouten_graded, split, GradedTensor, NPart, SPair,
};
use proptest::prelude::*;

const CAP: usize = 16;

fn shape(rng: &mut Lcg64, max_order: usize) -> CorpusShape {
    CorpusShape::new(1 + rng.below(2) as usize, max_order, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn antisymmetry_and_grading(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let k = rng.below(5) as usize;
        let m = rng.below(5) as usize;
        let x = random_sym(&mut rng, &sh, k);
        let y = random_sym(&mut rng, &sh, m);
        let xy = schouten_bracket(&x, &y).unwrap();
        let yx = schouten_bracket(&y, &x).unwrap();
        prop_assert!(xy.plus(&yx).unwrap().is_zero());
        prop_assert!(xy.is_zero() || xy.order() == (k + m).saturating_sub(1));
    }

    #[test]
    fn jacobi(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = CorpusShape { max_terms: 2, ..shape(&mut rng, 3) };
        let x = random_graded(&mut rng, &sh, 0);
        let y = random_graded(&mut rng, &sh, 0);
        let z = random_graded(&mut rng, &sh, 0);
        let b = |a: &GradedTensor, c: &GradedTensor| schouten_graded(a, c, CAP).unwrap();
        let total = b(&x, &b(&y, &z))
            .plus(&b(&y, &b(&z, &x))).unwrap()
            .plus(&b(&z, &b(&x, &y))).unwrap();
        prop_assert!(total.is_zero());
    }

    #[test]
    fn double_cross_equals_total_bracket(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let (xi, eta) = (random_spair(&mut rng, &sh), random_npart(&mut rng, &sh));
        let (xi2, eta2) = (random_spair(&mut rng, &sh), random_npart(&mut rng, &sh));
        let got = double_cross_bracket((&xi, &eta), (&xi2, &eta2), CAP).unwrap();
        let total = schouten_graded(&embed(&xi, &eta).unwrap(), &embed(&xi2, &eta2).unwrap(), CAP).unwrap();
        prop_assert_eq!(got, split(&total));
    }

    #[test]
    fn mutual_actions_reconstruct_bracket(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let xi = random_spair(&mut rng, &sh);
        let eta = random_npart(&mut rng, &sh);
        let total = schouten_graded(eta.graded(), &xi.to_graded(), CAP).unwrap();
        let (s, n) = split(&total);
        prop_assert_eq!(s, act_left(&eta, &xi).unwrap());
        prop_assert_eq!(n, act_right(&eta, &xi, CAP).unwrap());
    }

    #[test]
    fn compatibility_conditions(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let xi = random_spair(&mut rng, &sh);
        let xi2 = random_spair(&mut rng, &sh);
        let eta = random_npart(&mut rng, &sh);
        let eta2 = random_npart(&mut rng, &sh);
        let (r1, r2) = compat_residuals(&xi, &xi2, &eta, &eta2, CAP).unwrap();
        prop_assert!(r1.is_zero());
        prop_assert!(r2.is_zero());
    }

    #[test]
    fn kappa_is_antihomomorphism(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let x = random_graded(&mut rng, &sh, 0);
        let y = random_graded(&mut rng, &sh, 0);
        let lhs = kappa(&schouten_graded(&x, &y, CAP).unwrap());
        let rhs = canonical_bracket(&kappa(&x), &kappa(&y)).unwrap().neg();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(kappa_inv(&kappa(&x)), x);
    }

    #[test]
    fn canonical_bracket_jacobi(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = CorpusShape { max_terms: 2, ..shape(&mut rng, 3) };
        let h = random_phase_poly(&mut rng, &sh, 0, 3);
        let g = random_phase_poly(&mut rng, &sh, 0, 3);
        let f = random_phase_poly(&mut rng, &sh, 0, 3);
        let b = |a: &_, c: &_| canonical_bracket(a, c).unwrap();
        let total = b(&h, &b(&g, &f)).plus(&b(&g, &b(&f, &h))).unwrap().plus(&b(&f, &b(&h, &g))).unwrap();
        prop_assert!(total.is_zero());
        prop_assert!(b(&h, &g).plus(&b(&g, &h)).unwrap().is_zero());
    }

    #[test]
    fn phase_actions_match_bracket_and_kappa(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let xi = random_spair(&mut rng, &sh);
        let eta = random_npart(&mut rng, &sh);
        let xhat = kappa(eta.graded());
        let shat = kappa_s(&xi);
        let left = act_left_phase(&xhat, &shat).unwrap();
        let right = act_right_phase(&xhat, &shat).unwrap();
        let f0_bracket = canonical_bracket(&xhat, &shat).unwrap().neg();
        prop_assert_eq!(left.plus(&right).unwrap(), f0_bracket);
        prop_assert_eq!(&right, &kappa(act_right(&eta, &xi, CAP).unwrap().graded()));
        prop_assert_eq!(left, kappa_s(&act_left(&eta, &xi).unwrap()));
    }

    #[test]
    fn phase_split_closure(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let h = random_phase_poly(&mut rng, &sh, 0, 4);
        let (s, n) = decompose_phase(&h);
        prop_assert_eq!(s.plus(&n).unwrap(), h);
        let s2 = random_phase_poly(&mut rng, &sh, 0, 1);
        let n2 = random_phase_poly(&mut rng, &sh, 2, 4);
        prop_assert!(canonical_bracket(&s, &s2).unwrap().p_degree().unwrap_or(0) <= 1);
        prop_assert!(canonical_bracket(&n, &n2).unwrap().min_p_degree().unwrap_or(3) >= 2);
    }

    #[test]
    fn gccl_is_phi_of_kappa(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 4);
        let k = rng.below(5) as usize;
        let m = rng.below(5) as usize;
        let x = random_sym(&mut rng, &sh, k);
        let y = random_sym(&mut rng, &sh, m);
        prop_assert_eq!(gccl(&x), hamiltonian_field(&kappa_sym(&x)));
        // gccl reverses the Schouten bracket
        let lhs = gccl(&schouten_bracket(&x, &y).unwrap());
        let rhs = jacobi_lie_bracket(&gccl(&x), &gccl(&y)).unwrap().neg();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hamiltonian_field_homomorphism(seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let sh = shape(&mut rng, 3);
        let h = random_phase_poly(&mut rng, &sh, 0, 3);
        let g = random_phase_poly(&mut rng, &sh, 0, 3);
        let lhs = jacobi_lie_bracket(&hamiltonian_field(&h), &hamiltonian_field(&g)).unwrap().neg();
        let rhs = hamiltonian_field(&canonical_bracket(&h, &g).unwrap().neg());
        prop_assert_eq!(lhs, rhs);
        // kernel: only constants
        let (q_part, _) = (h.degree_part(0), ());
        let nonconst = h.minus(&q_part.degree_part(0)).unwrap();
        prop_assert_eq!(hamiltonian_field(&nonconst).is_zero(), nonconst.is_zero());
    }
}

#[test]
fn subalgebra_reductions() {
    let mut rng = Lcg64::new(11);
    let sh = CorpusShape::new(2, 4, 2);
    let xi = random_spair(&mut rng, &sh);
    let xi2 = random_spair(&mut rng, &sh);
    let zero = NPart::zero(2);
    let (s, n) = double_cross_bracket((&xi, &zero), (&xi2, &zero), CAP).unwrap();
    assert_eq!(s, mpvlasov_core::schouten::bracket_s(&xi, &xi2).unwrap());
    assert!(n.is_zero());

    let eta = random_npart(&mut rng, &sh);
    let eta2 = random_npart(&mut rng, &sh);
    let (s, n) = double_cross_bracket((&SPair::zero(2), &eta), (&SPair::zero(2), &eta2), CAP).unwrap();
    assert!(s.is_zero());
    assert_eq!(n.graded(), &schouten_graded(eta.graded(), eta2.graded(), CAP).unwrap());

    let (r1, r2) = compat_residuals(&SPair::zero(2), &SPair::zero(2), &NPart::zero(2), &NPart::zero(2), CAP).unwrap();
    assert!(r1.is_zero() && r2.is_zero());
}

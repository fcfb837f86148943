//! Invariants checked over generated inputs. Matrices come from proptest
//! directly; triples, modules and connections come from the seeded
//! generator with a proptest-chosen seed.

use proptest::prelude::*;

use ncurv::curvature::{self, VerticalOperator};
use ncurv::fgp::{self, UniversalConnectionForm};
use ncurv::forms::{self, UniversalOneForm};
use ncurv::harness::{self, Execution};
use ncurv::linalg::{self, CMatrix, GradedOperator, Grading, Parity, C64};
use ncurv::random::{self, RandomScenario, TripleShape};
use ncurv::submersion::{self, FramePoint, SubmersionInvariants};
use ncurv::triple::SpectralTriple;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |v| CMatrix::from_row_slice(rows, cols, &v))
}

fn square() -> impl Strategy<Value = CMatrix> {
    (1usize..=6).prop_flat_map(|n| matrix(n, n))
}

fn signs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::bool::ANY, n).prop_map(|v| v.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect())
}

/// Homogeneous part of `x` for the grading `γ`.
fn homogeneous(x: &CMatrix, g: &Grading, parity: Parity) -> CMatrix {
    let gxg = g.matrix() * x * g.matrix();
    (x + gxg.scale(parity.sign())).scale(0.5)
}

fn graded_pair() -> impl Strategy<Value = (Grading, GradedOperator, GradedOperator)> {
    (1usize..=5)
        .prop_flat_map(|n| (signs(n), matrix(n, n), matrix(n, n), prop::bool::ANY, prop::bool::ANY))
        .prop_map(|(s, a, b, pa, pb)| {
            let g = Grading::from_signs(&s);
            let pa = if pa { Parity::Odd } else { Parity::Even };
            let pb = if pb { Parity::Odd } else { Parity::Even };
            let a = GradedOperator::new(homogeneous(&a, &g, pa), pa);
            let b = GradedOperator::new(homogeneous(&b, &g, pb), pb);
            (g, a, b)
        })
}

fn triple(seed: u64, min_d: usize) -> SpectralTriple {
    let shape = TripleShape {
        min_d,
        ..TripleShape::default()
    };
    random::random_triple(&mut random::case_rng(seed, 0), shape, Default::default())
}

fn scenario(seed: u64) -> RandomScenario {
    let mut rng = random::case_rng(seed, 1);
    RandomScenario::generate(&mut rng, TripleShape::default(), harness::MAX_M, Default::default()).expect("generator succeeds")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_commutator_is_koszul_antisymmetric((_g, a, b) in graded_pair()) {
        let ab = linalg::graded_commutator(&a, &b).unwrap();
        let ba = linalg::graded_commutator(&b, &a).unwrap();
        // (−1)^{∂a∂b} is −1 only when both are odd
        let koszul = if a.parity == Parity::Odd && b.parity == Parity::Odd { -1.0 } else { 1.0 };
        prop_assert!((ab + ba.scale(koszul)).norm() <= 1e-12);
    }

    #[test]
    fn graded_right_lift_respects_squares((_g, b, _) in graded_pair(), left in signs(3)) {
        let n = b.mat.nrows();
        let left = Grading::from_signs(&left);
        let lifted = linalg::graded_right_lift(&b, &left);
        let sq = GradedOperator::new(&b.mat * &b.mat, Parity::Even);
        let want = linalg::graded_right_lift(&sq, &left);
        prop_assert!((&lifted * &lifted - want).norm() <= 1e-12 * (1.0 + (n * n) as f64));
    }

    #[test]
    fn spectral_norm_of_gram_is_square(a in square()) {
        let s = linalg::spectral_norm(&a);
        let gram = linalg::spectral_norm(&(a.adjoint() * &a));
        prop_assert!((gram - s * s).abs() <= 1e-10 * gram.max(1.0));
        prop_assert!(s <= a.norm() + 1e-12);
        prop_assert!(s * (a.nrows() as f64).sqrt() >= a.norm() - 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in matrix(2, 2), b in matrix(3, 3), c in matrix(2, 2), d in matrix(3, 3)) {
        let lhs = linalg::kron(&a, &b) * linalg::kron(&c, &d);
        let rhs = linalg::kron(&(&a * &c), &(&b * &d));
        prop_assert!(linalg::relative_distance(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn subspace_basis_is_idempotent(gens in prop::collection::vec(matrix(3, 3), 1..6)) {
        let tol = 1e-9;
        let basis = linalg::subspace_basis(&gens, tol).unwrap();
        prop_assert!(basis.orthonormality_residual() <= 1e-12);
        let again = linalg::subspace_basis(basis.elements(), tol).unwrap();
        prop_assert_eq!(again.dim(), basis.dim());
        for e in again.elements() {
            prop_assert!(basis.membership_residual(e).unwrap() <= 1e-10);
        }
        for e in basis.elements() {
            prop_assert!(again.membership_residual(e).unwrap() <= 1e-10);
        }
    }

    /// Low-rank complex families: the span must cover every generator.
    /// A faulty SVD used to truncate these.
    #[test]
    fn subspace_basis_covers_low_rank_generators(
        atoms in prop::collection::vec(matrix(4, 4), 1..4),
        mix in prop::collection::vec(prop::collection::vec(complex(), 3), 6),
    ) {
        let gens: Vec<CMatrix> = mix
            .iter()
            .map(|w| atoms.iter().zip(w).fold(CMatrix::zeros(4, 4), |acc, (a, c)| acc + a * *c))
            .collect();
        let basis = linalg::subspace_basis(&gens, 1e-9).unwrap();
        prop_assert!(basis.dim() <= atoms.len());
        for g in &gens {
            prop_assert!(basis.membership_residual(g).unwrap() <= 1e-10 * g.norm().max(1.0));
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated(l in (1usize..=5, 1usize..=6).prop_flat_map(|(r, c)| matrix(r, c))) {
        let kernel = linalg::solve_kernel(&l, 1e-9);
        prop_assert!(kernel.len() + l.nrows().min(l.ncols()) >= l.ncols());
        for v in &kernel {
            prop_assert!((&l * v).norm() <= 1e-10);
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_chain_and_star_invariance(seed in any::<u64>()) {
        let st = triple(seed, 1);
        let mut rng = random::case_rng(seed, 2);
        let a = random::random_element(&mut rng, st.d());
        let op = linalg::spectral_norm(&st.matrix_of(&a));
        let c1 = st.c1_norm(&a);
        let c2 = st.c2_norm(&a);
        prop_assert!(c2 + 1e-10 >= c1);
        prop_assert!(c1 + 1e-10 >= op);
        let star = st.star(&a).unwrap();
        prop_assert!((st.c1_norm(&star) - c1).abs() <= 1e-10 * c1.max(1.0));
    }

    #[test]
    fn generated_triples_validate(seed in any::<u64>()) {
        let st = triple(seed, 1);
        let report = st.validate(st.tolerances().residual);
        prop_assert!(report.all_passed(), "{:?}", report);
    }

    #[test]
    fn delta_is_a_derivation_through_pi(seed in any::<u64>()) {
        let st = triple(seed, 1);
        let mut rng = random::case_rng(seed, 3);
        let a = random::random_element(&mut rng, st.d());
        let b = random::random_element(&mut rng, st.d());
        let w = UniversalOneForm::delta(&st, &b).unwrap().left_mult(&st, &a).unwrap();
        let want = st.matrix_of(&a) * linalg::commutator(st.dirac(), &st.matrix_of(&b));
        prop_assert!(linalg::relative_distance(&w.pi_d(&st).unwrap(), &want) <= 1e-12);
        // Leibniz at universal level
        let ab = st.product(&a, &b).unwrap();
        let lhs = UniversalOneForm::delta(&st, &ab).unwrap();
        let rhs = UniversalOneForm::delta(&st, &b).unwrap().left_mult(&st, &a).unwrap()
            .add(&UniversalOneForm::delta(&st, &a).unwrap().right_mult(&st, &b).unwrap());
        prop_assert!((lhs.coeffs - rhs.coeffs).norm() <= 1e-12);
    }

    #[test]
    fn two_form_identity_on_kernel_of_mult(seed in any::<u64>()) {
        let st = triple(seed, 1);
        let mut rng = random::case_rng(seed, 4);
        let w = UniversalOneForm::delta(&st, &random::random_element(&mut rng, st.d())).unwrap()
            .left_mult(&st, &random::random_element(&mut rng, st.d())).unwrap();
        prop_assert!(w.mult_residual(&st).unwrap() <= 1e-10);
        let (_, residual) = w.two_form_with_residual(&st).unwrap();
        prop_assert!(residual <= 1e-9);
    }

    #[test]
    fn sharp_is_an_involution_matching_adjoints(seed in any::<u64>()) {
        let st = triple(seed, 1);
        let mut rng = random::case_rng(seed, 5);
        let w = UniversalOneForm::delta(&st, &random::random_element(&mut rng, st.d())).unwrap()
            .left_mult(&st, &random::random_element(&mut rng, st.d())).unwrap();
        let s = w.sharp(&st).unwrap();
        prop_assert!((s.sharp(&st).unwrap().coeffs - &w.coeffs).norm() <= 1e-12);
        let pd = w.pi_d(&st).unwrap();
        prop_assert!(linalg::relative_distance(&s.pi_d(&st).unwrap(), &pd.adjoint()) <= 1e-12);
    }

    #[test]
    fn junk_sits_inside_omega2(seed in any::<u64>()) {
        let st = triple(seed, 2);
        let omega2 = forms::two_form_space(&st).unwrap();
        let junk = forms::junk_space(&st).unwrap();
        prop_assert!(junk.dim() <= omega2.dim());
        for j in junk.basis.elements() {
            prop_assert!(omega2.membership_residual(j).unwrap() <= 1e-8);
        }
        for w in forms::junk_kernel(&st).unwrap() {
            prop_assert!(w.pi_d(&st).unwrap().norm() <= 1e-8);
            prop_assert!(junk.membership_residual(&w.pi_d2(&st).unwrap()).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn modules_are_even_projections_with_compressed_grassmann(seed in any::<u64>()) {
        let sc = scenario(seed);
        let (st, module) = (&sc.triple, &sc.module);
        let p = module.projector();
        prop_assert!((p * p - p).norm() <= 1e-10);
        prop_assert!(linalg::self_adjoint_residual(p) <= 1e-10);
        let g = module.total_grading(st);
        prop_assert!((&g * p - p * &g).norm() <= 1e-10);
        let dt = module.lifted_dirac(st);
        prop_assert!((p * linalg::commutator(&dt, p) * p).norm() <= 1e-12);
        let op = fgp::grassmann_product_operator(st, module);
        prop_assert!(op.symmetry_residual() <= 1e-10);
        prop_assert!(op.oddness_residual() <= 1e-10);
    }

    #[test]
    fn free_module_has_flat_grassmann(seed in any::<u64>(), m in 1usize..=3) {
        let st = triple(seed, 1);
        let module = fgp::ProjectiveModule::free(&st, vec![1.0; m]);
        let dt = module.lifted_dirac(&st);
        prop_assert_eq!(linalg::commutator(&dt, module.projector()).norm(), 0.0);
    }

    #[test]
    fn curvature_routes_agree_with_structure(seed in any::<u64>()) {
        let sc = scenario(seed);
        let report = curvature::curvature_report(&sc.triple, &sc.module, &sc.connection).unwrap();
        prop_assert!(report.route_residual <= 1e-9);
        prop_assert!(report.evenness_residual <= 1e-10);
        prop_assert!(report.support_residual <= 1e-10);
        prop_assert!(report.symmetry_residual <= 1e-10);
        let op = fgp::product_operator(&sc.triple, &sc.module, &sc.connection).unwrap();
        prop_assert!(op.symmetry_residual() <= 1e-10);
        prop_assert!(op.oddness_residual() <= 1e-10);
    }

    #[test]
    fn curvature_depends_on_lift_only_through_junk(seed in any::<u64>()) {
        let sc = scenario(seed);
        let mut rng = random::case_rng(seed, 6);
        if let Some(lift) = random::junk_lift(&mut rng, &sc.triple, &sc.module, &sc.connection).unwrap() {
            let a = sc.connection.represent(&sc.triple, &sc.module).unwrap();
            let b = lift.represent(&sc.triple, &sc.module).unwrap();
            prop_assert!(linalg::relative_distance(&a.a_d, &b.a_d) <= 1e-10);
            let r1 = curvature::curvature_direct(&sc.triple, &sc.module, &sc.connection).unwrap();
            let r2 = curvature::curvature_direct(&sc.triple, &sc.module, &lift).unwrap();
            let junk = curvature::lifted_junk_space(&sc.triple, &sc.module).unwrap();
            prop_assert!(curvature::junk_coset_residual(&r1, &r2, &junk).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn correspondence_decomposes(seed in any::<u64>()) {
        let sc = scenario(seed);
        let mut rng = random::case_rng(seed, 7);
        let s = random::random_vertical(&mut rng, &sc.triple, &sc.module).unwrap();
        let r = curvature::correspondence_decomposition_residual(&sc.triple, &sc.module, &sc.connection, &s).unwrap();
        prop_assert!(r <= 1e-10);
        let zero = VerticalOperator::zero(&sc.triple, &sc.module);
        let r0 = curvature::correspondence_curvature(&sc.triple, &sc.module, &sc.connection, &zero).unwrap();
        let direct = curvature::curvature_direct(&sc.triple, &sc.module, &sc.connection).unwrap();
        prop_assert!((r0 - direct).norm() <= 1e-12);
    }

    #[test]
    fn external_product_defect_vanishes(a in any::<u64>(), b in any::<u64>()) {
        let (s1, s2) = (triple(a, 1), triple(b, 1));
        let defect = linalg::spectral_norm(&curvature::external_product_defect(&s1, &s2));
        let scale = (linalg::spectral_norm(s1.dirac()) + linalg::spectral_norm(s2.dirac())).powi(2);
        prop_assert!(defect <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn zero_connection_is_hermitian(seed in any::<u64>()) {
        let sc = scenario(seed);
        let zero = UniversalConnectionForm::zero(sc.module.m(), sc.triple.d());
        prop_assert!(fgp::hermitian_residual(&sc.triple, &sc.module, &zero).unwrap() <= 1e-10);
        prop_assert!(fgp::hermitian_residual(&sc.triple, &sc.module, &sc.connection).unwrap() <= 1e-10);
    }
}

fn frame() -> impl Strategy<Value = FramePoint> {
    (2usize..=5)
        .prop_flat_map(|dim_m| (Just(dim_m), 1..dim_m, prop::collection::vec(-2.0..2.0f64, dim_m * dim_m * dim_m)))
        .prop_map(|(dim_m, dim_f, raw)| {
            // antisymmetrise in the last two slots
            let mut c = vec![0.0; raw.len()];
            for k in 0..dim_m {
                for i in 0..dim_m {
                    for j in 0..dim_m {
                        let at = |i: usize, j: usize| raw[(k * dim_m + i) * dim_m + j];
                        c[(k * dim_m + i) * dim_m + j] = at(i, j) - at(j, i);
                    }
                }
            }
            FramePoint::new(dim_m, dim_f, c).expect("antisymmetric by construction")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn submersion_tensor_symmetries(fp in frame()) {
        let inv = SubmersionInvariants::compute(&fp);
        prop_assert_eq!(inv.s_pi_symmetry_residual(), 0.0);
        prop_assert_eq!(inv.omega_antisymmetry_residual(), 0.0);
    }

    #[test]
    fn mean_curvature_is_linear(fp in frame(), alpha in -3.0..3.0f64) {
        let k = submersion::mean_curvature(&fp);
        let ks = submersion::mean_curvature(&fp.scaled(alpha));
        for (a, b) in k.iter().zip(&ks) {
            prop_assert!((alpha * a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    for case in [harness::route_equality_case, harness::correspondence_case] {
        let seq = harness::Sweep::run("x", 5, 12, Execution::Sequential, case);
        let par = harness::Sweep::run("x", 5, 12, Execution::Parallel, case);
        let a: Vec<_> = seq.cases.iter().map(|c| (c.case, c.residual.to_bits())).collect();
        let b: Vec<_> = par.cases.iter().map(|c| (c.case, c.residual.to_bits())).collect();
        assert_eq!(a, b);
    }
}

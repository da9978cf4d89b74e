mod common;

use common::{mixed_shape, qubit, qubit_normalized, random_channel, rng};
use ergomix::algebra::random_element;
use ergomix::superop::{
    coords_of, random_stochastic_channel, unitary_conjugation, Positivity, SuperOperator,
};
use ergomix::{AlgebraShape, Element, ElementKind};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn kraus_identity_is_identity() {
    let shape = qubit();
    let k = Element::identity(&shape);
    let t = SuperOperator::from_kraus(&shape, &[k]).unwrap();
    let id = SuperOperator::identity(&shape);
    assert!((t.transfer() - id.transfer()).amax() < 1e-12);
}

#[test]
fn kraus_depolarizing_matches_constructor() {
    // Kraus set {√λ·1} ∪ {√((1−λ)/d)·e_jk} reproduces the depolarizing map
    // on the normalized-trace qubit.
    let shape = qubit_normalized();
    let lambda: f64 = 0.3;
    let mut kraus = vec![Element::identity(&shape).scale(lambda.sqrt())];
    let w = ((1.0 - lambda) / 2.0).sqrt();
    for j in 0..2 {
        for k in 0..2 {
            kraus.push(Element::matrix_unit(&shape, 0, j, k).unwrap().scale(w));
        }
    }
    let t = SuperOperator::from_kraus(&shape, &kraus).unwrap();
    let d = SuperOperator::from_depolarizing(2, lambda).unwrap();
    assert!((t.transfer() - d.transfer()).amax() < 1e-10);
}

#[test]
fn random_kraus_channel_is_stochastic() {
    let shape = mixed_shape();
    let mut r = rng(11);
    for seed in 0..10u64 {
        let t = random_stochastic_channel(&shape, 2 + (seed as usize % 3), &mut r).unwrap();
        assert!(t.stochastic_defect() < 1e-10);
    }
}

#[test]
fn classical_identity_and_rank_one() {
    let id = DMatrix::<f64>::identity(3, 3);
    let t = SuperOperator::from_classical(&id).unwrap();
    assert!((t.transfer() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);

    // All rows equal to π: every state maps to diag(π).
    let pi = [0.2, 0.5, 0.3];
    let p = DMatrix::from_fn(3, 3, |_, j| pi[j]);
    let t = SuperOperator::from_classical(&p).unwrap();
    let shape = t.shape().clone();
    let mut r = rng(12);
    let x = random_element(&shape, ElementKind::State, &mut r).unwrap();
    let y = t.apply_sa(&x).unwrap();
    for (k, &w) in pi.iter().enumerate() {
        assert!((y.block(k)[(0, 0)].re - w).abs() < 1e-12);
    }
}

#[test]
fn classical_rejects_bad_rows() {
    let p = DMatrix::from_row_slice(2, 2, &[0.6, 0.5, 0.2, 0.8]);
    assert!(SuperOperator::from_classical(&p).is_err());
    let p = DMatrix::from_row_slice(2, 2, &[1.1, -0.1, 0.2, 0.8]);
    assert!(SuperOperator::from_classical(&p).is_err());
}

#[test]
fn depolarizing_limits() {
    let t = SuperOperator::from_depolarizing(3, 1.0).unwrap();
    let id = SuperOperator::identity(t.shape());
    assert!((t.transfer() - id.transfer()).amax() < 1e-12);

    let t0 = SuperOperator::from_depolarizing(3, 0.0).unwrap();
    let shape = t0.shape().clone();
    let mut r = rng(13);
    let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
    let y = t0.apply_sa(&x).unwrap();
    let expect = Element::identity(&shape).scale(x.trace().re);
    assert!((&y - &expect).trace_norm() < 1e-10);
}

#[test]
fn rank_one_action() {
    let shape = mixed_shape();
    let mut r = rng(14);
    let y = random_element(&shape, ElementKind::State, &mut r).unwrap();
    let z = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
    let t = SuperOperator::rank_one(&y, &z).unwrap();
    for _ in 0..20 {
        let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
        let got = t.apply_sa(&x).unwrap();
        let expect = y.scale(x.mul(&z).unwrap().trace().re);
        assert!((&got - &expect).trace_norm() < 1e-12);
    }

    // T_y sends states to y and traceless elements to 0.
    let ty = SuperOperator::rank_one_to(&y).unwrap();
    let s = random_element(&shape, ElementKind::State, &mut r).unwrap();
    assert!((&ty.apply_sa(&s).unwrap() - &y).trace_norm() < 1e-10);
    let w = random_element(&shape, ElementKind::Traceless, &mut r).unwrap();
    assert!(ty.apply_sa(&w).unwrap().trace_norm() < 1e-10);
    assert!(ty.stochastic_defect() < 1e-10);
}

#[test]
fn rank_one_requires_self_adjoint() {
    let shape = qubit();
    let e = Element::matrix_unit(&shape, 0, 0, 1).unwrap();
    let one = Element::identity(&shape);
    assert!(SuperOperator::rank_one(&e, &one).is_err());
    assert!(SuperOperator::rank_one(&one, &e).is_err());
}

#[test]
fn power_and_compose_laws() {
    let shape = qubit();
    let t = random_channel(&shape, 21);
    let id = SuperOperator::identity(&shape);
    assert!((t.power(0).transfer() - id.transfer()).amax() < 1e-12);
    assert!((t.power(1).transfer() - t.transfer()).amax() < 1e-12);
    for (m, n) in [(1usize, 2usize), (2, 3), (4, 4)] {
        let lhs = t.power(m + n);
        let rhs = t.power(m).compose(&t.power(n)).unwrap();
        assert!((lhs.transfer() - rhs.transfer()).amax() < 1e-10);
    }
}

#[test]
fn depolarizing_power_scales_lambda() {
    let t = SuperOperator::from_depolarizing(2, 0.7).unwrap();
    let t3 = t.power(3);
    let expect = SuperOperator::from_depolarizing(2, 0.7f64.powi(3)).unwrap();
    assert!((t3.transfer() - expect.transfer()).amax() < 1e-12);
}

#[test]
fn compose_rank_one_absorbs_stochastic() {
    let shape = qubit();
    let mut r = rng(15);
    let y = random_element(&shape, ElementKind::State, &mut r).unwrap();
    let ty = SuperOperator::rank_one_to(&y).unwrap();
    let s = random_channel(&shape, 22);
    let t = ty.compose(&s).unwrap();
    let x = random_element(&shape, ElementKind::State, &mut r).unwrap();
    assert!((&t.apply_sa(&x).unwrap() - &y).trace_norm() < 1e-9);
}

#[test]
fn transfer_representation_is_faithful() {
    // Kraus-native evaluation agrees with the transfer-matrix route.
    let shape = mixed_shape();
    let mut r = rng(16);
    for _ in 0..50 {
        let kraus: Vec<Element> = (0..2)
            .map(|_| random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap())
            .collect();
        let t = SuperOperator::from_kraus(&shape, &kraus).unwrap();
        for _ in 0..20 {
            let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
            let via_transfer = t.apply_sa(&x).unwrap();
            let mut native = Element::zero(&shape);
            for k in &kraus {
                native = &native + &k.mul(&x).unwrap().mul(&k.adjoint()).unwrap();
            }
            assert!((&via_transfer - &native).trace_norm() < 1e-10);
        }
    }
}

#[test]
fn stochastic_maps_preserve_trace_functional() {
    let shape = mixed_shape();
    for seed in 30..40u64 {
        let t = random_channel(&shape, seed);
        let mut r = rng(seed);
        for _ in 0..20 {
            let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
            let y = t.apply_sa(&x).unwrap();
            assert!((y.trace().re - x.trace().re).abs() < 1e-10);
        }
    }
}

#[test]
fn kraus_outputs_are_positive() {
    let shape = qubit();
    let t = random_channel(&shape, 41);
    let mut r = rng(42);
    for _ in 0..1000 {
        let x = random_element(&shape, ElementKind::Positive, &mut r).unwrap();
        assert!(t.apply_sa(&x).unwrap().is_positive(1e-9));
    }
}

#[test]
fn apply_extends_by_linearity() {
    let shape = qubit();
    let t = random_channel(&shape, 43);
    let mut r = rng(44);
    let x1 = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
    let x2 = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
    let x = &x1 + &x2.scale_complex(c(0.0, 1.0));
    let got = t.apply(&x).unwrap();
    let expect = &t.apply_sa(&x1).unwrap() + &t.apply_sa(&x2).unwrap().scale_complex(c(0.0, 1.0));
    assert!((&got - &expect).trace_norm() < 1e-10);
}

#[test]
fn predicates_identity() {
    let shape = qubit();
    let t = SuperOperator::identity(&shape);
    let p = t.check_predicates(7, 500);
    assert!(matches!(p.positive, Positivity::Certified { .. }));
    assert!(p.stochastic);
    assert!(p.l1_contraction);
    assert!((p.induced_norm - 1.0).abs() < 1e-8);
}

#[test]
fn predicates_scaled_transfer() {
    let shape = qubit();
    let t = SuperOperator::identity(&shape);
    let scaled = SuperOperator::from_transfer(shape.clone(), t.transfer() * 2.0).unwrap();
    let p = scaled.check_predicates(7, 200);
    assert!(!p.l1_contraction);
    assert!((p.induced_norm - 2.0).abs() < 1e-7);
    assert!(!p.stochastic);
}

#[test]
fn predicates_transposition_map() {
    // The transpose is positive but not completely positive: sampling finds
    // no witness, and no CP certificate is claimed.
    let shape = qubit();
    let t = SuperOperator::from_action(
        &shape,
        |x| {
            Element::from_blocks(shape.clone(), vec![x.block(0).transpose()]).unwrap()
        },
        ergomix::superop::Provenance::Transfer,
        ergomix::superop::PositivityHint::Unknown,
    )
    .unwrap();
    let p = t.check_predicates(7, 2000);
    assert!(matches!(p.positive, Positivity::Unknown { .. }));
    assert!(p.stochastic);

    // Its Choi matrix is genuinely not positive semidefinite.
    let choi = t.choi_matrix();
    let min = choi.symmetric_eigen().eigenvalues.min();
    assert!(min < -0.5);
}

#[test]
fn depolarizing_between_positive_and_cp_stays_unknown() {
    // λ ∈ (−1/(d−1), −1/(d²−1)) is positive but not completely positive:
    // no CP certificate, and sampling cannot find a witness.
    let t = SuperOperator::from_depolarizing(2, -0.9).unwrap();
    let p = t.check_predicates(7, 2000);
    assert!(matches!(p.positive, Positivity::Unknown { .. }));
    let choi_min = t.choi_matrix().symmetric_eigen().eigenvalues.min();
    assert!(choi_min < -1e-6);
}

#[test]
fn depolarizing_outside_positivity_range_refuted() {
    let t = SuperOperator::from_depolarizing(2, -1.5).unwrap();
    let p = t.check_predicates(7, 2000);
    match p.positive {
        Positivity::Refuted { witness, image_min_eigenvalue } => {
            assert!(image_min_eigenvalue < -1e-6);
            // Witness is re-checkable.
            let img = t.apply_sa(&witness).unwrap();
            assert!(witness.is_positive(1e-9));
            assert!(!img.is_positive(1e-9));
        }
        other => panic!("expected a positivity witness, got {other:?}"),
    }
}

#[test]
fn unitary_conjugation_is_isometric() {
    let shape = qubit();
    let mut r = rng(45);
    let u = ergomix::algebra::haar_unitary(2, &mut r);
    let t = unitary_conjugation(&shape, &u).unwrap();
    for _ in 0..50 {
        let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
        assert!((t.apply_sa(&x).unwrap().trace_norm() - x.trace_norm()).abs() < 1e-10);
    }
}

#[test]
fn coordinates_are_isometric_for_the_trace_inner_product() {
    let shape = AlgebraShape::new([(2, 0.5), (3, 1.5)]).unwrap();
    let mut r = rng(46);
    for _ in 0..100 {
        let x = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
        let y = random_element(&shape, ElementKind::SelfAdjoint, &mut r).unwrap();
        let tau_xy = x.mul(&y).unwrap().trace().re;
        let dot = coords_of(&x).dot(&coords_of(&y));
        assert!((tau_xy - dot).abs() < 1e-10);
    }
}

#[test]
fn shape_mismatch_errors() {
    let a = SuperOperator::identity(&qubit());
    let b = SuperOperator::identity(&qutrit_shape());
    assert!(a.compose(&b).is_err());
    let x = Element::identity(&qutrit_shape());
    assert!(a.apply_sa(&x).is_err());
}

fn qutrit_shape() -> AlgebraShape {
    AlgebraShape::single(3, 1.0).unwrap()
}

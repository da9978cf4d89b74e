mod common;

use common::rng;
use ergomix::algebra::random_element;
use ergomix::mixing::{dichotomy, DichotomyOutcome, MixingOptions};
use ergomix::shift_demo::{
    build, escape_profile, no_fixed_point_certificate, smoothing_degeneration, TraceMode,
};
use ergomix::{Element, ElementKind};

#[test]
fn shift_moves_diagonal_units() {
    let s = build(4, TraceMode::UnitWeights).unwrap();
    let shape = s.op.shape().clone();
    let e11 = Element::matrix_unit(&shape, 0, 0, 0).unwrap();
    let e22 = Element::matrix_unit(&shape, 0, 1, 1).unwrap();
    assert!((&s.op.apply_sa(&e11).unwrap() - &e22).trace_norm() < 1e-12);

    // Off-diagonals are killed by the conditional expectation.
    let e12 = Element::matrix_unit(&shape, 0, 0, 1).unwrap();
    assert!(s.op.apply(&e12).unwrap().trace_norm() < 1e-12);
}

#[test]
fn shift_requires_dim_two() {
    assert!(build(1, TraceMode::UnitWeights).is_err());
    assert!(build(2, TraceMode::UnitWeights).is_ok());
}

#[test]
fn escape_profile_d4() {
    let s = build(4, TraceMode::UnitWeights).unwrap();
    let profile = escape_profile(&s, 3).unwrap();
    let expect = [1.0, 1.0, 1.0, 0.0];
    for (got, want) in profile.iter().zip(expect) {
        assert!((got - want).abs() < 1e-10, "profile {profile:?}");
    }
}

#[test]
fn escape_profile_is_monotone_and_mixed_state_decays_linearly() {
    let d = 8;
    let s = build(d, TraceMode::UnitWeights).unwrap();
    let shape = s.op.shape().clone();

    let profile = escape_profile(&s, 2 * d).unwrap();
    for w in profile.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }

    // Maximally mixed diagonal state: after the first step the edge slots
    // are flushed, then one slot's worth of mass exits per step.
    let mixed = Element::identity(&shape).scale(1.0 / d as f64);
    let norms = ergomix::stability::orbit_norms(&s.op, &mixed, d).unwrap();
    assert!((norms[0] - 1.0).abs() < 1e-12);
    for n in 1..d {
        let expect = (d - 1 - n) as f64 / d as f64;
        assert!((norms[n] - expect).abs() < 1e-10, "n={n} got {}", norms[n]);
    }
    assert!(norms[d] < 1e-12);
}

#[test]
fn nilpotency_and_certificate() {
    for d in [2usize, 4, 8, 16, 32, 64] {
        let s = build(d, TraceMode::UnitWeights).unwrap();
        let cert = no_fixed_point_certificate(&s, 17).unwrap();
        assert_eq!(cert.nilpotency_index, (d - 1).max(1));
        assert!(cert.lower_bound > 0.0);
        assert!(cert.min_displacement + 1e-9 >= cert.lower_bound);
        assert!(cert.spectral_radius < 1.0);

        // T^d is exactly zero on the whole algebra (full-matrix check kept
        // to sizes where it is cheap).
        if d <= 16 {
            let td = s.op.power(d);
            assert!(td.transfer().amax() < 1e-12);
        }
    }
}

#[test]
fn trace_monotone_and_positive_orbits() {
    let d = 6;
    let s = build(d, TraceMode::UnitWeights).unwrap();
    let shape = s.op.shape().clone();
    let mut r = rng(18);
    for _ in 0..20 {
        let y = random_element(&shape, ElementKind::Positive, &mut r).unwrap();
        let mut cur = y.clone();
        for _ in 0..(2 * d) {
            let next = s.op.apply_sa(&cur).unwrap();
            assert!(next.is_positive(1e-9));
            assert!(next.trace().re <= cur.trace().re + 1e-10);
            cur = next;
        }
    }

    // Equality of traces holds exactly for mass supported away from the edge.
    let e11 = Element::matrix_unit(&shape, 0, 0, 0).unwrap();
    let moved = s.op.apply_sa(&e11).unwrap();
    assert!((moved.trace().re - e11.trace().re).abs() < 1e-12);
}

#[test]
fn degeneration_table_scales_as_inverse_dimension() {
    let rows = smoothing_degeneration(&[4, 8, 16, 64], 0.5).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!((row.delta_max - 1.0 / row.dim as f64).abs() < 1e-12);
    }
    // Monotone in d.
    for w in rows.windows(2) {
        assert!(w[1].delta_max <= w[0].delta_max);
    }
    assert!(smoothing_degeneration(&[4], 1.0).is_err());
    assert!(smoothing_degeneration(&[4], 0.0).is_err());
}

#[test]
fn shift_orbit_vanishes_in_dichotomy() {
    let s = build(6, TraceMode::UnitWeights).unwrap();
    let shape = s.op.shape().clone();
    let e11 = Element::matrix_unit(&shape, 0, 0, 0).unwrap();
    match dichotomy(&s.op, &e11, &MixingOptions::with_seed(19)).unwrap() {
        DichotomyOutcome::Vanishes { final_norm } => assert!(final_norm < 1e-12),
        DichotomyOutcome::FixedState { .. } => panic!("the truncated shift has no fixed state"),
    }
}

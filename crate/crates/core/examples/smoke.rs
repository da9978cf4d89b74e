use ergomix::dobrushin::{self, OptimizerConfig};
use ergomix::superop::SuperOperator;
use ergomix::{AlgebraShape, Element};

fn main() -> ergomix::Result<()> {
    let cfg = OptimizerConfig::with_seed(7);

    // depolarizing d=2, lambda=0.5: alpha_bar should be 0.5
    let t = SuperOperator::from_depolarizing(2, 0.5)?;
    let rep = dobrushin::dobrushin_alpha_bar(&t, &cfg);
    println!("depol(2,0.5): alpha_bar={:.9} oracle_agrees={:?} oracle={:?}",
        rep.alpha_bar, rep.stats.oracle_agrees, rep.stats.oracle_value);

    // depolarizing d=3, lambda=0.9
    let t = SuperOperator::from_depolarizing(3, 0.9)?;
    let rep = dobrushin::dobrushin_alpha_bar(&t, &cfg);
    println!("depol(3,0.9): alpha_bar={:.9}", rep.alpha_bar);

    // classical 2-state chain
    let p = nalgebra::DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
    let t = SuperOperator::from_classical(&p)?;
    let rep = dobrushin::dobrushin_alpha_bar(&t, &cfg);
    println!("classical: alpha_bar={:.9} (expect 0.7)", rep.alpha_bar);

    // identity on qubit: alpha_bar = 1
    let shape = AlgebraShape::single(2, 1.0)?;
    let t = SuperOperator::identity(&shape);
    let rep = dobrushin::dobrushin_alpha_bar(&t, &cfg);
    println!("identity: alpha_bar={:.9}", rep.alpha_bar);

    // rank-one T_y: alpha_bar = 0
    let y = Element::identity(&shape).scale(0.5);
    let t = SuperOperator::rank_one_to(&y)?;
    let rep = dobrushin::dobrushin_alpha_bar(&t, &cfg);
    println!("rank_one: alpha_bar={:.3e}", rep.alpha_bar);

    // trace norm sanity
    let x = Element::matrix_unit(&shape, 0, 0, 1)?;
    println!("||e01||_1 = {:.6} (expect 1.0 with unit weight)", x.trace_norm());

    // shift demo profile d=4
    let s = ergomix::shift_demo::build(4, ergomix::shift_demo::TraceMode::UnitWeights)?;
    println!("shift d=4 profile: {:?}", ergomix::shift_demo::escape_profile(&s, 4)?);
    let cert = ergomix::shift_demo::no_fixed_point_certificate(&s, 11)?;
    println!("shift cert: m={} lb={:.4} min_disp={:.4} sr={:.3e}",
        cert.nilpotency_index, cert.lower_bound, cert.min_displacement, cert.spectral_radius);

    // stability of depol(2,0.5)
    let t = SuperOperator::from_depolarizing(2, 0.5)?;
    let opts = ergomix::stability::StabilityOptions::fast(3);
    let srep = ergomix::stability::detect_uniform_stability(&t, &opts)?;
    println!("stability verdict: {:?} violations={:?}", srep.verdict, srep.violations);
    for (n, d) in srep.distance_trace.iter().take(6) {
        println!("  n={} dist={:.9} (expect 0.5^n for n>=1)", n, d);
    }

    // mixing classification
    let mopts = ergomix::mixing::MixingOptions::with_seed(5);
    let mrep = ergomix::mixing::classify_mixing(&t, &mopts)?;
    println!("mixing: rho_bar={:?} sr={:?} empirical={:.3e}",
        mrep.rho_bar, mrep.traceless_spectral_radius, mrep.empirical_estimate);

    let u = nalgebra::DMatrix::from_row_slice(2, 2, &[
        num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::from_polar(1.0, 1.0)]);
    let tu = ergomix::superop::unitary_conjugation(&shape, &u)?;
    let mrep = ergomix::mixing::classify_mixing(&tu, &mopts)?;
    println!("unitary mixing: rho_bar={:?} empirical={:.6}", mrep.rho_bar, mrep.empirical_estimate);

    Ok(())
}

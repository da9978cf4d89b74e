//! Complete mixing, smoothing estimates, and the zero/one dichotomy for the
//! asymptotic ergodicity coefficient.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{self, Element, ElementKind};
use crate::dobrushin::{self, traceless_restriction, OptimizerConfig};
use crate::error::{Error, Result};
use crate::superop::{
    coords_of, element_from_coords, matrix_power, trace_norm_of_coords, SuperOperator,
};

#[derive(Clone, Debug, Serialize)]
pub struct MixingOptions {
    /// Horizon for the empirical estimate of the asymptotic coefficient.
    pub empirical_horizon: usize,
    /// Number of extreme-point pairs sampled for the empirical estimate.
    pub empirical_pairs: usize,
    pub dichotomy_horizon: usize,
    pub residual_tol: f64,
    pub smoothing_horizon: usize,
    /// How many orbit elements contribute spectral-projector candidates.
    pub smoothing_orbit_candidates: usize,
    pub smoothing_random_projectors: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions {
            empirical_horizon: 200,
            empirical_pairs: 64,
            dichotomy_horizon: 500,
            residual_tol: 1e-8,
            smoothing_horizon: 150,
            smoothing_orbit_candidates: 20,
            smoothing_random_projectors: 50,
            seed: 0,
            optimizer: OptimizerConfig::fast(0),
        }
    }
}

impl MixingOptions {
    pub fn with_seed(seed: u64) -> Self {
        MixingOptions { seed, optimizer: OptimizerConfig::fast(seed), ..Default::default() }
    }
}

/// Value of `lim ᾱ(Tⁿ)`. For stochastic maps the limit is 0 or 1 and is
/// decided spectrally; otherwise only an empirical estimate is reported.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", content = "value")]
pub enum RhoBarClass {
    Zero,
    One,
    Estimate(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMethod {
    Spectral,
    Empirical,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub rho_bar: RhoBarClass,
    pub method: MixingMethod,
    /// `lim ‖Tⁿ‖` (1 for stochastic maps).
    pub lim_norm: f64,
    /// `lim ‖Tⁿ‖ − lim ᾱ(Tⁿ)`.
    pub rho: f64,
    /// Spectral radius of the transfer matrix restricted to the traceless
    /// subspace (stochastic maps only).
    pub traceless_spectral_radius: Option<f64>,
    /// Moduli of the traceless-subspace spectrum, descending.
    pub traceless_spectrum: Option<Vec<f64>>,
    /// `max ‖T^N(u − v)‖₁ / 2` over sampled orthogonal pure-state pairs.
    pub empirical_estimate: f64,
    pub empirical_horizon: usize,
}

/// Decide `lim ᾱ(Tⁿ) ∈ {0, 1}` for a stochastic contraction, or estimate it
/// empirically otherwise.
pub fn classify_mixing(t: &SuperOperator, opts: &MixingOptions) -> Result<MixingReport> {
    let stochastic = t.is_trace_preserving(algebra::DEFAULT_TOL);
    let empirical = empirical_alpha_bar_limit(t, opts)?;
    if stochastic {
        let (a_x, _) = traceless_restriction(t);
        let mut moduli: Vec<f64> = a_x
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sr = moduli.first().copied().unwrap_or(0.0);
        let rho_bar = if sr < 1.0 - 1e-9 { RhoBarClass::Zero } else { RhoBarClass::One };
        let rho = match rho_bar {
            RhoBarClass::Zero => 1.0,
            _ => 0.0,
        };
        Ok(MixingReport {
            rho_bar,
            method: MixingMethod::Spectral,
            lim_norm: 1.0,
            rho,
            traceless_spectral_radius: Some(sr),
            traceless_spectrum: Some(moduli),
            empirical_estimate: empirical,
            empirical_horizon: opts.empirical_horizon,
        })
    } else {
        let tn = t.power(opts.empirical_horizon);
        let (lim_norm, _) = dobrushin::induced_l1_norm(&tn, &opts.optimizer);
        Ok(MixingReport {
            rho_bar: RhoBarClass::Estimate(empirical),
            method: MixingMethod::Empirical,
            lim_norm,
            rho: lim_norm - empirical,
            traceless_spectral_radius: None,
            traceless_spectrum: None,
            empirical_estimate: empirical,
            empirical_horizon: opts.empirical_horizon,
        })
    }
}

fn empirical_alpha_bar_limit(t: &SuperOperator, opts: &MixingOptions) -> Result<f64> {
    let shape = t.shape();
    let a_n = matrix_power(t.transfer(), opts.empirical_horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x31c5);
    let mut best = 0.0f64;
    for _ in 0..opts.empirical_pairs {
        let u = algebra::random_element(shape, ElementKind::PureState { block: None }, &mut rng)?;
        let v = algebra::random_element(shape, ElementKind::PureState { block: None }, &mut rng)?;
        let d = &u - &v;
        let denom = d.trace_norm();
        if denom < 1e-12 {
            continue;
        }
        let c = &a_n * coords_of(&d);
        let val = trace_norm_of_coords(shape, &c) / denom;
        best = best.max(val);
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticCheck {
    /// `‖T^N x‖₁` at the empirical horizon.
    pub lhs: f64,
    /// `ρ̄·‖x‖₁ + ρ·|τ(x)|` with the classified coefficients.
    pub rhs: f64,
    pub slack: f64,
}

/// Check the asymptotic bound `lim ‖Tⁿx‖₁ ≤ ρ̄·‖x‖₁ + ρ·|τ(x)|` on a single
/// self-adjoint element.
pub fn asymptotic_inequality_check(
    t: &SuperOperator,
    x: &Element,
    report: &MixingReport,
    opts: &MixingOptions,
) -> Result<AsymptoticCheck> {
    if x.shape() != t.shape() {
        return Err(Error::shape("element lives on a different algebra"));
    }
    if !x.is_self_adjoint(algebra::DEFAULT_TOL) {
        return Err(Error::NotSelfAdjoint {
            defect: x.self_adjoint_defect(),
            tol: algebra::DEFAULT_TOL,
        });
    }
    let a_n = matrix_power(t.transfer(), opts.empirical_horizon);
    let lhs = trace_norm_of_coords(t.shape(), &(&a_n * coords_of(x)));
    let rho_bar = match report.rho_bar {
        RhoBarClass::Zero => 0.0,
        RhoBarClass::One => 1.0,
        RhoBarClass::Estimate(v) => v,
    };
    let rhs = rho_bar * x.trace_norm() + report.rho * x.trace().re.abs();
    Ok(AsymptoticCheck { lhs, rhs, slack: rhs - lhs })
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothingRow {
    pub epsilon: f64,
    /// Certified threshold: every projector `p` with `τ(p) < δ` satisfies
    /// `sup_n τ(p·Tⁿx) < ε`.
    pub delta_certified: f64,
    /// Smallest `τ(p)` among sampled projectors that violate `τ(p·Tⁿx) < ε`;
    /// an upper bound on the best possible `δ`.
    pub delta_upper: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothingOutcome {
    Holds {
        rows: Vec<SmoothingRow>,
        /// Uniform bound on `‖Tⁿx‖_∞`, so that `δ = ε/C` certifies each row.
        constant: f64,
    },
    Fails {
        epsilon: f64,
    },
}

/// Certify the smoothing property of the orbit of a positive element: for
/// each `ε` produce a `δ` such that `τ(p) < δ` forces `τ(p·Tⁿx) < ε` for all
/// `n`, together with an adversarial upper bound from sampled projectors.
///
/// `τ(p·Tⁿx) ≤ τ(p)·‖Tⁿx‖_∞`, so any uniform sup-norm bound `C` on the orbit
/// yields `δ = ε/C`. The tail beyond the horizon is covered by
/// `‖Tⁿx‖_∞ ≤ ‖Tⁿx‖₁/μ_min ≤ ‖T^H x‖₁/μ_min` for `n ≥ H` (the trace norm is
/// non-increasing along a contraction orbit).
pub fn smoothing_check(
    t: &SuperOperator,
    x: &Element,
    epsilons: &[f64],
    opts: &MixingOptions,
) -> Result<SmoothingOutcome> {
    if x.shape() != t.shape() {
        return Err(Error::shape("element lives on a different algebra"));
    }
    if !x.is_positive(1e-9) {
        return Err(Error::invalid("smoothing check requires a positive element"));
    }
    if t.check_predicates(opts.seed, 200).induced_norm > 1.0 + 1e-7 {
        return Err(Error::invalid("smoothing check requires a contraction"));
    }
    let shape = t.shape();
    let total = shape.total_trace();

    let mut orbit_coords = Vec::with_capacity(opts.smoothing_horizon + 1);
    let mut c = coords_of(x);
    let mut sup_bound = 0.0f64;
    let mut last_l1 = 0.0;
    for n in 0..=opts.smoothing_horizon {
        let e = element_from_coords(shape, &c);
        sup_bound = sup_bound.max(e.operator_norm());
        last_l1 = e.trace_norm();
        orbit_coords.push(c.clone());
        if n < opts.smoothing_horizon {
            c = t.transfer() * &c;
        }
    }
    let constant = sup_bound.max(last_l1 / shape.min_weight());
    if !constant.is_finite() || constant <= 0.0 {
        return Err(Error::Numerical {
            context: "orbit sup-norm bound degenerated".into(),
            residual: constant,
        });
    }

    // Adversarial candidates: nested spectral projectors of early orbit
    // elements plus random projectors.
    let mut candidates: Vec<Element> = Vec::new();
    for c_n in orbit_coords.iter().take(opts.smoothing_orbit_candidates + 1) {
        let e = element_from_coords(shape, c_n);
        let mut lines = e.spectral_projectors(1e-9)?;
        lines.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut acc = Element::zero(shape);
        for (_, p) in lines {
            acc = &acc + p.element();
            candidates.push(acc.clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5307);
    for _ in 0..opts.smoothing_random_projectors {
        match algebra::random_element(
            shape,
            ElementKind::ProjectorBelowDelta(total),
            &mut rng,
        ) {
            Ok(p) => candidates.push(p),
            Err(Error::Infeasible(_)) => break,
            Err(e) => return Err(e),
        }
    }

    // τ(p·Tⁿx) is an inner product of coordinate vectors.
    let mut measured: Vec<(f64, f64)> = Vec::new(); // (τ(p), sup_n τ(p·Tⁿx))
    for p in &candidates {
        let cp = coords_of(p);
        let tau_p = p.trace().re;
        if tau_p < 1e-12 {
            continue;
        }
        let mut sup = f64::NEG_INFINITY;
        for c_n in &orbit_coords {
            sup = sup.max(cp.dot(c_n));
        }
        measured.push((tau_p, sup));
    }

    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if eps <= 0.0 {
            return Err(Error::invalid("ε must be positive"));
        }
        let delta_certified = (eps / constant).min(total);
        let delta_upper = measured
            .iter()
            .filter(|(_, sup)| *sup >= eps)
            .map(|(tau, _)| *tau)
            .fold(total, f64::min);
        if delta_certified > delta_upper + 1e-9 {
            return Ok(SmoothingOutcome::Fails { epsilon: eps });
        }
        rows.push(SmoothingRow { epsilon: eps, delta_certified, delta_upper });
    }
    Ok(SmoothingOutcome::Holds { rows, constant })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DichotomyOutcome {
    /// `‖Tⁿy‖₁ → 0`.
    Vanishes { final_norm: f64 },
    /// The Cesàro limit of the orbit is a fixed state.
    FixedState { state: Element, residual: f64 },
}

/// Orbit dichotomy for a positive element under a completely mixing
/// contraction: either the orbit vanishes in trace norm or its Cesàro average
/// converges to a fixed positive element of unit trace norm.
pub fn dichotomy(t: &SuperOperator, y: &Element, opts: &MixingOptions) -> Result<DichotomyOutcome> {
    if y.shape() != t.shape() {
        return Err(Error::shape("element lives on a different algebra"));
    }
    if !y.is_positive(1e-9) {
        return Err(Error::invalid("dichotomy requires a positive element"));
    }
    let shape = t.shape();
    let mut c = coords_of(y);
    for _ in 0..opts.dichotomy_horizon {
        c = t.transfer() * &c;
    }
    let final_norm = trace_norm_of_coords(shape, &c);
    if final_norm < opts.residual_tol {
        return Ok(DichotomyOutcome::Vanishes { final_norm });
    }

    let n = shape.sa_dim();
    let mut b = (t.transfer() + DMatrix::<f64>::identity(n, n)) * 0.5;
    for _ in 0..45 {
        b = &b * &b;
    }
    let z_coords = &b * coords_of(y);
    let mut z = element_from_coords(shape, &z_coords);
    let norm_z = z.trace_norm();
    if norm_z < opts.residual_tol {
        return Err(Error::Numerical {
            context: "orbit norm stabilized but the Cesàro average vanished".into(),
            residual: norm_z,
        });
    }
    z = z.scale(1.0 / norm_z);
    let residual = (&t.apply_sa(&z)? - &z).trace_norm();
    if residual > opts.residual_tol {
        return Err(Error::Numerical {
            context: "Cesàro average is not fixed".into(),
            residual,
        });
    }
    if !z.is_positive(1e-8) {
        return Err(Error::Numerical {
            context: "Cesàro average is not positive".into(),
            residual: z.min_eigenvalue(1e-8).unwrap_or(f64::NAN),
        });
    }
    Ok(DichotomyOutcome::FixedState { state: z, residual })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrongLimit {
    Zero,
    State { state: Element },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrongVerdict {
    StronglyStable,
    NotStronglyStable { reason: String },
    /// The classification and the direct orbit check disagree; reported
    /// as-is rather than reconciled.
    Inconsistent { max_error: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongStabilityReport {
    pub verdict: StrongVerdict,
    pub mixing: MixingReport,
    pub smoothing_holds: bool,
    pub limit: Option<StrongLimit>,
    /// Max over sampled x of `‖T^N x − τ(x)·y‖₁` against the claimed limit.
    pub max_error: Option<f64>,
}

/// Full strong-stability pipeline: classify mixing, certify smoothing on a
/// sampled state, run the dichotomy to identify the limit map, then verify
/// `Tⁿx → τ(x)·y` on random self-adjoint elements.
pub fn strong_stability(t: &SuperOperator, opts: &MixingOptions) -> Result<StrongStabilityReport> {
    let preds = t.check_predicates(opts.seed, 500);
    if preds.induced_norm > 1.0 + 1e-6 {
        return Err(Error::invalid("strong stability requires a contraction"));
    }
    let mixing = classify_mixing(t, opts)?;
    let shape = t.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57ab);
    let h = algebra::random_element(shape, ElementKind::State, &mut rng)?;
    let smoothing = smoothing_check(t, &h, &[0.5, 0.1, 0.01], opts)?;
    let smoothing_holds = matches!(smoothing, SmoothingOutcome::Holds { .. });

    let completely_mixing = match mixing.rho_bar {
        RhoBarClass::Zero => true,
        RhoBarClass::One => false,
        RhoBarClass::Estimate(v) => v < 1e-3,
    };
    if !completely_mixing {
        return Ok(StrongStabilityReport {
            verdict: StrongVerdict::NotStronglyStable {
                reason: "the asymptotic ergodicity coefficient does not vanish".into(),
            },
            mixing,
            smoothing_holds,
            limit: None,
            max_error: None,
        });
    }

    let limit = match dichotomy(t, &h, opts)? {
        DichotomyOutcome::Vanishes { .. } => StrongLimit::Zero,
        DichotomyOutcome::FixedState { state, .. } => StrongLimit::State { state },
    };
    let limit_coords = match &limit {
        StrongLimit::Zero => None,
        StrongLimit::State { state } => Some(coords_of(state)),
    };

    let a_n = matrix_power(t.transfer(), opts.dichotomy_horizon);
    let mut max_error = 0.0f64;
    for _ in 0..100 {
        let x = algebra::random_element(shape, ElementKind::SelfAdjoint, &mut rng)?;
        let mut c = &a_n * coords_of(&x);
        if let Some(ly) = &limit_coords {
            c -= ly * x.trace().re;
        }
        max_error = max_error.max(trace_norm_of_coords(shape, &c));
    }
    let verdict = if max_error < 1e-6 {
        StrongVerdict::StronglyStable
    } else {
        StrongVerdict::Inconsistent { max_error }
    };
    Ok(StrongStabilityReport {
        verdict,
        mixing,
        smoothing_holds,
        limit: Some(limit),
        max_error: Some(max_error),
    })
}

//! Uniform asymptotic stability: find `n₀` with `ᾱ(T^{n₀}) < 1`, extract the
//! fixed state `y`, and audit the geometric bound
//! `‖Tⁿ − T_y‖ ≤ 2·γ^⌊n/n₀⌋`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{self, Element};
use crate::dobrushin::{self, OptimizerConfig};
use crate::error::{Error, Result};
use crate::superop::{coords_of, element_from_coords, trace_norm_of_coords, SuperOperator};

#[derive(Clone, Debug, Serialize)]
pub struct StabilityOptions {
    /// Largest power probed for `ᾱ(T^{n₀}) < 1`.
    pub n_max: usize,
    /// Detection threshold: stability is claimed when `ᾱ(T^{n₀}) ≤ 1 − ρ_min`.
    pub rho_min: f64,
    /// Audit horizon (steps), stopping early once the distance drops below
    /// `distance_floor`.
    pub horizon: usize,
    pub distance_floor: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            n_max: 8,
            rho_min: 1e-3,
            horizon: 50,
            distance_floor: 1e-10,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl StabilityOptions {
    pub fn with_seed(seed: u64) -> Self {
        StabilityOptions { optimizer: OptimizerConfig::with_seed(seed), ..Default::default() }
    }

    pub fn fast(seed: u64) -> Self {
        StabilityOptions { optimizer: OptimizerConfig::fast(seed), ..Default::default() }
    }
}

/// `ᾱ` estimates are lower bounds, so failure to certify never claims
/// instability.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    UniformlyStable { n0: usize, gamma: f64 },
    Undetermined { n_max: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub fixed_point: Option<Element>,
    pub fixed_point_residual: Option<f64>,
    /// False when the fixed space of the transfer matrix has dimension > 1;
    /// the reported state is then the Cesàro limit from the maximally mixed
    /// state.
    pub fixed_point_unique: Option<bool>,
    /// `(n, ‖Tⁿ − T_y‖)` induced distances.
    pub distance_trace: Vec<(usize, f64)>,
    /// `(n, 2·γ^⌊n/n₀⌋)`.
    pub bound_trace: Vec<(usize, f64)>,
    /// Steps where the distance exceeded the bound beyond tolerance.
    pub violations: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointResult {
    pub state: Element,
    pub residual: f64,
    pub unique: bool,
}

/// Detect uniform asymptotic stability of a stochastic operator.
///
/// Probes `n₀` on a geometric schedule (1, 2, 4, 8) before scanning the
/// remaining values up to `n_max`; `ᾱ` is submultiplicative for stochastic
/// maps so small `n₀` usually suffices.
pub fn detect_uniform_stability(
    t: &SuperOperator,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    if !t.is_trace_preserving(algebra::DEFAULT_TOL) {
        return Err(Error::NotStochastic { defect: t.stochastic_defect() });
    }
    let mut schedule: Vec<usize> = [1usize, 2, 4, 8]
        .into_iter()
        .filter(|&n| n <= opts.n_max)
        .collect();
    for n in 1..=opts.n_max {
        if !schedule.contains(&n) {
            schedule.push(n);
        }
    }

    for n0 in schedule {
        let tn = t.power(n0);
        let alpha_bar = dobrushin::alpha_bar_value(&tn, &opts.optimizer);
        if alpha_bar <= 1.0 - opts.rho_min {
            let gamma = alpha_bar;
            let fp = fixed_point(t)?;
            let (distance_trace, bound_trace, violations) =
                convergence_audit(t, &fp.state, n0, gamma, opts.horizon, opts)?;
            return Ok(StabilityReport {
                verdict: Verdict::UniformlyStable { n0, gamma },
                fixed_point: Some(fp.state),
                fixed_point_residual: Some(fp.residual),
                fixed_point_unique: Some(fp.unique),
                distance_trace,
                bound_trace,
                violations,
            });
        }
    }
    Ok(StabilityReport {
        verdict: Verdict::Undetermined { n_max: opts.n_max },
        fixed_point: None,
        fixed_point_residual: None,
        fixed_point_unique: None,
        distance_trace: Vec::new(),
        bound_trace: Vec::new(),
        violations: Vec::new(),
    })
}

/// Fixed state of a stochastic operator: the Cesàro limit from the maximally
/// mixed state, computed through powers of `(I + A)/2`, which kills every
/// peripheral eigenvalue except 1.
pub fn fixed_point(t: &SuperOperator) -> Result<FixedPointResult> {
    if !t.is_trace_preserving(algebra::DEFAULT_TOL) {
        return Err(Error::NotStochastic { defect: t.stochastic_defect() });
    }
    let shape = t.shape();
    let n = shape.sa_dim();
    let mut b = (t.transfer() + DMatrix::<f64>::identity(n, n)) * 0.5;
    for _ in 0..45 {
        b = &b * &b;
    }
    let mixed = Element::identity(shape).scale(1.0 / shape.total_trace());
    let y_coords = &b * coords_of(&mixed);
    let mut y = element_from_coords(shape, &y_coords);
    // Repeated squaring amplifies rounding drift along the fixed direction;
    // trace preservation pins the correct normalization.
    let tau_y = y.trace().re;
    if (tau_y - 1.0).abs() > 0.1 {
        return Err(Error::Numerical {
            context: "fixed-point iteration lost trace normalization".into(),
            residual: (tau_y - 1.0).abs(),
        });
    }
    y = y.scale(1.0 / tau_y);
    let residual = (&t.apply_sa(&y)? - &y).trace_norm();
    if residual > 1e-9 {
        return Err(Error::Numerical {
            context: "fixed-point iteration did not converge".into(),
            residual,
        });
    }
    // Dimension of the fixed space, from the singular values of A − I.
    let a_minus_i = t.transfer() - DMatrix::<f64>::identity(n, n);
    let sv = a_minus_i.singular_values();
    let scale = sv.iter().fold(1.0f64, |a, &s| a.max(s));
    let nullity = sv.iter().filter(|&&s| s < 1e-9 * scale).count();
    Ok(FixedPointResult { state: y, residual, unique: nullity <= 1 })
}

/// Audit `‖Tⁿ − T_y‖ ≤ 2·γ^⌊n/n₀⌋ + 1e−7` for `n` up to the horizon.
pub fn convergence_audit(
    t: &SuperOperator,
    y: &Element,
    n0: usize,
    gamma: f64,
    horizon: usize,
    opts: &StabilityOptions,
) -> Result<(Vec<(usize, f64)>, Vec<(usize, f64)>, Vec<usize>)> {
    if n0 == 0 {
        return Err(Error::invalid("n₀ must be ≥ 1"));
    }
    let ty = SuperOperator::rank_one_to(y)?;
    let audit_cfg = OptimizerConfig {
        restarts: 8,
        oracle_crosscheck: false,
        seed: opts.optimizer.seed ^ 0xa0d17,
        ..opts.optimizer.clone()
    };
    let mut distance_trace = Vec::new();
    let mut bound_trace = Vec::new();
    let mut violations = Vec::new();
    let mut tn = SuperOperator::identity(t.shape());
    for n in 0..=horizon {
        let diff = SuperOperator::from_transfer(
            t.shape().clone(),
            tn.transfer() - ty.transfer(),
        )?;
        let (dist, _) = dobrushin::induced_l1_norm(&diff, &audit_cfg);
        let bound = 2.0 * gamma.powi((n / n0) as i32);
        distance_trace.push((n, dist));
        bound_trace.push((n, bound));
        if dist > bound + 1e-7 {
            violations.push(n);
        }
        if dist < opts.distance_floor {
            break;
        }
        if n < horizon {
            tn = t.compose(&tn)?;
        }
    }
    Ok((distance_trace, bound_trace, violations))
}

/// Convenience: orbit of trace norms `‖Tⁿx‖₁` for `n = 0..=horizon`.
pub fn orbit_norms(t: &SuperOperator, x: &Element, horizon: usize) -> Result<Vec<f64>> {
    if x.shape() != t.shape() {
        return Err(Error::shape("element lives on a different algebra"));
    }
    let (x1, _) = x.sa_parts();
    let mut c = coords_of(&x1);
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(trace_norm_of_coords(t.shape(), &c));
    for _ in 0..horizon {
        c = t.transfer() * c;
        out.push(trace_norm_of_coords(t.shape(), &c));
    }
    Ok(out)
}

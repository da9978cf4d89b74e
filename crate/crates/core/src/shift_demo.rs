//! Truncated shift on a diagonal subalgebra of Mat(d): pinch to the
//! diagonal, move each slot one step down, and flush whatever reaches the
//! edge. A completely positive contraction with no invariant state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{self, AlgebraShape, Element, ElementKind};
use crate::error::{Error, Result};
use crate::superop::{coords_of, trace_norm_of_coords, PositivityHint, Provenance, SuperOperator};

/// Weighting of the ambient trace: unit weight per diagonal slot, or `1/d`
/// per slot so the identity has trace one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    UnitWeights,
    Normalized,
}

#[derive(Clone, Debug)]
pub struct TruncatedShift {
    pub dim: usize,
    pub trace_mode: TraceMode,
    pub op: SuperOperator,
}

/// Build the truncated shift on Mat(d): `T(x) = s(E(x))` where `E` pinches
/// to the diagonal and `s` shifts slot `j` to slot `j+1`, discarding anything
/// in or moved into the final slot.
pub fn build(dim: usize, trace_mode: TraceMode) -> Result<TruncatedShift> {
    if dim < 2 {
        return Err(Error::invalid("the truncated shift needs dimension ≥ 2"));
    }
    let shape = match trace_mode {
        TraceMode::UnitWeights => AlgebraShape::single(dim, 1.0)?,
        TraceMode::Normalized => AlgebraShape::normalized(dim)?,
    };
    let op = SuperOperator::from_action(
        &shape,
        |x| {
            let mut out = Element::zero(&shape);
            let src = x.block(0).clone();
            let dst = &mut out.blocks_mut()[0];
            for j in 0..dim.saturating_sub(2) {
                dst[(j + 1, j + 1)] = src[(j, j)];
            }
            out
        },
        Provenance::ShiftDemo,
        PositivityHint::CompletelyPositive,
    )?;
    Ok(TruncatedShift { dim, trace_mode, op })
}

/// Trace norms `‖Tⁿ(e₁₁)‖₁` for `n = 0..=n_max`: 1 while the unit of mass is
/// still travelling, 0 once it falls off the edge.
pub fn escape_profile(shift: &TruncatedShift, n_max: usize) -> Result<Vec<f64>> {
    let shape = shift.op.shape();
    let e11 = Element::matrix_unit(shape, 0, 0, 0)?;
    crate::stability::orbit_norms(&shift.op, &e11, n_max)
}

#[derive(Clone, Debug, Serialize)]
pub struct NoFixedPointCertificate {
    /// Smallest `m` with `Tᵐ = 0`.
    pub nilpotency_index: usize,
    /// Any state `x` satisfies `‖Tx − x‖₁ ≥ 1/m`: telescoping
    /// `x = Σ_{k<m} (T^k x − T^{k+1} x)` gives `1 = ‖x‖₁ ≤ m·‖Tx − x‖₁`.
    pub lower_bound: f64,
    /// Smallest displacement `‖Tx − x‖₁` found over candidate states.
    pub min_displacement: f64,
    /// Spectral radius of the transfer matrix. Nilpotency is verified
    /// exactly, which forces every eigenvalue to 0; the numeric eigensolver
    /// would report spurious moduli of order `ε^(1/m)` instead.
    pub spectral_radius: f64,
}

/// Certify that the truncated shift has no invariant state.
pub fn no_fixed_point_certificate(
    shift: &TruncatedShift,
    seed: u64,
) -> Result<NoFixedPointCertificate> {
    let shape = shift.op.shape();
    let n = shape.sa_dim();
    let d = shift.dim;
    // In the coordinate basis the first d directions span the diagonal
    // subalgebra and the rest are off-diagonal. The shift kills the
    // off-diagonal part and preserves the diagonal one, so the transfer is
    // block diagonal [[D, 0], [0, 0]] and T^m = 0 exactly when D^m = 0.
    let transfer = shift.op.transfer();
    let mut leak = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i >= d || j >= d {
                leak = leak.max(transfer[(i, j)].abs());
            }
        }
    }
    if leak > 1e-14 {
        return Err(Error::Numerical {
            context: "truncated shift leaks outside the diagonal subalgebra".into(),
            residual: leak,
        });
    }
    let diag_block = transfer.view((0, 0), (d, d)).into_owned();
    let mut nilpotency_index = None;
    let mut p = nalgebra::DMatrix::<f64>::identity(d, d);
    for m in 1..=d {
        p = &diag_block * p;
        if p.amax() < 1e-14 {
            nilpotency_index = Some(m);
            break;
        }
    }
    let m = nilpotency_index.ok_or_else(|| Error::Numerical {
        context: "truncated shift transfer is not nilpotent".into(),
        residual: p.amax(),
    })?;

    let spectral_radius = 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_displacement = f64::INFINITY;
    let mut consider = |x: &Element| {
        let c = shift.op.transfer() * coords_of(x) - coords_of(x);
        let v = trace_norm_of_coords(shape, &c);
        if v < min_displacement {
            min_displacement = v;
        }
    };
    let mu = shape.blocks()[0].weight;
    for j in 0..shift.dim {
        let slot = Element::matrix_unit(shape, 0, j, j)?.scale(1.0 / mu);
        consider(&slot);
    }
    let uniform = Element::identity(shape).scale(1.0 / shape.total_trace());
    consider(&uniform);
    for _ in 0..200 {
        let x = algebra::random_element(shape, ElementKind::State, &mut rng)?;
        consider(&x);
    }

    let lower_bound = 1.0 / m as f64;
    if min_displacement + 1e-9 < lower_bound {
        return Err(Error::Numerical {
            context: "state displacement fell below the nilpotency bound".into(),
            residual: lower_bound - min_displacement,
        });
    }
    Ok(NoFixedPointCertificate {
        nilpotency_index: m,
        lower_bound,
        min_displacement,
        spectral_radius,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DegenerationRow {
    pub dim: usize,
    pub epsilon: f64,
    /// Largest `δ` that still works at this dimension: the rank-one
    /// projector onto the occupied slot has trace `1/d` and already captures
    /// the full unit of mass, so no `δ > 1/d` can be certified.
    pub delta_max: f64,
}

/// How the smoothing threshold degenerates along the normalized shift
/// family: for fixed `ε < 1` the best `δ` is `1/d`, which tends to 0.
pub fn smoothing_degeneration(dims: &[usize], epsilon: f64) -> Result<Vec<DegenerationRow>> {
    if !(0.0..1.0).contains(&epsilon) || epsilon <= 0.0 {
        return Err(Error::invalid("ε must lie in (0, 1)"));
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        let shift = build(d, TraceMode::Normalized)?;
        let shape = shift.op.shape();
        let mu = shape.blocks()[0].weight;
        // The orbit of the state d·e₁₁ sits on single slots; the projector
        // onto the current slot has trace 1/d and mass τ(p·Tⁿx) = 1 ≥ ε.
        let x = Element::matrix_unit(shape, 0, 0, 0)?.scale(1.0 / mu);
        let p = Element::matrix_unit(shape, 0, 0, 0)?;
        let mass = coords_of(&p).dot(&coords_of(&x));
        if mass < epsilon {
            return Err(Error::Numerical {
                context: "slot projector lost the unit of mass".into(),
                residual: epsilon - mass,
            });
        }
        rows.push(DegenerationRow { dim: d, epsilon, delta_max: mu });
    }
    Ok(rows)
}

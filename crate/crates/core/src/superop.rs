//! Linear maps `T : L¹(M,τ) → L¹(M,τ)` stored as real transfer matrices.
//!
//! The map is represented on the real vector space of self-adjoint elements
//! in a fixed orthonormal basis under `⟨a,b⟩ = τ(ab)` and extended to general
//! elements by the split `x = x₁ + i·x₂`. The basis order is deterministic
//! given the shape: block-major, identity direction first inside each block,
//! then the diagonal traceless directions, then symmetric/antisymmetric
//! off-diagonal pairs in row-major order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{self, AlgebraShape, Element};
use crate::error::{Error, Result};

/// Constructor tag carried for provenance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Kraus,
    Transfer,
    Classical,
    Depolarizing,
    RankOne,
    ShiftDemo,
}

/// What the constructor guarantees about positivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityHint {
    /// Completely positive by construction; certifiable through the Choi
    /// matrix.
    CompletelyPositive,
    /// Positive by construction (e.g. `T_{y,z}` with `y, z ≥ 0`) but not
    /// necessarily completely positive.
    PositiveByConstruction,
    Unknown,
}

impl PositivityHint {
    fn combine(self, other: PositivityHint) -> PositivityHint {
        use PositivityHint::*;
        match (self, other) {
            (CompletelyPositive, CompletelyPositive) => CompletelyPositive,
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => PositiveByConstruction,
        }
    }
}

/// Tri-state positivity verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Positivity {
    Certified { method: String },
    Refuted {
        /// A positive element whose image fails positivity; re-checkable.
        witness: Element,
        image_min_eigenvalue: f64,
    },
    Unknown { samples: usize },
}

impl Positivity {
    pub fn is_certified(&self) -> bool {
        matches!(self, Positivity::Certified { .. })
    }
    pub fn is_refuted(&self) -> bool {
        matches!(self, Positivity::Refuted { .. })
    }
}

/// Predicate report for a map: positivity, trace preservation, contraction.
#[derive(Clone, Debug, Serialize)]
pub struct MapPredicates {
    pub positive: Positivity,
    pub stochastic: bool,
    /// Worst-case defect of `τ∘T − τ` over the unit coordinate directions.
    pub stochastic_defect: f64,
    pub l1_contraction: bool,
    pub induced_norm: f64,
}

/// A linear map on the algebra, stored as a real `N×N` transfer matrix with
/// `N = Σ dᵢ²`.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    shape: AlgebraShape,
    transfer: DMatrix<f64>,
    provenance: Provenance,
    hint: PositivityHint,
}

impl SuperOperator {
    pub fn from_transfer(shape: AlgebraShape, transfer: DMatrix<f64>) -> Result<Self> {
        let n = shape.sa_dim();
        if transfer.nrows() != n || transfer.ncols() != n {
            return Err(Error::shape(format!(
                "transfer must be {n}x{n}, got {}x{}",
                transfer.nrows(),
                transfer.ncols()
            )));
        }
        Ok(SuperOperator {
            shape,
            transfer,
            provenance: Provenance::Transfer,
            hint: PositivityHint::Unknown,
        })
    }

    /// Build the transfer matrix by applying `f` to every basis element.
    pub fn from_action(
        shape: &AlgebraShape,
        f: impl Fn(&Element) -> Element,
        provenance: Provenance,
        hint: PositivityHint,
    ) -> Result<Self> {
        let n = shape.sa_dim();
        let mut transfer = DMatrix::zeros(n, n);
        for k in 0..n {
            let b = basis_element(shape, k);
            let y = f(&b);
            if y.shape() != shape {
                return Err(Error::shape("action changed the algebra shape"));
            }
            let (y1, _) = y.sa_parts();
            transfer.set_column(k, &coords_of(&y1));
        }
        Ok(SuperOperator { shape: shape.clone(), transfer, provenance, hint })
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let n = shape.sa_dim();
        SuperOperator {
            shape: shape.clone(),
            transfer: DMatrix::identity(n, n),
            provenance: Provenance::Transfer,
            hint: PositivityHint::CompletelyPositive,
        }
    }

    /// `T(x) = Σₐ Kₐ x Kₐ*` from block-diagonal Kraus operators.
    pub fn from_kraus(shape: &AlgebraShape, kraus: &[Element]) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::invalid("at least one Kraus operator required"));
        }
        for k in kraus {
            if k.shape() != shape {
                return Err(Error::shape("Kraus operator has wrong block structure"));
            }
        }
        let kraus_adj: Vec<Element> = kraus.iter().map(|k| k.adjoint()).collect();
        SuperOperator::from_action(
            shape,
            |x| {
                let mut acc = Element::zero(shape);
                for (k, ka) in kraus.iter().zip(&kraus_adj) {
                    acc = &acc + &k.mul(x).unwrap().mul(ka).unwrap();
                }
                acc
            },
            Provenance::Kraus,
            PositivityHint::CompletelyPositive,
        )
    }

    /// Embed a row-stochastic matrix as a map on the diagonal algebra
    /// `⊕ⁿ Mat(1)`: probability row vectors evolve by `π ↦ πP`.
    pub fn from_classical(p: &DMatrix<f64>) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n {
            return Err(Error::shape("classical transition matrix must be square"));
        }
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if p[(i, j)] < -1e-12 {
                    return Err(Error::invalid(format!(
                        "negative entry P[{i}][{j}] = {}",
                        p[(i, j)]
                    )));
                }
                row += p[(i, j)];
            }
            if (row - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "row {i} sums to {row}, expected 1"
                )));
            }
        }
        let shape = AlgebraShape::classical(n)?;
        // Diagonal entries are the coordinates; (Tx)_j = Σ_i x_i P_ij.
        let transfer = p.transpose();
        Ok(SuperOperator {
            shape,
            transfer,
            provenance: Provenance::Classical,
            hint: PositivityHint::CompletelyPositive,
        })
    }

    /// Depolarizing map `T(x) = λx + (1−λ)τ(x)𝟙` on a single block with
    /// normalized trace.
    pub fn from_depolarizing(dim: usize, lambda: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::invalid("dimension must be ≥ 1"));
        }
        let shape = AlgebraShape::normalized(dim)?;
        let cp = lambda <= 1.0 && lambda >= -1.0 / ((dim * dim - 1).max(1) as f64);
        let hint = if cp {
            PositivityHint::CompletelyPositive
        } else {
            PositivityHint::Unknown
        };
        let identity = Element::identity(&shape);
        SuperOperator::from_action(
            &shape,
            |x| {
                let t = x.trace().re;
                &x.scale(lambda) + &identity.scale((1.0 - lambda) * t)
            },
            Provenance::Depolarizing,
            hint,
        )
    }

    /// Rank-one map `T_{y,z}(x) = τ(xz)·y`. `T_y` is the special case `z = 𝟙`.
    pub fn rank_one(y: &Element, z: &Element) -> Result<Self> {
        let tol = algebra::DEFAULT_TOL;
        for (name, e) in [("y", y), ("z", z)] {
            if !e.is_self_adjoint(tol) {
                return Err(Error::invalid(format!("{name} must be self-adjoint")));
            }
        }
        y.check_same_shape(z)?;
        let shape = y.shape().clone();
        let hint = if y.is_positive(tol) && z.is_positive(tol) {
            PositivityHint::PositiveByConstruction
        } else {
            PositivityHint::Unknown
        };
        let y_coords = coords_of(y);
        let n = shape.sa_dim();
        let mut transfer = DMatrix::zeros(n, n);
        for k in 0..n {
            let b = basis_element(&shape, k);
            let w = b.mul(z)?.trace().re;
            transfer.set_column(k, &(&y_coords * w));
        }
        Ok(SuperOperator { shape, transfer, provenance: Provenance::RankOne, hint })
    }

    /// `T_y = T_{y,𝟙}`: sends every state to `y`.
    pub fn rank_one_to(y: &Element) -> Result<Self> {
        SuperOperator::rank_one(y, &Element::identity(y.shape()))
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn transfer(&self) -> &DMatrix<f64> {
        &self.transfer
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn positivity_hint(&self) -> PositivityHint {
        self.hint
    }

    /// `(S∘T)(x) = S(T(x))`.
    pub fn compose(&self, inner: &SuperOperator) -> Result<SuperOperator> {
        if self.shape != inner.shape {
            return Err(Error::shape("composing maps on different algebras"));
        }
        Ok(SuperOperator {
            shape: self.shape.clone(),
            transfer: &self.transfer * &inner.transfer,
            provenance: Provenance::Transfer,
            hint: self.hint.combine(inner.hint),
        })
    }

    /// `Tⁿ` by repeated squaring; `power(0)` is the identity.
    pub fn power(&self, n: usize) -> SuperOperator {
        let hint = if n == 0 {
            PositivityHint::CompletelyPositive
        } else {
            self.hint
        };
        SuperOperator {
            shape: self.shape.clone(),
            transfer: matrix_power(&self.transfer, n),
            provenance: if n == 1 { self.provenance } else { Provenance::Transfer },
            hint,
        }
    }

    /// Apply to a self-adjoint element (the hermitian part is taken).
    pub fn apply_sa(&self, x: &Element) -> Result<Element> {
        if x.shape() != &self.shape {
            return Err(Error::shape("element lives on a different algebra"));
        }
        let (x1, _) = x.sa_parts();
        let c = coords_of(&x1);
        Ok(element_from_coords(&self.shape, &(&self.transfer * c)))
    }

    /// Apply to a general element via the split `x = x₁ + i·x₂`.
    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.shape() != &self.shape {
            return Err(Error::shape("element lives on a different algebra"));
        }
        let (x1, x2) = x.sa_parts();
        let y1 = element_from_coords(&self.shape, &(&self.transfer * coords_of(&x1)));
        let y2 = element_from_coords(&self.shape, &(&self.transfer * coords_of(&x2)));
        Ok(&y1 + &y2.scale_complex(Complex64::new(0.0, 1.0)))
    }

    /// Defect of trace preservation: `‖Aᵀt − t‖_∞` where `t` is the
    /// coordinate vector of the trace functional.
    pub fn stochastic_defect(&self) -> f64 {
        let t = trace_vector(&self.shape);
        let d = self.transfer.transpose() * &t - &t;
        d.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.stochastic_defect() <= tol * self.shape.total_trace().max(1.0)
    }

    /// Choi matrix of the complex-linear extension, on the block-diagonal
    /// embedding into `Mat(D)`, `D = Σ dᵢ`. Positive semidefinite iff the map
    /// is completely positive.
    pub fn choi_matrix(&self) -> DMatrix<Complex64> {
        let d_total = self.shape.total_dim();
        let n2 = d_total * d_total;
        let mut choi = DMatrix::<Complex64>::zeros(n2, n2);
        let mut offset = 0;
        for (bi, b) in self.shape.blocks().iter().enumerate() {
            for j in 0..b.dim {
                for k in 0..b.dim {
                    let unit = Element::matrix_unit(&self.shape, bi, j, k).unwrap();
                    let img = embed(&self.apply(&unit).unwrap());
                    let gj = offset + j;
                    let gk = offset + k;
                    // E_{gj,gk} ⊗ img
                    for r in 0..d_total {
                        for c in 0..d_total {
                            choi[(gj * d_total + r, gk * d_total + c)] += img[(r, c)];
                        }
                    }
                }
            }
            offset += b.dim;
        }
        choi
    }

    /// Evaluate the predicate battery: positivity (tri-state), trace
    /// preservation, L¹ contraction.
    ///
    /// Positivity is certified through the Choi matrix when the constructor
    /// guarantees complete positivity, accepted on construction grounds for
    /// maps positive by construction, and otherwise sampled over `samples`
    /// random positives (refuted on any witness).
    pub fn check_predicates(&self, seed: u64, samples: usize) -> MapPredicates {
        let tol = algebra::DEFAULT_TOL;
        let positive = match self.hint {
            PositivityHint::CompletelyPositive => {
                let choi = self.choi_matrix();
                let eigs = choi.symmetric_eigenvalues();
                let min = eigs.iter().fold(f64::INFINITY, |a, &v| a.min(v));
                let scale = eigs.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
                if min >= -1e-9 * scale {
                    Positivity::Certified { method: "choi".into() }
                } else {
                    // Constructor promised CP but the Choi matrix disagrees;
                    // fall back to sampling so a witness can be produced.
                    self.sample_positivity(seed, samples, tol)
                }
            }
            PositivityHint::PositiveByConstruction => {
                Positivity::Certified { method: "construction".into() }
            }
            PositivityHint::Unknown => self.sample_positivity(seed, samples, tol),
        };
        let defect = self.stochastic_defect();
        let stochastic = self.is_trace_preserving(tol) && !positive.is_refuted();
        let (induced_norm, _) =
            crate::dobrushin::induced_l1_norm(self, &crate::dobrushin::OptimizerConfig::with_seed(seed));
        MapPredicates {
            positive,
            stochastic,
            stochastic_defect: defect,
            l1_contraction: induced_norm <= 1.0 + 1e-9,
            induced_norm,
        }
    }

    fn sample_positivity(&self, seed: u64, samples: usize, tol: f64) -> Positivity {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x706f_7369);
        // Deterministic adversarial candidates first: matrix-unit pure states.
        let mut candidates: Vec<Element> = Vec::new();
        for (bi, b) in self.shape.blocks().iter().enumerate() {
            for j in 0..b.dim {
                candidates.push(Element::matrix_unit(&self.shape, bi, j, j).unwrap());
            }
        }
        for _ in 0..samples {
            candidates.push(
                algebra::random_element(&self.shape, algebra::ElementKind::Positive, &mut rng)
                    .expect("positive sampling"),
            );
        }
        let total = candidates.len();
        for x in candidates {
            let y = match self.apply_sa(&x) {
                Ok(y) => y,
                Err(_) => continue,
            };
            let scale = y.operator_norm().max(1.0);
            if let Ok(min) = y.min_eigenvalue(tol) {
                if min < -1e-7 * scale {
                    return Positivity::Refuted { witness: x, image_min_eigenvalue: min };
                }
            }
        }
        Positivity::Unknown { samples: total }
    }
}

/// Embed an element as a `D×D` block-diagonal matrix.
fn embed(x: &Element) -> DMatrix<Complex64> {
    let d_total = x.shape().total_dim();
    let mut m = DMatrix::zeros(d_total, d_total);
    let mut offset = 0;
    for (b, blk) in x.shape().blocks().iter().zip(x.blocks()) {
        for r in 0..b.dim {
            for c in 0..b.dim {
                m[(offset + r, offset + c)] = blk[(r, c)];
            }
        }
        offset += b.dim;
    }
    m
}

pub(crate) fn matrix_power(a: &DMatrix<f64>, mut n: usize) -> DMatrix<f64> {
    let mut result = DMatrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

// ---------------------------------------------------------------------------
// Orthonormal self-adjoint basis and coordinate maps.
// ---------------------------------------------------------------------------

/// Offset of block `bi` in the coordinate vector.
pub(crate) fn block_offset(shape: &AlgebraShape, bi: usize) -> usize {
    shape.blocks()[..bi].iter().map(|b| b.dim * b.dim).sum()
}

/// Materialize basis element `k` (mostly used when building transfer
/// matrices from actions).
pub fn basis_element(shape: &AlgebraShape, k: usize) -> Element {
    let mut e = Element::zero(shape);
    let mut idx = k;
    for (bi, b) in shape.blocks().iter().enumerate() {
        let n_b = b.dim * b.dim;
        if idx >= n_b {
            idx -= n_b;
            continue;
        }
        let d = b.dim;
        let mu = b.weight;
        let m = &mut e.blocks_mut()[bi];
        if idx == 0 {
            let v = Complex64::new(1.0 / (mu * d as f64).sqrt(), 0.0);
            for i in 0..d {
                m[(i, i)] = v;
            }
        } else if idx < d {
            // Diagonal traceless direction l = idx.
            let l = idx;
            let s = 1.0 / (mu * (l * (l + 1)) as f64).sqrt();
            for j in 0..l {
                m[(j, j)] = Complex64::new(s, 0.0);
            }
            m[(l, l)] = Complex64::new(-(l as f64) * s, 0.0);
        } else {
            // Off-diagonal pair directions, row-major over j < k.
            let t = idx - d;
            let (j, kk, sym) = offdiag_indices(d, t);
            let s = 1.0 / (2.0 * mu).sqrt();
            if sym {
                m[(j, kk)] = Complex64::new(s, 0.0);
                m[(kk, j)] = Complex64::new(s, 0.0);
            } else {
                m[(j, kk)] = Complex64::new(0.0, s);
                m[(kk, j)] = Complex64::new(0.0, -s);
            }
        }
        break;
    }
    e
}

/// Map flat off-diagonal index `t` to `(j, k, symmetric?)`.
fn offdiag_indices(d: usize, t: usize) -> (usize, usize, bool) {
    let pair = t / 2;
    let sym = t % 2 == 0;
    let mut count = 0;
    for j in 0..d {
        for k in (j + 1)..d {
            if count == pair {
                return (j, k, sym);
            }
            count += 1;
        }
    }
    unreachable!("off-diagonal index out of range")
}

/// Coordinates of a self-adjoint element in the orthonormal basis,
/// `c_k = τ(x bₖ)`.
pub fn coords_of(x: &Element) -> DVector<f64> {
    let shape = x.shape();
    let mut c = DVector::zeros(shape.sa_dim());
    let mut off = 0;
    for (b, m) in shape.blocks().iter().zip(x.blocks()) {
        let d = b.dim;
        let mu = b.weight;
        // Identity direction.
        let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
        c[off] = (mu / d as f64).sqrt() * tr.re;
        // Diagonal traceless directions.
        for l in 1..d {
            let s = (mu / (l * (l + 1)) as f64).sqrt();
            let mut acc = 0.0;
            for j in 0..l {
                acc += m[(j, j)].re;
            }
            acc -= l as f64 * m[(l, l)].re;
            c[off + l] = s * acc;
        }
        // Off-diagonal pairs.
        let mut t = off + d;
        let s = (2.0 * mu).sqrt();
        for j in 0..d {
            for k in (j + 1)..d {
                c[t] = s * m[(j, k)].re;
                c[t + 1] = s * m[(j, k)].im;
                t += 2;
            }
        }
        off += d * d;
    }
    c
}

/// Rebuild the self-adjoint element with the given coordinates.
pub fn element_from_coords(shape: &AlgebraShape, c: &DVector<f64>) -> Element {
    let mut e = Element::zero(shape);
    let mut off = 0;
    for (bi, b) in shape.blocks().iter().enumerate() {
        let d = b.dim;
        let mu = b.weight;
        {
            let m = &mut e.blocks_mut()[bi];
            let v = c[off] / (mu * d as f64).sqrt();
            for i in 0..d {
                m[(i, i)] += Complex64::new(v, 0.0);
            }
            for l in 1..d {
                let s = c[off + l] / (mu * (l * (l + 1)) as f64).sqrt();
                for j in 0..l {
                    m[(j, j)] += Complex64::new(s, 0.0);
                }
                m[(l, l)] -= Complex64::new(l as f64 * s, 0.0);
            }
            let mut t = off + d;
            let s = 1.0 / (2.0 * mu).sqrt();
            for j in 0..d {
                for k in (j + 1)..d {
                    let re = c[t] * s;
                    let im = c[t + 1] * s;
                    m[(j, k)] = Complex64::new(re, im);
                    m[(k, j)] = Complex64::new(re, -im);
                    t += 2;
                }
            }
        }
        off += d * d;
    }
    e
}

/// Coordinate vector of the trace functional: `t_k = τ(bₖ)`.
pub fn trace_vector(shape: &AlgebraShape) -> DVector<f64> {
    let mut t = DVector::zeros(shape.sa_dim());
    let mut off = 0;
    for b in shape.blocks() {
        t[off] = (b.weight * b.dim as f64).sqrt();
        off += b.dim * b.dim;
    }
    t
}

/// Trace norm of the element with coordinate vector `c`, without
/// materializing an [`Element`].
pub fn trace_norm_of_coords(shape: &AlgebraShape, c: &DVector<f64>) -> f64 {
    let mut total = 0.0;
    let mut off = 0;
    for b in shape.blocks() {
        let d = b.dim;
        let mu = b.weight;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        let v = c[off] / (mu * d as f64).sqrt();
        for i in 0..d {
            m[(i, i)] += Complex64::new(v, 0.0);
        }
        for l in 1..d {
            let s = c[off + l] / (mu * (l * (l + 1)) as f64).sqrt();
            for j in 0..l {
                m[(j, j)] += Complex64::new(s, 0.0);
            }
            m[(l, l)] -= Complex64::new(l as f64 * s, 0.0);
        }
        let mut t = off + d;
        let s = 1.0 / (2.0 * mu).sqrt();
        for j in 0..d {
            for k in (j + 1)..d {
                m[(j, k)] = Complex64::new(c[t] * s, c[t + 1] * s);
                m[(k, j)] = Complex64::new(c[t] * s, -c[t + 1] * s);
                t += 2;
            }
        }
        total += mu * m.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>();
        off += d * d;
    }
    total
}

/// Coordinates of the normalized pure state `vv*/μ` in block `bi`.
pub fn pure_state_coords(
    shape: &AlgebraShape,
    bi: usize,
    v: &DVector<Complex64>,
) -> DVector<f64> {
    let b = shape.blocks()[bi];
    let d = b.dim;
    let mu = b.weight;
    let off = block_offset(shape, bi);
    let mut c = DVector::zeros(shape.sa_dim());
    // A = vv*, coordinates of A/μ.
    c[off] = 1.0 / (mu * d as f64).sqrt();
    for l in 1..d {
        let s = 1.0 / (mu * (l * (l + 1)) as f64).sqrt();
        let mut acc = 0.0;
        for j in 0..l {
            acc += v[j].norm_sqr();
        }
        acc -= l as f64 * v[l].norm_sqr();
        c[off + l] = s * acc;
    }
    let mut t = off + d;
    let s = (2.0 / mu).sqrt();
    for j in 0..d {
        for k in (j + 1)..d {
            let a = v[j] * v[k].conj();
            c[t] = s * a.re;
            c[t + 1] = s * a.im;
            t += 2;
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Channel generators used by tests, oracles and the CLI.
// ---------------------------------------------------------------------------

/// Random stochastic channel on an arbitrary shape: a Haar-random Kraus set
/// on the `Mat(D)` embedding, weight-corrected to preserve `τ`, followed by
/// the conditional expectation back onto the block-diagonal algebra.
pub fn random_stochastic_channel<R: Rng>(
    shape: &AlgebraShape,
    kraus_count: usize,
    rng: &mut R,
) -> Result<SuperOperator> {
    let d_total = shape.total_dim();
    let k = kraus_count.max(1);
    // Random isometry C^D -> C^(kD), sliced into k Kraus blocks.
    let g = DMatrix::from_fn(k * d_total, d_total, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = g.qr().q();
    let mut kraus: Vec<DMatrix<Complex64>> = (0..k)
        .map(|a| q.rows(a * d_total, d_total).into_owned())
        .collect();

    // W = diag(μᵢ I): correct so that Σ Kₐ* W Kₐ = W, i.e. τ∘T = τ.
    let mut w = DMatrix::<Complex64>::zeros(d_total, d_total);
    let mut off = 0;
    for b in shape.blocks() {
        for i in 0..b.dim {
            w[(off + i, off + i)] = Complex64::new(b.weight, 0.0);
        }
        off += b.dim;
    }
    let mut gram = DMatrix::<Complex64>::zeros(d_total, d_total);
    for ka in &kraus {
        gram += ka.adjoint() * &w * ka;
    }
    let corr = hermitian_power(&gram, -0.5) * hermitian_power(&w, 0.5);
    for ka in &mut kraus {
        *ka = &*ka * &corr;
    }

    let shape_owned = shape.clone();
    SuperOperator::from_action(
        shape,
        move |x| {
            let xm = embed(x);
            let mut acc = DMatrix::<Complex64>::zeros(d_total, d_total);
            for ka in &kraus {
                acc += ka * &xm * ka.adjoint();
            }
            // Conditional expectation: pinch back to the block diagonal.
            let mut blocks = Vec::with_capacity(shape_owned.num_blocks());
            let mut off = 0;
            for b in shape_owned.blocks() {
                blocks.push(acc.view((off, off), (b.dim, b.dim)).into_owned());
                off += b.dim;
            }
            Element::from_blocks(shape_owned.clone(), blocks).unwrap()
        },
        Provenance::Kraus,
        PositivityHint::CompletelyPositive,
    )
}

/// Unitary conjugation channel `x ↦ UxU*` on a single-block shape.
pub fn unitary_conjugation(shape: &AlgebraShape, u: &DMatrix<Complex64>) -> Result<SuperOperator> {
    if shape.num_blocks() != 1 || shape.blocks()[0].dim != u.nrows() || !u.is_square() {
        return Err(Error::shape("unitary must match a single-block shape"));
    }
    let k = Element::from_blocks(shape.clone(), vec![u.clone()])?;
    SuperOperator::from_kraus(shape, &[k])
}

/// Hermitian matrix power through the eigendecomposition.
fn hermitian_power(m: &DMatrix<Complex64>, p: f64) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        out += &v * v.adjoint() * Complex64::new(lam.max(0.0).powf(p), 0.0);
    }
    out
}

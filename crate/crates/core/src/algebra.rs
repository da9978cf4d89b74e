//! Finite von Neumann algebras `M = ⊕ᵢ Mat(dᵢ)` with a faithful finite trace
//! `τ(x) = Σᵢ μᵢ · tr(xᵢ)`, and the element-level operations built on them:
//! trace norm, Jordan decomposition, spectral resolutions, and seeded random
//! element generation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for hermiticity / positivity defects, measured in the
/// operator norm of the defect.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Eigenvalues within this distance of zero are assigned to the positive part
/// of a Jordan decomposition.
pub const ZERO_EIG_TOL: f64 = 1e-12;
/// Eigenvalues agreeing within this tolerance are merged into a single
/// spectral projector.
pub const EIG_MERGE_TOL: f64 = 1e-9;

/// One matrix block `Mat(dim)` carrying trace weight `weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// A finite von Neumann algebra as a direct sum of matrix blocks with
/// positive trace weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraShape {
    blocks: Vec<Block>,
}

impl AlgebraShape {
    pub fn new(blocks: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|(dim, weight)| Block { dim, weight })
            .collect();
        if blocks.is_empty() {
            return Err(Error::invalid("an algebra needs at least one block"));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::invalid(format!("block {i} has dimension 0")));
            }
            if !(b.weight > 0.0) || !b.weight.is_finite() {
                return Err(Error::invalid(format!(
                    "block {i} has non-positive weight {}",
                    b.weight
                )));
            }
        }
        Ok(AlgebraShape { blocks })
    }

    /// Single full matrix block `Mat(dim)` with the given trace weight.
    pub fn single(dim: usize, weight: f64) -> Result<Self> {
        Self::new([(dim, weight)])
    }

    /// Single block with normalized trace, `τ(𝟙) = 1`.
    pub fn normalized(dim: usize) -> Result<Self> {
        Self::new([(dim, 1.0 / dim as f64)])
    }

    /// Diagonal (commutative) algebra on `n` points with unit weights.
    pub fn classical(n: usize) -> Result<Self> {
        Self::new(std::iter::repeat((1usize, 1.0)).take(n))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `Σ dᵢ` — dimension of the Hilbert space carrying the block-diagonal
    /// representation.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// `Σ dᵢ²` — real dimension of the self-adjoint part.
    pub fn sa_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// `τ(𝟙) = Σ μᵢ dᵢ`.
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).fold(f64::INFINITY, f64::min)
    }
}

/// An element of the algebra: one complex `dᵢ×dᵢ` matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    shape: AlgebraShape,
    blocks: Vec<DMatrix<Complex64>>,
}

impl Element {
    pub fn from_blocks(shape: AlgebraShape, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::shape(format!(
                "expected {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (b, m)) in shape.blocks().iter().zip(&blocks).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::shape(format!(
                    "block {i}: expected {0}x{0}, got {1}x{2}",
                    b.dim,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Element { shape, blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        Element { shape: shape.clone(), blocks }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| DMatrix::identity(b.dim, b.dim))
            .collect();
        Element { shape: shape.clone(), blocks }
    }

    /// Matrix unit `e_{jk}` inside one block.
    pub fn matrix_unit(shape: &AlgebraShape, block: usize, j: usize, k: usize) -> Result<Self> {
        let b = shape
            .blocks()
            .get(block)
            .ok_or_else(|| Error::invalid(format!("no block {block}")))?;
        if j >= b.dim || k >= b.dim {
            return Err(Error::invalid(format!(
                "matrix unit ({j},{k}) out of range for dim {}",
                b.dim
            )));
        }
        let mut e = Element::zero(shape);
        e.blocks[block][(j, k)] = Complex64::new(1.0, 0.0);
        Ok(e)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn block(&self, i: usize) -> &DMatrix<Complex64> {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [DMatrix<Complex64>] {
        &mut self.blocks
    }

    pub fn adjoint(&self) -> Element {
        Element {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// `τ(x) = Σᵢ μᵢ tr(xᵢ)`.
    pub fn trace(&self) -> Complex64 {
        self.shape
            .blocks()
            .iter()
            .zip(&self.blocks)
            .map(|(b, m)| m.trace() * Complex64::new(b.weight, 0.0))
            .sum()
    }

    /// `‖x‖₁ = τ(|x|)`: weighted sum of singular values over the blocks.
    pub fn trace_norm(&self) -> f64 {
        self.shape
            .blocks()
            .iter()
            .zip(&self.blocks)
            .map(|(b, m)| b.weight * m.singular_values().iter().sum::<f64>())
            .sum()
    }

    /// Operator norm `‖x‖_∞` (largest singular value across blocks).
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| m.singular_values().iter().fold(0.0f64, |a, &s| a.max(s)))
            .fold(0.0, f64::max)
    }

    /// Split `x = x₁ + i·x₂` with `x₁, x₂` self-adjoint.
    pub fn sa_parts(&self) -> (Element, Element) {
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, -0.5);
        let mut re = Vec::with_capacity(self.blocks.len());
        let mut im = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let adj = m.adjoint();
            re.push((m + &adj) * half);
            im.push((m - &adj) * half_i);
        }
        (
            Element { shape: self.shape.clone(), blocks: re },
            Element { shape: self.shape.clone(), blocks: im },
        )
    }

    /// Operator norm of `x − x*`, halved.
    pub fn self_adjoint_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                let d = m - m.adjoint();
                d.singular_values().iter().fold(0.0f64, |a, &s| a.max(s)) / 2.0
            })
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_defect() <= tol
    }

    /// Eigenvalues of a self-adjoint element, block by block.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<DVector<f64>>> {
        self.require_self_adjoint(tol)?;
        Ok(self
            .blocks
            .iter()
            .map(|m| hermitian_part_matrix(m).symmetric_eigenvalues())
            .collect())
    }

    pub fn min_eigenvalue(&self, tol: f64) -> Result<f64> {
        Ok(self
            .hermitian_eigenvalues(tol)?
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(f64::INFINITY, f64::min))
    }

    /// Self-adjoint with all eigenvalues `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        match self.min_eigenvalue(tol) {
            Ok(min) => min >= -tol,
            Err(_) => false,
        }
    }

    fn require_self_adjoint(&self, tol: f64) -> Result<()> {
        let defect = self.self_adjoint_defect();
        if defect > tol {
            return Err(Error::NotSelfAdjoint { defect, tol });
        }
        Ok(())
    }

    /// Jordan decomposition `x = x⁺ − x⁻` with `x⁺, x⁻ ≥ 0` and `x⁺x⁻ = 0`.
    ///
    /// Eigenvalues within [`ZERO_EIG_TOL`] of zero go to the positive part.
    pub fn jordan_decompose(&self, tol: f64) -> Result<(Element, Element)> {
        self.require_self_adjoint(tol)?;
        let mut plus = Vec::with_capacity(self.blocks.len());
        let mut minus = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let eig = hermitian_part_matrix(m).symmetric_eigen();
            let d = m.nrows();
            let mut p = DMatrix::zeros(d, d);
            let mut n = DMatrix::zeros(d, d);
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                let v = eig.eigenvectors.column(k);
                let proj = &v * v.adjoint();
                if lam >= -ZERO_EIG_TOL {
                    p += proj * Complex64::new(lam, 0.0);
                } else {
                    n += proj * Complex64::new(-lam, 0.0);
                }
            }
            plus.push(p);
            minus.push(n);
        }
        Ok((
            Element { shape: self.shape.clone(), blocks: plus },
            Element { shape: self.shape.clone(), blocks: minus },
        ))
    }

    /// Finite spectral decomposition `x = Σ λₖ pₖ` with mutually orthogonal
    /// projectors summing to `𝟙`.
    ///
    /// Eigenvalues agreeing within [`EIG_MERGE_TOL`] are merged into a single
    /// projector, across blocks, so the identity resolves as `[(1, 𝟙)]`.
    /// Returned in increasing eigenvalue order.
    pub fn spectral_projectors(&self, tol: f64) -> Result<Vec<(f64, Projector)>> {
        self.require_self_adjoint(tol)?;
        // (eigenvalue, block, rank-one projector)
        let mut lines: Vec<(f64, usize, DMatrix<Complex64>)> = Vec::new();
        for (bi, m) in self.blocks.iter().enumerate() {
            let eig = hermitian_part_matrix(m).symmetric_eigen();
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                let v = eig.eigenvectors.column(k);
                lines.push((lam, bi, &v * v.adjoint()));
            }
        }
        lines.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out: Vec<(f64, Projector)> = Vec::new();
        let mut k = 0;
        while k < lines.len() {
            let lam0 = lines[k].0;
            let mut e = Element::zero(&self.shape);
            let mut lam_sum = 0.0;
            let mut count = 0usize;
            while k < lines.len() && (lines[k].0 - lam0).abs() <= EIG_MERGE_TOL {
                let (lam, bi, ref proj) = lines[k];
                e.blocks[bi] += proj;
                lam_sum += lam;
                count += 1;
                k += 1;
            }
            out.push((lam_sum / count as f64, Projector(e)));
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Element {
        self.scale_complex(Complex64::new(c, 0.0))
    }

    pub fn scale_complex(&self, c: Complex64) -> Element {
        Element {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|m| m * c).collect(),
        }
    }

    /// Block-wise product `xy`.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_same_shape(other)?;
        Ok(Element {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub(crate) fn check_same_shape(&self, other: &Element) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape("elements live on different algebras"));
        }
        Ok(())
    }
}

fn hermitian_part_matrix(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.check_same_shape(rhs).expect("shape mismatch in +");
        Element {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.check_same_shape(rhs).expect("shape mismatch in -");
        Element {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

/// Complex matrices serialize row-major with entries as `[re, im]` pairs.
impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.blocks.len()))?;
        for m in &self.blocks {
            let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect();
            seq.serialize_element(&rows)?;
        }
        seq.end()
    }
}

/// A self-adjoint idempotent, `p² = p = p*`.
#[derive(Clone, Debug, Serialize)]
pub struct Projector(Element);

impl Projector {
    pub fn try_new(e: Element, tol: f64) -> Result<Projector> {
        if !e.is_self_adjoint(tol) {
            return Err(Error::NotSelfAdjoint { defect: e.self_adjoint_defect(), tol });
        }
        let sq = e.mul(&e)?;
        let defect = (&sq - &e).operator_norm();
        if defect > tol.max(1e-7) {
            return Err(Error::invalid(format!(
                "not idempotent: ‖p² − p‖_∞ = {defect:.3e}"
            )));
        }
        Ok(Projector(e))
    }

    pub fn identity(shape: &AlgebraShape) -> Projector {
        Projector(Element::identity(shape))
    }

    pub fn element(&self) -> &Element {
        &self.0
    }

    pub fn complement(&self) -> Projector {
        Projector(&Element::identity(self.0.shape()) - &self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// What kind of random element to draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementKind {
    SelfAdjoint,
    Positive,
    Traceless,
    State,
    /// Normalized rank-one projector `vv*/μᵢ` in the given block (random
    /// block when `None`).
    PureState { block: Option<usize> },
    /// Nonzero projector with `τ(p) < δ`.
    ProjectorBelowDelta(f64),
}

/// Draw a random element of the requested kind. Deterministic for a fixed
/// RNG state.
pub fn random_element<R: Rng>(
    shape: &AlgebraShape,
    kind: ElementKind,
    rng: &mut R,
) -> Result<Element> {
    match kind {
        ElementKind::SelfAdjoint => Ok(random_self_adjoint(shape, rng)),
        ElementKind::Positive => {
            let g = random_ginibre(shape, rng);
            let blocks = g.blocks.iter().map(|m| m * m.adjoint()).collect();
            Element::from_blocks(shape.clone(), blocks)
        }
        ElementKind::Traceless => {
            let x = random_self_adjoint(shape, rng);
            let t = x.trace().re / shape.total_trace();
            Ok(&x - &Element::identity(shape).scale(t))
        }
        ElementKind::State => {
            let x = random_element(shape, ElementKind::Positive, rng)?;
            let norm = x.trace_norm();
            if norm < 1e-300 {
                return Err(Error::Numerical {
                    context: "random positive element collapsed to zero".into(),
                    residual: norm,
                });
            }
            Ok(x.scale(1.0 / norm))
        }
        ElementKind::PureState { block } => {
            let bi = match block {
                Some(b) if b < shape.num_blocks() => b,
                Some(b) => return Err(Error::invalid(format!("no block {b}"))),
                None => rng.random_range(0..shape.num_blocks()),
            };
            let b = shape.blocks()[bi];
            let v = random_unit_vector(b.dim, rng);
            let mut e = Element::zero(shape);
            e.blocks[bi] = (&v * v.adjoint()) * Complex64::new(1.0 / b.weight, 0.0);
            Ok(e)
        }
        ElementKind::ProjectorBelowDelta(delta) => {
            if delta > shape.total_trace() {
                return Err(Error::invalid(format!(
                    "δ = {delta} exceeds τ(𝟙) = {}",
                    shape.total_trace()
                )));
            }
            if shape.min_weight() >= delta {
                return Err(Error::Infeasible(format!(
                    "every nonzero projector has τ(p) ≥ {} ≥ δ = {delta}",
                    shape.min_weight()
                )));
            }
            // Greedy random fill of per-block ranks under the trace budget.
            let mut ranks = vec![0usize; shape.num_blocks()];
            let mut total = 0.0;
            let mut slots: Vec<usize> = shape
                .blocks()
                .iter()
                .enumerate()
                .flat_map(|(i, b)| std::iter::repeat(i).take(b.dim))
                .collect();
            // Fisher-Yates
            for i in (1..slots.len()).rev() {
                let j = rng.random_range(0..=i);
                slots.swap(i, j);
            }
            for &bi in &slots {
                let w = shape.blocks()[bi].weight;
                if total + w < delta && (total == 0.0 || rng.random_bool(0.5)) {
                    ranks[bi] += 1;
                    total += w;
                }
            }
            let mut e = Element::zero(shape);
            for (bi, b) in shape.blocks().iter().enumerate() {
                if ranks[bi] == 0 {
                    continue;
                }
                let u = haar_unitary(b.dim, rng);
                let mut diag = DMatrix::<Complex64>::zeros(b.dim, b.dim);
                for k in 0..ranks[bi] {
                    diag[(k, k)] = Complex64::new(1.0, 0.0);
                }
                e.blocks[bi] = &u * diag * u.adjoint();
            }
            Ok(e)
        }
    }
}

fn random_self_adjoint<R: Rng>(shape: &AlgebraShape, rng: &mut R) -> Element {
    let g = random_ginibre(shape, rng);
    let blocks = g
        .blocks
        .iter()
        .map(|m| (m + m.adjoint()) * Complex64::new(0.5, 0.0))
        .collect();
    Element { shape: shape.clone(), blocks }
}

fn random_ginibre<R: Rng>(shape: &AlgebraShape, rng: &mut R) -> Element {
    let blocks = shape
        .blocks()
        .iter()
        .map(|b| {
            DMatrix::from_fn(b.dim, b.dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        })
        .collect();
    Element { shape: shape.clone(), blocks }
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase convention so the distribution is Haar.
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

pub fn random_unit_vector<R: Rng>(d: usize, rng: &mut R) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(d, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-12 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

//! Embeddings between spaces, inheritance of positivity `P₁ ⇢ P₂`, the
//! conditional expectation onto an embedded subspace, arrows
//! `(H₁, P₁) → (H₂, P₂)` and chains of arrows.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::SelfDualCone;
use crate::error::{Error, Result};
use crate::numerics::{
    c64, density_of, kron_vec, matrix_from_json, matrix_to_json, max_abs, CMatrix, CVector, LinearOperator, SpaceId,
};
use crate::positivity::{class_membership, classify, ground_state, ClassMembership};

const ISOMETRY_TOL: f64 = 1e-10;

/// Relative residual accepted by the nonnegative least-squares certificate.
pub const NNLS_TOL: f64 = 1e-8;

/// Overlaps `⟨ψ₁|π ψ₂⟩` at or below this value count as vanishing.
pub const OVERLAP_TOL: f64 = 1e-12;

/// Isometry `τ: H₁ → H₂` identifying `H₁` with a closed subspace of `H₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingJson", into = "EmbeddingJson")]
pub struct Embedding {
    from: SpaceId,
    to: SpaceId,
    isometry: CMatrix,
}

impl Embedding {
    pub fn new(from: impl Into<SpaceId>, to: impl Into<SpaceId>, isometry: CMatrix) -> Result<Self> {
        let (d2, d1) = isometry.shape();
        if d1 == 0 || d1 > d2 {
            return Err(Error::Invalid(format!("isometry shape {d2}x{d1}")));
        }
        let deviation = max_abs(&(isometry.adjoint() * &isometry - CMatrix::identity(d1, d1)));
        if deviation > ISOMETRY_TOL {
            return Err(Error::Invalid(format!("columns not orthonormal (deviation {deviation:.3e})")));
        }
        Ok(Self {
            from: from.into(),
            to: to.into(),
            isometry,
        })
    }

    pub fn identity(space: impl Into<SpaceId>, dim: usize) -> Self {
        let space = space.into();
        Self {
            from: space.clone(),
            to: space,
            isometry: CMatrix::identity(dim, dim),
        }
    }

    /// `τφ = φ ⊗ ω` for a unit vector `ω` on `factor`.
    pub fn append_factor(from: impl Into<SpaceId>, dim: usize, factor: &SpaceId, omega: &CVector) -> Result<Self> {
        let norm = omega.norm();
        if (norm - 1.0).abs() > ISOMETRY_TOL {
            return Err(Error::Invalid(format!("appended vector has norm {norm}")));
        }
        let from = from.into();
        let n = omega.len();
        let mut tau = CMatrix::zeros(dim * n, dim);
        for a in 0..dim {
            for (k, w) in omega.iter().enumerate() {
                tau[(a * n + k, a)] = *w;
            }
        }
        Ok(Self {
            to: from.tensor(factor),
            from,
            isometry: tau,
        })
    }

    pub fn from_space(&self) -> &SpaceId {
        &self.from
    }

    pub fn to_space(&self) -> &SpaceId {
        &self.to
    }

    pub fn from_dim(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn to_dim(&self) -> usize {
        self.isometry.nrows()
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Embedding) -> Result<Embedding> {
        if next.from_dim() != self.to_dim() {
            return Err(Error::DimMismatch {
                expected: self.to_dim(),
                found: next.from_dim(),
            });
        }
        Ok(Embedding {
            from: self.from.clone(),
            to: next.to.clone(),
            isometry: &next.isometry * &self.isometry,
        })
    }

    /// Orthogonal projection `ττ†` onto the embedded subspace, on the big space.
    pub fn projection(&self) -> LinearOperator {
        LinearOperator::new(self.to.clone(), &self.isometry * self.isometry.adjoint()).expect("square")
    }

    pub fn push(&self, x: &CVector) -> Result<CVector> {
        check_len(self.from_dim(), x.len())?;
        Ok(&self.isometry * x)
    }

    /// `τ† x`: the projection onto the subspace, in subspace coordinates.
    pub fn pull(&self, x: &CVector) -> Result<CVector> {
        check_len(self.to_dim(), x.len())?;
        Ok(self.isometry.adjoint() * x)
    }

    /// `τ† A τ`
    pub fn compress(&self, a: &LinearOperator) -> Result<LinearOperator> {
        check_len(self.to_dim(), a.dim())?;
        LinearOperator::new(self.from.clone(), self.isometry.adjoint() * a.matrix() * &self.isometry)
    }

    /// `A ⊕ 0 = τ A τ†`
    pub fn extend_by_zero(&self, a: &LinearOperator) -> Result<LinearOperator> {
        check_len(self.from_dim(), a.dim())?;
        LinearOperator::new(self.to.clone(), &self.isometry * a.matrix() * self.isometry.adjoint())
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EmbeddingJson {
    from: SpaceId,
    to: SpaceId,
    isometry: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<EmbeddingJson> for Embedding {
    type Error = Error;
    fn try_from(v: EmbeddingJson) -> Result<Self> {
        Embedding::new(v.from, v.to, matrix_from_json(&v.isometry)?)
    }
}

impl From<Embedding> for EmbeddingJson {
    fn from(e: Embedding) -> Self {
        EmbeddingJson {
            isometry: matrix_to_json(&e.isometry),
            from: e.from,
            to: e.to,
        }
    }
}

/// Nonnegative least squares `min ‖Ax - b‖, x >= 0` (Lawson–Hanson active set).
/// Returns the minimizer and the residual norm.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let eps = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let mut s = DVector::zeros(n);
        if cols.is_empty() {
            return s;
        }
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
        let sol = sub
            .svd(true, true)
            .solve(b, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(cols.len()));
        for (k, &j) in cols.iter().enumerate() {
            s[j] = sol[k];
        }
        s
    };

    for _ in 0..3 * n.max(1) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate.filter(|&j| w[j] > eps) else {
            break;
        };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in (0..n).filter(|&i| passive[i] && s[i] <= 0.0) {
                alpha = alpha.min(x[i] / (x[i] - s[i]));
            }
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Outcome of the three conditions defining `P₁ ⇢ P₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InheritanceReport {
    /// `π ⊵ 0` w.r.t. `P₂`.
    pub projection_preserving: bool,
    /// `π g ∈ P₁` for every generator `g` of `P₂`.
    pub images_in_cone: bool,
    /// Every generator of `P₁` is a nonnegative combination of the `π g`.
    pub generators_covered: bool,
    /// Largest relative NNLS residual over the generators of `P₁`.
    pub max_residual: f64,
}

impl InheritanceReport {
    pub fn holds(&self) -> bool {
        self.projection_preserving && self.images_in_cone && self.generators_covered
    }
}

/// Decides `P₁ = π P₂` and `π ⊵ 0` for the projection induced by `emb`.
pub fn cone_inherits(p1: &SelfDualCone, p2: &SelfDualCone, emb: &Embedding, tol: f64) -> Result<InheritanceReport> {
    check_len(emb.from_dim(), p1.dim())?;
    check_len(emb.to_dim(), p2.dim())?;
    let projection_preserving = classify(&emb.projection(), p2, tol)?.preserving;

    let images: Vec<CVector> = (0..p2.dim()).map(|j| emb.pull(&p2.generator(j))).collect::<Result<_>>()?;
    let mut images_in_cone = true;
    for img in &images {
        images_in_cone &= p1.contains(img, tol)?;
    }

    // real stacking: c >= 0 real, so split into real and imaginary rows
    let d1 = p1.dim();
    let k = images.len();
    let a = DMatrix::from_fn(2 * d1, k, |i, j| {
        let z = images[j][i % d1];
        if i < d1 {
            z.re
        } else {
            z.im
        }
    });
    let mut max_residual = 0.0_f64;
    for i in 0..d1 {
        let u = p1.generator(i);
        let b = DVector::from_fn(2 * d1, |r, _| if r < d1 { u[r].re } else { u[r - d1].im });
        let (_, res) = nnls(&a, &b);
        max_residual = max_residual.max(res / u.norm());
    }
    Ok(InheritanceReport {
        projection_preserving,
        images_in_cone,
        generators_covered: max_residual <= NNLS_TOL,
        max_residual,
    })
}

/// `ℰ(A) = πAπ + π⊥Aπ⊥` on the big space.
pub fn conditional_expectation(emb: &Embedding, a: &LinearOperator) -> Result<LinearOperator> {
    check_len(emb.to_dim(), a.dim())?;
    let pi = emb.projection().into_matrix();
    let perp = CMatrix::identity(pi.nrows(), pi.ncols()) - &pi;
    LinearOperator::new(a.space().clone(), &pi * a.matrix() * &pi + &perp * a.matrix() * &perp)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrowReport {
    pub source: ClassMembership,
    pub target: ClassMembership,
    pub inheritance: InheritanceReport,
}

impl ArrowReport {
    pub fn holds(&self) -> bool {
        self.source.in_a_plus() && self.target.in_a_plus() && self.inheritance.holds()
    }

    pub fn reasons(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.source.in_a_plus() {
            out.push("source Hamiltonian not in strict class");
        }
        if !self.target.in_a_plus() {
            out.push("target Hamiltonian not in strict class");
        }
        if !self.inheritance.projection_preserving {
            out.push("projection does not preserve target cone");
        }
        if !self.inheritance.images_in_cone {
            out.push("projected generators leave source cone");
        }
        if !self.inheritance.generators_covered {
            out.push("source cone not spanned by projected generators");
        }
        out
    }
}

/// `(H₁, P₁) → (H₂, P₂)`: both Hamiltonians in the strict class and `P₁ ⇢ P₂`.
pub fn arrow(
    h1: &LinearOperator,
    p1: &SelfDualCone,
    h2: &LinearOperator,
    p2: &SelfDualCone,
    emb: &Embedding,
    tol: f64,
) -> Result<ArrowReport> {
    check_len(emb.from_dim(), h1.dim())?;
    check_len(emb.to_dim(), h2.dim())?;
    Ok(ArrowReport {
        source: class_membership(h1, p1, tol)?,
        target: class_membership(h2, p2, tol)?,
        inheritance: cone_inherits(p1, p2, emb, tol)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrictOverlap {
    /// `⟨ψ_{H₁}|τ†ψ_{H₂}⟩`
    pub overlap: f64,
    /// `τ†ℰ(ρ_{ψ_{H₂}})τ ⊳ 0` w.r.t. `P₁`.
    pub improving_ok: bool,
}

/// Ground-state overlap across a verified arrow.
pub fn strict_overlap_verify(
    h1: &LinearOperator,
    p1: &SelfDualCone,
    h2: &LinearOperator,
    p2: &SelfDualCone,
    emb: &Embedding,
    tol: f64,
) -> Result<StrictOverlap> {
    let report = arrow(h1, p1, h2, p2, emb, tol)?;
    if !report.holds() {
        return Err(Error::ArrowFailed(report.reasons().join("; ")));
    }
    let g1 = ground_state(h1, p1)?;
    let g2 = ground_state(h2, p2)?;
    for g in [&g1, &g2] {
        if !g.simple {
            return Err(Error::NotSimple { gap: g.gap01 });
        }
    }
    let overlap = g1.vector.dotc(&emb.pull(&g2.vector)?).re;
    let rho = density_of(h2.space().clone(), &g2.vector)?;
    let compressed = emb.compress(&conditional_expectation(emb, &rho)?)?;
    Ok(StrictOverlap {
        overlap,
        improving_ok: classify(&compressed, p1, tol)?.improving,
    })
}

/// One node of a chain: `H_j` with the cone `P'_j` it carries as the target
/// of the incoming arrow and the cone `P_j` it carries as the source of the
/// outgoing one. `embedding` maps the previous node's space into this one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub hamiltonian: LinearOperator,
    pub cone: SelfDualCone,
    pub cone_prime: SelfDualCone,
    pub embedding: Embedding,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrowChain {
    links: Vec<ChainLink>,
}

impl ArrowChain {
    /// Singleton chain at `(H, P)`.
    pub fn start(h: LinearOperator, p: SelfDualCone) -> Result<Self> {
        check_len(h.dim(), p.dim())?;
        let emb = Embedding::identity(h.space().clone(), h.dim());
        Ok(Self {
            links: vec![ChainLink {
                hamiltonian: h,
                cone_prime: p.clone(),
                cone: p,
                embedding: emb,
            }],
        })
    }

    /// Appends a node; `p_prime` is checked against the incoming arrow and
    /// `p` against the outgoing one.
    pub fn push(&mut self, h: LinearOperator, p_prime: SelfDualCone, p: SelfDualCone, emb: Embedding) -> Result<()> {
        let prev = self.links.last().expect("chains are never empty");
        check_len(prev.hamiltonian.dim(), emb.from_dim())?;
        check_len(emb.to_dim(), h.dim())?;
        check_len(h.dim(), p.dim())?;
        check_len(h.dim(), p_prime.dim())?;
        self.links.push(ChainLink {
            hamiltonian: h,
            cone: p,
            cone_prime: p_prime,
            embedding: emb,
        });
        Ok(())
    }

    /// Appends a node that uses the same cone on both sides.
    pub fn push_same(&mut self, h: LinearOperator, p: SelfDualCone, emb: Embedding) -> Result<()> {
        self.push(h, p.clone(), p, emb)
    }

    pub fn from_links(links: Vec<ChainLink>) -> Result<Self> {
        let mut iter = links.into_iter();
        let first = iter.next().ok_or_else(|| Error::Invalid("empty chain".into()))?;
        check_len(first.hamiltonian.dim(), first.cone.dim())?;
        check_len(first.embedding.to_dim(), first.hamiltonian.dim())?;
        let mut chain = ArrowChain { links: vec![first] };
        for l in iter {
            chain.push(l.hamiltonian, l.cone_prime, l.cone, l.embedding)?;
        }
        Ok(chain)
    }

    pub fn links(&self) -> &[ChainLink] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn first(&self) -> &ChainLink {
        &self.links[0]
    }

    pub fn last(&self) -> &ChainLink {
        self.links.last().expect("chains are never empty")
    }

    /// Joins `self: H → K` and `other: K → L` into `H → L`. The shared node
    /// keeps its incoming cone from `self` and its outgoing cone from `other`.
    pub fn concat(&self, other: &ArrowChain) -> Result<ArrowChain> {
        let joint = self.last();
        let head = other.first();
        if !joint.hamiltonian.approx_eq(&head.hamiltonian, 1e-12) {
            return Err(Error::Invalid("chains do not share the joining Hamiltonian".into()));
        }
        let mut links = self.links.clone();
        links.last_mut().expect("non-empty").cone = head.cone.clone();
        links.extend(other.links[1..].iter().cloned());
        ArrowChain::from_links(links)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    /// Index of the arrow's target node.
    pub index: usize,
    pub overlap: f64,
    pub improving_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub links: Vec<LinkReport>,
    pub overlap_product: f64,
}

/// Verifies every arrow of the chain; a failure names the index of the
/// arrow's target node.
pub fn chain_verify(chain: &ArrowChain, tol: f64) -> Result<ChainReport> {
    let links = chain.links();
    let results: Vec<Result<LinkReport>> = (1..links.len())
        .into_par_iter()
        .map(|index| {
            let (src, dst) = (&links[index - 1], &links[index]);
            let fail = |reason: String| Error::LinkFailed { index, reason };
            let so = strict_overlap_verify(
                &src.hamiltonian,
                &src.cone,
                &dst.hamiltonian,
                &dst.cone_prime,
                &dst.embedding,
                tol,
            )
            .map_err(|e| fail(e.to_string()))?;
            if so.overlap <= OVERLAP_TOL {
                return Err(fail(format!("ground-state overlap {:.3e} is not positive", so.overlap)));
            }
            if !so.improving_ok {
                return Err(fail("compressed ground-state projector is not improving".into()));
            }
            Ok(LinkReport {
                index,
                overlap: so.overlap,
                improving_ok: so.improving_ok,
            })
        })
        .collect();
    let links = results.into_iter().collect::<Result<Vec<_>>>()?;
    let overlap_product = links.iter().map(|l| l.overlap).product();
    Ok(ChainReport { links, overlap_product })
}

/// `ψ ⊗ ω` helper used when checking product ground states.
pub fn product_state(psi: &CVector, omega: &CVector) -> CVector {
    kron_vec(psi, omega)
}

/// `(1, -1)/√2`-style vectors for tests and fixtures.
pub fn unit_real(values: &[f64]) -> CVector {
    let v = CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)));
    let n = v.norm();
    v.unscale(n)
}

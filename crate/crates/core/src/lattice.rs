//! Boolean lattice of Hamiltonians `H_I = H₀ − V_I` over subsets
//! `I ⊆ {1, …, ℓ}`, with `V_I = Σ_{μ∈I} X ⊗ Y_μ` acting on
//! `H_* ⊗ ⨂_{μ∈I} ℂ^{n_μ}` (factors in ascending `μ`).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{tensor_cone, SelfDualCone};
use crate::error::{Error, Result};
use crate::inheritance::{strict_overlap_verify, ArrowChain, Embedding};
use crate::numerics::{kron, uniform_vector, CMatrix, CVector, LinearOperator, SpaceId};
use crate::positivity::{class_membership, classify, is_ergodic, Witness};
use crate::semigroup::{semigroup_improving_sampled, DEFAULT_BETAS};
use crate::stability::{
    commutator_norm, good_quantum_number, good_quantum_number_in, in_class_p_o, observable_levels, GoodQuantumNumber,
    COMMUTATION_TOL, MU_TOL,
};

pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub h0: LinearOperator,
    pub p_star: SelfDualCone,
    pub o: LinearOperator,
    pub x: LinearOperator,
    /// `Y_μ` on `ℂ^{n_μ}`, for `μ = 1, …, ℓ`.
    pub ys: Vec<LinearOperator>,
    pub dim_cap: usize,
}

impl LatticeSpec {
    pub fn new(h0: LinearOperator, p_star: SelfDualCone, o: LinearOperator, x: LinearOperator, ys: Vec<LinearOperator>) -> Self {
        Self {
            h0,
            p_star,
            o,
            x,
            ys,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn ell(&self) -> usize {
        self.ys.len()
    }

    fn factor_space(&self, mu: usize) -> SpaceId {
        SpaceId::new(format!("y{mu}"))
    }

    /// Dimension of `H_I`.
    pub fn dim_of(&self, subset: &[usize]) -> usize {
        subset.iter().fold(self.h0.dim(), |d, &mu| d * self.ys[mu - 1].dim())
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let sorted = subset.windows(2).all(|w| w[0] < w[1]);
        if !sorted || subset.iter().any(|&mu| mu == 0 || mu > self.ell()) {
            return Err(Error::Invalid(format!("subset {subset:?} is not a sorted subset of 1..={}", self.ell())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityCheck {
    pub index: usize,
    pub ergodic: bool,
    pub failing_pair: Option<(usize, usize)>,
    pub reason: Option<String>,
}

/// The standing assumptions of the construction, each with its outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecReport {
    /// `X ⊵ 0` w.r.t. `P_*`.
    pub x_preserving: bool,
    pub x_witness: Option<Witness>,
    /// `[X, O] = 0`
    pub x_commutes: bool,
    pub x_commutator_norm: f64,
    /// `[H₀, O] = 0`
    pub h0_commutes: bool,
    /// Each `Y_μ` ergodic w.r.t. `ℝ^{n_μ}₊`.
    pub y_ergodic: Vec<ErgodicityCheck>,
    /// `e^{−βH₀} ⊳ 0` on the sampled `β` grid.
    pub condition_h: bool,
}

impl SpecReport {
    pub fn passes(&self) -> bool {
        self.x_preserving
            && self.x_commutes
            && self.h0_commutes
            && self.condition_h
            && self.y_ergodic.iter().all(|y| y.ergodic)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.x_preserving {
            out.push("X does not preserve the cone".to_string());
        }
        if !self.x_commutes {
            out.push("X does not commute with O".to_string());
        }
        if !self.h0_commutes {
            out.push("H0 does not commute with O".to_string());
        }
        if !self.condition_h {
            out.push("exp(-beta H0) is not positivity improving".to_string());
        }
        for y in self.y_ergodic.iter().filter(|y| !y.ergodic) {
            out.push(format!("Y_{} is not ergodic", y.index));
        }
        out
    }
}

pub fn verify_spec(spec: &LatticeSpec, tol: f64) -> Result<SpecReport> {
    let d = spec.h0.dim();
    for op in [&spec.x, &spec.o] {
        op.require_dim(d)?;
        op.require_hermitian()?;
    }
    spec.h0.require_hermitian()?;
    if spec.p_star.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: spec.p_star.dim(),
        });
    }
    let x_report = classify(&spec.x, &spec.p_star, tol)?;
    let y_ergodic = spec
        .ys
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let orth = SelfDualCone::orthant(spec.factor_space(k + 1), y.dim());
            match is_ergodic(y, &orth, tol) {
                Ok(r) => ErgodicityCheck {
                    index: k + 1,
                    ergodic: r.ergodic,
                    failing_pair: r.failing_pair,
                    reason: None,
                },
                Err(e) => ErgodicityCheck {
                    index: k + 1,
                    ergodic: false,
                    failing_pair: None,
                    reason: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SpecReport {
        x_preserving: x_report.preserving,
        x_witness: x_report.preserving_witness,
        x_commutes: in_class_p_o(&spec.x, &spec.o, COMMUTATION_TOL)?,
        x_commutator_norm: commutator_norm(&spec.x, &spec.o)?,
        h0_commutes: in_class_p_o(&spec.h0, &spec.o, COMMUTATION_TOL)?,
        y_ergodic,
        condition_h: class_membership(&spec.h0, &spec.p_star, tol)?.in_a_plus()
            && semigroup_improving_sampled(&spec.h0, &spec.p_star, &DEFAULT_BETAS, tol)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeNode {
    /// Sorted, 1-based.
    pub subset: Vec<usize>,
    pub label: String,
    pub hamiltonian: LinearOperator,
    pub cone: SelfDualCone,
    /// `φ ↦ φ ⊗ ω_I` from `H_*`.
    pub embedding: Embedding,
    pub mu: GoodQuantumNumber,
    /// Largest step count in the ergodicity table of `Y_I`.
    pub ergodic_k: Option<usize>,
}

pub fn node_label(subset: &[usize]) -> String {
    if subset.is_empty() {
        "H_∅".to_string()
    } else {
        let ids: Vec<String> = subset.iter().map(|m| m.to_string()).collect();
        format!("H_{{{}}}", ids.join(","))
    }
}

/// `Σ_j 1 ⊗ … ⊗ Y_{μ_j} ⊗ … ⊗ 1` on `⨂_{μ∈I} ℂ^{n_μ}`.
fn y_sum(spec: &LatticeSpec, subset: &[usize], space: &SpaceId) -> LinearOperator {
    let dims: Vec<usize> = subset.iter().map(|&mu| spec.ys[mu - 1].dim()).collect();
    let total: usize = dims.iter().product();
    let mut sum = LinearOperator::zeros(space.clone(), total);
    for (j, &mu) in subset.iter().enumerate() {
        let mut term = LinearOperator::identity("1", 1);
        for (k, &n) in dims.iter().enumerate() {
            let factor = if k == j {
                spec.ys[mu - 1].clone()
            } else {
                LinearOperator::identity("1", n)
            };
            term = kron(&term, &factor);
        }
        sum = &sum + &term;
    }
    sum.with_space(space.clone())
}

/// `H_I`, `P_I` and the embedding of `H_*`, with `H_I` checked to lie in
/// the strict class and to carry the quantum number of `H₀`.
pub fn build_node(spec: &LatticeSpec, subset: &[usize], tol: f64) -> Result<LatticeNode> {
    let report = verify_spec(spec, tol)?;
    if !report.passes() {
        return Err(Error::SpecFailed(report.failures().join("; ")));
    }
    let mu0 = good_quantum_number(&spec.h0, &spec.o, &spec.p_star, tol)?;
    build_checked(spec, subset, &mu0, tol)
}

fn build_checked(spec: &LatticeSpec, subset: &[usize], mu0: &GoodQuantumNumber, tol: f64) -> Result<LatticeNode> {
    spec.check_subset(subset)?;
    let dim = spec.dim_of(subset);
    if dim > spec.dim_cap {
        return Err(Error::DimCap { dim, cap: spec.dim_cap });
    }
    let label = node_label(subset);
    let fail = |reason: String| Error::ClassificationFailed {
        node: label.clone(),
        reason,
    };
    let star = spec.h0.space().clone();
    let mut env_space: Option<SpaceId> = None;
    let mut cone = spec.p_star.clone();
    let mut omega = CVector::from_element(1, crate::numerics::c64(1.0, 0.0));
    for &mu in subset {
        let fs = spec.factor_space(mu);
        let n = spec.ys[mu - 1].dim();
        cone = tensor_cone(&cone, &SelfDualCone::orthant(fs.clone(), n));
        omega = crate::numerics::kron_vec(&omega, &uniform_vector(n));
        env_space = Some(match env_space {
            None => fs,
            Some(s) => s.tensor(&fs),
        });
    }
    let node_space = cone.space().clone();
    let (hamiltonian, embedding, ergodic_k) = match env_space {
        None => (spec.h0.clone(), Embedding::identity(star, spec.h0.dim()), None),
        Some(env) => {
            let d_env = dim / spec.h0.dim();
            let y = y_sum(spec, subset, &env);
            let erg = is_ergodic(&y, &SelfDualCone::orthant(env.clone(), d_env), tol).map_err(|e| fail(e.to_string()))?;
            if !erg.ergodic {
                return Err(fail(format!("Y_I not ergodic at generator pair {:?}", erg.failing_pair)));
            }
            let h = &kron(&spec.h0, &LinearOperator::identity(env.clone(), d_env)) - &kron(&spec.x, &y);
            let emb = Embedding::append_factor(star, spec.h0.dim(), &env, &omega)?;
            (h.with_space(node_space.clone()), emb, erg.max_k())
        }
    };
    let class = class_membership(&hamiltonian, &cone, tol)?;
    if !class.in_a_plus() {
        return Err(fail(format!("not in the strict class ({class:?})")));
    }
    let o_node = kron(&spec.o, &LinearOperator::identity("env", dim / spec.h0.dim())).with_space(node_space);
    let levels = observable_levels(&spec.o)?;
    let mu = good_quantum_number_in(&hamiltonian, &o_node, &cone, &levels, tol).map_err(|e| fail(e.to_string()))?;
    if (mu.snapped_mu - mu0.snapped_mu).abs() > MU_TOL * spec.o.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::MuMismatch {
            index: subset_index(spec.ell(), subset),
            expected: mu0.snapped_mu,
            found: mu.snapped_mu,
        });
    }
    Ok(LatticeNode {
        subset: subset.to_vec(),
        label,
        hamiltonian,
        cone,
        embedding,
        mu,
        ergodic_k,
    })
}

/// All subsets of `1..=ell` ordered by size, then lexicographically.
pub fn subsets(ell: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u64..1 << ell)
        .map(|mask| (1..=ell).filter(|&mu| mask >> (mu - 1) & 1 == 1).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

fn subset_index(ell: usize, subset: &[usize]) -> usize {
    subsets(ell).iter().position(|s| s == subset).unwrap_or(usize::MAX)
}

/// `H_I ↪ H_{I∪{ν}}`: `φ ↦ φ ⊗ ω_ν` with the new factor moved into its
/// ascending position.
pub fn covering_embedding(spec: &LatticeSpec, from: &LatticeNode, to: &LatticeNode, nu: usize) -> Result<Embedding> {
    let dims_from: Vec<usize> = from.subset.iter().map(|&m| spec.ys[m - 1].dim()).collect();
    let pos = from.subset.iter().filter(|&&m| m < nu).count();
    let n = spec.ys[nu - 1].dim();
    let omega = uniform_vector(n);
    let inner_before: usize = dims_from[..pos].iter().product();
    let inner_after: usize = dims_from[pos..].iter().product();
    let d_star = spec.h0.dim();
    let mut tau = CMatrix::zeros(to.hamiltonian.dim(), from.hamiltonian.dim());
    for a in 0..d_star {
        for b in 0..inner_before {
            for c in 0..inner_after {
                let src = (a * inner_before + b) * inner_after + c;
                for (r, w) in omega.iter().enumerate() {
                    let dst = ((a * inner_before + b) * n + r) * inner_after + c;
                    tau[(dst, src)] = *w;
                }
            }
        }
    }
    Embedding::new(from.cone.space().clone(), to.cone.space().clone(), tau)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringEdge {
    /// Node index of `I`.
    pub from: usize,
    /// Node index of `I ∪ {ν}`.
    pub to: usize,
    pub added: usize,
    pub overlap: f64,
    #[serde(skip)]
    pub embedding: Embedding,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HasseDiagram {
    pub ell: usize,
    pub nodes: Vec<LatticeNode>,
    pub edges: Vec<CoveringEdge>,
    pub mu_star: f64,
}

impl HasseDiagram {
    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        self.nodes.iter().position(|n| n.subset == subset)
    }

    /// Chain `H_{I₁} → … → H_{I₂}` adding the elements of `I₂ \ I₁` in
    /// ascending order.
    pub fn saturated_chain(&self, i1: &[usize], i2: &[usize]) -> Result<ArrowChain> {
        let missing = |s: &[usize]| Error::Invalid(format!("no node for {s:?}"));
        let start = self.index_of(i1).ok_or_else(|| missing(i1))?;
        if !i1.iter().all(|m| i2.contains(m)) {
            return Err(Error::Invalid(format!("{i1:?} is not contained in {i2:?}")));
        }
        let first = &self.nodes[start];
        let mut chain = ArrowChain::start(first.hamiltonian.clone(), first.cone.clone())?;
        let mut current = i1.to_vec();
        let mut at = start;
        for &nu in i2.iter().filter(|m| !i1.contains(m)) {
            current.push(nu);
            current.sort_unstable();
            let next = self.index_of(&current).ok_or_else(|| missing(&current))?;
            let edge = self
                .edges
                .iter()
                .find(|e| e.from == at && e.to == next)
                .ok_or_else(|| Error::Invalid(format!("no covering edge {at} -> {next}")))?;
            let node = &self.nodes[next];
            chain.push_same(node.hamiltonian.clone(), node.cone.clone(), edge.embedding.clone())?;
            at = next;
        }
        Ok(chain)
    }
}

/// Builds all `2^ℓ` nodes and verifies every covering arrow `H_I → H_{I∪{ν}}`.
pub fn build_lattice(spec: &LatticeSpec, tol: f64) -> Result<HasseDiagram> {
    let ell = spec.ell();
    let full: Vec<usize> = (1..=ell).collect();
    let dim = spec.dim_of(&full);
    if dim > spec.dim_cap {
        return Err(Error::DimCap { dim, cap: spec.dim_cap });
    }
    let report = verify_spec(spec, tol)?;
    if !report.passes() {
        return Err(Error::SpecFailed(report.failures().join("; ")));
    }
    let mu0 = good_quantum_number(&spec.h0, &spec.o, &spec.p_star, tol)?;
    let all = subsets(ell);
    let nodes = all
        .par_iter()
        .map(|s| build_checked(spec, s, &mu0, tol))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for (i, s) in all.iter().enumerate() {
        for nu in (1..=ell).filter(|m| !s.contains(m)) {
            let mut t = s.clone();
            t.push(nu);
            t.sort_unstable();
            let j = all.iter().position(|x| *x == t).expect("all subsets present");
            pairs.push((i, j, nu));
        }
    }
    let edges = pairs
        .par_iter()
        .map(|&(i, j, nu)| {
            let (a, b) = (&nodes[i], &nodes[j]);
            let fail = |reason: String| Error::LinkFailed { index: j, reason };
            let embedding = covering_embedding(spec, a, b, nu).map_err(|e| fail(e.to_string()))?;
            let so = strict_overlap_verify(&a.hamiltonian, &a.cone, &b.hamiltonian, &b.cone, &embedding, tol)
                .map_err(|e| fail(format!("{} -> {}: {e}", a.label, b.label)))?;
            if so.overlap <= crate::inheritance::OVERLAP_TOL || !so.improving_ok {
                return Err(fail(format!("{} -> {}: ground states do not overlap strictly", a.label, b.label)));
            }
            Ok(CoveringEdge {
                from: i,
                to: j,
                added: nu,
                overlap: so.overlap,
                embedding,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HasseDiagram {
        ell,
        nodes,
        edges,
        mu_star: mu0.snapped_mu,
    })
}

/// Deterministic DOT text: ranks by `|I|`, `H₀` on top, each edge drawn
/// from `H_{I∪{ν}}` up to `H_I`.
pub fn hasse_export(diagram: &HasseDiagram) -> String {
    let mut out = String::new();
    out.push_str("digraph hasse {\n");
    out.push_str("  rankdir=BT;\n");
    out.push_str("  node [shape=plaintext];\n");
    for (i, n) in diagram.nodes.iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", n.label);
    }
    for size in 0..=diagram.ell {
        let ids: Vec<String> = diagram
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.subset.len() == size)
            .map(|(i, _)| format!("n{i};"))
            .collect();
        let _ = writeln!(out, "  {{ rank=same; {} }}", ids.join(" "));
    }
    for e in &diagram.edges {
        let _ = writeln!(out, "  n{} -> n{};", e.to, e.from);
    }
    out.push_str("}\n");
    out
}

//! Good quantum numbers `μ(H)` for Hamiltonians commuting with an
//! observable `O`, their invariance along arrow chains, stability classes,
//! and (weak) equivalence of Hamiltonians on `H_* ⊗ X`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{tensor_cone, SelfDualCone};
use crate::error::{Error, Result};
use crate::inheritance::{chain_verify, ArrowChain, Embedding};
use crate::numerics::{
    basis_vector, density_of, hermitian_eig, kron, kron_vec, partial_trace, spectral_norm, uniform_vector,
    unitary_exp, vector_to_json, CVector, LinearOperator, SpaceId,
};
use crate::positivity::{class_membership, ground_state};

/// Relative commutator threshold for `HO = OH`.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Relative agreement required of quantum numbers.
pub const MU_TOL: f64 = 1e-8;

/// Relative residual accepted when fitting `H = H_*⊗1 + 1⊗L`.
pub const FACTOR_TOL: f64 = 1e-8;

/// Entropy below which a reduced ground state counts as unchanged.
pub const WEAK_ENTROPY_TOL: f64 = 1e-9;

const EXP_SAMPLES: [(f64, f64); 2] = [(1.0, 1.0), (0.3, 2.0)];

pub fn commutator_norm(h: &LinearOperator, o: &LinearOperator) -> Result<f64> {
    Ok(spectral_norm(h.commutator(o)?.matrix()))
}

/// `e^{isO} e^{itH} = e^{itH} e^{isO}` for all `s, t`, decided by the
/// relative commutator norm and cross-checked on sampled exponentials.
pub fn in_class_p_o(h: &LinearOperator, o: &LinearOperator, tol: f64) -> Result<bool> {
    h.require_hermitian()?;
    o.require_hermitian()?;
    o.require_dim(h.dim())?;
    let scale = h.norm() * o.norm();
    let commuting = commutator_norm(h, o)? <= tol * scale;
    if commuting {
        for (s, t) in EXP_SAMPLES {
            let a = unitary_exp(o, s)?;
            let b = unitary_exp(h, t)?;
            let dev = spectral_norm(&(a.matrix() * b.matrix() - b.matrix() * a.matrix()));
            if dev > 1e-8 {
                return Err(Error::Inconsistent(format!(
                    "commutator below threshold but exponentials differ by {dev:.3e} at s={s}, t={t}"
                )));
            }
        }
    }
    Ok(commuting)
}

/// `μ(H)` from `Oψ_H = μψ_H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodQuantumNumber {
    pub mu: f64,
    /// Level of `O` nearest to `mu` (see [`observable_levels`]).
    pub snapped_mu: f64,
    pub residual: f64,
    pub gap01: f64,
    pub commutator_norm: f64,
}

pub fn good_quantum_number(
    h: &LinearOperator,
    o: &LinearOperator,
    p: &SelfDualCone,
    tol: f64,
) -> Result<GoodQuantumNumber> {
    gqn_at(h, o, p, tol, 0, None)
}

/// Like [`good_quantum_number`], but a snapped value within the agreement
/// bound of one of `levels` is replaced by that level. Nodes whose
/// observables share a spectrum then report bitwise equal snapped values.
pub fn good_quantum_number_in(
    h: &LinearOperator,
    o: &LinearOperator,
    p: &SelfDualCone,
    levels: &[f64],
    tol: f64,
) -> Result<GoodQuantumNumber> {
    gqn_at(h, o, p, tol, 0, Some(levels))
}

/// Distinct eigenvalues of `o`, ascending. Eigenvalues closer than
/// `MU_TOL·‖O‖` form one level, represented by their mean.
pub fn observable_levels(o: &LinearOperator) -> Result<Vec<f64>> {
    let mut eig = hermitian_eig(o)?.eigenvalues;
    eig.sort_by(f64::total_cmp);
    let bound = MU_TOL * o.norm().max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for e in eig {
        match clusters.last_mut() {
            Some(c) if e - c[c.len() - 1] <= bound => c.push(e),
            _ => clusters.push(vec![e]),
        }
    }
    Ok(clusters.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
}

fn nearest(x: f64, levels: &[f64]) -> f64 {
    levels
        .iter()
        .copied()
        .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
        .expect("nonempty spectrum")
}

fn gqn_at(
    h: &LinearOperator,
    o: &LinearOperator,
    p: &SelfDualCone,
    tol: f64,
    index: usize,
    reference: Option<&[f64]>,
) -> Result<GoodQuantumNumber> {
    let comm = commutator_norm(h, o)?;
    if !in_class_p_o(h, o, COMMUTATION_TOL)? {
        return Err(Error::NotCommuting { index, norm: comm });
    }
    let class = class_membership(h, p, tol)?;
    if !class.in_a_plus() {
        return Err(Error::NotInAPlus(format!("{} (node {index})", describe(&class))));
    }
    let g = ground_state(h, p)?;
    if g.gap01.is_nan() || g.gap01 <= MU_TOL * h.norm() {
        return Err(Error::NotSimple { gap: g.gap01 });
    }
    let o_psi = o.apply(&g.vector)?;
    let mu = g.vector.dotc(&o_psi).re;
    let residual = (&o_psi - g.vector.scale(mu)).norm();
    let own = nearest(mu, &observable_levels(o)?);
    let bound = MU_TOL * o.norm().max(f64::MIN_POSITIVE);
    if residual > bound || (mu - own).abs() > bound {
        return Err(Error::Inconsistent(format!(
            "ground state is not an eigenvector of the observable (residual {residual:.3e})"
        )));
    }
    let snapped_mu = match reference {
        Some(levels) => {
            let r = nearest(own, levels);
            if (r - own).abs() <= bound {
                r
            } else {
                own
            }
        }
        None => own,
    };
    Ok(GoodQuantumNumber {
        mu,
        snapped_mu,
        residual,
        gap01: g.gap01,
        commutator_norm: comm,
    })
}

fn describe(c: &crate::positivity::ClassMembership) -> &'static str {
    if !c.real_form {
        "not a real form"
    } else if !c.metzler {
        "positive off-diagonal generator entries"
    } else {
        "generator graph not strongly connected"
    }
}

/// How the base observable is carried to the later spaces of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableExtension {
    /// `O ⊗ 1`, for chains that append tensor factors to the right.
    #[default]
    Ampliation,
    /// `O ⊕ 0 = τOτ†` along the composed embedding.
    ZeroPadding,
}

/// The observable on every node of `chain`, starting from `o` on the first.
pub fn extend_observable(chain: &ArrowChain, o: &LinearOperator, mode: ObservableExtension) -> Result<Vec<LinearOperator>> {
    let links = chain.links();
    let d0 = links[0].hamiltonian.dim();
    o.require_dim(d0)?;
    let mut out = Vec::with_capacity(links.len());
    let mut tau: Option<Embedding> = None;
    for (j, link) in links.iter().enumerate() {
        let h = &link.hamiltonian;
        let op = match mode {
            ObservableExtension::Ampliation => {
                let d = h.dim();
                if d % d0 != 0 {
                    return Err(Error::BadFactorization { dim: d, left: d0, right: d / d0 });
                }
                kron(o, &LinearOperator::identity("env", d / d0))
            }
            ObservableExtension::ZeroPadding => {
                if j > 0 {
                    tau = Some(match tau {
                        None => link.embedding.clone(),
                        Some(t) => t.then(&link.embedding)?,
                    });
                }
                match &tau {
                    None => o.clone(),
                    Some(t) => t.extend_by_zero(o)?,
                }
            }
        };
        out.push(op.with_space(h.space().clone()));
    }
    Ok(out)
}

/// The identities `μ_j⟨ψ_j|πψ_{j+1}⟩ = ⟨Oψ_j|πψ_{j+1}⟩ = ⟨ψ_j|πOψ_{j+1}⟩ = μ_{j+1}⟨ψ_j|πψ_{j+1}⟩`
/// for one arrow, evaluated numerically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Telescoping {
    /// Index of the arrow's target node.
    pub index: usize,
    pub overlap: f64,
    pub left: f64,
    pub inner_left: f64,
    pub inner_right: f64,
    pub right: f64,
    /// Deviation of `τ†O_{j+1}` from `O_jτ†`.
    pub intertwining: f64,
    /// `⟨ψ_j|πOψ_{j+1}⟩ / ⟨ψ_j|πψ_{j+1}⟩`, when the overlap is usable as a divisor.
    pub mu_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuChainReport {
    pub mus: Vec<GoodQuantumNumber>,
    pub links: Vec<Telescoping>,
    pub mu_star: f64,
}

/// Verifies the chain and that every node carries the same quantum number.
/// `observables[j]` is the observable on node `j`.
pub fn mu_chain_invariance(chain: &ArrowChain, observables: &[LinearOperator], tol: f64) -> Result<MuChainReport> {
    let links = chain.links();
    if observables.len() != links.len() {
        return Err(Error::DimMismatch {
            expected: links.len(),
            found: observables.len(),
        });
    }
    for (j, (link, o)) in links.iter().zip(observables).enumerate() {
        if !in_class_p_o(&link.hamiltonian, o, COMMUTATION_TOL)? {
            return Err(Error::NotCommuting {
                index: j,
                norm: commutator_norm(&link.hamiltonian, o)?,
            });
        }
    }
    chain_verify(chain, tol)?;

    let base = observable_levels(&observables[0])?;
    let mus = links
        .par_iter()
        .zip(observables.par_iter())
        .enumerate()
        .map(|(j, (link, o))| gqn_at(&link.hamiltonian, o, &link.cone, tol, j, Some(&base)))
        .collect::<Result<Vec<_>>>()?;
    let mu_star = mus[0].snapped_mu;
    let o_scale = observables[0].norm().max(f64::MIN_POSITIVE);
    for (j, m) in mus.iter().enumerate() {
        if (m.snapped_mu - mu_star).abs() > MU_TOL * o_scale {
            return Err(Error::MuMismatch {
                index: j,
                expected: mu_star,
                found: m.snapped_mu,
            });
        }
    }

    let mut tele = Vec::new();
    for j in 1..links.len() {
        let (src, dst) = (&links[j - 1], &links[j]);
        let tau = &dst.embedding;
        let psi_j = ground_state(&src.hamiltonian, &src.cone)?.vector;
        let psi_k = ground_state(&dst.hamiltonian, &dst.cone_prime)?.vector;
        let pulled = tau.pull(&psi_k)?;
        let overlap = psi_j.dotc(&pulled).re;
        let inner_left = observables[j - 1].apply(&psi_j)?.dotc(&pulled).re;
        let inner_right = psi_j.dotc(&tau.pull(&observables[j].apply(&psi_k)?)?).re;
        let lhs = tau.isometry().adjoint() * observables[j].matrix();
        let rhs = observables[j - 1].matrix() * tau.isometry().adjoint();
        tele.push(Telescoping {
            index: j,
            overlap,
            left: mus[j - 1].mu * overlap,
            inner_left,
            inner_right,
            right: mus[j].mu * overlap,
            intertwining: spectral_norm(&(lhs - rhs)),
            mu_ratio: (overlap > tol).then(|| inner_right / overlap),
        });
    }
    Ok(MuChainReport {
        mus,
        links: tele,
        mu_star,
    })
}

/// `mu_chain_invariance` with observables produced by `extend_observable`.
pub fn mu_chain_invariance_with(
    chain: &ArrowChain,
    o: &LinearOperator,
    mode: ObservableExtension,
    tol: f64,
) -> Result<MuChainReport> {
    mu_chain_invariance(chain, &extend_observable(chain, o, mode)?, tol)
}

/// Which vector of `C²` the tower identifies the smaller space with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerEmbedding {
    /// `φ ↦ φ ⊗ (1,1)/√2`
    #[default]
    Uniform,
    /// `φ ↦ φ ⊗ e₂`
    SecondBasis,
}

impl TowerEmbedding {
    fn vector(self) -> CVector {
        match self {
            TowerEmbedding::Uniform => uniform_vector(2),
            TowerEmbedding::SecondBasis => basis_vector(2, 1),
        }
    }
}

/// `H → H₁ → … → H_L` with `H_{ℓ+1} = H_ℓ⊗1 − 1⊗σ₁` and
/// `P_{ℓ+1} = P_ℓ ⊗ ℝ²₊`. Every link is verified and the ground states are
/// checked to factor as `ψ_H ⊗ ψ_{−σ₁}^{⊗ℓ}`.
pub fn richness_tower(
    h: &LinearOperator,
    p: &SelfDualCone,
    o: Option<&LinearOperator>,
    depth: usize,
    embedding: TowerEmbedding,
    tol: f64,
) -> Result<ArrowChain> {
    if !class_membership(h, p, tol)?.in_a_plus() {
        return Err(Error::PreconditionFailed("base Hamiltonian is not in the strict class".into()));
    }
    if let Some(o) = o {
        if !in_class_p_o(h, o, COMMUTATION_TOL)? {
            return Err(Error::PreconditionFailed("base Hamiltonian does not commute with the observable".into()));
        }
    }
    let omega = embedding.vector();
    let plus = uniform_vector(2);
    let psi_h = ground_state(h, p)?.vector;
    let mut chain = ArrowChain::start(h.clone(), p.clone())?;
    let (mut h_l, mut p_l, mut psi_l) = (h.clone(), p.clone(), psi_h);
    for level in 1..=depth {
        let factor = SpaceId::new(format!("c2_{level}"));
        let emb = Embedding::append_factor(h_l.space().clone(), h_l.dim(), &factor, &omega)?;
        let sx = LinearOperator::sigma_x(factor.clone());
        h_l = &kron(&h_l, &LinearOperator::identity(factor.clone(), 2))
            - &kron(&LinearOperator::identity(h_l.space().clone(), h_l.dim()), &sx);
        p_l = tensor_cone(&p_l, &SelfDualCone::orthant(factor, 2));
        psi_l = kron_vec(&psi_l, &plus);
        chain.push_same(h_l.clone(), p_l.clone(), emb)?;
        let actual = ground_state(&h_l, &p_l)?.vector;
        let dev = (&actual - &psi_l).norm();
        if dev > 1e-8 {
            return Err(Error::Inconsistent(format!("level {level} ground state does not factor (deviation {dev:.3e})")));
        }
    }
    chain_verify(&chain, tol)?;
    Ok(chain)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Least-squares fit of `L` in `H₂ ≈ H_*⊗1 + 1⊗L`.
    pub l: LinearOperator,
    /// `‖H₂ − H_*⊗1 − 1⊗L‖ / ‖H₂‖`
    pub relative_residual: f64,
    pub l_in_a_plus: bool,
}

/// Whether `H₂ = H_*⊗1 + 1⊗L` with `L` in the strict class for `P_X`.
pub fn is_equivalent(
    h2: &LinearOperator,
    h_star: &LinearOperator,
    p_x: &SelfDualCone,
    tol: f64,
) -> Result<EquivalenceReport> {
    let (d, ds) = (h2.dim(), h_star.dim());
    let dx = p_x.dim();
    if ds * dx != d {
        return Err(Error::BadFactorization { dim: d, left: ds, right: dx });
    }
    h2.require_hermitian()?;
    h_star.require_hermitian()?;
    let star_part = kron(h_star, &LinearOperator::identity(p_x.space().clone(), dx));
    let rest = (h2 - &star_part).into_matrix();
    let l_mat = crate::numerics::CMatrix::from_fn(dx, dx, |k, l| {
        (0..ds).map(|a| rest[(a * dx + k, a * dx + l)]).sum::<crate::numerics::C64>() / ds as f64
    });
    let l = LinearOperator::new(p_x.space().clone(), l_mat)?;
    let fitted = kron(&LinearOperator::identity(h_star.space().clone(), ds), &l);
    let residual = spectral_norm(&(rest - fitted.matrix()));
    let relative_residual = residual / h2.norm().max(f64::MIN_POSITIVE);
    let l_in_a_plus = class_membership(&l, p_x, tol)?.in_a_plus();
    Ok(EquivalenceReport {
        equivalent: relative_residual <= FACTOR_TOL && l_in_a_plus,
        l,
        relative_residual,
        l_in_a_plus,
    })
}

/// Quantum relative entropy `S(ρ|σ) = tr ρ log ρ − tr ρ log σ`, infinite
/// when the support of `ρ` leaves that of `σ`.
pub fn relative_entropy(rho: &LinearOperator, sigma: &LinearOperator) -> Result<f64> {
    rho.require_dim(sigma.dim())?;
    let r = crate::numerics::check_density(rho, 1e-10)?;
    let s = crate::numerics::check_density(sigma, 1e-10)?;
    let mut entropy = 0.0;
    for &lambda in &r.eigenvalues {
        if lambda > 0.0 {
            entropy += lambda * lambda.ln();
        }
    }
    // weight of ρ on each eigenvector of σ
    let overlaps = s.eigenvectors.adjoint() * &r.eigenvectors;
    for (k, &mu) in s.eigenvalues.iter().enumerate() {
        let weight: f64 = r
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &lambda)| lambda.max(0.0) * overlaps[(k, i)].norm_sqr())
            .sum();
        if mu < 1e-12 {
            if weight > 1e-10 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        entropy -= weight * mu.ln();
    }
    Ok(entropy.max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakEquivalence {
    pub weak: bool,
    pub entropy: f64,
    /// `ω` with `ψ = ψ_* ⊗ ω`, when weakly equivalent.
    #[serde(serialize_with = "serialize_omega")]
    pub omega: Option<CVector>,
    pub omega_strictly_positive: Option<bool>,
}

fn serialize_omega<S: serde::Serializer>(v: &Option<CVector>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(vector_to_json).serialize(s)
}

/// Weak equivalence of `H₂` on `H_* ⊗ X` to `H_*`, via the relative
/// entropy of the reduced ground state.
pub fn weak_equivalence_check(
    h2: &LinearOperator,
    p2: &SelfDualCone,
    h_star: &LinearOperator,
    p_star: &SelfDualCone,
    p_x: &SelfDualCone,
    tol: f64,
) -> Result<WeakEquivalence> {
    let (ds, dx) = (h_star.dim(), p_x.dim());
    if ds * dx != h2.dim() {
        return Err(Error::BadFactorization {
            dim: h2.dim(),
            left: ds,
            right: dx,
        });
    }
    let g = ground_state(h2, p2)?;
    let g_star = ground_state(h_star, p_star)?;
    for gs in [&g, &g_star] {
        if !gs.simple {
            return Err(Error::NotSimple { gap: gs.gap01 });
        }
    }
    let rho = density_of(h2.space().clone(), &g.vector)?;
    let reduced = partial_trace(&rho, ds, dx, h_star.space().clone())?;
    let sigma = density_of(h_star.space().clone(), &g_star.vector)?;
    let entropy = relative_entropy(&reduced, &sigma)?;
    let weak = entropy <= WEAK_ENTROPY_TOL;
    let (omega, omega_strictly_positive) = if weak {
        let omega = CVector::from_fn(dx, |k, _| {
            (0..ds).map(|a| g_star.vector[a].conj() * g.vector[a * dx + k]).sum()
        });
        let n = omega.norm();
        let omega = omega.unscale(n);
        let positive = p_x.strictly_positive(&omega, tol)?;
        (Some(omega), Some(positive))
    } else {
        (None, None)
    };
    Ok(WeakEquivalence {
        weak,
        entropy,
        omega,
        omega_strictly_positive,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Member {
    pub links: usize,
    pub overlap_product: f64,
    pub mu: f64,
    pub snapped_mu: f64,
}

/// Verified part of the stability class `𝒰_O(H_*)`: members keyed by id,
/// each admitted only with a verified chain from the base.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityClass {
    pub base: String,
    pub mu_star: f64,
    pub members: BTreeMap<String, Member>,
    #[serde(skip)]
    h_star: LinearOperator,
    #[serde(skip)]
    observable: LinearOperator,
    #[serde(skip)]
    mode: ObservableExtension,
}

impl StabilityClass {
    pub fn new(
        base: impl Into<String>,
        h_star: LinearOperator,
        p: &SelfDualCone,
        observable: LinearOperator,
        mode: ObservableExtension,
        tol: f64,
    ) -> Result<Self> {
        let gqn = good_quantum_number(&h_star, &observable, p, tol)?;
        let base = base.into();
        let mut members = BTreeMap::new();
        members.insert(
            base.clone(),
            Member {
                links: 0,
                overlap_product: 1.0,
                mu: gqn.mu,
                snapped_mu: gqn.snapped_mu,
            },
        );
        Ok(Self {
            base,
            mu_star: gqn.snapped_mu,
            members,
            h_star,
            observable,
            mode,
        })
    }

    fn witness(&self, chain: &ArrowChain, tol: f64) -> Result<Member> {
        if !chain.first().hamiltonian.approx_eq(&self.h_star, 1e-12) {
            return Err(Error::Invalid("chain does not start at the base Hamiltonian".into()));
        }
        let report = mu_chain_invariance_with(chain, &self.observable, self.mode, tol)?;
        let last = report.mus.last().expect("nonempty chain");
        let bound = MU_TOL * self.observable.norm().max(f64::MIN_POSITIVE);
        if (last.snapped_mu - self.mu_star).abs() > bound {
            return Err(Error::MuMismatch {
                index: chain.len() - 1,
                expected: self.mu_star,
                found: last.snapped_mu,
            });
        }
        let overlap_product = report.links.iter().map(|l| l.overlap).product();
        Ok(Member {
            links: chain.len() - 1,
            overlap_product,
            mu: last.mu,
            snapped_mu: last.snapped_mu,
        })
    }

    /// Admits the last Hamiltonian of `chain` under `id`.
    pub fn add_member(&mut self, id: impl Into<String>, chain: &ArrowChain, tol: f64) -> Result<()> {
        let member = self.witness(chain, tol)?;
        self.members.insert(id.into(), member);
        Ok(())
    }

    /// Verifies candidates concurrently and admits those that pass.
    pub fn add_members(&mut self, candidates: &[(String, ArrowChain)], tol: f64) -> Vec<(String, Result<()>)> {
        let results: Vec<(String, Result<Member>)> = candidates
            .par_iter()
            .map(|(id, chain)| (id.clone(), self.witness(chain, tol)))
            .collect();
        results
            .into_iter()
            .map(|(id, r)| {
                let status = r.map(|m| {
                    self.members.insert(id.clone(), m);
                });
                (id, status)
            })
            .collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.contains_key(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c64, vector_from_real};

    const TOL: f64 = 1e-9;

    fn orth(space: &str, n: usize) -> SelfDualCone {
        SelfDualCone::orthant(space, n)
    }

    fn seed() -> LinearOperator {
        &LinearOperator::diagonal("a", &[0.0, 1.0]) - &LinearOperator::sigma_x("a").scaled(0.1)
    }

    fn two_spin() -> (LinearOperator, SelfDualCone, LinearOperator) {
        let sx = LinearOperator::sigma_x("q");
        let id = LinearOperator::identity("q", 2);
        let h = &(-&kron(&sx, &id)) - &kron(&id, &sx);
        let p = tensor_cone(&orth("q", 2), &orth("q", 2));
        let swap = LinearOperator::from_real_rows(
            "q⊗q",
            &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]],
        );
        (h, p, swap)
    }

    #[test]
    fn class_p_o_examples() {
        let sx = LinearOperator::sigma_x("q");
        let id = LinearOperator::identity("q", 2);
        assert!(in_class_p_o(&sx, &id, COMMUTATION_TOL).unwrap());
        assert!(in_class_p_o(&kron(&sx, &id), &kron(&id, &sx), COMMUTATION_TOL).unwrap());
        let z = LinearOperator::diagonal("q", &[1.0, -1.0]);
        assert!(!in_class_p_o(&sx, &z, COMMUTATION_TOL).unwrap());
        // [σ₁, σ₃] = −2iσ₂ has norm 2
        assert!((commutator_norm(&sx, &z).unwrap() - 2.0).abs() < 1e-12);
        let nh = LinearOperator::from_real_rows("q", &[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(in_class_p_o(&nh, &id, COMMUTATION_TOL), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn quantum_number_examples() {
        let h = seed();
        let p = orth("a", 2);
        let g = good_quantum_number(&h, &LinearOperator::identity("a", 2), &p, TOL).unwrap();
        assert!((g.mu - 1.0).abs() < 1e-12 && g.snapped_mu == 1.0);
        let (h, p, swap) = two_spin();
        let g = good_quantum_number(&h, &swap, &p, TOL).unwrap();
        assert!((g.snapped_mu - 1.0).abs() < 1e-12 && g.residual < 1e-12);
        let z = LinearOperator::diagonal("a", &[1.0, -1.0]);
        assert!(matches!(
            good_quantum_number(&seed(), &z, &orth("a", 2), TOL),
            Err(Error::NotCommuting { index: 0, .. })
        ));
        let diag = LinearOperator::diagonal("a", &[0.0, 1.0]);
        assert!(matches!(
            good_quantum_number(&diag, &LinearOperator::identity("a", 2), &orth("a", 2), TOL),
            Err(Error::NotInAPlus(_))
        ));
    }

    #[test]
    fn tower_depth_one_factorizes() {
        let h = seed();
        let p = orth("a", 2);
        let chain = richness_tower(&h, &p, None, 1, TowerEmbedding::Uniform, TOL).unwrap();
        assert_eq!(chain.len(), 2);
        let psi_h = ground_state(&h, &p).unwrap().vector;
        let psi1 = ground_state(&chain.last().hamiltonian, &chain.last().cone).unwrap().vector;
        let expected = kron_vec(&psi_h, &vector_from_real(&[1.0, 1.0]).unscale(2f64.sqrt()));
        assert!((&psi1 - &expected).norm() < 1e-12);
    }

    #[test]
    fn tower_depth_zero_and_five() {
        let h = seed();
        let p = orth("a", 2);
        assert_eq!(richness_tower(&h, &p, None, 0, TowerEmbedding::Uniform, TOL).unwrap().len(), 1);
        let o = LinearOperator::identity("a", 2);
        let chain = richness_tower(&h, &p, Some(&o), 5, TowerEmbedding::Uniform, TOL).unwrap();
        assert_eq!(chain.len(), 6);
        assert_eq!(chain.last().hamiltonian.dim(), 64);
        let r = mu_chain_invariance_with(&chain, &o, ObservableExtension::Ampliation, TOL).unwrap();
        assert!(r.mus.iter().all(|m| (m.snapped_mu - r.mu_star).abs() < 1e-12));
    }

    #[test]
    fn tower_with_paper_embedding_verifies() {
        let chain = richness_tower(&seed(), &orth("a", 2), None, 2, TowerEmbedding::SecondBasis, TOL).unwrap();
        let r = chain_verify(&chain, TOL).unwrap();
        for l in r.links {
            assert!((l.overlap - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn tower_rejects_reducible_base() {
        let diag = LinearOperator::diagonal("a", &[0.0, 1.0]);
        assert!(matches!(
            richness_tower(&diag, &orth("a", 2), None, 1, TowerEmbedding::Uniform, TOL),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn swap_symmetric_tower_telescopes() {
        let (h, p, swap) = two_spin();
        let chain = richness_tower(&h, &p, Some(&swap), 3, TowerEmbedding::Uniform, TOL).unwrap();
        let r = mu_chain_invariance_with(&chain, &swap, ObservableExtension::Ampliation, TOL).unwrap();
        assert_eq!(r.links.len(), 3);
        for t in &r.links {
            assert!((t.left - t.inner_left).abs() < 1e-12);
            assert!((t.inner_left - t.inner_right).abs() < 1e-12);
            assert!((t.inner_right - t.right).abs() < 1e-12);
            assert!(t.intertwining < 1e-12);
            assert!((t.mu_ratio.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn broken_observable_is_localized() {
        let (h, p, swap) = two_spin();
        let chain = richness_tower(&h, &p, Some(&swap), 3, TowerEmbedding::Uniform, TOL).unwrap();
        let mut obs = extend_observable(&chain, &swap, ObservableExtension::Ampliation).unwrap();
        let d = obs[2].dim();
        obs[2] = LinearOperator::diagonal(obs[2].space().clone(), &(0..d).map(|i| i as f64).collect::<Vec<_>>());
        match mu_chain_invariance(&chain, &obs, TOL) {
            Err(Error::NotCommuting { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected NotCommuting, got {other:?}"),
        }
    }

    #[test]
    fn singleton_chain_is_invariant() {
        let (h, p, swap) = two_spin();
        let chain = ArrowChain::start(h, p).unwrap();
        let r = mu_chain_invariance_with(&chain, &swap, ObservableExtension::Ampliation, TOL).unwrap();
        assert!(r.links.is_empty() && r.mus.len() == 1);
    }

    #[test]
    fn equivalence_examples() {
        let h = seed();
        let px = orth("x", 2);
        let sx = LinearOperator::sigma_x("x");
        let h2 = &kron(&h, &LinearOperator::identity("x", 2)) - &kron(&LinearOperator::identity("a", 2), &sx);
        let r = is_equivalent(&h2, &h, &px, TOL).unwrap();
        assert!(r.equivalent && r.relative_residual < 1e-14);
        assert!(r.l.approx_eq(&(-&sx), 1e-14));

        let x = LinearOperator::diagonal("a", &[1.0, 0.2]);
        let coupled = &kron(&h, &LinearOperator::identity("x", 2)) - &kron(&x, &sx);
        let r = is_equivalent(&coupled, &h, &px, TOL).unwrap();
        // residual of the best fit is ‖(X − tr X/2)⊗σ₁‖ = 0.4
        assert!(!r.equivalent);
        assert!((r.relative_residual - 0.4 / coupled.norm()).abs() < 1e-12);

        let uncoupled = kron(&h, &LinearOperator::identity("x", 2));
        let r = is_equivalent(&uncoupled, &h, &px, TOL).unwrap();
        assert!(r.relative_residual < 1e-14 && !r.l_in_a_plus && !r.equivalent);

        assert!(matches!(is_equivalent(&h2, &h, &orth("x", 3), TOL), Err(Error::BadFactorization { .. })));
    }

    #[test]
    fn relative_entropy_examples() {
        let a = LinearOperator::diagonal("q", &[0.5, 0.5]);
        let b = LinearOperator::diagonal("q", &[0.25, 0.75]);
        let expected = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((relative_entropy(&a, &b).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.143841).abs() < 1e-6);
        assert!(relative_entropy(&b, &b).unwrap() < 1e-15);
        let e0 = LinearOperator::diagonal("q", &[1.0, 0.0]);
        let e1 = LinearOperator::diagonal("q", &[0.0, 1.0]);
        assert_eq!(relative_entropy(&e0, &e1).unwrap(), f64::INFINITY);
        assert!(matches!(
            relative_entropy(&LinearOperator::diagonal("q", &[0.5, 0.6]), &b),
            Err(Error::NotDensityMatrix(_))
        ));
        // non-commuting pair: σ pure along (1,1)/√2, ρ mixed
        let plus = crate::numerics::density_of("q", &vector_from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(relative_entropy(&a, &plus).unwrap(), f64::INFINITY);
    }

    #[test]
    fn weak_equivalence_examples() {
        let h = seed();
        let p = orth("a", 2);
        let px = orth("x", 2);
        let p2 = tensor_cone(&p, &px);
        let sx = LinearOperator::sigma_x("x");
        let h2 = &kron(&h, &LinearOperator::identity("x", 2)) - &kron(&LinearOperator::identity("a", 2), &sx);
        let w = weak_equivalence_check(&h2, &p2, &h, &p, &px, TOL).unwrap();
        assert!(w.weak && w.omega_strictly_positive == Some(true));
        let omega = w.omega.unwrap();
        assert!((&omega - &uniform_vector(2)).norm() < 1e-12);

        let x = LinearOperator::diagonal("a", &[1.0, 0.2]);
        let coupled = &kron(&h, &LinearOperator::identity("x", 2)) - &kron(&x, &sx);
        let w = weak_equivalence_check(&coupled, &p2, &h, &p, &px, TOL).unwrap();
        assert!(!w.weak && w.entropy > 1e-6 && w.omega.is_none());

        let p1 = orth("x", 1);
        let same = h.clone().with_space("a⊗x");
        let w = weak_equivalence_check(&same, &p.clone().with_space("a⊗x"), &h, &p, &p1, TOL).unwrap();
        assert!(w.weak);
        assert!((w.omega.unwrap()[0] - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tower_members_are_equivalent_to_predecessors() {
        let chain = richness_tower(&seed(), &orth("a", 2), None, 3, TowerEmbedding::Uniform, TOL).unwrap();
        for w in chain.links().windows(2) {
            let px = orth("c2", 2);
            let r = is_equivalent(&w[1].hamiltonian, &w[0].hamiltonian, &px, TOL).unwrap();
            assert!(r.equivalent, "{r:?}");
        }
    }

    #[test]
    fn stability_class_admits_tower_members() {
        let (h, p, swap) = two_spin();
        let mut class = StabilityClass::new("h0", h.clone(), &p, swap.clone(), ObservableExtension::Ampliation, TOL).unwrap();
        let candidates: Vec<(String, ArrowChain)> = (1..=3)
            .map(|d| {
                let c = richness_tower(&h, &p, Some(&swap), d, TowerEmbedding::Uniform, TOL).unwrap();
                (format!("h{d}"), c)
            })
            .collect();
        let results = class.add_members(&candidates, TOL);
        assert!(results.iter().all(|(_, r)| r.is_ok()));
        assert_eq!(class.members.len(), 4);
        // set semantics: re-adding is idempotent
        class.add_member("h1", &candidates[0].1, TOL).unwrap();
        assert_eq!(class.members.len(), 4);
        assert!(class.members.values().all(|m| (m.snapped_mu - class.mu_star).abs() < 1e-12));
        // a chain from elsewhere is refused
        let other = richness_tower(&seed(), &orth("a", 2), None, 1, TowerEmbedding::Uniform, TOL).unwrap();
        assert!(class.add_member("x", &other, TOL).is_err());
        assert!(!class.contains("x"));
    }
}

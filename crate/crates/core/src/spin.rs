//! Spin-½ systems on a bipartite set of sites: spin operators, the
//! Marshall–Lieb–Mattis Hamiltonian `S_A · S_B`, magnetization sectors and
//! the Marshall-sign cone.
//!
//! Site 0 is the leftmost tensor factor and `|↑⟩ = e₀`, so site `x` of basis
//! index `i` is down iff bit `N − 1 − x` of `i` is set.

use std::collections::HashMap;

use serde::Serialize;

use crate::cones::SelfDualCone;
use crate::error::{Error, Result};
use crate::inheritance::Embedding;
use crate::numerics::{c64, hermitian_eig, CMatrix, LinearOperator, SpaceId};
use crate::positivity::{class_membership, in_class_a};
use crate::stability::{good_quantum_number, GoodQuantumNumber, MU_TOL};

pub const MAX_SITES: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpinSystem {
    sites: usize,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl SpinSystem {
    /// `a` and `b` must partition `0..sites`.
    pub fn new(sites: usize, mut a: Vec<usize>, mut b: Vec<usize>) -> Result<Self> {
        if sites == 0 || sites > MAX_SITES {
            return Err(Error::DimCap {
                dim: 1usize.checked_shl(sites as u32).unwrap_or(usize::MAX),
                cap: 1 << MAX_SITES,
            });
        }
        a.sort_unstable();
        b.sort_unstable();
        let mut seen = vec![0u8; sites];
        for &x in a.iter().chain(&b) {
            if x >= sites {
                return Err(Error::Invalid(format!("site {x} out of range 0..{sites}")));
            }
            seen[x] += 1;
        }
        if let Some(x) = seen.iter().position(|&c| c != 1) {
            return Err(Error::Invalid(format!("site {x} is not in exactly one sublattice")));
        }
        Ok(Self { sites, a, b })
    }

    /// Parses a pattern such as `"AABB"`: character `x` names the sublattice of site `x`.
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (x, ch) in pattern.chars().enumerate() {
            match ch {
                'A' | 'a' => a.push(x),
                'B' | 'b' => b.push(x),
                _ => return Err(Error::Invalid(format!("sublattice label {ch:?} at site {x}"))),
            }
        }
        Self::new(pattern.chars().count(), a, b)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn in_a(&self, x: usize) -> bool {
        self.a.binary_search(&x).is_ok()
    }

    /// `S* = ||A| − |B|| / 2`
    pub fn s_star(&self) -> f64 {
        (self.a.len() as f64 - self.b.len() as f64).abs() / 2.0
    }

    /// All `(x, y)` with `x ∈ A`, `y ∈ B`.
    pub fn complete_bipartite(&self) -> Vec<(usize, usize)> {
        self.a.iter().flat_map(|&x| self.b.iter().map(move |&y| (x, y))).collect()
    }

    fn down(&self, state: usize, x: usize) -> bool {
        state >> (self.sites - 1 - x) & 1 == 1
    }
}

/// Dense single-site spin operators on `(ℂ²)^{⊗N}`, built on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinOperators {
    sites: usize,
}

pub fn spin_operators(sites: usize) -> Result<SpinOperators> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::DimCap {
            dim: 1usize.checked_shl(sites as u32).unwrap_or(usize::MAX),
            cap: 1 << MAX_SITES,
        });
    }
    Ok(SpinOperators { sites })
}

impl SpinOperators {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn space(&self) -> SpaceId {
        SpaceId::new(format!("spin{}", self.sites))
    }

    /// `S_x^{(j)}` for `j ∈ {1, 2, 3}`.
    pub fn component(&self, site: usize, j: usize) -> LinearOperator {
        assert!(site < self.sites && (1..=3).contains(&j), "no component S_{site}^({j})");
        let d = self.dim();
        let mask = 1 << (self.sites - 1 - site);
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let down = i & mask != 0;
            match j {
                1 => m[(i ^ mask, i)] = c64(0.5, 0.0),
                2 => m[(i ^ mask, i)] = if down { c64(0.0, -0.5) } else { c64(0.0, 0.5) },
                _ => m[(i, i)] = c64(if down { -0.5 } else { 0.5 }, 0.0),
            }
        }
        LinearOperator::new(self.space(), m).expect("square")
    }

    /// `Σ_{x∈sites} S_x^{(j)}`
    pub fn sum(&self, sites: &[usize], j: usize) -> LinearOperator {
        sites
            .iter()
            .fold(LinearOperator::zeros(self.space(), self.dim()), |acc, &x| &acc + &self.component(x, j))
    }
}

/// `Σ c · S_x · S_y` over `pairs`, on the span of `states` (closed under
/// exchange of two sites). Pairs with `x = y` contribute `c · 3/4`.
fn exchange(sites: usize, states: &[usize], pairs: &[(usize, usize, f64)]) -> CMatrix {
    let index: HashMap<usize, usize> = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut m = CMatrix::zeros(states.len(), states.len());
    for (k, &s) in states.iter().enumerate() {
        for &(x, y, c) in pairs {
            if x == y {
                m[(k, k)] += c64(0.75 * c, 0.0);
                continue;
            }
            let (bx, by) = (1 << (sites - 1 - x), 1 << (sites - 1 - y));
            let same = (s & bx != 0) == (s & by != 0);
            if same {
                m[(k, k)] += c64(0.25 * c, 0.0);
            } else {
                m[(k, k)] += c64(-0.25 * c, 0.0);
                let t = index[&(s ^ bx ^ by)];
                m[(t, k)] += c64(0.5 * c, 0.0);
            }
        }
    }
    m
}

fn all_pairs(sites: &[usize], coeff: f64) -> Vec<(usize, usize, f64)> {
    sites.iter().flat_map(|&x| sites.iter().map(move |&y| (x, y, coeff))).collect()
}

/// `H_MLM = S_A · S_B` on the full space.
pub fn mlm_hamiltonian(sys: &SpinSystem) -> LinearOperator {
    let ops = spin_operators(sys.sites).expect("validated system");
    let states: Vec<usize> = (0..ops.dim()).collect();
    let pairs: Vec<_> = sys.complete_bipartite().into_iter().map(|(x, y)| (x, y, 1.0)).collect();
    LinearOperator::new(ops.space(), exchange(sys.sites, &states, &pairs)).expect("square")
}

/// `(S_tot², S³_tot)` on the full space.
pub fn total_spin(sites: usize) -> Result<(LinearOperator, LinearOperator)> {
    let ops = spin_operators(sites)?;
    let all: Vec<usize> = (0..sites).collect();
    let states: Vec<usize> = (0..ops.dim()).collect();
    let s2 = LinearOperator::new(ops.space(), exchange(sites, &states, &all_pairs(&all, 1.0)))?;
    Ok((s2, ops.sum(&all, 3)))
}

/// `ker(S³_tot − M)` spanned by the Ising states with `M = twice_m / 2`,
/// in ascending basis order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MSector {
    pub sites: usize,
    pub twice_m: i64,
    pub states: Vec<usize>,
}

impl MSector {
    pub fn new(sites: usize, twice_m: i64) -> Result<Self> {
        spin_operators(sites)?;
        let n = sites as i64;
        if twice_m.abs() > n || (n - twice_m) % 2 != 0 {
            return Err(Error::EmptySector { sites, twice_m });
        }
        let downs = ((n - twice_m) / 2) as u32;
        let states = (0..1usize << sites).filter(|s| s.count_ones() == downs).collect();
        Ok(Self { sites, twice_m, states })
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn space(&self) -> SpaceId {
        SpaceId::new(format!("spin{}_M{}", self.sites, self.twice_m))
    }

    /// Isometry onto the sector inside `(ℂ²)^{⊗N}`.
    pub fn embedding(&self) -> Embedding {
        let mut tau = CMatrix::zeros(1 << self.sites, self.dim());
        for (k, &s) in self.states.iter().enumerate() {
            tau[(s, k)] = c64(1.0, 0.0);
        }
        let full = SpaceId::new(format!("spin{}", self.sites));
        Embedding::new(self.space(), full, tau).expect("distinct basis vectors")
    }

    /// `τ† A τ` by index selection.
    pub fn restrict(&self, a: &LinearOperator) -> Result<LinearOperator> {
        a.require_dim(1 << self.sites)?;
        let m = a.matrix();
        let out = CMatrix::from_fn(self.dim(), self.dim(), |i, j| m[(self.states[i], self.states[j])]);
        LinearOperator::new(self.space(), out)
    }

    fn exchange(&self, pairs: &[(usize, usize, f64)]) -> LinearOperator {
        LinearOperator::new(self.space(), exchange(self.sites, &self.states, pairs)).expect("square")
    }

    pub fn total_spin_sq(&self) -> LinearOperator {
        let all: Vec<usize> = (0..self.sites).collect();
        self.exchange(&all_pairs(&all, 1.0))
    }
}

/// `H_MLM ↾ ℌ_M`, built directly in the sector.
pub fn mlm_sector(sys: &SpinSystem, sector: &MSector) -> Result<LinearOperator> {
    check_sites(sys, sector)?;
    let pairs: Vec<_> = sys.complete_bipartite().into_iter().map(|(x, y)| (x, y, 1.0)).collect();
    Ok(sector.exchange(&pairs))
}

/// `Σ_{(x,y)∈edges} S_x · S_y ↾ ℌ_M`; every edge must join `A` to `B`.
pub fn heisenberg_sector(sys: &SpinSystem, sector: &MSector, edges: &[(usize, usize)]) -> Result<LinearOperator> {
    check_sites(sys, sector)?;
    for &(x, y) in edges {
        if x >= sys.sites || y >= sys.sites || sys.in_a(x) == sys.in_a(y) {
            return Err(Error::Invalid(format!("edge ({x}, {y}) does not join the two sublattices")));
        }
    }
    let pairs: Vec<_> = edges.iter().map(|&(x, y)| (x, y, 1.0)).collect();
    Ok(sector.exchange(&pairs))
}

fn check_sites(sys: &SpinSystem, sector: &MSector) -> Result<()> {
    if sys.sites == sector.sites {
        Ok(())
    } else {
        Err(Error::DimMismatch {
            expected: sys.sites,
            found: sector.sites,
        })
    }
}

fn sign_cone(sys: &SpinSystem, sector: &MSector, on_a: bool) -> Result<SelfDualCone> {
    let signs: Vec<f64> = sector
        .states
        .iter()
        .map(|&s| {
            let downs = (0..sys.sites)
                .filter(|&x| sys.in_a(x) == on_a && sys.down(s, x))
                .count();
            if downs % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let label = if on_a { "marshall_A" } else { "marshall_B" };
    SelfDualCone::signed_orthant(sector.space(), label, &signs)
}

/// Cone generated by `(−1)^{#down on A} |σ⟩` over the Ising states of the
/// sector, checked to put `H_MLM ↾ ℌ_M` in the class for both sublattice
/// gauges.
pub fn marshall_cone(sys: &SpinSystem, sector: &MSector, tol: f64) -> Result<SelfDualCone> {
    let h = mlm_sector(sys, sector)?;
    marshall_cone_for(sys, sector, &h, tol)
}

/// `marshall_cone` validated against an arbitrary sector Hamiltonian.
pub fn marshall_cone_for(sys: &SpinSystem, sector: &MSector, h: &LinearOperator, tol: f64) -> Result<SelfDualCone> {
    let cone = sign_cone(sys, sector, true)?;
    if !in_class_a(h, &cone, tol)? {
        return Err(Error::SignRuleFailed(format!(
            "Hamiltonian on {} is not Metzler with signs on A",
            sector.space()
        )));
    }
    if !in_class_a(h, &sign_cone(sys, sector, false)?, tol)? {
        return Err(Error::SignRuleFailed(format!(
            "Hamiltonian on {} is not Metzler with signs on B",
            sector.space()
        )));
    }
    Ok(cone)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MlmReport {
    pub sites: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub twice_m: i64,
    pub sector_dim: usize,
    pub s_star: f64,
    pub expected_mu: f64,
    pub mu: GoodQuantumNumber,
    pub spectrum: Vec<f64>,
    pub in_a_plus: bool,
}

/// `μ(H_MLM ↾ ℌ_M)` for `O = S_tot²` and the Marshall cone, compared with
/// `S*(S* + 1)`.
pub fn verify_mlm(sys: &SpinSystem, twice_m: i64, tol: f64) -> Result<MlmReport> {
    let sector = MSector::new(sys.sites, twice_m)?;
    let h = mlm_sector(sys, &sector)?;
    let cone = marshall_cone_for(sys, &sector, &h, tol)?;
    let o = sector.total_spin_sq();
    let in_a_plus = class_membership(&h, &cone, tol)?.in_a_plus();
    let mu = good_quantum_number(&h, &o, &cone, tol)?;
    let s_star = sys.s_star();
    let expected_mu = s_star * (s_star + 1.0);
    if (mu.snapped_mu - expected_mu).abs() > MU_TOL * o.norm().max(1.0) {
        return Err(Error::MuMismatch {
            index: 0,
            expected: expected_mu,
            found: mu.snapped_mu,
        });
    }
    Ok(MlmReport {
        sites: sys.sites,
        a: sys.a.clone(),
        b: sys.b.clone(),
        twice_m,
        sector_dim: sector.dim(),
        s_star,
        expected_mu,
        mu,
        spectrum: hermitian_eig(&h)?.eigenvalues,
        in_a_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{spectral_norm, C64};

    const TOL: f64 = 1e-9;

    fn eigenvalues(op: &LinearOperator) -> Vec<f64> {
        hermitian_eig(op).unwrap().eigenvalues
    }

    #[test]
    fn single_site() {
        let ops = spin_operators(1).unwrap();
        assert!(ops.component(0, 3).approx_eq(&LinearOperator::diagonal("spin1", &[0.5, -0.5]), 0.0));
        let (s2, s3) = total_spin(1).unwrap();
        assert!(s2.approx_eq(&LinearOperator::identity("spin1", 2).scaled(0.75), 1e-15));
        assert_eq!(s3.trace(), C64::new(0.0, 0.0));
    }

    #[test]
    fn commutation_relations() {
        let ops = spin_operators(3).unwrap();
        let eps = |j: usize, k: usize, l: usize| -> f64 {
            match (j, k, l) {
                (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
                (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
                _ => 0.0,
            }
        };
        for x in 0..3 {
            for y in 0..3 {
                for j in 1..=3 {
                    for k in 1..=3 {
                        let lhs = ops.component(x, j).commutator(&ops.component(y, k)).unwrap();
                        let mut rhs = LinearOperator::zeros(ops.space(), 8);
                        if x == y {
                            for l in 1..=3 {
                                let term = ops.component(x, l).into_matrix() * c64(0.0, eps(j, k, l));
                                rhs = &rhs + &LinearOperator::new(ops.space(), term).unwrap();
                            }
                        }
                        assert!(spectral_norm((&lhs - &rhs).matrix()) <= 1e-12, "x={x} y={y} j={j} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn total_spin_two_sites() {
        let (s2, s3) = total_spin(2).unwrap();
        let ev = eigenvalues(&s2);
        for (a, b) in ev.iter().zip([0.0, 2.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s3.trace().norm() < 1e-15);
        // against Σ_j (S_tot^{(j)})²
        let ops = spin_operators(2).unwrap();
        let mut sum = LinearOperator::zeros(ops.space(), 4);
        for j in 1..=3 {
            let s = ops.sum(&[0, 1], j);
            sum = &sum + &(&s * &s);
        }
        assert!(sum.approx_eq(&s2, 1e-14));
    }

    #[test]
    fn mlm_two_sites() {
        let sys = SpinSystem::new(2, vec![0], vec![1]).unwrap();
        let ev = eigenvalues(&mlm_hamiltonian(&sys));
        for (a, b) in ev.iter().zip([-0.75, 0.25, 0.25, 0.25]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn dense_dot(ops: &SpinOperators, a: &[usize], b: &[usize]) -> LinearOperator {
        let mut sum = LinearOperator::zeros(ops.space(), ops.dim());
        for j in 1..=3 {
            sum = &sum + &(&ops.sum(a, j) * &ops.sum(b, j));
        }
        sum
    }

    #[test]
    fn mlm_matches_operator_definition_and_identity() {
        for pattern in ["AB", "AAB", "ABAB", "AAAB", "ABBAB"] {
            let sys = SpinSystem::from_pattern(pattern).unwrap();
            let ops = spin_operators(sys.sites()).unwrap();
            let h = mlm_hamiltonian(&sys);
            assert!(h.approx_eq(&dense_dot(&ops, sys.a(), sys.b()), 1e-14), "{pattern}");
            let (s2, s3) = total_spin(sys.sites()).unwrap();
            let sa2 = dense_dot(&ops, sys.a(), sys.a());
            let sb2 = dense_dot(&ops, sys.b(), sys.b());
            let rhs = (&(&s2 - &sa2) - &sb2).scaled(0.5);
            assert!(spectral_norm((&h - &rhs).matrix()) <= 1e-12);
            assert!(spectral_norm(h.commutator(&s2).unwrap().matrix()) <= 1e-10);
            assert!(spectral_norm(h.commutator(&s3).unwrap().matrix()) <= 1e-10);
        }
    }

    #[test]
    fn sectors_partition_the_space() {
        for n in 1..=8 {
            let total: usize = (-(n as i64)..=n as i64)
                .filter_map(|tm| MSector::new(n, tm).ok())
                .map(|s| s.dim())
                .sum();
            assert_eq!(total, 1 << n);
        }
        let (_, s3) = total_spin(4).unwrap();
        for tm in [-4, -2, 0, 2, 4] {
            let sec = MSector::new(4, tm).unwrap();
            let r = sec.restrict(&s3).unwrap();
            assert!(r.approx_eq(&LinearOperator::identity(sec.space(), sec.dim()).scaled(sec.m()), 1e-15));
        }
        assert_eq!(MSector::new(4, 0).unwrap().dim(), 6);
        assert!(matches!(MSector::new(4, 6), Err(Error::EmptySector { sites: 4, twice_m: 6 })));
        assert!(matches!(MSector::new(4, 1), Err(Error::EmptySector { .. })));
    }

    #[test]
    fn sector_operators_match_restriction() {
        let sys = SpinSystem::from_pattern("ABBA").unwrap();
        let sec = MSector::new(4, 0).unwrap();
        let direct = mlm_sector(&sys, &sec).unwrap();
        let restricted = sec.restrict(&mlm_hamiltonian(&sys)).unwrap();
        assert!(direct.approx_eq(&restricted, 1e-15));
        let emb = sec.embedding();
        assert!(emb.compress(&mlm_hamiltonian(&sys)).unwrap().approx_eq(&restricted, 1e-15));
        let (s2, _) = total_spin(4).unwrap();
        assert!(sec.total_spin_sq().approx_eq(&sec.restrict(&s2).unwrap(), 1e-15));
    }

    #[test]
    fn marshall_two_sites() {
        let sys = SpinSystem::new(2, vec![0], vec![1]).unwrap();
        let sec = MSector::new(2, 0).unwrap();
        let cone = marshall_cone(&sys, &sec, TOL).unwrap();
        // states |↑↓⟩ = index 1, |↓↑⟩ = index 2
        assert_eq!(sec.states, vec![1, 2]);
        assert_eq!(cone.generator(0)[0], c64(1.0, 0.0));
        assert_eq!(cone.generator(1)[1], c64(-1.0, 0.0));
    }

    #[test]
    fn marshall_four_sites_metzler() {
        let sys = SpinSystem::from_pattern("AABB").unwrap();
        let sec = MSector::new(4, 0).unwrap();
        let cone = marshall_cone(&sys, &sec, TOL).unwrap();
        assert_eq!(cone.dim(), 6);
        assert!(class_membership(&mlm_sector(&sys, &sec).unwrap(), &cone, TOL).unwrap().in_a_plus());
    }

    #[test]
    fn wrong_sign_rule_is_reported() {
        // unsigned basis: the exchange term is a positive off-diagonal entry
        let sys = SpinSystem::from_pattern("AB").unwrap();
        let sec = MSector::new(2, 0).unwrap();
        let h = mlm_sector(&sys, &sec).unwrap();
        assert!(!in_class_a(&h, &SelfDualCone::orthant(sec.space(), 2), TOL).unwrap());
        // a ferromagnetic sign flips the rule
        let ferro = h.scaled(-1.0);
        assert!(matches!(marshall_cone_for(&sys, &sec, &ferro, TOL), Err(Error::SignRuleFailed(_))));
    }

    #[test]
    fn verify_mlm_examples() {
        let r = verify_mlm(&SpinSystem::from_pattern("AABB").unwrap(), 0, TOL).unwrap();
        assert!(r.mu.snapped_mu.abs() < 1e-12 && r.s_star == 0.0);
        assert!((r.spectrum[0] + 2.0).abs() < 1e-12);
        let r = verify_mlm(&SpinSystem::from_pattern("AAAB").unwrap(), 0, TOL).unwrap();
        assert!((r.mu.snapped_mu - 2.0).abs() < 1e-12 && r.s_star == 1.0);
        assert!((r.spectrum[0] + 1.25).abs() < 1e-12);
        let r = verify_mlm(&SpinSystem::from_pattern("AB").unwrap(), 0, TOL).unwrap();
        assert!(r.mu.snapped_mu.abs() < 1e-12);
    }

    #[test]
    fn heisenberg_ring_in_marshall_cone() {
        let sys = SpinSystem::from_pattern("ABABAB").unwrap();
        let sec = MSector::new(6, 0).unwrap();
        let edges: Vec<(usize, usize)> = (0..6).map(|x| (x, (x + 1) % 6)).collect();
        let h = heisenberg_sector(&sys, &sec, &edges).unwrap();
        let cone = marshall_cone_for(&sys, &sec, &h, TOL).unwrap();
        assert!(class_membership(&h, &cone, TOL).unwrap().in_a_plus());
        assert!(heisenberg_sector(&sys, &sec, &[(0, 2)]).is_err());
    }

    #[test]
    fn invalid_systems() {
        assert!(SpinSystem::new(3, vec![0, 1], vec![1, 2]).is_err());
        assert!(SpinSystem::new(3, vec![0], vec![1]).is_err());
        assert!(SpinSystem::from_pattern("ABC").is_err());
        assert!(matches!(spin_operators(13), Err(Error::DimCap { dim: 8192, cap: 4096 })));
    }
}

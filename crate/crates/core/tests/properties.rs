mod common;

use common::*;
use conecalc::cones::SelfDualCone;
use conecalc::inheritance::{arrow, chain_verify, cone_inherits, nnls, ArrowChain, Embedding};
use conecalc::lattice::{build_lattice, LatticeSpec};
use conecalc::numerics::{c64, density_of, op_exp, CVector, LinearOperator, SpaceId};
use conecalc::positivity::{class_membership, classify};
use conecalc::spin::{verify_mlm, SpinSystem};
use conecalc::stability::{
    is_equivalent, mu_chain_invariance_with, relative_entropy, richness_tower, ObservableExtension, StabilityClass,
    TowerEmbedding,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Metzler, irreducible (dense) seed on `a`.
fn seed_hamiltonian(seed: u64, n: usize) -> LinearOperator {
    let mut rng = rng(seed);
    op("a", &random_metzler(&mut rng, n, 1.0, 0.2))
}

fn positive_unit(rng: &mut impl Rng, n: usize) -> CVector {
    let v: DVector<f64> = DVector::from_fn(n, |_, _| rng.gen_range(0.1..1.0));
    let v = &v / v.norm();
    CVector::from_iterator(n, v.iter().map(|&x| c64(x, 0.0)))
}

fn tower(h: &LinearOperator, depth: usize) -> ArrowChain {
    let p = SelfDualCone::orthant(h.space().clone(), h.dim());
    richness_tower(h, &p, None, depth, TowerEmbedding::Uniform, TOL).unwrap()
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn metzler_generator_gives_positive_semigroup(seed in any::<u64>(), n in 2usize..7, beta in 0.01f64..5.0) {
        let mut rng = rng(seed);
        let density = rng.gen_range(0.0..1.0);
        let m = random_metzler(&mut rng, n, density, 0.0);
        let u = random_orthogonal(&mut rng, n);
        let h = &u * m * u.transpose();
        let cone = rotated_cone("h", &u);
        let e = op_exp(&op("h", &h), -beta).unwrap();
        prop_assert!(classify(&e, &cone, TOL).unwrap().preserving);
        let oracle = u.transpose() * expm(&h, -beta) * &u;
        prop_assert!(oracle.min() >= -1e-12 * oracle.max().max(1.0));
    }

    #[test]
    fn strict_class_iff_irreducible_metzler(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = rng(seed);
        let density = rng.gen_range(0.1..1.0);
        let m = random_metzler(&mut rng, n, density, 0.3);
        let c = class_membership(&op("h", &m), &SelfDualCone::orthant("h", n), TOL).unwrap();
        prop_assert!(c.metzler);
        prop_assert_eq!(c.in_a_plus(), connected(&m, 0.0));
    }

    #[test]
    fn inheritance_is_transitive(seed in any::<u64>(), n in 1usize..4, k in 2usize..4, l in 2usize..4) {
        let mut rng = rng(seed);
        let (w1, w2) = (positive_unit(&mut rng, k), positive_unit(&mut rng, l));
        let (a, f1, f2) = (SpaceId::new("a"), SpaceId::new("f1"), SpaceId::new("f2"));
        let t1 = Embedding::append_factor(a.clone(), n, &f1, &w1).unwrap();
        let t2 = Embedding::append_factor(a.tensor(&f1), n * k, &f2, &w2).unwrap();
        let p1 = SelfDualCone::orthant(a, n);
        let p2 = p1.tensor(&SelfDualCone::orthant(f1, k));
        let p3 = p2.tensor(&SelfDualCone::orthant(f2, l));
        prop_assert!(cone_inherits(&p1, &p2, &t1, TOL).unwrap().holds());
        prop_assert!(cone_inherits(&p2, &p3, &t2, TOL).unwrap().holds());
        let composed = t1.then(&t2).unwrap();
        prop_assert!(cone_inherits(&p1, &p3, &composed, TOL).unwrap().holds());
    }

    #[test]
    fn arrows_compose_along_towers(seed in any::<u64>(), n in 2usize..4, a in 1usize..3, b in 1usize..3) {
        let h = seed_hamiltonian(seed, n);
        let first = tower(&h, a);
        let last = first.last();
        let second = tower(&last.hamiltonian, b);
        let joined = first.concat(&second).unwrap();
        prop_assert_eq!(joined.len(), a + b + 1);
        let report = chain_verify(&joined, TOL).unwrap();
        prop_assert_eq!(report.links.len(), a + b);
        // the overlap of a composite chain factors over its links
        let product: f64 = report.links.iter().map(|l| l.overlap).product();
        prop_assert!((product - report.overlap_product).abs() < 1e-12);
    }

    #[test]
    fn verified_chains_are_reflexive_and_transitive(seed in any::<u64>(), n in 2usize..4) {
        let h = seed_hamiltonian(seed, n);
        let p = SelfDualCone::orthant("a", n);
        let id = Embedding::identity("a", n);
        prop_assert!(arrow(&h, &p, &h, &p, &id, TOL).unwrap().holds());
        let mut refl = ArrowChain::start(h.clone(), p.clone()).unwrap();
        refl.push_same(h.clone(), p.clone(), id).unwrap();
        prop_assert!(chain_verify(&refl, TOL).is_ok());
        let ab = tower(&h, 1);
        let bc = tower(&ab.last().hamiltonian, 1);
        prop_assert!(chain_verify(&ab.concat(&bc).unwrap(), TOL).is_ok());
    }

    #[test]
    fn members_of_a_later_class_join_the_earlier_one(seed in any::<u64>(), n in 2usize..4, depth in 1usize..3) {
        // H₁ → H₂ and any verified member of the class of H₂ lies in the class of H₁
        let h1 = seed_hamiltonian(seed, n);
        let o = LinearOperator::identity("a", n);
        let to_h2 = tower(&h1, 1);
        let h2 = to_h2.last();
        let from_h2 = tower(&h2.hamiltonian, depth);
        let o2 = LinearOperator::identity(h2.hamiltonian.space().clone(), h2.hamiltonian.dim());
        let mut class2 = StabilityClass::new(
            "h2", h2.hamiltonian.clone(), &h2.cone, o2, ObservableExtension::Ampliation, TOL,
        ).unwrap();
        class2.add_member("m", &from_h2, TOL).unwrap();
        prop_assert!(class2.contains("m"));
        let mut class1 = StabilityClass::new(
            "h1", h1.clone(), &SelfDualCone::orthant("a", n), o, ObservableExtension::Ampliation, TOL,
        ).unwrap();
        class1.add_member("m", &to_h2.concat(&from_h2).unwrap(), TOL).unwrap();
        prop_assert!(class1.contains("m"));
        prop_assert_eq!(class1.members["m"].snapped_mu, class1.mu_star);
    }

    #[test]
    fn nnls_recovers_nonnegative_combinations(seed in any::<u64>(), m in 2usize..7, k in 1usize..5) {
        let mut rng = rng(seed);
        let k = k.min(m);
        let a = DMatrix::from_fn(m, k, |_, _| rng.gen_range(-1.0..1.0));
        let x = DVector::from_fn(k, |_, _| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) });
        let (sol, residual) = nnls(&a, &(&a * &x));
        prop_assert!(sol.iter().all(|&v| v >= 0.0));
        prop_assert!(residual < 1e-8, "residual {}", residual);
    }

    #[test]
    fn relative_entropy_is_nonnegative_and_vanishes_on_the_diagonal(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = rng(seed);
        let mix = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut acc = DMatrix::<f64>::zeros(n, n);
            for _ in 0..n {
                let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                acc += &v * v.transpose();
            }
            let t = acc.trace();
            op("r", &(acc / t))
        };
        let (rho, sigma) = (mix(&mut rng), mix(&mut rng));
        let s = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);
        let v = positive_unit(&mut rng, n);
        let pure = density_of("r", &v).unwrap();
        prop_assert!(relative_entropy(&pure, &pure).unwrap().abs() < 1e-9);
    }
}

fn random_ergodic(rng: &mut rand_chacha::ChaCha8Rng, n: usize, space: &str) -> LinearOperator {
    loop {
        let density = rng.gen_range(0.4..1.0);
        let y = -random_metzler(rng, n, density, 0.2).map_with_location(|i, j, x| if i == j { 0.0 } else { x });
        if connected(&y, 0.0) {
            return op(space, &y);
        }
    }
}

fn swap_fixture(x: DMatrix<f64>, ys: Vec<LinearOperator>) -> LatticeSpec {
    let (sx, i2) = (sigma_x(), DMatrix::identity(2, 2));
    let h0 = -(kron(&sx, &i2) + kron(&i2, &sx));
    let swap = DMatrix::from_row_slice(4, 4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]);
    LatticeSpec::new(op("s", &h0), SelfDualCone::orthant("s", 4), op("s", &swap), op("s", &x), ys)
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn saturated_paths_preserve_mu(seed in any::<u64>(), n1 in 2usize..4, n2 in 2usize..4) {
        let mut rng = rng(seed);
        let ys = vec![random_ergodic(&mut rng, n1, "y1"), random_ergodic(&mut rng, n2, "y2")];
        // a nonnegative combination of 1 and σ₁⊗σ₁ commutes with the swap
        let (c0, c1) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..1.0));
        let x = DMatrix::identity(4, 4) * c0 + kron(&sigma_x(), &sigma_x()) * c1;
        let spec = swap_fixture(x, ys);
        let d = build_lattice(&spec, TOL).unwrap();
        prop_assert_eq!(d.edges.len(), 4);
        for path in [[1usize, 2], [2, 1]] {
            let mut chain = d.saturated_chain(&[], &[path[0]]).unwrap();
            let rest = d.saturated_chain(&[path[0]], &[1, 2]).unwrap();
            chain = chain.concat(&rest).unwrap();
            let r = mu_chain_invariance_with(&chain, &spec.o, ObservableExtension::Ampliation, TOL).unwrap();
            prop_assert!(r.mus.iter().all(|g| g.snapped_mu == d.mu_star));
        }
    }

    #[test]
    fn non_scalar_coupling_is_inequivalent(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = rng(seed);
        let y = random_ergodic(&mut rng, n, "y1");
        let (c0, c1) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..1.0));
        let x = DMatrix::identity(4, 4) * c0 + kron(&sigma_x(), &sigma_x()) * c1;
        let spec = swap_fixture(x, vec![y]);
        let d = build_lattice(&spec, TOL).unwrap();
        let node = &d.nodes[1];
        let eq = is_equivalent(&node.hamiltonian, &spec.h0, &SelfDualCone::orthant("y1", n), TOL).unwrap();
        prop_assert!(!eq.equivalent);
        prop_assert!(eq.relative_residual > 1e-6);
    }

    #[test]
    fn mlm_quantum_number_matches_s_star(pattern in "[AB]{2,8}", m_seed in any::<u64>()) {
        prop_assume!(pattern.contains('A') && pattern.contains('B'));
        let sys = SpinSystem::from_pattern(&pattern).unwrap();
        let s_star = sys.s_star();
        // sectors with |M| <= S* and 2M of the parity of N
        let n = pattern.len() as i64;
        let top = (2.0 * s_star).round() as i64;
        let choices: Vec<i64> = (-top..=top).filter(|t| (t - n).rem_euclid(2) == 0).collect();
        let twice_m = choices[(m_seed % choices.len() as u64) as usize];
        let r = verify_mlm(&sys, twice_m, TOL).unwrap();
        prop_assert!(r.in_a_plus);
        prop_assert!((r.mu.snapped_mu - s_star * (s_star + 1.0)).abs() < 1e-8);
        prop_assert!((r.mu.mu - r.mu.snapped_mu).abs() < 1e-8);
    }
}

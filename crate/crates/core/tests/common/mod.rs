#![allow(dead_code)]

use conecalc::cones::SelfDualCone;
use conecalc::numerics::{c64, LinearOperator};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn op(space: &str, m: &DMatrix<f64>) -> LinearOperator {
    LinearOperator::new(space, m.map(|x| c64(x, 0.0))).unwrap()
}

pub fn real_part(a: &LinearOperator) -> DMatrix<f64> {
    a.matrix().map(|z| z.re)
}

pub fn sigma_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Symmetric matrix with nonpositive off-diagonal entries. Each edge is
/// present with probability `density`; weights lie in `[-1, -floor]`.
pub fn random_metzler(rng: &mut ChaCha8Rng, n: usize, density: f64, floor: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rng.gen_range(-1.0..1.0);
        for j in 0..i {
            if rng.gen_bool(density) {
                let w = -rng.gen_range(floor..1.0);
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    m
}

/// Random real orthogonal matrix from the QR factorization of a Gaussian-ish sample.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q()
}

pub fn rotated_cone(space: &str, u: &DMatrix<f64>) -> SelfDualCone {
    SelfDualCone::new(space, "rotated", u.map(|x| c64(x, 0.0))).unwrap()
}

/// Lowest eigenpair and gap to the next eigenvalue.
pub struct Ground {
    pub energy: f64,
    pub vector: DVector<f64>,
    pub gap: f64,
}

pub fn ground(m: &DMatrix<f64>) -> Ground {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let v = eig.eigenvectors.column(order[0]).into_owned();
    let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
    Ground {
        energy: eig.eigenvalues[order[0]],
        vector: v * sign,
        gap: order.get(1).map_or(f64::INFINITY, |&k| eig.eigenvalues[k] - eig.eigenvalues[order[0]]),
    }
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `e^{tM}` by scaling and squaring a truncated Taylor series.
pub fn expm(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let a = m * t;
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * a.nrows() as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = a / 2f64.powi(squarings as i32);
    let n = a.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Strong connectivity of the graph with an edge wherever `|m_ij| > eps`, by
/// breadth-first search from every vertex.
pub fn connected(m: &DMatrix<f64>, eps: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|s| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = vec![s];
        while let Some(i) = queue.pop() {
            for j in 0..n {
                if !seen[j] && m[(j, i)].abs() > eps {
                    seen[j] = true;
                    queue.push(j);
                }
            }
        }
        seen.iter().all(|&b| b)
    })
}

//! Classification of operators against a simplicial cone.
//!
//! Everything is decided on the matrix `M = U† A U` of the operator in the
//! generator basis: `A` preserves the cone iff `M` is real and entrywise
//! nonnegative, and improves it iff the entries are strictly positive.
//! Semigroup positivity of `e^{-βH}` for all `β >= 0` is the Metzler
//! condition on `H` (nonpositive off-diagonal entries); the `semigroup`
//! module cross-checks that against sampled exponentials.

use std::collections::VecDeque;

use serde::Serialize;

use crate::cones::SelfDualCone;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, max_abs, CMatrix, CVector, LinearOperator, C64};

/// Entries below this fraction of the largest entry are treated as exact
/// zeros when building connectivity graphs.
pub const NEGLIGIBLE_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub value: [f64; 2],
}

impl Witness {
    fn at(m: &CMatrix, row: usize, col: usize) -> Self {
        let z = m[(row, col)];
        Self {
            row,
            col,
            value: [z.re, z.im],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub preserving: bool,
    pub improving: bool,
    pub real_form: bool,
    pub real_form_witness: Option<Witness>,
    pub preserving_witness: Option<Witness>,
    pub improving_witness: Option<Witness>,
}

fn argmax_by(m: &CMatrix, key: impl Fn(usize, usize, C64) -> f64) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = key(i, j, m[(i, j)]);
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    best
}

/// Classifies `A` as positivity preserving / improving w.r.t. `P`.
pub fn classify(a: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<PositivityReport> {
    let m = p.to_generator_basis(a.matrix())?;
    Ok(classify_generator_matrix(&m, tol))
}

/// Same as [`classify`] for a matrix already expressed in generator coordinates.
pub fn classify_generator_matrix(m: &CMatrix, tol: f64) -> PositivityReport {
    let scale = max_abs(m);
    let slack = tol * scale;
    let (ir, ic, imag) = argmax_by(m, |_, _, z| z.im.abs());
    let real_form = imag <= slack;
    let (nr, nc, neg_min) = argmax_by(m, |_, _, z| -z.re);
    let min_entry = -neg_min;

    let real_form_witness = (!real_form).then(|| Witness::at(m, ir, ic));
    let preserving = real_form && min_entry >= -slack;
    let improving = real_form && scale > 0.0 && min_entry >= slack;
    let fallback = || real_form_witness.unwrap_or_else(|| Witness::at(m, nr, nc));
    PositivityReport {
        preserving,
        improving,
        real_form,
        real_form_witness,
        preserving_witness: (!preserving).then(fallback),
        improving_witness: (!improving).then(fallback),
    }
}

/// `A ⊵ B`: both preserve the real form and `A - B` preserves `P`.
pub fn operator_order(a: &LinearOperator, b: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<bool> {
    a.require_dim(b.dim())?;
    if !classify(a, p, tol)?.real_form {
        return Err(Error::NotRealForm(format!("left operand {a}")));
    }
    if !classify(b, p, tol)?.real_form {
        return Err(Error::NotRealForm(format!("right operand {b}")));
    }
    // compare on the common scale so tiny differences are judged against |A|, |B|
    let diff = p.to_generator_basis(&(a.matrix() - b.matrix()))?;
    let scale = max_abs(&p.to_generator_basis(a.matrix())?).max(max_abs(&p.to_generator_basis(b.matrix())?));
    let slack = tol * scale;
    Ok(diff.iter().all(|z| z.re >= -slack && z.im.abs() <= slack))
}

/// Directed graph on generator indices; `adj[j]` lists `i` with an edge `j → i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorGraph {
    adj: Vec<Vec<usize>>,
}

impl GeneratorGraph {
    /// Edge `j → i` iff `weight(i, j) > tol·scale`, where `scale` is the
    /// largest `|weight|`. Weights in `(NEGLIGIBLE_REL·scale, tol·scale]` are
    /// neither edges nor zeros and raise [`Error::Indeterminate`].
    pub fn from_weights(n: usize, tol: f64, weight: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut scale = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(weight(i, j).abs());
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (j, out) in adj.iter_mut().enumerate() {
            for i in 0..n {
                let w = weight(i, j);
                if w > tol * scale {
                    out.push(i);
                } else if w > NEGLIGIBLE_REL * scale {
                    return Err(Error::Indeterminate { row: i, col: j, value: w });
                }
            }
        }
        Ok(Self { adj })
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Shortest path lengths from `source`; `dist[source] = 0`.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(j) = queue.pop_front() {
            let d = dist[j].unwrap_or(0);
            for &i in &self.adj[j] {
                if dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(i);
                }
            }
        }
        dist
    }

    /// `table[i][j]` = shortest path length `j → i`.
    pub fn distance_table(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.len();
        let columns: Vec<Vec<Option<usize>>> = (0..n).map(|j| self.bfs(j)).collect();
        (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
    }

    pub fn strongly_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        if self.bfs(0).iter().any(Option::is_none) {
            return false;
        }
        let mut rev = vec![Vec::new(); n];
        for (j, outs) in self.adj.iter().enumerate() {
            for &i in outs {
                rev[i].push(j);
            }
        }
        GeneratorGraph { adj: rev }.bfs(0).iter().all(Option::is_some)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub ergodic: bool,
    /// `k_table[i][j]`: least `k` with `⟨u_i|A^k u_j⟩ > 0`.
    pub k_table: Vec<Vec<Option<usize>>>,
    pub failing_pair: Option<(usize, usize)>,
}

impl ErgodicityReport {
    pub fn max_k(&self) -> Option<usize> {
        self.k_table.iter().flatten().copied().try_fold(0, |acc, k| k.map(|k| acc.max(k)))
    }
}

/// Ergodicity of a cone-preserving `A`: every pair of generators is connected
/// by some power `⟨u_i|A^k u_j⟩ > 0`, `k >= 0`.
pub fn is_ergodic(a: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<ErgodicityReport> {
    let m = p.to_generator_basis(a.matrix())?;
    if !classify_generator_matrix(&m, tol).preserving {
        return Err(Error::NotPreserving);
    }
    let graph = GeneratorGraph::from_weights(m.nrows(), tol, |i, j| m[(i, j)].re)?;
    let k_table = graph.distance_table();
    let failing_pair = k_table
        .iter()
        .enumerate()
        .find_map(|(i, row)| row.iter().position(Option::is_none).map(|j| (i, j)));
    Ok(ErgodicityReport {
        ergodic: failing_pair.is_none(),
        k_table,
        failing_pair,
    })
}

/// Membership of a Hermitian `H` in the class of generators of positivity
/// preserving (and improving) semigroups.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassMembership {
    pub real_form: bool,
    /// Off-diagonal entries nonpositive in the generator basis.
    pub metzler: bool,
    /// Off-diagonal graph of `-H` strongly connected.
    pub irreducible: bool,
}

impl ClassMembership {
    pub fn in_a(&self) -> bool {
        self.real_form && self.metzler
    }

    pub fn in_a_plus(&self) -> bool {
        self.in_a() && self.irreducible
    }
}

pub fn class_membership(h: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<ClassMembership> {
    h.require_hermitian()?;
    let m = p.to_generator_basis(h.matrix())?;
    let n = m.nrows();
    let scale = max_abs(&m);
    let slack = tol * scale;
    let real_form = m.iter().all(|z| z.im.abs() <= slack);
    let metzler = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].re <= slack));
    let irreducible = if real_form && metzler {
        GeneratorGraph::from_weights(n, tol, |i, j| if i == j { 0.0 } else { -m[(i, j)].re })?.strongly_connected()
    } else {
        false
    };
    Ok(ClassMembership {
        real_form,
        metzler,
        irreducible,
    })
}

/// `H ∈ 𝒜_P`: `(H+s)⁻¹ ⊵ 0` for all `s > -E(H)`.
pub fn in_class_a(h: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<bool> {
    Ok(class_membership(h, p, tol)?.in_a())
}

/// `H ∈ 𝒜⁺_P`: `(H+s)⁻¹ ⊳ 0` for all `s > -E(H)`.
pub fn in_class_a_plus(h: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<bool> {
    Ok(class_membership(h, p, tol)?.in_a_plus())
}

/// `sH + tH'` for `H, H' ∈ 𝒜_P`, `s, t > 0`; the result is checked to stay in `𝒜_P`.
pub fn positive_combination(
    h: &LinearOperator,
    h2: &LinearOperator,
    s: f64,
    t: f64,
    p: &SelfDualCone,
    tol: f64,
) -> Result<LinearOperator> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Invalid(format!("coefficients must be positive, got s={s}, t={t}")));
    }
    h.require_dim(h2.dim())?;
    for (name, op) in [("first", h), ("second", h2)] {
        if !in_class_a(op, p, tol)? {
            return Err(Error::InputNotInClass(format!("{name} operand {op}")));
        }
    }
    let out = &h.scaled(s) + &h2.scaled(t);
    if !in_class_a(&out, p, tol)? {
        return Err(Error::Inconsistent("positive combination left the class".into()));
    }
    Ok(out)
}

/// Rotates `v` by a global phase so the sum of its generator coordinates is
/// real and nonnegative.
pub fn align_phase(p: &SelfDualCone, v: &CVector) -> Result<CVector> {
    let sum: C64 = p.coords(v)?.iter().sum();
    if sum.norm() <= 1e-300 {
        return Ok(v.clone());
    }
    Ok(v * (sum.conj() / sum.norm()))
}

/// Ground state of a Hermitian operator with the phase fixed relative to a cone.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: CVector,
    pub gap01: f64,
    pub simple: bool,
}

pub fn ground_state(h: &LinearOperator, p: &SelfDualCone) -> Result<GroundState> {
    let spec = hermitian_eig(h)?;
    Ok(GroundState {
        energy: spec.ground_energy(),
        vector: align_phase(p, &spec.ground_vector())?,
        gap01: spec.gap01,
        simple: spec.ground_is_simple(),
    })
}

/// A nonzero ground vector lying in the cone, for `H ∈ 𝒜_P`: the real part
/// (w.r.t. `J`) of a ground vector, replaced by its modulus `ξ₊ + ξ₋`.
pub fn positive_ground_vector(h: &LinearOperator, p: &SelfDualCone, tol: f64) -> Result<CVector> {
    if !in_class_a(h, p, tol)? {
        return Err(Error::InputNotInClass(format!("{h} is not in the class for {}", p.label())));
    }
    let xi = hermitian_eig(h)?.ground_vector();
    let j_xi = p.involution(&xi)?;
    let re = (&xi + &j_xi).scale(0.5);
    let im = (&xi - &j_xi) * C64::new(0.0, -0.5);
    let real = if re.norm() >= im.norm() { re } else { im };
    // project away the rounding residue in the imaginary coordinates
    let c = p.coords(&real)?.map(|z| C64::new(z.re, 0.0));
    let real = p.from_coords(&c)?;
    let abs = p.jordan_decompose(&real)?.abs();
    let norm = abs.norm();
    Ok(abs.unscale(norm))
}

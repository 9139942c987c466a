//! Dense linear algebra over complex scalars: operators tagged with the space
//! they act on, Hermitian eigendecomposition with a fixed phase convention,
//! functional calculus, Kronecker products and partial traces.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative Hermiticity threshold: `max|M - M†| <= HERMITIAN_TOL * max|M|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative gap below which the lowest eigenvalue is reported as degenerate.
pub const SIMPLE_GAP_TOL: f64 = 1e-8;

/// Imaginary parts below this fraction of `max|M|` are dropped before
/// diagonalization so real symmetric inputs take the real solver.
const REAL_PATH_TOL: f64 = 1e-14;

const PHASE_TOL: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

pub fn vector_from_real(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)))
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = c64(1.0, 0.0);
    v
}

/// Uniform unit vector `(1/√n, …, 1/√n)`.
pub fn uniform_vector(dim: usize) -> CVector {
    CVector::from_element(dim, c64(1.0 / (dim as f64).sqrt(), 0.0))
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// `|x⟩⟨y|`
pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

/// Identifier of a registered Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpaceId(String);

impl SpaceId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Identifier of the tensor product space `self ⊗ other`.
    pub fn tensor(&self, other: &SpaceId) -> SpaceId {
        SpaceId(format!("{}⊗{}", self.0, other.0))
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpaceId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Registry of known spaces and their dimensions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpaceRegistry {
    dims: BTreeMap<SpaceId, usize>,
}

impl SpaceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: SpaceId, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Invalid(format!("space `{id}` has dimension 0")));
        }
        match self.dims.get(&id) {
            Some(&d) if d != dim => Err(Error::DimMismatch {
                expected: d,
                found: dim,
            }),
            _ => {
                self.dims.insert(id, dim);
                Ok(())
            }
        }
    }

    pub fn dim(&self, id: &SpaceId) -> Option<usize> {
        self.dims.get(id).copied()
    }

    /// Checks that `op` has the dimension registered for its space.
    pub fn check(&self, op: &LinearOperator) -> Result<()> {
        match self.dim(op.space()) {
            Some(d) if d == op.dim() => Ok(()),
            Some(d) => Err(Error::DimMismatch {
                expected: d,
                found: op.dim(),
            }),
            None => Err(Error::Invalid(format!("unknown space `{}`", op.space()))),
        }
    }
}

/// Dense square operator on a named space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct LinearOperator {
    space: SpaceId,
    matrix: CMatrix,
}

impl LinearOperator {
    pub fn new(space: impl Into<SpaceId>, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::Invalid("empty operator".into()));
        }
        Ok(Self {
            space: space.into(),
            matrix,
        })
    }

    /// Builds an operator from real row-major entries. Panics if not square.
    pub fn from_real_rows(space: impl Into<SpaceId>, rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            assert_eq!(rows[i].len(), n, "row {i} has wrong length");
            c64(rows[i][j], 0.0)
        });
        Self::new(space, m).expect("non-empty square matrix")
    }

    pub fn identity(space: impl Into<SpaceId>, dim: usize) -> Self {
        Self {
            space: space.into(),
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(space: impl Into<SpaceId>, dim: usize) -> Self {
        Self {
            space: space.into(),
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(space: impl Into<SpaceId>, values: &[f64]) -> Self {
        let n = values.len();
        Self {
            space: space.into(),
            matrix: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c64(values[i], 0.0)
                } else {
                    C64::default()
                }
            }),
        }
    }

    /// Pauli σ₁ on a 2-dimensional space.
    pub fn sigma_x(space: impl Into<SpaceId>) -> Self {
        Self::from_real_rows(space, &[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Same matrix on a renamed space.
    pub fn with_space(mut self, space: impl Into<SpaceId>) -> Self {
        self.space = space.into();
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        self.require_dim(x.len())?;
        Ok(&self.matrix * x)
    }

    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if dim == self.dim() {
            Ok(())
        } else {
            Err(Error::DimMismatch {
                expected: self.dim(),
                found: dim,
            })
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * self.max_abs()
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation <= HERMITIAN_TOL * self.max_abs() {
            Ok(())
        } else {
            Err(Error::NonHermitian {
                space: self.space.to_string(),
                deviation,
            })
        }
    }

    /// `AB - BA`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.require_dim(other.dim())?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    /// Entrywise closeness relative to the larger operand.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        self.dim() == other.dim()
            && max_abs(&(&self.matrix - &other.matrix))
                <= rel_tol * self.max_abs().max(other.max_abs()).max(1.0)
    }
}

impl fmt::Display for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}x{}]", self.space, self.dim(), self.dim())
    }
}

impl<'a> Add<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: &'a LinearOperator) -> LinearOperator {
        LinearOperator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: &'a LinearOperator) -> LinearOperator {
        LinearOperator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl<'a> Mul<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn mul(self, rhs: &'a LinearOperator) -> LinearOperator {
        LinearOperator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Neg for &LinearOperator {
    type Output = LinearOperator;
    fn neg(self) -> LinearOperator {
        LinearOperator {
            space: self.space.clone(),
            matrix: -&self.matrix,
        }
    }
}

/// Row-major rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| c64(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(values: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|p| c64(p[0], p[1])))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct OperatorJson {
    space: SpaceId,
    matrix: MatrixJson,
}

impl TryFrom<OperatorJson> for LinearOperator {
    type Error = Error;
    fn try_from(value: OperatorJson) -> Result<Self> {
        LinearOperator::new(value.space, matrix_from_json(&value.matrix)?)
    }
}

impl From<LinearOperator> for OperatorJson {
    fn from(op: LinearOperator) -> Self {
        OperatorJson {
            matrix: matrix_to_json(&op.matrix),
            space: op.space,
        }
    }
}

/// Ascending spectrum with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    /// `λ₁ - λ₀`, infinite in dimension one.
    pub gap01: f64,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_vector(&self) -> CVector {
        self.eigenvectors.column(0).into_owned()
    }

    /// Spectral norm of the diagonalized operator.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()))
    }

    /// Lowest eigenvalue separated by more than `SIMPLE_GAP_TOL·‖M‖`.
    pub fn ground_is_simple(&self) -> bool {
        self.gap01 > SIMPLE_GAP_TOL * self.norm()
    }

    /// `V f(Λ) V†`
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= w;
            }
        }
        scaled * v.adjoint()
    }
}

/// Full eigendecomposition of a Hermitian operator, eigenvalues ascending.
///
/// Each eigenvector is rotated so its first non-negligible component is real
/// and positive, which makes repeated runs bit-identical.
pub fn hermitian_eig(m: &LinearOperator) -> Result<Spectrum> {
    m.require_hermitian()?;
    let n = m.dim();
    let scale = m.max_abs();
    let imag = m.matrix.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));

    let (values, vectors): (Vec<f64>, CMatrix) = if imag <= REAL_PATH_TOL * scale {
        let re = DMatrix::from_fn(n, n, |i, j| 0.5 * (m.matrix[(i, j)].re + m.matrix[(j, i)].re));
        let eig = SymmetricEigen::new(re);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| c64(x, 0.0)),
        )
    } else {
        let herm = (&m.matrix + m.matrix.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(herm);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
        if let Some(lead) = col.iter().find(|z| z.norm() > PHASE_TOL).copied() {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
        eigenvectors.set_column(dst, &col);
    }
    let gap01 = if n > 1 {
        eigenvalues[1] - eigenvalues[0]
    } else {
        f64::INFINITY
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        gap01,
    })
}

/// `e^{tM}` for Hermitian `M`.
pub fn op_exp(m: &LinearOperator, t: f64) -> Result<LinearOperator> {
    if !t.is_finite() {
        return Err(Error::Invalid(format!("non-finite exponent {t}")));
    }
    let spec = hermitian_eig(m)?;
    let out = spec.map(|l| c64((t * l).exp(), 0.0));
    let herm = (&out + out.adjoint()).scale(0.5);
    LinearOperator::new(m.space.clone(), herm)
}

/// `e^{itM}` for Hermitian `M`.
pub fn unitary_exp(m: &LinearOperator, t: f64) -> Result<LinearOperator> {
    let spec = hermitian_eig(m)?;
    LinearOperator::new(m.space.clone(), spec.map(|l| C64::from_polar(1.0, t * l)))
}

/// Kronecker product on the product space.
pub fn kron(a: &LinearOperator, b: &LinearOperator) -> LinearOperator {
    LinearOperator {
        space: a.space.tensor(&b.space),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// Checks `rho` is a density matrix: Hermitian, unit trace, no eigenvalue
/// below `-tol`.
pub fn check_density(rho: &LinearOperator, tol: f64) -> Result<Spectrum> {
    rho.require_hermitian()
        .map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let spec = hermitian_eig(rho)?;
    if spec.eigenvalues[0] < -tol {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {:.3e}",
            spec.eigenvalues[0]
        )));
    }
    Ok(spec)
}

/// Traces out the right factor of a density matrix on `C^left ⊗ C^right`.
pub fn partial_trace(
    rho: &LinearOperator,
    left: usize,
    right: usize,
    kept_space: impl Into<SpaceId>,
) -> Result<LinearOperator> {
    if left * right != rho.dim() || left == 0 {
        return Err(Error::BadFactorization {
            dim: rho.dim(),
            left,
            right,
        });
    }
    check_density(rho, 1e-10)?;
    let m = &rho.matrix;
    let out = CMatrix::from_fn(left, left, |i, j| {
        (0..right).map(|k| m[(i * right + k, j * right + k)]).sum()
    });
    LinearOperator::new(kept_space, out)
}

/// Pure state density matrix `|ψ⟩⟨ψ|` of a normalized copy of `psi`.
pub fn density_of(space: impl Into<SpaceId>, psi: &CVector) -> Result<LinearOperator> {
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::Invalid("zero state vector".into()));
    }
    let v = psi.unscale(norm);
    LinearOperator::new(space, outer(&v, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sx() -> LinearOperator {
        LinearOperator::sigma_x("q")
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = hermitian_eig(&sx()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.gap01, 2.0, epsilon = 1e-14);
        // phase: first component real positive
        let g = s.ground_vector();
        assert!(g[0].re > 0.0 && g[0].im == 0.0);
    }

    #[test]
    fn identity_spectrum_is_degenerate() {
        let s = hermitian_eig(&LinearOperator::identity("s", 3)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(s.gap01, 0.0);
        assert!(!s.ground_is_simple());
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = LinearOperator::from_real_rows("s", &[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitian { .. })));
        assert!(matches!(op_exp(&m, 1.0), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn complex_hermitian_uses_complex_path() {
        let m = LinearOperator::new(
            "q",
            CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]),
        )
        .unwrap();
        let s = hermitian_eig(&m).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        let v = s.ground_vector();
        let r = &m.matrix * &v - v.scale(s.eigenvalues[0]);
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let e = op_exp(&sx(), 0.0).unwrap();
        assert!(e.approx_eq(&LinearOperator::identity("q", 2), 1e-14));
    }

    #[test]
    fn exp_of_minus_sigma_x_matches_cosh_sinh() {
        for beta in [0.1, 1.0, 3.0] {
            let e = op_exp(&sx(), -beta).unwrap();
            let (c, s) = (f64::cosh(beta), f64::sinh(beta));
            assert_abs_diff_eq!(e.matrix()[(0, 0)].re, c, epsilon = 1e-12 * c);
            assert_abs_diff_eq!(e.matrix()[(0, 1)].re, -s, epsilon = 1e-12 * c);
            let f = op_exp(&-&sx(), -beta).unwrap();
            assert!(f.matrix().iter().all(|z| z.re > 0.0));
            assert_abs_diff_eq!(f.matrix()[(1, 0)].re, s, epsilon = 1e-12 * c);
        }
    }

    #[test]
    fn kron_identities() {
        let i2 = LinearOperator::identity("a", 2);
        let i3 = LinearOperator::identity("b", 3);
        assert_eq!(kron(&i2, &i3).matrix(), &CMatrix::identity(6, 6));
        let k = kron(&sx(), &i2);
        let e1 = basis_vector(2, 0);
        let x = kron_vec(&e1, &e1);
        let y = k.apply(&x).unwrap();
        assert_eq!(y, kron_vec(&basis_vector(2, 1), &e1));
        assert_eq!(k.space().as_str(), "q⊗a");
    }

    #[test]
    fn partial_trace_of_product_and_bell_states() {
        let psi = vector_from_real(&[0.6, 0.8]);
        let omega = vector_from_real(&[0.0, 1.0, 0.0]);
        let rho = density_of("ab", &kron_vec(&psi, &omega)).unwrap();
        let red = partial_trace(&rho, 2, 3, "a").unwrap();
        assert!(red.approx_eq(&density_of("a", &psi).unwrap(), 1e-14));

        let bell = vector_from_real(&[1.0, 0.0, 0.0, 1.0]);
        let red = partial_trace(&density_of("ab", &bell).unwrap(), 2, 2, "a").unwrap();
        assert!(red.approx_eq(&LinearOperator::identity("a", 2).scaled(0.5), 1e-14));
    }

    #[test]
    fn partial_trace_bad_factorization() {
        let rho = LinearOperator::identity("s", 4).scaled(0.25);
        assert!(matches!(
            partial_trace(&rho, 3, 2, "a"),
            Err(Error::BadFactorization { .. })
        ));
        let not_density = LinearOperator::identity("s", 4);
        assert!(matches!(
            partial_trace(&not_density, 2, 2, "a"),
            Err(Error::NotDensityMatrix(_))
        ));
    }

    #[test]
    fn registry_checks_dimensions() {
        let mut reg = SpaceRegistry::new();
        reg.register("a".into(), 2).unwrap();
        assert!(reg.register("a".into(), 3).is_err());
        assert!(reg.check(&sx().with_space("a")).is_ok());
        assert!(reg.check(&LinearOperator::identity("a", 3)).is_err());
        assert!(reg.check(&LinearOperator::identity("zz", 3)).is_err());
    }

    #[test]
    fn operator_json_roundtrip() {
        let m = LinearOperator::new(
            "q",
            CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.5, -0.25), c64(0.5, 0.25), c64(-2.0, 0.0)]),
        )
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("[[[1.0,0.0],[0.5,-0.25]]"));
        let back: LinearOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<LinearOperator>(r#"{"space":"q","matrix":[[[1,0],[0,0]]]}"#).is_err());
    }
}

//! Simplicial self-dual cones.
//!
//! A cone here is `coni{u_1, …, u_n}` for an orthonormal basis `{u_i}` of the
//! space. Such a cone is its own dual, and everything about it (membership,
//! strict positivity, the involution `J`, Jordan parts) reads off the
//! coordinates `⟨u_i|x⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c64, matrix_from_json, matrix_to_json, max_abs, CMatrix, CVector, SpaceId, C64,
};

/// Default relative tolerance for membership tests.
pub const DEFAULT_TOL: f64 = 1e-9;

const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeJson", into = "ConeJson")]
pub struct SelfDualCone {
    space: SpaceId,
    label: String,
    /// Generators stacked as columns; unitary.
    generators: CMatrix,
}

impl SelfDualCone {
    /// Cone generated by the columns of `generators`, which must be an
    /// orthonormal basis.
    pub fn new(space: impl Into<SpaceId>, label: impl Into<String>, generators: CMatrix) -> Result<Self> {
        if !generators.is_square() || generators.nrows() == 0 {
            return Err(Error::DimMismatch {
                expected: generators.nrows(),
                found: generators.ncols(),
            });
        }
        let n = generators.nrows();
        let gram = generators.adjoint() * &generators;
        let deviation = max_abs(&(gram - CMatrix::identity(n, n)));
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::Invalid(format!(
                "cone generators are not orthonormal (deviation {deviation:.3e})"
            )));
        }
        Ok(Self {
            space: space.into(),
            label: label.into(),
            generators,
        })
    }

    /// `R₊ⁿ`, generated by the standard basis.
    pub fn orthant(space: impl Into<SpaceId>, n: usize) -> Self {
        assert!(n >= 1, "orthant needs n >= 1");
        Self {
            space: space.into(),
            label: format!("R+^{n}"),
            generators: CMatrix::identity(n, n),
        }
    }

    /// Cone generated by `signs[i]·e_i`.
    pub fn signed_orthant(space: impl Into<SpaceId>, label: impl Into<String>, signs: &[f64]) -> Result<Self> {
        let n = signs.len();
        let g = CMatrix::from_fn(n, n, |i, j| if i == j { c64(signs[i], 0.0) } else { C64::default() });
        Self::new(space, label, g)
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    pub fn generators(&self) -> &CMatrix {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> CVector {
        self.generators.column(i).into_owned()
    }

    /// Renames the space the cone lives in.
    pub fn with_space(mut self, space: impl Into<SpaceId>) -> Self {
        self.space = space.into();
        self
    }

    fn require_dim(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::DimMismatch {
                expected: self.dim(),
                found: len,
            })
        }
    }

    /// Generator coordinates `c_i = ⟨u_i|x⟩`.
    pub fn coords(&self, x: &CVector) -> Result<CVector> {
        self.require_dim(x.len())?;
        Ok(self.generators.adjoint() * x)
    }

    /// Vector with the given generator coordinates.
    pub fn from_coords(&self, c: &CVector) -> Result<CVector> {
        self.require_dim(c.len())?;
        Ok(&self.generators * c)
    }

    /// Matrix of `A` in the generator basis, `U† A U`.
    pub fn to_generator_basis(&self, a: &CMatrix) -> Result<CMatrix> {
        self.require_dim(a.nrows())?;
        Ok(self.generators.adjoint() * a * &self.generators)
    }

    /// `x ∈ P`: every coordinate real and nonnegative up to `tol·‖x‖`.
    pub fn contains(&self, x: &CVector, tol: f64) -> Result<bool> {
        let c = self.coords(x)?;
        let slack = tol * x.norm();
        Ok(c.iter().all(|z| z.re >= -slack && z.im.abs() <= slack))
    }

    /// `⟨ξ|x⟩ > 0` for every nonzero `ξ ∈ P`; for a simplicial cone this is
    /// `Re⟨u_i|x⟩ >= tol·‖x‖` for all `i`. The zero vector is never strictly
    /// positive.
    pub fn strictly_positive(&self, x: &CVector, tol: f64) -> Result<bool> {
        let c = self.coords(x)?;
        let norm = x.norm();
        if norm == 0.0 {
            return Ok(false);
        }
        let slack = tol * norm;
        Ok(c.iter().all(|z| z.re >= slack && z.im.abs() <= slack))
    }

    /// The antilinear involution fixing `P` pointwise: conjugation of the
    /// generator coordinates.
    pub fn involution(&self, x: &CVector) -> Result<CVector> {
        let c = self.coords(x)?.map(|z| z.conj());
        self.from_coords(&c)
    }

    /// Unique `x = plus - minus` with `plus, minus ∈ P` orthogonal. Requires
    /// `J x = x`.
    pub fn jordan_decompose(&self, x: &CVector) -> Result<JordanParts> {
        let c = self.coords(x)?;
        let imag = c.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
        if imag > 1e-10 * x.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NotReal(imag));
        }
        let plus = c.map(|z| c64(z.re.max(0.0), 0.0));
        let minus = c.map(|z| c64((-z.re).max(0.0), 0.0));
        Ok(JordanParts {
            plus: self.from_coords(&plus)?,
            minus: self.from_coords(&minus)?,
        })
    }

    /// `u = v₁ - v₂ + i(w₁ - w₂)` with all four parts in `P`,
    /// `⟨v₁|v₂⟩ = ⟨w₁|w₂⟩ = 0`.
    pub fn full_decompose(&self, u: &CVector) -> Result<FullDecomposition> {
        let c = self.coords(u)?;
        let part = |f: &dyn Fn(C64) -> f64| -> Result<CVector> { self.from_coords(&c.map(|z| c64(f(z), 0.0))) };
        Ok(FullDecomposition {
            v1: part(&|z| z.re.max(0.0))?,
            v2: part(&|z| (-z.re).max(0.0))?,
            w1: part(&|z| z.im.max(0.0))?,
            w2: part(&|z| (-z.im).max(0.0))?,
        })
    }

    /// `P ⊗ Q`, generated by `u_i ⊗ v_j` (index `i·dim(Q) + j`).
    pub fn tensor(&self, other: &SelfDualCone) -> SelfDualCone {
        SelfDualCone {
            space: self.space.tensor(&other.space),
            label: format!("{}⊗{}", self.label, other.label),
            generators: self.generators.kronecker(&other.generators),
        }
    }
}

/// `P ⊗ Q`
pub fn tensor_cone(p: &SelfDualCone, q: &SelfDualCone) -> SelfDualCone {
    p.tensor(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanParts {
    pub plus: CVector,
    pub minus: CVector,
}

impl JordanParts {
    /// `|x| = plus + minus`
    pub fn abs(&self) -> CVector {
        &self.plus + &self.minus
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullDecomposition {
    pub v1: CVector,
    pub v2: CVector,
    pub w1: CVector,
    pub w2: CVector,
}

impl FullDecomposition {
    pub fn recompose(&self) -> CVector {
        let i = c64(0.0, 1.0);
        &self.v1 - &self.v2 + (&self.w1 - &self.w2) * i
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ConeJson {
    space: SpaceId,
    label: String,
    /// One entry per generator, each a list of `[re, im]` pairs.
    generators: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<ConeJson> for SelfDualCone {
    type Error = Error;
    fn try_from(value: ConeJson) -> Result<Self> {
        // stored generator-major; transpose into columns
        let rows = matrix_from_json(&value.generators)?;
        SelfDualCone::new(value.space, value.label, rows.transpose())
    }
}

impl From<SelfDualCone> for ConeJson {
    fn from(cone: SelfDualCone) -> Self {
        ConeJson {
            generators: matrix_to_json(&cone.generators.transpose()),
            space: cone.space,
            label: cone.label,
        }
    }
}

//! Run configuration: declared spaces, cones, operators and embeddings,
//! resolved into core objects in declaration order.

use std::collections::BTreeMap;

use conecalc::cones::{tensor_cone, SelfDualCone};
use conecalc::inheritance::Embedding;
use conecalc::numerics::{c64, kron, CMatrix, CVector, LinearOperator, SpaceId, SpaceRegistry};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::SchemaError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub spaces: BTreeMap<String, usize>,
    #[serde(default)]
    pub cones: Vec<ConeDecl>,
    #[serde(default)]
    pub operators: Vec<OperatorDecl>,
    #[serde(default)]
    pub embeddings: Vec<EmbeddingDecl>,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub cone: Option<f64>,
}

/// A matrix or vector entry: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> conecalc::numerics::C64 {
        match self {
            Entry::Real(x) => c64(x, 0.0),
            Entry::Complex([re, im]) => c64(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDecl {
    pub id: String,
    #[serde(default)]
    pub space: Option<String>,
    #[serde(default)]
    pub orthant: bool,
    #[serde(default)]
    pub signs: Option<Vec<f64>>,
    /// Generators, one vector per entry.
    #[serde(default)]
    pub generators: Option<Vec<Vec<Entry>>>,
    /// Ids of cones whose tensor product this is, left to right.
    #[serde(default)]
    pub tensor: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub op: String,
    #[serde(default = "one")]
    pub coeff: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDecl {
    pub id: String,
    #[serde(default)]
    pub space: Option<String>,
    /// Rows of entries.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub diagonal: Option<Vec<f64>>,
    #[serde(default)]
    pub identity: bool,
    /// `"x"`, `"y"` or `"z"`.
    #[serde(default)]
    pub pauli: Option<String>,
    #[serde(default)]
    pub kron: Option<Vec<String>>,
    #[serde(default)]
    pub sum: Option<Vec<Term>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum EmbeddingKind {
    Identity,
    /// `φ ↦ φ ⊗ ω` with `ω` on the space `factor`.
    Append {
        factor: String,
        omega: Vec<Entry>,
    },
    /// Explicit isometry, columns indexed by the source space.
    Isometry {
        to: String,
        matrix: Vec<Vec<Entry>>,
    },
}

/// Unknown keys are rejected by `EmbeddingKind`, which sees every key
/// other than `id` and `from`.
#[derive(Clone, Debug, Deserialize)]
pub struct EmbeddingDecl {
    pub id: String,
    pub from: String,
    #[serde(flatten)]
    pub kind: EmbeddingKind,
}

impl RunConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, SchemaError> {
        let cfg: RunConfig = serde_json::from_slice(bytes).map_err(|e| SchemaError(format!("invalid config: {e}")))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(SchemaError(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn params<T: DeserializeOwned>(&self) -> Result<T, SchemaError> {
        let value = if self.params.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            self.params.clone()
        };
        serde_json::from_value(value).map_err(|e| SchemaError(format!("invalid params: {e}")))
    }
}

/// Every declared object, resolved.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub spaces: SpaceRegistry,
    pub cones: BTreeMap<String, SelfDualCone>,
    pub operators: BTreeMap<String, LinearOperator>,
    pub embeddings: BTreeMap<String, Embedding>,
}

fn schema<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> SchemaError + '_ {
    move |e| SchemaError(format!("{context}: {e}"))
}

fn matrix(rows: &[Vec<Entry>], context: &str) -> Result<CMatrix, SchemaError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(SchemaError(format!("{context}: ragged or empty matrix")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].value()))
}

fn vector(entries: &[Entry]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|e| e.value()))
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, SchemaError> {
        let mut model = Model::default();
        for (id, &dim) in &cfg.spaces {
            if dim == 0 {
                return Err(SchemaError(format!("space {id} has dimension 0")));
            }
            model.spaces.register(SpaceId::new(id.clone()), dim).map_err(schema("spaces"))?;
        }
        for decl in &cfg.cones {
            let cone = model.cone_decl(decl)?;
            model.insert_unique("cone", &decl.id)?;
            model.cones.insert(decl.id.clone(), cone);
        }
        for decl in &cfg.operators {
            let op = model.operator_decl(decl)?;
            model.insert_unique("operator", &decl.id)?;
            model.operators.insert(decl.id.clone(), op);
        }
        for decl in &cfg.embeddings {
            let emb = model.embedding_decl(decl)?;
            model.insert_unique("embedding", &decl.id)?;
            model.embeddings.insert(decl.id.clone(), emb);
        }
        Ok(model)
    }

    fn insert_unique(&self, kind: &str, id: &str) -> Result<(), SchemaError> {
        let taken = match kind {
            "cone" => self.cones.contains_key(id),
            "operator" => self.operators.contains_key(id),
            _ => self.embeddings.contains_key(id),
        };
        if taken {
            Err(SchemaError(format!("duplicate {kind} id {id:?}")))
        } else {
            Ok(())
        }
    }

    fn space_dim(&self, id: &str) -> Result<usize, SchemaError> {
        self.spaces
            .dim(&SpaceId::new(id))
            .ok_or_else(|| SchemaError(format!("unknown space id {id:?}")))
    }

    /// Registers a product space if it is new, checking its dimension otherwise.
    fn ensure_space(&mut self, space: &SpaceId, dim: usize) -> Result<(), SchemaError> {
        match self.spaces.dim(space) {
            Some(d) if d == dim => Ok(()),
            Some(d) => Err(SchemaError(format!("space {space} has dimension {d}, not {dim}"))),
            None => self.spaces.register(space.clone(), dim).map_err(schema("spaces")),
        }
    }

    fn cone_decl(&mut self, d: &ConeDecl) -> Result<SelfDualCone, SchemaError> {
        let ctx = format!("cone {:?}", d.id);
        let kinds = [d.orthant, d.signs.is_some(), d.generators.is_some(), d.tensor.is_some()];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(SchemaError(format!(
                "{ctx}: give exactly one of orthant, signs, generators, tensor"
            )));
        }
        if let Some(parts) = &d.tensor {
            let mut iter = parts.iter().map(|id| self.cone(id));
            let first = iter.next().ok_or_else(|| SchemaError(format!("{ctx}: empty tensor")))??.clone();
            let mut cone = first;
            for next in iter {
                cone = tensor_cone(&cone, next?);
            }
            self.ensure_space(&cone.space().clone(), cone.dim())?;
            return Ok(cone);
        }
        let space = d
            .space
            .as_deref()
            .ok_or_else(|| SchemaError(format!("{ctx}: missing space")))?;
        let dim = self.space_dim(space)?;
        let cone = if d.orthant {
            SelfDualCone::orthant(space, dim)
        } else if let Some(signs) = &d.signs {
            SelfDualCone::signed_orthant(space, d.id.clone(), signs).map_err(schema(&ctx))?
        } else {
            let gens = d.generators.as_ref().expect("one kind set");
            let columns = matrix(gens, &ctx)?.transpose();
            SelfDualCone::new(space, d.id.clone(), columns).map_err(schema(&ctx))?
        };
        if cone.dim() != dim {
            return Err(SchemaError(format!("{ctx}: dimension {} on space of dimension {dim}", cone.dim())));
        }
        Ok(cone)
    }

    fn operator_decl(&mut self, d: &OperatorDecl) -> Result<LinearOperator, SchemaError> {
        let ctx = format!("operator {:?}", d.id);
        let kinds = [
            d.matrix.is_some(),
            d.diagonal.is_some(),
            d.identity,
            d.pauli.is_some(),
            d.kron.is_some(),
            d.sum.is_some(),
        ];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(SchemaError(format!(
                "{ctx}: give exactly one of matrix, diagonal, identity, pauli, kron, sum"
            )));
        }
        if let Some(parts) = &d.kron {
            let mut iter = parts.iter().map(|id| self.operator(id));
            let mut op = iter.next().ok_or_else(|| SchemaError(format!("{ctx}: empty kron")))??.clone();
            for next in iter {
                op = kron(&op, next?);
            }
            self.ensure_space(&op.space().clone(), op.dim())?;
            return Ok(op);
        }
        if let Some(terms) = &d.sum {
            let first = terms.first().ok_or_else(|| SchemaError(format!("{ctx}: empty sum")))?;
            let base = self.operator(&first.op)?;
            let mut acc = LinearOperator::zeros(base.space().clone(), base.dim());
            for t in terms {
                let op = self.operator(&t.op)?;
                if op.dim() != acc.dim() {
                    return Err(SchemaError(format!("{ctx}: term {:?} has dimension {}", t.op, op.dim())));
                }
                acc = &acc + &op.scaled(t.coeff);
            }
            return Ok(acc);
        }
        let space = d
            .space
            .as_deref()
            .ok_or_else(|| SchemaError(format!("{ctx}: missing space")))?;
        let dim = self.space_dim(space)?;
        let op = if let Some(rows) = &d.matrix {
            LinearOperator::new(space, matrix(rows, &ctx)?).map_err(schema(&ctx))?
        } else if let Some(diag) = &d.diagonal {
            LinearOperator::diagonal(space, diag)
        } else if d.identity {
            LinearOperator::identity(space, dim)
        } else {
            let m = match d.pauli.as_deref() {
                Some("x") => [[c64(0.0, 0.0), c64(1.0, 0.0)], [c64(1.0, 0.0), c64(0.0, 0.0)]],
                Some("y") => [[c64(0.0, 0.0), c64(0.0, -1.0)], [c64(0.0, 1.0), c64(0.0, 0.0)]],
                Some("z") => [[c64(1.0, 0.0), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(-1.0, 0.0)]],
                other => return Err(SchemaError(format!("{ctx}: unknown pauli {other:?}"))),
            };
            LinearOperator::new(space, CMatrix::from_fn(2, 2, |i, j| m[i][j])).map_err(schema(&ctx))?
        };
        if op.dim() != dim {
            return Err(SchemaError(format!("{ctx}: dimension {} on space of dimension {dim}", op.dim())));
        }
        Ok(op)
    }

    fn embedding_decl(&mut self, d: &EmbeddingDecl) -> Result<Embedding, SchemaError> {
        let ctx = format!("embedding {:?}", d.id);
        let from_dim = self.space_dim(&d.from)?;
        let emb = match &d.kind {
            EmbeddingKind::Identity => Embedding::identity(d.from.as_str(), from_dim),
            EmbeddingKind::Append { factor, omega } => {
                let fdim = self.space_dim(factor)?;
                if omega.len() != fdim {
                    return Err(SchemaError(format!("{ctx}: omega has length {} on {factor}", omega.len())));
                }
                Embedding::append_factor(d.from.as_str(), from_dim, &SpaceId::new(factor.clone()), &vector(omega))
                    .map_err(schema(&ctx))?
            }
            EmbeddingKind::Isometry { to, matrix: rows } => {
                let to_dim = self.space_dim(to)?;
                let m = matrix(rows, &ctx)?;
                if m.shape() != (to_dim, from_dim) {
                    return Err(SchemaError(format!("{ctx}: shape {:?}, expected ({to_dim}, {from_dim})", m.shape())));
                }
                Embedding::new(d.from.as_str(), to.as_str(), m).map_err(schema(&ctx))?
            }
        };
        self.ensure_space(&emb.to_space().clone(), emb.to_dim())?;
        Ok(emb)
    }

    pub fn cone(&self, id: &str) -> Result<&SelfDualCone, SchemaError> {
        self.cones.get(id).ok_or_else(|| SchemaError(format!("unknown cone id {id:?}")))
    }

    pub fn operator(&self, id: &str) -> Result<&LinearOperator, SchemaError> {
        self.operators
            .get(id)
            .ok_or_else(|| SchemaError(format!("unknown operator id {id:?}")))
    }

    pub fn embedding(&self, id: &str) -> Result<&Embedding, SchemaError> {
        self.embeddings
            .get(id)
            .ok_or_else(|| SchemaError(format!("unknown embedding id {id:?}")))
    }

    /// Operator and cone that must act on spaces of equal dimension.
    pub fn pair(&self, op: &str, cone: &str) -> Result<(&LinearOperator, &SelfDualCone), SchemaError> {
        let (o, c) = (self.operator(op)?, self.cone(cone)?);
        if o.dim() != c.dim() {
            return Err(SchemaError(format!(
                "operator {op:?} (dimension {}) and cone {cone:?} (dimension {}) differ",
                o.dim(),
                c.dim()
            )));
        }
        Ok((o, c))
    }
}

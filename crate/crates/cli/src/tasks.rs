use conecalc::inheritance::{chain_verify, ArrowChain};
use conecalc::lattice::{build_lattice, hasse_export, verify_spec, LatticeSpec, DEFAULT_DIM_CAP};
use conecalc::positivity::{class_membership, classify, is_ergodic};
use conecalc::semigroup::trotter_verify;
use conecalc::spin::{verify_mlm, SpinSystem};
use conecalc::stability::{
    good_quantum_number, is_equivalent, mu_chain_invariance_with, richness_tower, weak_equivalence_check,
    ObservableExtension, StabilityClass, TowerEmbedding, MU_TOL,
};
use serde::Deserialize;

use crate::canonical::{canon, Canon};
use crate::config::{Model, RunConfig};
use crate::{Overrides, SchemaError, Task};

pub(crate) struct Outcome {
    pub pass: bool,
    pub payload: Canon,
    pub diagram: Option<String>,
}

impl Outcome {
    fn new(pass: bool, payload: Canon) -> Self {
        Self {
            pass,
            payload,
            diagram: None,
        }
    }
}

type TaskResult = Result<Result<Outcome, conecalc::Error>, SchemaError>;

pub(crate) fn dispatch(task: Task, cfg: &RunConfig, model: &Model, tol: f64, ov: &Overrides) -> TaskResult {
    match task {
        Task::Classify => classify_task(cfg, model, tol),
        Task::Mu => mu_task(cfg, model, tol),
        Task::Chain => chain_task(cfg, model, tol),
        Task::Lattice => lattice_task(cfg, model, tol),
        Task::Trotter => trotter_task(cfg, model, tol),
        Task::SpinDemo => spin_task(cfg, tol, ov),
        Task::Richness => richness_task(cfg, model, tol),
        Task::WeakEquiv => weak_task(cfg, model, tol),
        Task::Stability => stability_task(cfg, model, tol),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyParams {
    operator: String,
    cone: String,
}

fn classify_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: ClassifyParams = cfg.params()?;
    let (a, cone) = model.pair(&p.operator, &p.cone)?;
    Ok((|| {
        let report = classify(a, cone, tol)?;
        let mut payload = canon(&report);
        if report.preserving {
            match is_ergodic(a, cone, tol) {
                Ok(e) => payload.insert("ergodicity", canon(&e)),
                Err(e) => payload.insert("ergodicity", Canon::object([("error", Canon::Str(e.to_string()))])),
            }
        }
        if a.is_hermitian() {
            payload.insert("class", canon(&class_membership(a, cone, tol)?));
        }
        Ok(Outcome::new(true, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MuParams {
    hamiltonian: String,
    observable: String,
    cone: String,
    #[serde(default)]
    expected: Option<f64>,
}

fn mu_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: MuParams = cfg.params()?;
    let (h, cone) = model.pair(&p.hamiltonian, &p.cone)?;
    let o = model.operator(&p.observable)?;
    Ok((|| {
        let g = good_quantum_number(h, o, cone, tol)?;
        let pass = p
            .expected
            .is_none_or(|mu| (g.snapped_mu - mu).abs() <= MU_TOL * o.norm().max(1.0));
        let mut payload = canon(&g);
        if let Some(mu) = p.expected {
            payload.insert("expected", Canon::Float(mu));
        }
        Ok(Outcome::new(pass, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRef {
    hamiltonian: String,
    cone: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRef {
    hamiltonian: String,
    cone: String,
    /// Cone used as the target of the incoming arrow; defaults to `cone`.
    #[serde(default)]
    cone_prime: Option<String>,
    embedding: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainParams {
    start: NodeRef,
    links: Vec<LinkRef>,
    #[serde(default)]
    observable: Option<String>,
    #[serde(default)]
    extension: ObservableExtension,
}

fn chain_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: ChainParams = cfg.params()?;
    let (h, cone) = model.pair(&p.start.hamiltonian, &p.start.cone)?;
    let mut chain = ArrowChain::start(h.clone(), cone.clone()).map_err(|e| SchemaError(e.to_string()))?;
    for l in &p.links {
        let (h, cone) = model.pair(&l.hamiltonian, &l.cone)?;
        let prime = match &l.cone_prime {
            Some(id) => model.pair(&l.hamiltonian, id)?.1,
            None => cone,
        };
        let emb = model.embedding(&l.embedding)?;
        chain
            .push(h.clone(), prime.clone(), cone.clone(), emb.clone())
            .map_err(|e| SchemaError(format!("link {:?}: {e}", l.hamiltonian)))?;
    }
    let observable = p.observable.as_deref().map(|id| model.operator(id)).transpose()?;
    Ok((|| {
        let report = chain_verify(&chain, tol)?;
        let mut payload = Canon::object([("chain", canon(&report))]);
        if let Some(o) = observable {
            let mu = mu_chain_invariance_with(&chain, o, p.extension, tol)?;
            payload.insert("mu", canon(&mu));
        }
        Ok(Outcome::new(true, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeParams {
    h0: String,
    cone: String,
    observable: String,
    x: String,
    ys: Vec<String>,
    #[serde(default)]
    dim_cap: Option<usize>,
}

fn lattice_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: LatticeParams = cfg.params()?;
    let (h0, cone) = model.pair(&p.h0, &p.cone)?;
    let ys = p
        .ys
        .iter()
        .map(|id| model.operator(id).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = LatticeSpec::new(
        h0.clone(),
        cone.clone(),
        model.operator(&p.observable)?.clone(),
        model.operator(&p.x)?.clone(),
        ys,
    );
    spec.dim_cap = p.dim_cap.unwrap_or(DEFAULT_DIM_CAP);
    Ok((|| {
        let spec_report = verify_spec(&spec, tol)?;
        if !spec_report.passes() {
            return Ok(Outcome::new(false, Canon::object([("spec", canon(&spec_report))])));
        }
        let diagram = build_lattice(&spec, tol)?;
        let nodes: Vec<Canon> = diagram
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                Canon::object([
                    ("index", Canon::Int(i as i128)),
                    ("label", Canon::Str(n.label.clone())),
                    ("subset", canon(&n.subset)),
                    ("dim", Canon::Int(n.hamiltonian.dim() as i128)),
                    ("mu", canon(&n.mu)),
                    ("ergodic_k", canon(&n.ergodic_k)),
                ])
            })
            .collect();
        let payload = Canon::object([
            ("spec", canon(&spec_report)),
            ("ell", Canon::Int(diagram.ell as i128)),
            ("node_count", Canon::Int(diagram.nodes.len() as i128)),
            ("edge_count", Canon::Int(diagram.edges.len() as i128)),
            ("nodes", Canon::Seq(nodes)),
            ("edges", canon(&diagram.edges)),
            ("mu_star", Canon::Float(diagram.mu_star)),
        ]);
        Ok(Outcome {
            pass: true,
            payload,
            diagram: Some(hasse_export(&diagram)),
        })
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrotterParams {
    h: String,
    h2: String,
    cone: String,
    #[serde(default = "unit")]
    s: f64,
    #[serde(default = "unit")]
    t: f64,
    #[serde(default = "unit")]
    beta: f64,
    #[serde(default = "default_n_values")]
    n_values: Vec<usize>,
}

fn unit() -> f64 {
    1.0
}

fn default_n_values() -> Vec<usize> {
    (0..=8).map(|k| 1 << k).collect()
}

/// Accepted range for `err(2n)/err(n)`.
const HALVING: (f64, f64) = (0.25, 0.75);

fn trotter_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: TrotterParams = cfg.params()?;
    let (h, cone) = model.pair(&p.h, &p.cone)?;
    let h2 = model.pair(&p.h2, &p.cone)?.0;
    Ok((|| {
        let r = trotter_verify(h, h2, p.s, p.t, p.beta, &p.n_values, cone, tol)?;
        let ratios = r.error_ratios();
        let doubling = p.n_values.windows(2).all(|w| w[1] == 2 * w[0]);
        let halving = doubling && ratios.iter().all(|x| (HALVING.0..=HALVING.1).contains(x));
        let positive = r.positivity_ok.iter().all(|&b| b);
        let mut payload = canon(&r);
        payload.insert("error_ratios", canon(&ratios));
        payload.insert("halving", Canon::Bool(halving));
        Ok(Outcome::new(halving && positive, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinParams {
    #[serde(default)]
    sites: Option<usize>,
    #[serde(default)]
    partition: Option<String>,
    #[serde(default)]
    sector: Option<f64>,
}

fn spin_task(cfg: &RunConfig, tol: f64, ov: &Overrides) -> TaskResult {
    let p: SpinParams = cfg.params()?;
    let partition = ov
        .partition
        .clone()
        .or(p.partition)
        .ok_or_else(|| SchemaError("spin-demo needs a partition such as AABB".into()))?;
    let sys = SpinSystem::from_pattern(&partition).map_err(|e| SchemaError(e.to_string()))?;
    if let Some(n) = ov.sites.or(p.sites) {
        if n != sys.sites() {
            return Err(SchemaError(format!(
                "--sites {n} disagrees with partition of {} sites",
                sys.sites()
            )));
        }
    }
    let m = ov.sector.or(p.sector).unwrap_or(0.0);
    let twice = 2.0 * m;
    if twice.fract() != 0.0 {
        return Err(SchemaError(format!("sector {m} is not a half-integer")));
    }
    Ok(verify_mlm(&sys, twice as i64, tol).map(|r| Outcome::new(true, canon(&r))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RichnessParams {
    hamiltonian: String,
    cone: String,
    #[serde(default)]
    observable: Option<String>,
    depth: usize,
    #[serde(default)]
    embedding: TowerEmbedding,
}

fn richness_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: RichnessParams = cfg.params()?;
    let (h, cone) = model.pair(&p.hamiltonian, &p.cone)?;
    let o = p.observable.as_deref().map(|id| model.operator(id)).transpose()?;
    Ok((|| {
        let chain = richness_tower(h, cone, o, p.depth, p.embedding, tol)?;
        let report = chain_verify(&chain, tol)?;
        let dims: Vec<usize> = chain.links().iter().map(|l| l.hamiltonian.dim()).collect();
        let mut payload = Canon::object([
            ("depth", Canon::Int(p.depth as i128)),
            ("dims", canon(&dims)),
            ("chain", canon(&report)),
        ]);
        if let Some(o) = o {
            let mu = mu_chain_invariance_with(&chain, o, ObservableExtension::Ampliation, tol)?;
            payload.insert("mu", canon(&mu));
        }
        Ok(Outcome::new(true, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeakParams {
    h2: String,
    cone2: String,
    h_star: String,
    cone_star: String,
    cone_x: String,
    #[serde(default)]
    expect_weak: Option<bool>,
    #[serde(default)]
    expect_equivalent: Option<bool>,
}

fn weak_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: WeakParams = cfg.params()?;
    let (h2, p2) = model.pair(&p.h2, &p.cone2)?;
    let (hs, ps) = model.pair(&p.h_star, &p.cone_star)?;
    let px = model.cone(&p.cone_x)?;
    Ok((|| {
        let eq = is_equivalent(h2, hs, px, tol)?;
        let weak = weak_equivalence_check(h2, p2, hs, ps, px, tol)?;
        let pass = p.expect_weak.is_none_or(|w| w == weak.weak)
            && p.expect_equivalent.is_none_or(|e| e == eq.equivalent);
        let payload = Canon::object([("equivalence", canon(&eq)), ("weak", canon(&weak))]);
        Ok(Outcome::new(pass, payload))
    })())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Recipe {
    id: String,
    tower_depth: usize,
    #[serde(default)]
    embedding: TowerEmbedding,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityParams {
    base: String,
    cone: String,
    observable: String,
    #[serde(default)]
    extension: ObservableExtension,
    #[serde(default)]
    members: Vec<Recipe>,
}

fn stability_task(cfg: &RunConfig, model: &Model, tol: f64) -> TaskResult {
    let p: StabilityParams = cfg.params()?;
    let (h, cone) = model.pair(&p.base, &p.cone)?;
    let o = model.operator(&p.observable)?;
    Ok((|| {
        let mut class = StabilityClass::new(p.base.clone(), h.clone(), cone, o.clone(), p.extension, tol)?;
        let candidates = p
            .members
            .iter()
            .map(|r| Ok((r.id.clone(), richness_tower(h, cone, Some(o), r.tower_depth, r.embedding, tol)?)))
            .collect::<conecalc::Result<Vec<_>>>()?;
        let results = class.add_members(&candidates, tol);
        let rejected: Vec<Canon> = results
            .iter()
            .filter_map(|(id, r)| {
                r.as_ref().err().map(|e| {
                    Canon::object([("id", Canon::Str(id.clone())), ("reason", Canon::Str(e.to_string()))])
                })
            })
            .collect();
        let pass = rejected.is_empty();
        let mut payload = canon(&class);
        payload.insert("rejected", Canon::Seq(rejected));
        Ok(Outcome::new(pass, payload))
    })())
}

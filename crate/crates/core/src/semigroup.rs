//! Semigroup-side checks: resolvents, positivity of `e^{-βH}` for all `β`,
//! Trotter product approximants and positivity improvement of perturbed
//! semigroups.

use serde::Serialize;

use crate::cones::SelfDualCone;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, op_exp, spectral_norm, CMatrix, LinearOperator, C64};
use crate::positivity::{class_membership, classify, in_class_a, is_ergodic};

/// Default inverse temperatures for the sampled cross-checks.
pub const DEFAULT_BETAS: [f64; 3] = [0.1, 1.0, 10.0];

/// `(H + s)⁻¹`, defined for `s > -E(H)`.
pub fn resolvent(h: &LinearOperator, s: f64) -> Result<LinearOperator> {
    let spec = hermitian_eig(h)?;
    let bound = -spec.ground_energy();
    if s.is_nan() || s <= bound + 1e-10 {
        return Err(Error::SpectralBound { s, bound });
    }
    LinearOperator::new(h.space().clone(), spec.map(|l| C64::new((l + s).recip(), 0.0)))
}

/// `e^{-βH} ⊵ 0` for all `β >= 0`.
///
/// Decided by the Metzler criterion and cross-validated against `e^{-βH}`
/// at the sampled `β`: the criterion must equal the conjunction of the
/// samples, otherwise [`Error::Inconsistent`].
pub fn semigroup_positive_all_beta(h: &LinearOperator, p: &SelfDualCone, betas: &[f64], tol: f64) -> Result<bool> {
    let metzler = in_class_a(h, p, tol)?;
    let mut failing = None;
    for &beta in betas {
        if !classify(&op_exp(h, -beta)?, p, tol)?.preserving {
            failing = Some(beta);
            break;
        }
    }
    match (metzler, failing) {
        (true, Some(beta)) => Err(Error::Inconsistent(format!(
            "Metzler criterion holds but e^(-{beta}H) is not preserving"
        ))),
        (false, None) => Err(Error::Inconsistent(format!(
            "Metzler criterion fails but e^(-βH) is preserving at every sampled β {betas:?}"
        ))),
        _ => Ok(metzler),
    }
}

/// `e^{-βH} ⊳ 0` at every sampled `β`.
pub fn semigroup_improving_sampled(h: &LinearOperator, p: &SelfDualCone, betas: &[f64], tol: f64) -> Result<bool> {
    for &beta in betas {
        if !classify(&op_exp(h, -beta)?, p, tol)?.improving {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrotterReport {
    pub n_values: Vec<usize>,
    /// `‖(e^{-βsH/n} e^{-βtH'/n})ⁿ - e^{-β(sH+tH')}‖` per `n`.
    pub errors: Vec<f64>,
    pub positivity_ok: Vec<bool>,
}

impl TrotterReport {
    /// `err(n_{k+1}) / err(n_k)` for consecutive entries.
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// `err(n)·n` should settle to a constant; returns the spread
    /// `max / min` of that product over the sampled `n`.
    pub fn first_order_spread(&self) -> f64 {
        let products: Vec<f64> = self
            .errors
            .iter()
            .zip(&self.n_values)
            .map(|(e, &n)| e * n as f64)
            .collect();
        let max = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

fn matrix_power(m: &CMatrix, mut n: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Compares Trotter approximants of `e^{-β(sH + tH')}` with the exact
/// exponential and classifies each approximant.
#[allow(clippy::too_many_arguments)]
pub fn trotter_verify(
    h: &LinearOperator,
    h2: &LinearOperator,
    s: f64,
    t: f64,
    beta: f64,
    n_values: &[usize],
    p: &SelfDualCone,
    tol: f64,
) -> Result<TrotterReport> {
    h.require_dim(h2.dim())?;
    if !(s > 0.0 && t > 0.0 && beta > 0.0) {
        return Err(Error::Invalid("s, t and beta must be positive".into()));
    }
    for (name, op) in [("H", h), ("H'", h2)] {
        if !in_class_a(op, p, tol)? {
            return Err(Error::InputNotInClass(format!("{name} = {op}")));
        }
    }
    let combined = &h.scaled(s) + &h2.scaled(t);
    let exact = op_exp(&combined, -beta)?;
    let mut errors = Vec::with_capacity(n_values.len());
    let mut positivity_ok = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(Error::Invalid("Trotter step count must be >= 1".into()));
        }
        let a = op_exp(h, -beta * s / n as f64)?;
        let b = op_exp(h2, -beta * t / n as f64)?;
        let step = a.matrix() * b.matrix();
        let approx = LinearOperator::new(h.space().clone(), matrix_power(&step, n))?;
        errors.push(spectral_norm(&(approx.matrix() - exact.matrix())));
        positivity_ok.push(classify(&approx, p, tol)?.preserving);
    }
    Ok(TrotterReport {
        n_values: n_values.to_vec(),
        errors,
        positivity_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuhamelReport {
    pub betas: Vec<f64>,
    pub improving: Vec<bool>,
    /// Smallest generator-basis entry of `e^{-β(A-B)}` per `β`.
    pub min_entries: Vec<f64>,
}

impl DuhamelReport {
    pub fn all_improving(&self) -> bool {
        self.improving.iter().all(|&b| b)
    }
}

/// For `A` with a positivity preserving semigroup and an ergodic `B`,
/// checks `e^{-β(A-B)} ⊳ 0` at the sampled `β > 0`.
pub fn duhamel_improving_verify(
    a: &LinearOperator,
    b: &LinearOperator,
    p: &SelfDualCone,
    betas: &[f64],
    tol: f64,
) -> Result<DuhamelReport> {
    a.require_dim(b.dim())?;
    let membership = class_membership(a, p, tol)?;
    if !membership.in_a() {
        return Err(Error::PreconditionFailed(
            "A does not generate a positivity preserving semigroup".into(),
        ));
    }
    match is_ergodic(b, p, tol) {
        Ok(r) if r.ergodic => {}
        Ok(r) => {
            return Err(Error::PreconditionFailed(format!(
                "B is not ergodic (generators {:?} never connect)",
                r.failing_pair
            )))
        }
        Err(Error::NotPreserving) => {
            return Err(Error::PreconditionFailed("B does not preserve the cone".into()))
        }
        Err(e) => return Err(e),
    }
    let diff = a - b;
    let mut improving = Vec::with_capacity(betas.len());
    let mut min_entries = Vec::with_capacity(betas.len());
    for &beta in betas {
        if beta <= 0.0 {
            return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
        }
        let e = op_exp(&diff, -beta)?;
        let m = p.to_generator_basis(e.matrix())?;
        min_entries.push(m.iter().map(|z| z.re).fold(f64::INFINITY, f64::min));
        improving.push(classify(&e, p, tol)?.improving);
    }
    Ok(DuhamelReport {
        betas: betas.to_vec(),
        improving,
        min_entries,
    })
}

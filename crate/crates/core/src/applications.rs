//! Economic readings of the weighted setting: commodity bundles valued at fixed
//! prices `ω`, preference vectors, the open Leontief model and the PageRank
//! birth-death steady state. The weighted action is used throughout, so unit
//! weights recover the classical matrix formulations.

use crate::cone::geometric_mean;
use crate::error::{Error, Result};
use crate::linalg::shifted_lu;
use crate::space::{NormKind, PosVec, PositiveOperator, StochClass, DEFAULT_TOL};

/// Technology matrix of an open Leontief economy.
#[derive(Clone, Debug)]
pub struct Economy {
    technology: PositiveOperator,
    labels: Option<Vec<String>>,
}

impl Economy {
    pub fn new(technology: PositiveOperator) -> Result<Self> {
        require_strict(&technology)?;
        Ok(Self {
            technology,
            labels: None,
        })
    }

    /// Good names; metadata only.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.technology.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.technology.dim(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn technology(&self) -> &PositiveOperator {
        &self.technology
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

fn require_strict(s: &PositiveOperator) -> Result<()> {
    match s.classify(DEFAULT_TOL) {
        StochClass::StrictlySubstochastic => Ok(()),
        c => Err(Error::Precondition(format!(
            "technology matrix must be strictly substochastic, it is {c}"
        ))),
    }
}

/// Value of a bundle at prices `ω`: the total `Σ x_i ω_i` and the largest single
/// commodity value `max x_i ω_i`.
pub fn bundle_value(bundle: &PosVec) -> (f64, f64) {
    (bundle.norm(NormKind::L1w), bundle.norm(NormKind::LInfW))
}

/// Entrywise `Π x_i^{α_i}` over strictly positive bundles.
pub fn preference_vector(bundles: &[PosVec], alphas: &[f64]) -> Result<PosVec> {
    crate::cone::check_exponents(alphas, bundles.len(), true)?;
    if let Some(i) = bundles.iter().position(|b| !b.is_strictly_positive()) {
        return Err(Error::Precondition(format!(
            "bundle {} is not strictly positive",
            i + 1
        )));
    }
    let refs: Vec<&PosVec> = bundles.iter().collect();
    geometric_mean(&refs, alphas)
}

/// `p = (I − S)⁻¹ x` on the weighted action, clamped at zero.
fn solve_unit_resolvent(s: &PositiveOperator, x: &PosVec) -> Result<PosVec> {
    s.space().ensure_same(x.space())?;
    let lu = shifted_lu(s.dim(), &s.action_matrix(), 1.0)?;
    let p = lu.solve(x.values())?;
    Ok(PosVec::from_raw(
        x.space(),
        p.into_iter().map(|v| v.max(0.0)).collect(),
    ))
}

/// Supply `p` meeting demand `c` net of intermediate consumption: `p − Sp = c`.
pub fn leontief_solve(economy: &Economy, demand: &PosVec) -> Result<PosVec> {
    solve_unit_resolvent(&economy.technology, demand)
}

/// `Y = (I − S)⁻¹` as a plain matrix: `y_ij = ∂p_i/∂c_j`.
///
/// The returned operator's entries are the partial derivatives themselves, so
/// `Y.matvec(c)` equals the Leontief supply for demand `c`. On unit weights
/// `Y.apply(c)` is the same map.
pub fn impact_matrix(economy: &Economy) -> Result<PositiveOperator> {
    let s = &economy.technology;
    let lu = shifted_lu(s.dim(), &s.action_matrix(), 1.0)?;
    let y = lu.inverse()?.into_iter().map(|v| v.max(0.0)).collect();
    PositiveOperator::new(s.space(), y)
}

/// Steady state `p = x + Sp` of the birth-death process with births `x`.
pub fn pagerank_solve(s: &PositiveOperator, births: &PosVec) -> Result<PosVec> {
    require_strict(s)?;
    solve_unit_resolvent(s, births)
}

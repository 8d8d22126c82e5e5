//! Finite weighted sequence spaces and the non-negative operators acting on them.
//!
//! A space is the index set `{0, .., n-1}` with point masses `ω_i > 0`. A
//! non-negative matrix `s` acts on it through the weighted pairing
//! `(Sx)_i = Σ_j s_ij x_j ω_j`, which is the discrete form of an integral
//! kernel operator. Column masses `s_j = Σ_i s_ij ω_i` decide whether the
//! operator is (sub)stochastic.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default relative tolerance for operator inequalities.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Index set with strictly positive point weights.
#[derive(Clone)]
pub struct WeightedSpace {
    weights: Arc<[f64]>,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("a weighted space needs n >= 1".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "weight {} must be finite and > 0, got {}",
                i + 1,
                weights[i]
            )));
        }
        Ok(Self {
            weights: weights.into(),
        })
    }

    /// Counting measure on `n` points.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.weights, &other.weights) || self.weights == other.weights
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !self.same_as(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn zeros(&self) -> PosVec {
        PosVec {
            space: self.clone(),
            values: vec![0.0; self.dim()],
        }
    }

    pub fn ones(&self) -> PosVec {
        PosVec {
            space: self.clone(),
            values: vec![1.0; self.dim()],
        }
    }
}

impl fmt::Debug for WeightedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedSpace")
            .field("weights", &&*self.weights)
            .finish()
    }
}

impl PartialEq for WeightedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Non-negative vector in a weighted space.
#[derive(Clone, Debug, PartialEq)]
pub struct PosVec {
    space: WeightedSpace,
    values: Vec<f64>,
}

impl PosVec {
    pub fn new(space: &WeightedSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "entry {} must be finite and >= 0, got {}",
                i + 1,
                values[i]
            )));
        }
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    /// Builds from values already known to be non-negative and finite.
    pub(crate) fn from_raw(space: &WeightedSpace, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.dim());
        debug_assert!(values.iter().all(|v| *v >= 0.0), "{values:?}");
        Self {
            space: space.clone(),
            values,
        }
    }

    /// Unit vector at index `j`.
    pub fn basis(space: &WeightedSpace, j: usize) -> Result<Self> {
        if j >= space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: j + 1,
            });
        }
        let mut values = vec![0.0; space.dim()];
        values[j] = 1.0;
        Ok(Self::from_raw(space, values))
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `f ≫ 0`: every entry strictly positive, no threshold.
    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        norm(self, kind)
    }

    pub fn add(&self, other: &PosVec) -> Result<PosVec> {
        self.space.ensure_same(&other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_raw(&self.space, values))
    }

    pub fn scale(&self, a: f64) -> Result<PosVec> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale factor must be finite and >= 0, got {a}"
            )));
        }
        let values: Vec<f64> = self.values.iter().map(|v| v * a).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("scaled vector is not finite".into()));
        }
        Ok(Self::from_raw(&self.space, values))
    }

    /// Sum of a non-empty list of vectors sharing a space.
    pub fn sum(vs: &[PosVec]) -> Result<PosVec> {
        let (first, rest) = vs
            .split_first()
            .ok_or_else(|| Error::InvalidInput("cannot sum an empty list".into()))?;
        rest.iter().try_fold(first.clone(), |acc, v| acc.add(v))
    }
}

/// Lattice norms on a weighted space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// `Σ x_i ω_i`
    L1w,
    /// `max x_i ω_i`
    LInfW,
    /// `(Σ x_i^p ω_i)^{1/p}` with `1 < p < ∞`
    LpW(f64),
}

impl NormKind {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidInput(format!(
                "Lp norm needs finite p > 1, got {p}"
            )));
        }
        Ok(NormKind::LpW(p))
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::L1w => f.write_str("l1w"),
            NormKind::LInfW => f.write_str("linfw"),
            NormKind::LpW(p) => write!(f, "lpw({p})"),
        }
    }
}

pub fn norm(x: &PosVec, kind: NormKind) -> f64 {
    let w = x.space.weights();
    let xs = x.values.iter().zip(w.iter());
    match kind {
        NormKind::L1w => xs.map(|(v, w)| v * w).sum(),
        NormKind::LInfW => xs.map(|(v, w)| v * w).fold(0.0, f64::max),
        NormKind::LpW(p) => {
            // Scale by the largest entry so x^p neither overflows nor underflows.
            let scale = x.values.iter().copied().fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = xs.map(|(v, w)| (v / scale).powf(p) * w).sum();
            scale * s.powf(1.0 / p)
        }
    }
}

pub fn is_strictly_positive(x: &PosVec) -> bool {
    x.is_strictly_positive()
}

/// Column classification by weighted mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StochClass {
    Stochastic,
    SubstochasticNotStochastic,
    StrictlySubstochastic,
    NotSubstochastic,
}

impl StochClass {
    /// Substochastic but not stochastic: the operators the wedge theory applies to.
    pub fn admits_cone(self) -> bool {
        matches!(
            self,
            StochClass::SubstochasticNotStochastic | StochClass::StrictlySubstochastic
        )
    }
}

impl fmt::Display for StochClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StochClass::Stochastic => "stochastic",
            StochClass::SubstochasticNotStochastic => "substochastic-not-stochastic",
            StochClass::StrictlySubstochastic => "strictly-substochastic",
            StochClass::NotSubstochastic => "not-substochastic",
        })
    }
}

/// Dense non-negative `n×n` kernel bound to a weighted space.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveOperator {
    space: WeightedSpace,
    // row-major
    entries: Arc<[f64]>,
}

impl PositiveOperator {
    /// Row-major entries `s_ij`.
    pub fn new(space: &WeightedSpace, entries: Vec<f64>) -> Result<Self> {
        let n = space.dim();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "matrix entry ({}, {}) must be finite and >= 0, got {}",
                k / n + 1,
                k % n + 1,
                entries[k]
            )));
        }
        Ok(Self {
            space: space.clone(),
            entries: entries.into(),
        })
    }

    pub fn from_rows(space: &WeightedSpace, rows: &[Vec<f64>]) -> Result<Self> {
        let n = space.dim();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Self::new(space, rows.concat())
    }

    pub(crate) fn from_raw(space: &WeightedSpace, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), space.dim() * space.dim());
        Self {
            space: space.clone(),
            entries: entries.into(),
        }
    }

    pub fn zero(space: &WeightedSpace) -> Self {
        let n = space.dim();
        Self::from_raw(space, vec![0.0; n * n])
    }

    /// The identity map; its kernel is `δ_ij / ω_j`.
    pub fn identity(space: &WeightedSpace) -> Self {
        let n = space.dim();
        let mut e = vec![0.0; n * n];
        for (j, w) in space.weights().iter().enumerate() {
            e[j * n + j] = 1.0 / w;
        }
        Self::from_raw(space, e)
    }

    /// Operator whose action is the plain matrix product `x ↦ Mx`.
    pub fn from_action_matrix(space: &WeightedSpace, m: &[f64]) -> Result<Self> {
        let n = space.dim();
        if m.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: m.len(),
            });
        }
        let w = space.weights();
        let e = m
            .iter()
            .enumerate()
            .map(|(k, v)| v / w[k % n])
            .collect();
        Self::new(space, e)
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.dim())
    }

    /// `(Sx)_i = Σ_j s_ij x_j ω_j`.
    pub fn apply(&self, x: &PosVec) -> Result<PosVec> {
        self.space.ensure_same(&x.space)?;
        let xw: Vec<f64> = x
            .values
            .iter()
            .zip(self.space.weights())
            .map(|(v, w)| v * w)
            .collect();
        Ok(PosVec::from_raw(&self.space, self.matvec_raw(&xw)))
    }

    /// Plain (unweighted) matrix-vector product `Σ_j s_ij x_j`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.matvec_raw(x))
    }

    fn matvec_raw(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `s_j = Σ_i s_ij ω_i`.
    pub fn column_mass(&self) -> PosVec {
        let n = self.dim();
        let mut mass = vec![0.0; n];
        for (row, w) in self.rows().zip(self.space.weights()) {
            for (m, s) in mass.iter_mut().zip(row) {
                *m += s * w;
            }
        }
        PosVec::from_raw(&self.space, mass)
    }

    pub fn classify(&self, tol: f64) -> StochClass {
        classify_masses(self.column_mass().values(), tol)
    }

    /// The matrix `M = S·diag(ω)` so that `Sx = Mx` as a plain product.
    pub fn action_matrix(&self) -> Vec<f64> {
        let n = self.dim();
        let w = self.space.weights();
        self.entries
            .iter()
            .enumerate()
            .map(|(k, s)| s * w[k % n])
            .collect()
    }

    /// Kernel of the composition `self ∘ other`.
    pub fn compose(&self, other: &PositiveOperator) -> Result<PositiveOperator> {
        self.space.ensure_same(&other.space)?;
        let n = self.dim();
        let w = self.space.weights();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k) * w[k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.entries[k * n..(k + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(&self.space, out))
    }

    pub fn add(&self, other: &PositiveOperator) -> Result<PositiveOperator> {
        self.space.ensure_same(&other.space)?;
        let e = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_raw(&self.space, e))
    }

    pub fn scale(&self, a: f64) -> Result<PositiveOperator> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale factor must be finite and >= 0, got {a}"
            )));
        }
        Ok(Self::from_raw(
            &self.space,
            self.entries.iter().map(|v| v * a).collect(),
        ))
    }

    /// Content hash over weights and entries; binds certificates to an operator.
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.dim().hash(&mut h);
        for w in self.space.weights() {
            w.to_bits().hash(&mut h);
        }
        for s in self.entries.iter() {
            s.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

pub(crate) fn classify_masses(masses: &[f64], tol: f64) -> StochClass {
    if masses.iter().all(|s| (s - 1.0).abs() <= tol) {
        StochClass::Stochastic
    } else if masses.iter().all(|s| *s < 1.0 - tol) {
        StochClass::StrictlySubstochastic
    } else if masses.iter().all(|s| *s <= 1.0 + tol) {
        StochClass::SubstochasticNotStochastic
    } else {
        StochClass::NotSubstochastic
    }
}

pub fn apply(s: &PositiveOperator, x: &PosVec) -> Result<PosVec> {
    s.apply(x)
}

pub fn column_mass(s: &PositiveOperator) -> PosVec {
    s.column_mass()
}

pub fn classify(s: &PositiveOperator, tol: f64) -> StochClass {
    s.classify(tol)
}

/// One-sided excess of `lhs` over `rhs`, normalised by `max(1, rhs)`.
pub(crate) fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() {
        return f64::INFINITY;
    }
    ((lhs - rhs) / rhs.abs().max(1.0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running() -> PositiveOperator {
        let sp = WeightedSpace::uniform(2).unwrap();
        PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap()
    }

    #[test]
    fn apply_running_example() {
        let s = running();
        let x = s.space().ones();
        let y = s.apply(&x).unwrap();
        assert!((y.values()[0] - 0.3).abs() < 1e-15);
        assert!((y.values()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn apply_identity_and_zero() {
        let sp = WeightedSpace::uniform(2).unwrap();
        let x = PosVec::new(&sp, vec![5.0, 7.0]).unwrap();
        let id = PositiveOperator::identity(&sp);
        assert_eq!(id.apply(&x).unwrap().values(), &[5.0, 7.0]);
        let z = PositiveOperator::zero(&sp);
        assert_eq!(z.apply(&x).unwrap().values(), &[0.0, 0.0]);
    }

    #[test]
    fn identity_is_identity_under_weights() {
        let sp = WeightedSpace::new(vec![0.25, 3.0, 7.5]).unwrap();
        let x = PosVec::new(&sp, vec![1.0, 2.0, 3.0]).unwrap();
        let y = PositiveOperator::identity(&sp).apply(&x).unwrap();
        for (a, b) in y.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn apply_dimension_mismatch() {
        let s = running();
        let other = WeightedSpace::uniform(3).unwrap().ones();
        assert!(matches!(
            s.apply(&other),
            Err(Error::DimensionMismatch { .. })
        ));
        let wsp = WeightedSpace::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(s.apply(&wsp.ones()), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn column_masses() {
        let m = running().column_mass();
        assert!((m.values()[0] - 0.5).abs() < 1e-15);
        assert!((m.values()[1] - 0.5).abs() < 1e-15);

        let sp = WeightedSpace::uniform(2).unwrap();
        assert_eq!(
            PositiveOperator::zero(&sp).column_mass().values(),
            &[0.0, 0.0]
        );

        let sp = WeightedSpace::new(vec![2.0]).unwrap();
        let s = PositiveOperator::new(&sp, vec![0.5]).unwrap();
        assert_eq!(s.column_mass().values(), &[1.0]);
    }

    #[test]
    fn classification() {
        assert_eq!(running().classify(1e-12), StochClass::StrictlySubstochastic);
        let sp = WeightedSpace::uniform(2).unwrap();
        let s = PositiveOperator::from_rows(&sp, &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(s.classify(1e-12), StochClass::Stochastic);
        let s = PositiveOperator::from_rows(&sp, &[vec![1.0, 0.3], vec![0.2, 0.3]]).unwrap();
        assert_eq!(s.classify(1e-12), StochClass::NotSubstochastic);
        let s = PositiveOperator::from_rows(&sp, &[vec![0.5, 0.3], vec![0.5, 0.3]]).unwrap();
        assert_eq!(s.classify(1e-12), StochClass::SubstochasticNotStochastic);
    }

    #[test]
    fn norms() {
        let sp = WeightedSpace::new(vec![2.0, 1.0]).unwrap();
        let x = PosVec::new(&sp, vec![1.0, 2.0]).unwrap();
        assert_eq!(x.norm(NormKind::L1w), 4.0);
        assert_eq!(x.norm(NormKind::LInfW), 2.0);
        // (1·2 + 4·1)^{1/2}
        assert!((x.norm(NormKind::LpW(2.0)) - 6f64.sqrt()).abs() < 1e-15);
        for k in [NormKind::L1w, NormKind::LInfW, NormKind::LpW(3.0)] {
            assert_eq!(sp.zeros().norm(k), 0.0);
        }
    }

    #[test]
    fn lp_norm_survives_extreme_magnitudes() {
        let sp = WeightedSpace::uniform(2).unwrap();
        let x = PosVec::new(&sp, vec![1e200, 1e200]).unwrap();
        let v = x.norm(NormKind::LpW(4.0));
        assert!((v / 1e200 - 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn strict_positivity_is_exact() {
        let sp = WeightedSpace::uniform(2).unwrap();
        assert!(PosVec::new(&sp, vec![1.0, 1.0]).unwrap().is_strictly_positive());
        assert!(!PosVec::new(&sp, vec![1.0, 0.0]).unwrap().is_strictly_positive());
        assert!(PosVec::new(&sp, vec![1e-300, 2.0]).unwrap().is_strictly_positive());
    }

    #[test]
    fn construction_rejects_bad_values() {
        assert!(WeightedSpace::new(vec![]).is_err());
        assert!(WeightedSpace::new(vec![1.0, 0.0]).is_err());
        let sp = WeightedSpace::uniform(2).unwrap();
        assert!(PosVec::new(&sp, vec![1.0, -1.0]).is_err());
        assert!(PosVec::new(&sp, vec![1.0, f64::NAN]).is_err());
        assert!(PositiveOperator::new(&sp, vec![0.0, -0.1, 0.0, 0.0]).is_err());
        assert!(NormKind::lp(1.0).is_err());
    }

    #[test]
    fn compose_matches_sequential_application() {
        let sp = WeightedSpace::new(vec![0.5, 2.0]).unwrap();
        let a = PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap();
        let b = PositiveOperator::from_rows(&sp, &[vec![1.0, 0.0], vec![0.5, 0.25]]).unwrap();
        let x = PosVec::new(&sp, vec![3.0, 0.7]).unwrap();
        let lhs = a.compose(&b).unwrap().apply(&x).unwrap();
        let rhs = a.apply(&b.apply(&x).unwrap()).unwrap();
        for (l, r) in lhs.values().iter().zip(rhs.values()) {
            assert!((l - r).abs() < 1e-14);
        }
    }

    #[test]
    fn digest_distinguishes_operators() {
        let s = running();
        let sp = s.space().clone();
        let t = PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.41]]).unwrap();
        assert_eq!(s.digest(), running().digest());
        assert_ne!(s.digest(), t.digest());
    }
}

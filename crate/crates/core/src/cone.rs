//! The fixed-point wedge `C(S) = {f ≫ 0 : Sf ≤ f}` of a substochastic operator.
//!
//! Membership is witnessed by a [`ConeCertificate`], which pins the operator it
//! was checked against. Every certified `f` is a fixed point of an explicit
//! stochastic majorant `A ≥ S`, the rank-one completion
//!
//! ```text
//! a_ij = s_ij + φ_i ψ_j / λ,   φ = f − Sf,   ψ_j = 1 − s_j,   λ = Σ_j ψ_j f_j ω_j
//! ```
//!
//! Conversely any stochastic `A ≥ S` with `Af = f` gives `Sf ≤ Af = f`, so the two
//! descriptions of the wedge coincide. The wedge is closed under sums, positive
//! scaling and entrywise weighted geometric means.

use std::fmt::Write as _;

use crate::error::{Error, RejectReason, Rejection, Result};
use crate::space::{PosVec, PositiveOperator, StochClass};
use crate::textio;

/// A vector `f ≫ 0` verified to satisfy `Sf ≤ f` for one specific operator.
#[derive(Clone, Debug)]
pub struct ConeCertificate {
    f: PosVec,
    slack: PosVec,
    operator: PositiveOperator,
    digest: u64,
    tol: f64,
}

impl ConeCertificate {
    pub fn f(&self) -> &PosVec {
        &self.f
    }

    /// `max(f − Sf, 0)`
    pub fn slack(&self) -> &PosVec {
        &self.slack
    }

    pub fn operator(&self) -> &PositiveOperator {
        &self.operator
    }

    pub fn operator_digest(&self) -> u64 {
        self.digest
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Whether this certificate was issued for `s`.
    pub fn is_for(&self, s: &PositiveOperator) -> bool {
        self.digest == s.digest()
    }

    pub(crate) fn ensure_for(&self, s: &PositiveOperator) -> Result<()> {
        if self.is_for(s) {
            Ok(())
        } else {
            Err(Error::OperatorMismatch)
        }
    }
}

/// The stochastic majorant built from a certificate, with the data that produced it.
#[derive(Clone, Debug)]
pub struct Completion {
    pub a: PositiveOperator,
    pub phi: PosVec,
    pub psi: PosVec,
    pub lambda: f64,
}

impl Completion {
    /// Matrix file block followed by `completion lambda=<value>`.
    pub fn to_text(&self) -> String {
        let mut out = textio::format_operator(&self.a);
        let _ = writeln!(out, "completion lambda={}", textio::fmt_num(self.lambda));
        out
    }
}

/// Checks `f ≫ 0` and `(Sf)_i ≤ f_i + tol·max(1, f_i)` for every `i`.
pub fn in_cone(s: &PositiveOperator, f: &PosVec, tol: f64) -> Result<ConeCertificate> {
    let class = s.classify(tol);
    if !class.admits_cone() {
        return Err(Error::Precondition(format!(
            "operator must be substochastic and not stochastic, it is {class}"
        )));
    }
    check_membership(s, f, tol)
}

fn check_membership(s: &PositiveOperator, f: &PosVec, tol: f64) -> Result<ConeCertificate> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be >= 0, got {tol}")));
    }
    if let Some(i) = f.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::Rejected(Rejection {
            index: i,
            violation: -f.values()[i],
            reason: RejectReason::NotStrictlyPositive,
        }));
    }
    let sf = s.apply(f)?;
    let mut slack = Vec::with_capacity(f.dim());
    for (i, (&fi, &sfi)) in f.values().iter().zip(sf.values()).enumerate() {
        let excess = sfi - fi;
        if excess > tol * fi.max(1.0) {
            return Err(Error::Rejected(Rejection {
                index: i,
                violation: excess,
                reason: RejectReason::NotSuperharmonic,
            }));
        }
        slack.push((fi - sfi).max(0.0));
    }
    Ok(ConeCertificate {
        f: f.clone(),
        slack: PosVec::from_raw(f.space(), slack),
        operator: s.clone(),
        digest: s.digest(),
        tol,
    })
}

/// Builds `A = S + φψᵀ/λ`, a stochastic majorant of `S` fixing `cert.f()`.
pub fn stochastic_completion(s: &PositiveOperator, cert: &ConeCertificate) -> Result<Completion> {
    cert.ensure_for(s)?;
    let n = s.dim();
    let space = s.space();
    let masses = s.column_mass();
    let psi: Vec<f64> = masses.values().iter().map(|m| (1.0 - m).max(0.0)).collect();
    let lambda: f64 = psi
        .iter()
        .zip(cert.f.values())
        .zip(space.weights())
        .map(|((p, f), w)| p * f * w)
        .sum();
    if !lambda.is_finite() {
        return Err(Error::Overflow(format!("lambda is not finite ({lambda})")));
    }
    if lambda <= cert.tol {
        return Err(Error::StochasticOperator { lambda });
    }
    let phi = cert.slack.values();
    let mut a = Vec::with_capacity(n * n);
    for (row, p) in s.rows().zip(phi) {
        for (sij, q) in row.iter().zip(&psi) {
            a.push(sij + p * q / lambda);
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("completion entries are not finite".into()));
    }
    Ok(Completion {
        a: PositiveOperator::from_raw(space, a),
        phi: cert.slack.clone(),
        psi: PosVec::from_raw(space, psi),
        lambda,
    })
}

/// Certificate for `f₁ + f₂`.
pub fn wedge_add(c1: &ConeCertificate, c2: &ConeCertificate) -> Result<ConeCertificate> {
    if c1.digest != c2.digest {
        return Err(Error::OperatorMismatch);
    }
    let f = c1.f.add(&c2.f)?;
    check_membership(&c1.operator, &f, c1.tol.max(c2.tol))
}

/// Certificate for `a·f`, `a > 0`.
pub fn wedge_scale(c: &ConeCertificate, a: f64) -> Result<ConeCertificate> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Precondition(format!(
            "scale factor must be finite and > 0, got {a}"
        )));
    }
    if a == 1.0 {
        return Ok(c.clone());
    }
    let f = c.f.scale(a)?;
    check_membership(&c.operator, &f, c.tol)
}

/// Validates a weight tuple: matching length, entries in `[0,1]` (or `(0,1]`
/// when `strict`), sum one within `1e-12`.
pub(crate) fn check_exponents(alphas: &[f64], m: usize, strict: bool) -> Result<()> {
    if alphas.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: alphas.len(),
        });
    }
    if m == 0 {
        return Err(Error::Precondition("need at least one factor".into()));
    }
    for (i, &a) in alphas.iter().enumerate() {
        let ok = if strict { a > 0.0 } else { a >= 0.0 };
        if !(ok && a.is_finite()) {
            return Err(Error::Precondition(format!(
                "exponent {} must be {} 0, got {a}",
                i + 1,
                if strict { ">" } else { ">=" }
            )));
        }
    }
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "exponents must sum to 1, sum is {sum}"
        )));
    }
    Ok(())
}

/// Entrywise `Π_i f_i^{α_i}`; factors with `α_i = 0` are skipped.
pub(crate) fn geometric_mean(fs: &[&PosVec], alphas: &[f64]) -> Result<PosVec> {
    let first = fs
        .first()
        .ok_or_else(|| Error::Precondition("need at least one factor".into()))?;
    let space = first.space();
    for f in &fs[1..] {
        space.ensure_same(f.space())?;
    }
    let mut h = vec![1.0; space.dim()];
    for (f, &a) in fs.iter().zip(alphas) {
        if a == 0.0 {
            continue;
        }
        for (hk, &v) in h.iter_mut().zip(f.values()) {
            // partial products stay within [min f, max f], so no overflow
            *hk *= if a == 1.0 { v } else { v.powf(a) };
        }
    }
    Ok(PosVec::from_raw(space, h))
}

/// Certificate for `h = Π_i f_i^{α_i}` (`α_i ≥ 0`, `Σα_i = 1`).
///
/// `Sh ≤ h` holds exactly in theory; a numerical failure of the re-check is
/// reported as [`Error::InternalConsistency`].
pub fn log_convex_combine(certs: &[ConeCertificate], alphas: &[f64]) -> Result<ConeCertificate> {
    check_exponents(alphas, certs.len(), false)?;
    let digest = certs[0].digest;
    if certs.iter().any(|c| c.digest != digest) {
        return Err(Error::OperatorMismatch);
    }
    let fs: Vec<&PosVec> = certs.iter().map(|c| &c.f).collect();
    let h = geometric_mean(&fs, alphas)?;
    let tol = certs.iter().map(|c| c.tol).fold(0.0, f64::max);
    match check_membership(&certs[0].operator, &h, tol) {
        Ok(c) => Ok(c),
        Err(Error::Rejected(r)) => Err(Error::InternalConsistency {
            violation: r.violation,
        }),
        Err(e) => Err(e),
    }
}

/// Errors unless `s` is substochastic and not stochastic.
pub fn require_cone_operator(s: &PositiveOperator, tol: f64) -> Result<StochClass> {
    let class = s.classify(tol);
    if class.admits_cone() {
        Ok(class)
    } else {
        Err(Error::Precondition(format!(
            "operator must be substochastic and not stochastic, it is {class}"
        )))
    }
}

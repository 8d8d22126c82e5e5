//! Power-series transforms `F(S)` with non-negative coefficients.
//!
//! When `F(S)` commutes with `S` it maps the wedge `C(S)` into itself, provided
//! the image stays strictly positive. The exponential and the resolvent
//! `(λI − S)⁻¹` both have `α₀ > 0`, so positivity is automatic for them.

use std::fmt;
use std::sync::Arc;

use crate::cone::{in_cone, ConeCertificate};
use crate::error::{Error, Result};
use crate::linalg::{self, shifted_lu};
use crate::space::{NormKind, PosVec, PositiveOperator};

/// Power-iteration settings used to gate series against their radius.
const GATE_ITERS: usize = 10_000;
const GATE_TOL: f64 = 1e-13;
/// Exponent for the Gelfand fallback `‖S^k‖^{1/k}`.
const GELFAND_POWER: u32 = 64;

type Coeff = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// `F(z) = Σ_j α_j z^j` with `α_j ≥ 0`.
#[derive(Clone)]
pub struct PowerSeries {
    coeff: Coeff,
    radius: Option<f64>,
    degree: Option<usize>,
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeries")
            .field("radius", &self.radius)
            .field("degree", &self.degree)
            .finish_non_exhaustive()
    }
}

impl PowerSeries {
    /// Series with the given coefficient rule and radius of convergence
    /// (`None` for entire functions).
    pub fn new(coeff: impl Fn(usize) -> f64 + Send + Sync + 'static, radius: Option<f64>) -> Self {
        Self {
            coeff: Arc::new(coeff),
            radius,
            degree: None,
        }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidInput(
                "polynomial needs at least one finite non-negative coefficient".into(),
            ));
        }
        let degree = coeffs.len() - 1;
        Ok(Self {
            coeff: Arc::new(move |j| coeffs.get(j).copied().unwrap_or(0.0)),
            radius: None,
            degree: Some(degree),
        })
    }

    pub fn exp() -> Self {
        Self::new(
            |j| (1..=j).fold(1.0, |acc, k| acc / k as f64),
            None,
        )
    }

    /// `Σ_j λ^{-(j+1)} z^j = (λ − z)⁻¹`, radius `λ`.
    pub fn neumann(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Neumann series needs finite lambda > 0, got {lambda}"
            )));
        }
        Ok(Self::new(
            move |j| lambda.powi(-(j as i32) - 1),
            Some(lambda),
        ))
    }

    pub fn coefficient(&self, j: usize) -> f64 {
        (self.coeff)(j)
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    pub max_terms: usize,
    /// Stop once a term's L1w norm falls below this fraction of the running sum's.
    pub term_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            max_terms: 10_000,
            term_tol: 1e-15,
        }
    }
}

impl SeriesOptions {
    fn validate(&self) -> Result<()> {
        if self.max_terms < 1 || !(self.term_tol > 0.0) {
            return Err(Error::InvalidInput(
                "series options need max_terms >= 1 and term_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    /// False when power iteration stalled and `value` is the Gelfand bound.
    pub converged: bool,
}

/// Power iteration from the all-ones vector on the weighted action.
///
/// The growth ratio `‖Mx‖₁/‖x‖₁` is iterated until successive ratios differ by
/// less than `tol`. Without convergence the estimate falls back to
/// `‖S^64‖^{1/64}` in the L1w operator norm, which never underestimates `ρ`.
pub fn spectral_radius(s: &PositiveOperator, iters: usize, tol: f64) -> SpectralEstimate {
    let m = s.action_matrix();
    let n = s.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut prev = f64::NAN;
    for _ in 0..iters.max(1) {
        let y: Vec<f64> = m
            .chunks(n)
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        let r: f64 = y.iter().sum();
        if r == 0.0 {
            // M^k 1 = 0 with 1 ≫ 0 forces M^k = 0
            return SpectralEstimate {
                value: 0.0,
                converged: true,
            };
        }
        if (r - prev).abs() < tol {
            return SpectralEstimate {
                value: r,
                converged: true,
            };
        }
        prev = r;
        x = y.into_iter().map(|v| v / r).collect();
    }
    SpectralEstimate {
        value: gelfand_bound(s, GELFAND_POWER),
        converged: false,
    }
}

/// `‖S^(2^k)‖^{1/2^k}` for the smallest `2^k ≥ power`, in the L1w operator norm.
pub fn gelfand_bound(s: &PositiveOperator, power: u32) -> f64 {
    let n = s.dim();
    let w = s.space().weights();
    let mut p = s.action_matrix();
    let mut log_scale = 0.0;
    let mut k = 1u32;
    let normalize = |p: &mut Vec<f64>, log_scale: &mut f64| -> bool {
        let mx = p.iter().copied().fold(0.0, f64::max);
        if mx == 0.0 {
            return false;
        }
        p.iter_mut().for_each(|v| *v /= mx);
        *log_scale += mx.ln();
        true
    };
    if !normalize(&mut p, &mut log_scale) {
        return 0.0;
    }
    while k < power.max(1) {
        p = linalg::matmul(n, &p, &p);
        log_scale *= 2.0;
        k *= 2;
        if !normalize(&mut p, &mut log_scale) {
            return 0.0;
        }
    }
    // operator kernel of M^k is (M^k)_ij / ω_j; its L1w norm is the max column mass
    let norm = (0..n)
        .map(|j| (0..n).map(|i| w[i] * p[i * n + j]).sum::<f64>() / w[j])
        .fold(0.0, f64::max);
    ((log_scale + norm.ln()) / k as f64).exp()
}

fn gate(s: &PositiveOperator, bound: f64) -> Result<f64> {
    let est = spectral_radius(s, GATE_ITERS, GATE_TOL).value;
    if est >= bound {
        return Err(Error::SpectralRadius { rho: est, bound });
    }
    Ok(est)
}

/// `Σ_j α_j S^j f`, truncated once terms are negligible.
pub fn series_apply(
    series: &PowerSeries,
    s: &PositiveOperator,
    f: &PosVec,
    opts: &SeriesOptions,
) -> Result<PosVec> {
    opts.validate()?;
    s.space().ensure_same(f.space())?;
    if let Some(r) = series.radius {
        gate(s, r)?;
    }
    let mut power = f.clone();
    let a0 = series.coefficient(0);
    let mut acc: Vec<f64> = power.values().iter().map(|v| a0 * v).collect();
    let last = series.degree.unwrap_or(usize::MAX);
    for j in 1..=last {
        if j > opts.max_terms {
            return Err(Error::Convergence(format!(
                "series did not converge within {} terms",
                opts.max_terms
            )));
        }
        power = s.apply(&power)?;
        if power.values().iter().all(|v| *v == 0.0) {
            break;
        }
        let a = series.coefficient(j);
        if !(a >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "series coefficient {j} is negative or NaN"
            )));
        }
        if a == 0.0 {
            continue;
        }
        let mut term_norm = 0.0;
        for ((t, v), w) in acc.iter_mut().zip(power.values()).zip(s.space().weights()) {
            let term = a * v;
            *t += term;
            term_norm += term * w;
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("series partial sum is not finite".into()));
        }
        let acc_norm: f64 = acc.iter().zip(s.space().weights()).map(|(v, w)| v * w).sum();
        if term_norm < opts.term_tol * acc_norm {
            break;
        }
    }
    Ok(PosVec::from_raw(f.space(), acc))
}

pub fn exp_apply(s: &PositiveOperator, f: &PosVec, opts: &SeriesOptions) -> Result<PosVec> {
    series_apply(&PowerSeries::exp(), s, f, opts)
}

/// `g = (λI − S)⁻¹ f` by direct solve.
pub fn resolvent_apply(
    s: &PositiveOperator,
    lambda: f64,
    f: &PosVec,
    _opts: &SeriesOptions,
) -> Result<PosVec> {
    s.space().ensure_same(f.space())?;
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
    }
    gate(s, lambda)?;
    let lu = shifted_lu(s.dim(), &s.action_matrix(), lambda)?;
    let g = lu.solve(f.values())?;
    // (λI − S)⁻¹ = Σ λ^{-(j+1)} S^j ≥ 0 when λ > ρ; clear round-off below zero
    Ok(PosVec::from_raw(
        f.space(),
        g.into_iter().map(|v| v.max(0.0)).collect(),
    ))
}

/// Neumann-series evaluation of the resolvent, kept as an independent route.
pub fn resolvent_series_apply(
    s: &PositiveOperator,
    lambda: f64,
    f: &PosVec,
    opts: &SeriesOptions,
) -> Result<PosVec> {
    series_apply(&PowerSeries::neumann(lambda)?, s, f, opts)
}

/// Relative L1w disagreement between the direct and series resolvents.
pub fn resolvent_cross_check(
    s: &PositiveOperator,
    lambda: f64,
    f: &PosVec,
    opts: &SeriesOptions,
) -> Result<f64> {
    let direct = resolvent_apply(s, lambda, f, opts)?;
    let series = resolvent_series_apply(s, lambda, f, opts)?;
    let diff: f64 = direct
        .values()
        .iter()
        .zip(series.values())
        .zip(s.space().weights())
        .map(|((a, b), w)| (a - b).abs() * w)
        .sum();
    Ok(diff / direct.norm(NormKind::L1w).max(f64::MIN_POSITIVE))
}

/// Applies `F(S)` to a certified vector and certifies the image.
///
/// Errors with [`Error::Precondition`] if `F(S)f` is not strictly positive.
pub fn transform_certificate(
    series: &PowerSeries,
    cert: &ConeCertificate,
    opts: &SeriesOptions,
    tol: f64,
) -> Result<ConeCertificate> {
    let s = cert.operator();
    let g = series_apply(series, s, cert.f(), opts)?;
    if let Some(i) = g.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::Precondition(format!(
            "transformed vector is not strictly positive at entry {}",
            i + 1
        )));
    }
    in_cone(s, &g, tol)
}

/// Max entry of `|M_K M_S − M_S M_K|` on the weighted actions.
pub fn commutator_norm(k: &PositiveOperator, s: &PositiveOperator) -> Result<(f64, f64)> {
    k.space().ensure_same(s.space())?;
    let n = k.dim();
    let (mk, ms) = (k.action_matrix(), s.action_matrix());
    let ks = linalg::matmul(n, &mk, &ms);
    let sk = linalg::matmul(n, &ms, &mk);
    let diff = ks.iter().zip(&sk).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = ks.iter().chain(&sk).copied().fold(0.0, f64::max);
    Ok((diff, scale))
}

/// Violation of `S(Kf) ≤ Kf` for `K` commuting with `S`.
pub fn commuting_preservation_check(
    k: &PositiveOperator,
    s: &PositiveOperator,
    cert: &ConeCertificate,
    tol: f64,
) -> Result<f64> {
    cert.ensure_for(s)?;
    let (diff, scale) = commutator_norm(k, s)?;
    if diff > tol * scale.max(1.0) {
        return Err(Error::Precondition(format!(
            "operators do not commute (max |KS - SK| = {diff:e})"
        )));
    }
    let kf = k.apply(cert.f())?;
    if let Some(i) = kf.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::Precondition(format!(
            "Kf is not strictly positive at entry {}",
            i + 1
        )));
    }
    let skf = s.apply(&kf)?;
    Ok(skf
        .values()
        .iter()
        .zip(kf.values())
        .map(|(l, r)| crate::space::excess(*l, *r))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WeightedSpace;

    fn running() -> PositiveOperator {
        let sp = WeightedSpace::uniform(2).unwrap();
        PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * y.abs().max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn spectral_radius_examples() {
        let sp = WeightedSpace::uniform(2).unwrap();
        let d = PositiveOperator::from_rows(&sp, &[vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap();
        let e = spectral_radius(&d, 1000, 1e-14);
        assert!(e.converged);
        assert!((e.value - 0.5).abs() < 1e-12);

        let e = spectral_radius(&running(), 1000, 1e-14);
        assert!(e.converged);
        assert!((e.value - 0.5).abs() < 1e-12);

        let e = spectral_radius(&PositiveOperator::zero(&sp), 10, 1e-14);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn stalled_iteration_uses_conservative_bound() {
        let sp = WeightedSpace::uniform(2).unwrap();
        // Jordan-like block converges slowly (ratio 1 + 1/k)
        let s = PositiveOperator::from_rows(&sp, &[vec![0.5, 1.0], vec![0.0, 0.5]]).unwrap();
        let e = spectral_radius(&s, 3, 1e-15);
        assert!(!e.converged);
        assert!(e.value >= 0.5);
        assert!(e.value < 0.6);
    }

    #[test]
    fn gelfand_bound_dominates_radius_on_weighted_space() {
        let sp = WeightedSpace::new(vec![0.5, 2.0]).unwrap();
        let s = PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap();
        let rho = spectral_radius(&s, 10_000, 1e-15).value;
        let g = gelfand_bound(&s, 64);
        assert!(g >= rho - 1e-12);
        assert!(g < rho * 1.1);
    }

    #[test]
    fn series_examples() {
        let s = running();
        let f = s.space().ones();
        let opts = SeriesOptions::default();
        let id = PowerSeries::polynomial(vec![0.0, 1.0]).unwrap();
        close(series_apply(&id, &s, &f, &opts).unwrap().values(), &[0.3, 0.7], 1e-15);

        let z = PositiveOperator::zero(s.space());
        assert_eq!(exp_apply(&z, &f, &opts).unwrap().values(), f.values());

        let neu = PowerSeries::neumann(1.0).unwrap();
        let p = series_apply(&neu, &s, &f, &opts).unwrap();
        close(p.values(), &[14.0 / 9.0, 22.0 / 9.0], 1e-13);
    }

    #[test]
    fn exp_of_diagonal() {
        let sp = WeightedSpace::uniform(2).unwrap();
        let s = PositiveOperator::from_rows(&sp, &[vec![2f64.ln(), 0.0], vec![0.0, 0.0]]).unwrap();
        let g = exp_apply(&s, &sp.ones(), &SeriesOptions::default()).unwrap();
        close(g.values(), &[2.0, 1.0], 1e-14);

        let f = PosVec::new(&sp, vec![2.0, 3.0]).unwrap();
        let z = PositiveOperator::zero(&sp).scale(0.0).unwrap();
        assert_eq!(exp_apply(&z, &f, &SeriesOptions::default()).unwrap().values(), &[2.0, 3.0]);
    }

    #[test]
    fn series_refuses_beyond_radius_and_budget() {
        let s = running();
        let f = s.space().ones();
        let neu = PowerSeries::neumann(0.4).unwrap();
        assert!(matches!(
            series_apply(&neu, &s, &f, &SeriesOptions::default()),
            Err(Error::SpectralRadius { .. })
        ));
        let tight = SeriesOptions {
            max_terms: 3,
            term_tol: 1e-15,
        };
        assert!(matches!(
            exp_apply(&s, &f, &tight),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn resolvent_examples() {
        let s = running();
        let f = s.space().ones();
        let opts = SeriesOptions::default();
        let z = PositiveOperator::zero(s.space());
        assert_eq!(resolvent_apply(&z, 1.0, &f, &opts).unwrap().values(), f.values());

        let g = resolvent_apply(&s, 1.0, &f, &opts).unwrap();
        close(g.values(), &[14.0 / 9.0, 22.0 / 9.0], 1e-14);
        assert!(resolvent_cross_check(&s, 1.0, &f, &opts).unwrap() < 1e-8);

        assert!(matches!(
            resolvent_apply(&s, 0.4, &f, &opts),
            Err(Error::SpectralRadius { .. })
        ));
    }

    #[test]
    fn commuting_examples() {
        let s = running();
        let c = in_cone(&s, &s.space().ones(), 1e-12).unwrap();
        let id = PositiveOperator::identity(s.space());
        assert_eq!(commuting_preservation_check(&id, &s, &c, 1e-12).unwrap(), 0.0);
        assert_eq!(commuting_preservation_check(&s, &s, &c, 1e-12).unwrap(), 0.0);
        let poly = s
            .scale(0.5)
            .unwrap()
            .add(&s.compose(&s).unwrap().scale(0.25).unwrap())
            .unwrap();
        assert_eq!(commuting_preservation_check(&poly, &s, &c, 1e-12).unwrap(), 0.0);

        let sp = s.space().clone();
        let k = PositiveOperator::from_rows(&sp, &[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(
            commuting_preservation_check(&k, &s, &c, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn transformed_certificates() {
        let s = running();
        let c = in_cone(&s, &s.space().ones(), 1e-12).unwrap();
        let opts = SeriesOptions::default();
        assert!(transform_certificate(&PowerSeries::exp(), &c, &opts, 1e-9).is_ok());
        // F(z) = z maps (1,1) to (0.3,0.7), still in the wedge
        let id = PowerSeries::polynomial(vec![0.0, 1.0]).unwrap();
        assert!(transform_certificate(&id, &c, &opts, 1e-9).is_ok());
        // F(z) = z on a nilpotent S kills f
        let sp = WeightedSpace::uniform(2).unwrap();
        let nil = PositiveOperator::from_rows(&sp, &[vec![0.0, 0.5], vec![0.0, 0.0]]).unwrap();
        let c = in_cone(&nil, &sp.ones(), 1e-12).unwrap();
        assert!(matches!(
            transform_certificate(&id, &c, &opts, 1e-9),
            Err(Error::Precondition(_))
        ));
    }
}

//! Randomised certification of every inequality on generated instances.
//!
//! Trial `k` draws from a ChaCha stream seeded with `seed ^ k`, with the
//! property index selecting the stream, so results do not depend on how
//! trials are scheduled across threads.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cone::{in_cone, log_convex_combine, stochastic_completion, ConeCertificate};
use crate::error::{Error, Result};
use crate::inequalities::*;
use crate::space::{excess, NormKind, PosVec, PositiveOperator, WeightedSpace};
use crate::textio::fmt_num;

#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    /// Inclusive dimension range.
    pub n_range: (usize, usize),
    /// Inclusive tuple-length range.
    pub m_range: (usize, usize),
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub norm_kinds: Vec<NormKind>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_range: (2, 20),
            m_range: (1, 4),
            trials: 1000,
            seed: 42,
            tol: 1e-10,
            norm_kinds: vec![
                NormKind::L1w,
                NormKind::LInfW,
                NormKind::LpW(2.0),
                NormKind::LpW(3.5),
            ],
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if self.trials < 1 {
            return bad("trials must be >= 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be > 0");
        }
        if self.n_range.0 < 1 || self.n_range.0 > self.n_range.1 {
            return bad("n range must satisfy 1 <= min <= max");
        }
        if self.m_range.0 < 1 || self.m_range.0 > self.m_range.1 {
            return bad("m range must satisfy 1 <= min <= max");
        }
        if self.norm_kinds.is_empty() {
            return bad("at least one norm kind is required");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property_name: String,
    pub trials_run: usize,
    pub failures: usize,
    pub worst_violation: f64,
    pub worst_seed: u64,
    pub pass: bool,
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} trials={} worst={} seed={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.property_name,
            self.trials_run,
            fmt_num(self.worst_violation),
            self.worst_seed
        )
    }
}

/// Random instance generators.
pub mod generate {
    use super::*;
    use crate::linalg::shifted_lu;

    /// Weights uniform on `[0.5, 2]`.
    pub fn space<R: Rng>(rng: &mut R, n: usize) -> WeightedSpace {
        let w = (0..n).map(|_| rng.random_range(0.5..=2.0)).collect();
        WeightedSpace::new(w).expect("weights are positive")
    }

    /// Strictly substochastic: uniform entries, each column rescaled to a
    /// weighted mass drawn from `[0.1, 0.95]`.
    pub fn substochastic<R: Rng>(rng: &mut R, space: &WeightedSpace) -> PositiveOperator {
        let n = space.dim();
        let mut e: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let w = space.weights();
        for j in 0..n {
            let target = rng.random_range(0.1..=0.95);
            let mass: f64 = (0..n).map(|i| e[i * n + j] * w[i]).sum();
            if mass == 0.0 {
                let fill = target / w.iter().sum::<f64>();
                (0..n).for_each(|i| e[i * n + j] = fill);
            } else {
                (0..n).for_each(|i| e[i * n + j] *= target / mass);
            }
        }
        PositiveOperator::new(space, e).expect("entries are non-negative")
    }

    /// Arbitrary non-negative kernel with roughly 30% zeros and entries up to 2.
    pub fn positive<R: Rng>(rng: &mut R, space: &WeightedSpace) -> PositiveOperator {
        let n = space.dim();
        let e = (0..n * n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random_range(0.0..2.0)
                }
            })
            .collect();
        PositiveOperator::new(space, e).expect("entries are non-negative")
    }

    /// Non-negative vector with a random overall magnitude in `[1e-2, 1e2]`.
    pub fn vector<R: Rng>(rng: &mut R, space: &WeightedSpace) -> PosVec {
        let scale = 10f64.powf(rng.random_range(-2.0..=2.0));
        let v = (0..space.dim()).map(|_| scale * rng.random::<f64>()).collect();
        PosVec::new(space, v).expect("entries are non-negative")
    }

    /// `f = (I − S)⁻¹ x` with `x` uniform on `[0.1, 1]`; then `Sf = f − x ≤ f`.
    /// The result is run through `in_cone` before being handed out.
    pub fn cone_element<R: Rng>(
        rng: &mut R,
        s: &PositiveOperator,
        tol: f64,
    ) -> Result<ConeCertificate> {
        let x: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(0.1..=1.0)).collect();
        let lu = shifted_lu(s.dim(), &s.action_matrix(), 1.0)?;
        let f = lu.solve(&x)?;
        let f = PosVec::new(s.space(), f.into_iter().map(|v| v.max(0.0)).collect())?;
        in_cone(s, &f, tol)
    }

    /// Flat simplex sample (normalised exponential variates). `floor` keeps every
    /// weight at least that large; `allow_zero` (use with `floor = 0`) zeroes some
    /// weights at random, never all of them.
    pub fn exponents<R: Rng>(rng: &mut R, m: usize, floor: f64, allow_zero: bool) -> Vec<f64> {
        let mut e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        if allow_zero {
            let keep = rng.random_range(0..m);
            for (i, v) in e.iter_mut().enumerate() {
                if i != keep && rng.random_bool(0.25) {
                    *v = 0.0;
                }
            }
        }
        let total: f64 = e.iter().sum();
        let spread = 1.0 - floor * m as f64;
        let mut out: Vec<f64> = e.iter().map(|v| floor + spread * v / total).collect();
        let sum: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= sum);
        out
    }
}

/// Per-trial randomness and instance shape.
struct Trial<'a> {
    rng: ChaCha8Rng,
    config: &'a TrialConfig,
    fixed: Option<&'a PositiveOperator>,
}

impl Trial<'_> {
    fn dims(&mut self) -> (usize, usize) {
        let n = match self.fixed {
            Some(s) => s.dim(),
            None => self.rng.random_range(self.config.n_range.0..=self.config.n_range.1),
        };
        let m = self.rng.random_range(self.config.m_range.0..=self.config.m_range.1);
        (n, m)
    }

    fn space(&mut self, n: usize) -> WeightedSpace {
        match self.fixed {
            Some(s) => s.space().clone(),
            None => generate::space(&mut self.rng, n),
        }
    }

    fn positive_operator(&mut self, n: usize) -> PositiveOperator {
        match self.fixed {
            Some(s) => s.clone(),
            None => {
                let sp = self.space(n);
                generate::positive(&mut self.rng, &sp)
            }
        }
    }

    fn substochastic(&mut self, n: usize) -> PositiveOperator {
        match self.fixed {
            Some(s) => s.clone(),
            None => {
                let sp = self.space(n);
                generate::substochastic(&mut self.rng, &sp)
            }
        }
    }

    fn vectors(&mut self, space: &WeightedSpace, m: usize) -> Vec<PosVec> {
        (0..m).map(|_| generate::vector(&mut self.rng, space)).collect()
    }

    fn cone_elements(&mut self, s: &PositiveOperator, m: usize) -> Result<Vec<ConeCertificate>> {
        (0..m)
            .map(|_| generate::cone_element(&mut self.rng, s, crate::space::DEFAULT_TOL))
            .collect()
    }

    fn strict_exponents(&mut self, m: usize) -> Vec<f64> {
        generate::exponents(&mut self.rng, m, 1e-3, false)
    }

    fn alpha(&mut self) -> f64 {
        self.rng.random_range(1e-3..1.0 - 1e-3)
    }

    fn max_over_norms(&self, mut f: impl FnMut(NormKind) -> Result<f64>) -> Result<f64> {
        self.config
            .norm_kinds
            .iter()
            .try_fold(0.0, |acc, k| Ok(f64::max(acc, f(*k)?)))
    }
}

fn pair_max(v: (f64, f64)) -> f64 {
    v.0.max(v.1)
}

type PropertyFn = fn(&mut Trial<'_>) -> Result<f64>;

const PROPERTIES: &[(&str, PropertyFn)] = &[
    ("young", prop_young),
    ("holder_seminorm", prop_holder_seminorm),
    ("holder_integral", prop_holder_integral),
    ("kernel_holder", prop_kernel_holder),
    ("kernel_seminorm_chain", prop_kernel_chain),
    ("sum_split", prop_sum_split),
    ("sum_split_kernel", prop_sum_split_kernel),
    ("sum_split_seminorm", prop_sum_split_seminorm),
    ("cone_norm_bound", prop_cone_norm_bound),
    ("cone_mixed_bound", prop_cone_mixed_bound),
    ("log_convex_closure", prop_log_convex_closure),
    ("completion_soundness", prop_completion_soundness),
];

/// Properties that need no operator; skipped when running against a fixed one.
const OPERATOR_FREE: &[&str] = &["young"];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|(n, _)| *n).collect()
}

fn prop_young(t: &mut Trial<'_>) -> Result<f64> {
    let x = t.rng.random_range(f64::MIN_POSITIVE..=1e3);
    let y = t.rng.random_range(f64::MIN_POSITIVE..=1e3);
    let alpha = t.alpha();
    let s = 10f64.powf(t.rng.random_range(-3.0..=3.0));
    let (tstar, value) = young_argmin(x, y, alpha)?;
    let at_min = young_eval(x, y, alpha, tstar)?;
    let lower = excess(value, young_eval(x, y, alpha, s)?);
    let attained = (at_min - value).abs() / value.max(1.0);
    Ok(lower.max(attained))
}

fn prop_holder_seminorm(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let sp = t.space(n);
    let fs = t.vectors(&sp, m);
    let a = t.strict_exponents(m);
    t.max_over_norms(|k| holder_seminorm_check(&fs, &a, k))
}

fn prop_holder_integral(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let sp = t.space(n);
    let fs = t.vectors(&sp, m);
    let a = t.strict_exponents(m);
    holder_seminorm_check(&fs, &a, NormKind::L1w)
}

fn prop_kernel_holder(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.positive_operator(n);
    let fs = t.vectors(s.space(), m);
    let a = t.strict_exponents(m);
    kernel_holder_check(&s, &fs, &a)
}

fn prop_kernel_chain(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.positive_operator(n);
    let fs = t.vectors(s.space(), m);
    let a = t.strict_exponents(m);
    t.max_over_norms(|k| kernel_seminorm_chain_check(&s, &fs, &a, k).map(pair_max))
}

fn prop_sum_split(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let sp = t.space(n);
    let fs = t.vectors(&sp, m);
    let gs = t.vectors(&sp, m);
    let alpha = t.alpha();
    sum_split_check(&fs, &gs, alpha)
}

fn prop_sum_split_kernel(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.positive_operator(n);
    let fs = t.vectors(s.space(), m);
    let gs = t.vectors(s.space(), m);
    let alpha = t.alpha();
    sum_split_kernel_check(&s, &fs, &gs, alpha).map(pair_max)
}

fn prop_sum_split_seminorm(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.positive_operator(n);
    let fs = t.vectors(s.space(), m);
    let gs = t.vectors(s.space(), m);
    let alpha = t.alpha();
    t.max_over_norms(|k| sum_split_seminorm_check(&s, &fs, &gs, alpha, k).map(pair_max))
}

fn prop_cone_norm_bound(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.substochastic(n);
    let certs = t.cone_elements(&s, m)?;
    let a = generate::exponents(&mut t.rng, m, 0.0, true);
    t.max_over_norms(|k| cone_norm_bound_check(&s, &certs, &a, k).map(pair_max))
}

fn prop_cone_mixed_bound(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.substochastic(n);
    let fs = t.cone_elements(&s, m)?;
    let gs = t.cone_elements(&s, m)?;
    let alpha = t.alpha();
    t.max_over_norms(|k| cone_mixed_bound_check(&s, &fs, &gs, alpha, k).map(pair_max))
}

/// Combines certified vectors, then recomputes `h` through logarithms and `Sh`
/// with an explicit double loop.
fn prop_log_convex_closure(t: &mut Trial<'_>) -> Result<f64> {
    let (n, m) = t.dims();
    let s = t.substochastic(n);
    let certs = t.cone_elements(&s, m)?;
    let a = generate::exponents(&mut t.rng, m, 0.0, true);
    let h = log_convex_combine(&certs, &a)?;
    let w = s.space().weights();
    let mut worst = 0.0f64;
    for k in 0..n {
        let log_h: f64 = certs
            .iter()
            .zip(&a)
            .map(|(c, ai)| ai * c.f().values()[k].ln())
            .sum();
        let hk = log_h.exp();
        worst = worst.max((hk - h.f().values()[k]).abs() / hk.max(1.0));
    }
    for i in 0..n {
        let mut shi = 0.0;
        for j in 0..n {
            shi += s.get(i, j) * h.f().values()[j] * w[j];
        }
        worst = worst.max(excess(shi, h.f().values()[i]));
    }
    Ok(worst)
}

fn prop_completion_soundness(t: &mut Trial<'_>) -> Result<f64> {
    let n = t.dims().0;
    let s = t.substochastic(n);
    let cert = t.cone_elements(&s, 1)?.remove(0);
    completion_residual(&s, &cert)
}

/// Worst of the completion identities: unit column masses, `Af = f`,
/// `A ≥ S`, and `λ = Σ φ_i ω_i`.
pub fn completion_residual(s: &PositiveOperator, cert: &ConeCertificate) -> Result<f64> {
    let c = stochastic_completion(s, cert)?;
    let mass = c
        .a
        .column_mass()
        .values()
        .iter()
        .map(|m| (m - 1.0).abs())
        .fold(0.0, f64::max);
    let af = c.a.apply(cert.f())?;
    let fixed = af
        .values()
        .iter()
        .zip(cert.f().values())
        .map(|(a, f)| (a - f).abs() / f.max(1.0))
        .fold(0.0, f64::max);
    let majorant = c
        .a
        .entries()
        .iter()
        .zip(s.entries())
        .map(|(a, s)| (s - a).max(0.0))
        .fold(0.0, f64::max);
    let phi_mass = c.phi.norm(NormKind::L1w);
    let fubini = (c.lambda - phi_mass).abs() / c.lambda.max(1.0);
    Ok(mass.max(fixed).max(majorant).max(fubini))
}

fn run(config: &TrialConfig, fixed: Option<&PositiveOperator>) -> Result<Vec<PropertyReport>> {
    config.validate()?;
    let reports = PROPERTIES
        .iter()
        .enumerate()
        .filter(|(_, (name, _))| fixed.is_none() || !OPERATOR_FREE.contains(name))
        .map(|(idx, (name, prop))| {
            let violations: Vec<f64> = (0..config.trials)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ k as u64);
                    rng.set_stream(idx as u64);
                    let mut trial = Trial { rng, config, fixed };
                    match prop(&mut trial) {
                        Ok(v) if v.is_nan() => f64::INFINITY,
                        Ok(v) => v,
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect();
            let mut worst = 0.0;
            let mut worst_seed = config.seed;
            for (k, v) in violations.iter().enumerate() {
                if *v > worst {
                    worst = *v;
                    worst_seed = config.seed ^ k as u64;
                }
            }
            let failures = violations.iter().filter(|v| **v > config.tol).count();
            PropertyReport {
                property_name: name.to_string(),
                trials_run: config.trials,
                failures,
                worst_violation: worst,
                worst_seed,
                pass: failures == 0,
            }
        })
        .collect();
    Ok(reports)
}

/// Runs every property on freshly generated instances.
pub fn run_property_suite(config: &TrialConfig) -> Result<Vec<PropertyReport>> {
    run(config, None)
}

/// Runs the operator-dependent properties against one fixed operator, which
/// must be strictly substochastic so cone elements can be generated.
pub fn run_property_suite_on(
    s: &PositiveOperator,
    config: &TrialConfig,
) -> Result<Vec<PropertyReport>> {
    crate::cone::require_cone_operator(s, crate::space::DEFAULT_TOL)?;
    run(config, Some(s))
}

/// One line per report.
pub fn format_reports(reports: &[PropertyReport]) -> String {
    reports.iter().map(|r| format!("{r}\n")).collect()
}

//! Evaluators for the Hölder-type inequalities satisfied by positive kernel
//! operators and by the fixed-point wedge.
//!
//! Each `*_check` returns one-sided violations normalised by `max(1, rhs)`:
//! zero when the inequality holds, positive by the relative excess otherwise.

use crate::cone::{check_exponents, geometric_mean, ConeCertificate};
use crate::error::{Error, Result};
use crate::space::{excess, NormKind, PosVec, PositiveOperator};

fn check_alpha_open(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `α t^{1/α} x + (1−α) t^{−1/(1−α)} y`
pub fn young_eval(x: f64, y: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::Precondition("x and y must be >= 0".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("t must be finite and > 0, got {t}")));
    }
    Ok(alpha * t.powf(1.0 / alpha) * x + (1.0 - alpha) * t.powf(-1.0 / (1.0 - alpha)) * y)
}

/// Minimiser `t* = (y/x)^{α(1−α)}` and minimum `x^α y^{1−α}`.
pub fn young_argmin(x: f64, y: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha_open(alpha)?;
    if x == 0.0 || y == 0.0 {
        return Err(Error::InfimumNotAttained);
    }
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Precondition("x and y must be finite and > 0".into()));
    }
    let t = (y / x).powf(alpha * (1.0 - alpha));
    Ok((t, x.powf(alpha) * y.powf(1.0 - alpha)))
}

fn weighted_norm_product(norms: &[f64], alphas: &[f64]) -> f64 {
    norms
        .iter()
        .zip(alphas)
        .filter(|(_, a)| **a > 0.0)
        .map(|(n, a)| n.powf(*a))
        .product()
}

fn entrywise_excess(lhs: &PosVec, rhs: &[f64]) -> f64 {
    lhs.values()
        .iter()
        .zip(rhs)
        .map(|(l, r)| excess(*l, *r))
        .fold(0.0, f64::max)
}

fn refs(v: &[PosVec]) -> Vec<&PosVec> {
    v.iter().collect()
}

/// `‖Π f_i^{α_i}‖ ≤ Π ‖f_i‖^{α_i}` for a lattice norm.
pub fn holder_seminorm_check(fs: &[PosVec], alphas: &[f64], kind: NormKind) -> Result<f64> {
    check_exponents(alphas, fs.len(), true)?;
    let h = geometric_mean(&refs(fs), alphas)?;
    let norms: Vec<f64> = fs.iter().map(|f| f.norm(kind)).collect();
    Ok(excess(h.norm(kind), weighted_norm_product(&norms, alphas)))
}

/// Entrywise `S(Π f_i^{α_i}) ≤ Π (S f_i)^{α_i}`.
pub fn kernel_holder_check(s: &PositiveOperator, fs: &[PosVec], alphas: &[f64]) -> Result<f64> {
    check_exponents(alphas, fs.len(), true)?;
    let lhs = s.apply(&geometric_mean(&refs(fs), alphas)?)?;
    let sfs = fs.iter().map(|f| s.apply(f)).collect::<Result<Vec<_>>>()?;
    let rhs = geometric_mean(&refs(&sfs), alphas)?;
    Ok(entrywise_excess(&lhs, rhs.values()))
}

/// `‖S(Π f_i^{α_i})‖ ≤ ‖Π (S f_i)^{α_i}‖ ≤ Π ‖S f_i‖^{α_i}`.
pub fn kernel_seminorm_chain_check(
    s: &PositiveOperator,
    fs: &[PosVec],
    alphas: &[f64],
    kind: NormKind,
) -> Result<(f64, f64)> {
    check_exponents(alphas, fs.len(), true)?;
    let lhs = s.apply(&geometric_mean(&refs(fs), alphas)?)?.norm(kind);
    let sfs = fs.iter().map(|f| s.apply(f)).collect::<Result<Vec<_>>>()?;
    let mid = geometric_mean(&refs(&sfs), alphas)?.norm(kind);
    let norms: Vec<f64> = sfs.iter().map(|f| f.norm(kind)).collect();
    let rhs = weighted_norm_product(&norms, alphas);
    Ok((excess(lhs, mid), excess(mid, rhs)))
}

/// `Σ_i f_i^α g_i^{1−α}` entrywise.
fn mixed_sum(fs: &[PosVec], gs: &[PosVec], alpha: f64) -> Result<PosVec> {
    let terms = fs
        .iter()
        .zip(gs)
        .map(|(f, g)| geometric_mean(&[f, g], &[alpha, 1.0 - alpha]))
        .collect::<Result<Vec<_>>>()?;
    PosVec::sum(&terms)
}

/// `(Σf)^α (Σg)^{1−α}` entrywise, with the two sums.
fn mixed_of_sums(fs: &[PosVec], gs: &[PosVec], alpha: f64) -> Result<(PosVec, PosVec, PosVec)> {
    let (sf, sg) = (PosVec::sum(fs)?, PosVec::sum(gs)?);
    let m = geometric_mean(&[&sf, &sg], &[alpha, 1.0 - alpha])?;
    Ok((m, sf, sg))
}

fn check_pairs(fs: &[PosVec], gs: &[PosVec], alpha: f64) -> Result<()> {
    check_alpha_open(alpha)?;
    if fs.is_empty() || fs.len() != gs.len() {
        return Err(Error::Precondition(format!(
            "need equally many f and g (m >= 1), got {} and {}",
            fs.len(),
            gs.len()
        )));
    }
    Ok(())
}

/// Entrywise `Σ f_i^α g_i^{1−α} ≤ (Σ f_i)^α (Σ g_i)^{1−α}`.
pub fn sum_split_check(fs: &[PosVec], gs: &[PosVec], alpha: f64) -> Result<f64> {
    check_pairs(fs, gs, alpha)?;
    let lhs = mixed_sum(fs, gs, alpha)?;
    let (rhs, _, _) = mixed_of_sums(fs, gs, alpha)?;
    Ok(entrywise_excess(&lhs, rhs.values()))
}

/// Entrywise `S(Σ f_i^α g_i^{1−α}) ≤ S((Σf)^α(Σg)^{1−α}) ≤ (SΣf)^α (SΣg)^{1−α}`.
pub fn sum_split_kernel_check(
    s: &PositiveOperator,
    fs: &[PosVec],
    gs: &[PosVec],
    alpha: f64,
) -> Result<(f64, f64)> {
    check_pairs(fs, gs, alpha)?;
    let lhs = s.apply(&mixed_sum(fs, gs, alpha)?)?;
    let (m, sf, sg) = mixed_of_sums(fs, gs, alpha)?;
    let mid = s.apply(&m)?;
    let rhs = geometric_mean(&[&s.apply(&sf)?, &s.apply(&sg)?], &[alpha, 1.0 - alpha])?;
    Ok((
        entrywise_excess(&lhs, mid.values()),
        entrywise_excess(&mid, rhs.values()),
    ))
}

/// `‖S(Σ f_i^α g_i^{1−α})‖ ≤ ‖S((Σf)^α(Σg)^{1−α})‖ ≤ ‖SΣf‖^α ‖SΣg‖^{1−α}`.
pub fn sum_split_seminorm_check(
    s: &PositiveOperator,
    fs: &[PosVec],
    gs: &[PosVec],
    alpha: f64,
    kind: NormKind,
) -> Result<(f64, f64)> {
    check_pairs(fs, gs, alpha)?;
    let lhs = s.apply(&mixed_sum(fs, gs, alpha)?)?.norm(kind);
    let (m, sf, sg) = mixed_of_sums(fs, gs, alpha)?;
    let mid = s.apply(&m)?.norm(kind);
    let rhs = s.apply(&sf)?.norm(kind).powf(alpha) * s.apply(&sg)?.norm(kind).powf(1.0 - alpha);
    Ok((excess(lhs, mid), excess(mid, rhs)))
}

fn certified_vectors(s: &PositiveOperator, certs: &[ConeCertificate]) -> Result<Vec<PosVec>> {
    if let Some(i) = certs.iter().position(|c| !c.is_for(s)) {
        return Err(Error::Precondition(format!(
            "certificate {} was not issued for this operator",
            i + 1
        )));
    }
    Ok(certs.iter().map(|c| c.f().clone()).collect())
}

/// For certified `f_i`: `‖S h‖ ≤ ‖h‖ ≤ Π ‖f_i‖^{α_i}` with `h = Π f_i^{α_i}`.
pub fn cone_norm_bound_check(
    s: &PositiveOperator,
    certs: &[ConeCertificate],
    alphas: &[f64],
    kind: NormKind,
) -> Result<(f64, f64)> {
    let fs = certified_vectors(s, certs)?;
    check_exponents(alphas, fs.len(), false)?;
    let h = geometric_mean(&refs(&fs), alphas)?;
    let sh = s.apply(&h)?.norm(kind);
    let hn = h.norm(kind);
    let norms: Vec<f64> = fs.iter().map(|f| f.norm(kind)).collect();
    Ok((excess(sh, hn), excess(hn, weighted_norm_product(&norms, alphas))))
}

/// For certified `f_i, g_i`:
/// `‖S(Σ f_i^α g_i^{1−α})‖ ≤ ‖(Σf)^α(Σg)^{1−α}‖ ≤ ‖Σf‖^α ‖Σg‖^{1−α}`.
pub fn cone_mixed_bound_check(
    s: &PositiveOperator,
    f_certs: &[ConeCertificate],
    g_certs: &[ConeCertificate],
    alpha: f64,
    kind: NormKind,
) -> Result<(f64, f64)> {
    let fs = certified_vectors(s, f_certs)?;
    let gs = certified_vectors(s, g_certs)?;
    check_pairs(&fs, &gs, alpha)?;
    let lhs = s.apply(&mixed_sum(&fs, &gs, alpha)?)?.norm(kind);
    let (m, sf, sg) = mixed_of_sums(&fs, &gs, alpha)?;
    let mid = m.norm(kind);
    let rhs = sf.norm(kind).powf(alpha) * sg.norm(kind).powf(1.0 - alpha);
    Ok((excess(lhs, mid), excess(mid, rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::in_cone;
    use crate::space::WeightedSpace;

    fn running() -> PositiveOperator {
        let sp = WeightedSpace::uniform(2).unwrap();
        PositiveOperator::from_rows(&sp, &[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap()
    }

    fn v(sp: &WeightedSpace, xs: &[f64]) -> PosVec {
        PosVec::new(sp, xs.to_vec()).unwrap()
    }

    /// Minimum of young_eval over the log grid 10^{-6+12k/10^5}.
    fn grid_min(x: f64, y: f64, alpha: f64) -> f64 {
        (0..=100_000)
            .map(|k| 10f64.powf(-6.0 + 12.0 * k as f64 / 1e5))
            .map(|t| young_eval(x, y, alpha, t).unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn young_examples() {
        assert_eq!(young_eval(1.0, 1.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(young_eval(4.0, 1.0, 0.5, 1.0).unwrap(), 2.5);
        assert!(young_eval(0.0, 5.0, 0.5, 1e6).unwrap() < 1e-5);
        assert!(matches!(young_eval(1.0, 1.0, 0.5, 0.0), Err(Error::Precondition(_))));
        assert!(matches!(young_eval(1.0, 1.0, 1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn young_argmin_examples() {
        assert_eq!(young_argmin(1.0, 1.0, 0.5).unwrap(), (1.0, 1.0));

        let (t, val) = young_argmin(4.0, 1.0, 0.5).unwrap();
        assert!((t - 0.25f64.powf(0.25)).abs() < 1e-15);
        assert!((t - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((val - 2.0).abs() < 1e-15);
        assert!((young_eval(4.0, 1.0, 0.5, t).unwrap() - val).abs() < 1e-12 * val);
        assert!((grid_min(4.0, 1.0, 0.5) - 2.0).abs() < 1e-6 * 2.0);

        let (t, val) = young_argmin(1.0, 16.0, 0.25).unwrap();
        assert!((val - 8.0).abs() < 1e-14);
        assert!((young_eval(1.0, 16.0, 0.25, t).unwrap() - 8.0).abs() < 1e-12 * 8.0);
        assert!((grid_min(1.0, 16.0, 0.25) - 8.0).abs() < 1e-6 * 8.0);

        assert!(matches!(young_argmin(0.0, 1.0, 0.5), Err(Error::InfimumNotAttained)));
        assert!(matches!(young_argmin(1.0, 0.0, 0.5), Err(Error::InfimumNotAttained)));
    }

    #[test]
    fn holder_examples() {
        let sp = WeightedSpace::uniform(2).unwrap();
        let f1 = v(&sp, &[1.0, 4.0]);
        let f2 = v(&sp, &[4.0, 1.0]);
        assert_eq!(
            holder_seminorm_check(&[f1.clone(), f2.clone()], &[0.5, 0.5], NormKind::L1w).unwrap(),
            0.0
        );
        assert_eq!(
            holder_seminorm_check(&[f1.clone(), f1.clone()], &[0.5, 0.5], NormKind::LInfW).unwrap(),
            0.0
        );
        assert_eq!(
            holder_seminorm_check(std::slice::from_ref(&f1), &[1.0], NormKind::LpW(2.0)).unwrap(),
            0.0
        );
        assert!(holder_seminorm_check(&[f1, f2], &[0.0, 1.0], NormKind::L1w).is_err());
    }

    #[test]
    fn kernel_holder_examples() {
        let s = running();
        let sp = s.space().clone();
        let fs = [v(&sp, &[1.0, 4.0]), v(&sp, &[4.0, 1.0])];
        assert_eq!(kernel_holder_check(&s, &fs, &[0.5, 0.5]).unwrap(), 0.0);
        // S(2,2) = (0.6, 1.4); (Sf1)=(0.6,1.9), (Sf2)=(0.9,1.6)
        let lhs = s.apply(&v(&sp, &[2.0, 2.0])).unwrap();
        assert!((lhs.values()[0] - 0.6).abs() < 1e-15);
        assert!((lhs.values()[1] - 1.4).abs() < 1e-15);
        assert!((0.54f64.sqrt() - 0.7348).abs() < 1e-4);
        assert!((3.04f64.sqrt() - 1.7436).abs() < 1e-4);

        let same = [fs[0].clone(), fs[0].clone()];
        assert_eq!(kernel_holder_check(&s, &same, &[0.5, 0.5]).unwrap(), 0.0);
        let z = PositiveOperator::zero(&sp);
        assert_eq!(kernel_holder_check(&z, &fs, &[0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn kernel_chain_example() {
        let s = running();
        let sp = s.space().clone();
        let fs = [v(&sp, &[1.0, 4.0]), v(&sp, &[4.0, 1.0])];
        assert_eq!(
            kernel_seminorm_chain_check(&s, &fs, &[0.5, 0.5], NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
        // middle of the chain: √0.54 + √3.04 ≈ 2.4784; right end √(2.5·2.5) = 2.5
        let mid = 0.54f64.sqrt() + 3.04f64.sqrt();
        assert!((mid - 2.4784).abs() < 1e-4);
        let z = PositiveOperator::zero(&sp);
        assert_eq!(
            kernel_seminorm_chain_check(&z, &fs, &[0.5, 0.5], NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn sum_split_examples() {
        let sp = WeightedSpace::uniform(1).unwrap();
        let fs = [v(&sp, &[1.0]), v(&sp, &[3.0])];
        let gs = [v(&sp, &[2.0]), v(&sp, &[2.0])];
        assert_eq!(sum_split_check(&fs, &gs, 0.5).unwrap(), 0.0);
        let lhs = 2f64.sqrt() + 6f64.sqrt();
        assert!((lhs - 3.8637).abs() < 1e-4 && lhs <= 4.0);

        // equality cases, up to rounding in the powers
        assert!(sum_split_check(&fs[..1], &gs[..1], 0.3).unwrap() < 1e-15);
        assert!(sum_split_check(&fs, &fs, 0.3).unwrap() < 1e-15);
        assert!(sum_split_check(&fs, &gs[..1], 0.5).is_err());
        assert!(sum_split_check(&fs, &gs, 1.0).is_err());
    }

    #[test]
    fn sum_split_operator_examples() {
        let s = running();
        let sp = s.space().clone();
        let fs = [sp.ones()];
        let gs = [v(&sp, &[0.3, 0.7])];
        assert_eq!(
            sum_split_seminorm_check(&s, &fs, &gs, 0.5, NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(sum_split_kernel_check(&s, &fs, &gs, 0.5).unwrap(), (0.0, 0.0));
        assert_eq!(
            sum_split_seminorm_check(&s, &fs, &fs, 0.5, NormKind::LInfW).unwrap(),
            (0.0, 0.0)
        );
        let z = PositiveOperator::zero(&sp);
        assert_eq!(
            sum_split_seminorm_check(&z, &fs, &gs, 0.5, NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn cone_bound_examples() {
        let s = running();
        let sp = s.space().clone();
        let c1 = in_cone(&s, &sp.ones(), 1e-12).unwrap();
        let c2 = in_cone(&s, &v(&sp, &[0.3, 0.7]), 1e-12).unwrap();
        let certs = [c1.clone(), c2.clone()];
        assert_eq!(
            cone_norm_bound_check(&s, &certs, &[0.5, 0.5], NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
        // ‖Sh‖ ≈ 0.6922, ‖h‖ ≈ 1.3844, √2 ≈ 1.4142
        let h = [0.3f64.sqrt(), 0.7f64.sqrt()];
        assert!((h[0] - 0.54772).abs() < 1e-5 && (h[1] - 0.83666).abs() < 1e-5);
        let sh = s.apply(&v(&sp, &h)).unwrap();
        assert!((sh.values()[0] - 0.193211).abs() < 1e-6);
        assert!((sh.values()[1] - 0.498981).abs() < 1e-6);
        assert!((sh.norm(NormKind::L1w) - 0.6922).abs() < 1e-4);
        assert!((h[0] + h[1] - 1.3844).abs() < 1e-4);

        assert_eq!(
            cone_norm_bound_check(&s, std::slice::from_ref(&c1), &[1.0], NormKind::LInfW).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            cone_norm_bound_check(&s, &[c1.clone(), c2.clone()], &[1.0, 0.0], NormKind::L1w)
                .unwrap(),
            (0.0, 0.0)
        );

        let z = PositiveOperator::zero(&sp);
        assert!(matches!(
            cone_norm_bound_check(&z, &certs, &[0.5, 0.5], NormKind::L1w),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cone_mixed_examples() {
        let s = running();
        let sp = s.space().clone();
        let c1 = in_cone(&s, &sp.ones(), 1e-12).unwrap();
        let c2 = in_cone(&s, &v(&sp, &[0.3, 0.7]), 1e-12).unwrap();
        let f = [c1.clone()];
        let g = [c2.clone()];
        assert_eq!(
            cone_mixed_bound_check(&s, &f, &g, 0.5, NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            cone_mixed_bound_check(&s, &f, &f, 0.5, NormKind::L1w).unwrap(),
            (0.0, 0.0)
        );
        assert!(cone_mixed_bound_check(&s, &f, &g, 0.999999, NormKind::L1w).is_ok());
        assert!(matches!(
            cone_mixed_bound_check(&s, &f, &g, 1.0, NormKind::L1w),
            Err(Error::Precondition(_))
        ));
    }
}

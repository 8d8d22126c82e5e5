//! Midpoint discretisation of kernels `k(x, y) ≥ 0` on `[0,1]²`.
//!
//! Nodes are `x_i = (i − ½)/n` with weights `1/n`, and the matrix is
//! `s_ij = k(x_i, x_j)`. The weighted action is then the quadrature rule for
//! `(Kf)(x) = ∫ k(x, y) f(y) dy`, and column masses approximate
//! `s(y) = ∫ k(x, y) dx`.

use std::fmt;
use std::sync::Arc;

use crate::cone::{in_cone, stochastic_completion, Completion};
use crate::error::{Error, Result};
use crate::inequalities::{kernel_holder_check, kernel_seminorm_chain_check};
use crate::space::{NormKind, PosVec, PositiveOperator, StochClass, WeightedSpace, DEFAULT_TOL};

type Kernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct KernelSpec {
    kernel: Kernel,
    samplers: Vec<Sampler>,
    exact_mass: Option<Sampler>,
    pub grid_n: usize,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("grid_n", &self.grid_n)
            .field("samplers", &self.samplers.len())
            .field("exact_mass", &self.exact_mass.is_some())
            .finish_non_exhaustive()
    }
}

impl KernelSpec {
    pub fn new(kernel: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, grid_n: usize) -> Self {
        Self {
            kernel: Arc::new(kernel),
            samplers: Vec::new(),
            exact_mass: None,
            grid_n,
        }
    }

    /// Closed form of `y ↦ ∫ k(x, y) dx`, used by [`refinement_study`].
    pub fn with_exact_mass(mut self, mass: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact_mass = Some(Arc::new(mass));
        self
    }

    /// Adds a non-negative test function on `[0,1]`.
    pub fn with_sampler(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.samplers.push(Arc::new(f));
        self
    }

    pub fn with_grid(mut self, grid_n: usize) -> Self {
        self.grid_n = grid_n;
        self
    }

    /// Built-in kernels: `const:c`, `sum` (x+y), `product` (x·y) and
    /// `quadratic` ((x²+y²)/4), each with its exact column mass and two test
    /// functions.
    pub fn named(name: &str, grid_n: usize) -> Result<Self> {
        let spec = match name {
            "sum" => Self::new(|x, y| x + y, grid_n).with_exact_mass(|y| 0.5 + y),
            "product" => Self::new(|x, y| x * y, grid_n).with_exact_mass(|y| 0.5 * y),
            "quadratic" => Self::new(|x, y| (x * x + y * y) / 4.0, grid_n)
                .with_exact_mass(|y| 1.0 / 12.0 + y * y / 4.0),
            other => {
                let c: f64 = other
                    .strip_prefix("const:")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "unknown kernel `{other}` (expected const:<c>, sum, product or quadratic)"
                        ))
                    })?;
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "constant kernel needs finite c >= 0, got {c}"
                    )));
                }
                Self::new(move |_, _| c, grid_n).with_exact_mass(move |_| c)
            }
        };
        Ok(spec
            .with_sampler(|x| 1.0 + x)
            .with_sampler(|x| (-x).exp() + 0.1))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.kernel)(x, y)
    }
}

/// Midpoint nodes `(i − ½)/n`.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

pub fn discretize(spec: &KernelSpec) -> Result<(WeightedSpace, PositiveOperator)> {
    let n = spec.grid_n;
    if n < 1 {
        return Err(Error::InvalidInput("grid needs at least one node".into()));
    }
    let space = WeightedSpace::new(vec![1.0 / n as f64; n])?;
    let xs = nodes(n);
    let mut e = Vec::with_capacity(n * n);
    for &x in &xs {
        for &y in &xs {
            let k = spec.eval(x, y);
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "kernel sample k({x}, {y}) = {k} is negative or not finite"
                )));
            }
            e.push(k);
        }
    }
    let s = PositiveOperator::new(&space, e)?;
    Ok((space, s))
}

/// Samples a test function at the nodes.
pub fn sample(space: &WeightedSpace, f: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Result<PosVec> {
    PosVec::new(space, nodes(space.dim()).into_iter().map(f).collect())
}

/// Completes the discretised kernel around `f ≡ 1`.
///
/// For `k ≡ ½` this reproduces the continuous completion exactly:
/// `φ ≡ ψ ≡ λ = ½` and `a ≡ 1`.
pub fn continuous_completion_demo(spec: &KernelSpec) -> Result<Completion> {
    let (space, s) = discretize(spec)?;
    match s.classify(DEFAULT_TOL) {
        StochClass::Stochastic => return Err(Error::StochasticOperator { lambda: 0.0 }),
        StochClass::NotSubstochastic => {
            return Err(Error::Precondition(
                "discretised kernel is not substochastic".into(),
            ))
        }
        _ => {}
    }
    let cert = in_cone(&s, &space.ones(), DEFAULT_TOL)?;
    stochastic_completion(&s, &cert)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub n: usize,
    /// `max_j |column_mass_j − s(y_j)|`
    pub mass_error: f64,
    /// Worst violation of the pointwise and normed Hölder bounds on the samplers.
    pub holder_violation: f64,
}

pub fn refinement_study(spec: &KernelSpec, n_list: &[usize]) -> Result<Vec<RefinementRow>> {
    let exact = spec.exact_mass.as_ref().ok_or_else(|| {
        Error::Precondition("refinement needs the exact column mass of the kernel".into())
    })?;
    n_list
        .iter()
        .map(|&n| {
            let (space, s) = discretize(&spec.clone().with_grid(n))?;
            let mass_error = s
                .column_mass()
                .values()
                .iter()
                .zip(nodes(n))
                .map(|(m, y)| (m - exact(y)).abs())
                .fold(0.0, f64::max);
            let fs = spec
                .samplers
                .iter()
                .map(|f| sample(&space, f.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            let holder_violation = if fs.len() >= 2 {
                let a = vec![1.0 / fs.len() as f64; fs.len()];
                let point = kernel_holder_check(&s, &fs, &a)?;
                let (v1, v2) = kernel_seminorm_chain_check(&s, &fs, &a, NormKind::L1w)?;
                point.max(v1).max(v2)
            } else {
                0.0
            };
            Ok(RefinementRow {
                n,
                mass_error,
                holder_violation,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_is_exact() {
        let (sp, s) = discretize(&KernelSpec::named("const:0.5", 4).unwrap()).unwrap();
        assert_eq!(sp.weights(), &[0.25; 4]);
        assert!(s.entries().iter().all(|v| *v == 0.5));
        assert_eq!(s.column_mass().values(), &[0.5; 4]);

        let (_, s) = discretize(&KernelSpec::named("const:1", 4).unwrap()).unwrap();
        assert_eq!(s.classify(1e-12), StochClass::Stochastic);
    }

    #[test]
    fn sum_kernel_masses() {
        let (_, s) = discretize(&KernelSpec::named("sum", 2).unwrap()).unwrap();
        let m = s.column_mass();
        assert!((m.values()[0] - 0.75).abs() < 1e-15);
        assert!((m.values()[1] - 1.25).abs() < 1e-15);
        assert_eq!(s.classify(1e-12), StochClass::NotSubstochastic);
    }

    #[test]
    fn negative_kernel_is_refused() {
        let spec = KernelSpec::new(|x, y| x - y, 3);
        assert!(matches!(discretize(&spec), Err(Error::InvalidInput(_))));
        assert!(KernelSpec::named("const:-1", 3).is_err());
        assert!(KernelSpec::named("cubic", 3).is_err());
    }

    #[test]
    fn completion_demo() {
        for n in [1, 4, 7] {
            let c = continuous_completion_demo(&KernelSpec::named("const:0.5", n).unwrap()).unwrap();
            assert!((c.lambda - 0.5).abs() < 1e-15);
            assert!(c.phi.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
            assert!(c.psi.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
            assert!(c.a.entries().iter().all(|v| (v - 1.0).abs() < 1e-15));
        }
        assert!(matches!(
            continuous_completion_demo(&KernelSpec::named("const:1", 4).unwrap()),
            Err(Error::StochasticOperator { .. })
        ));
    }

    #[test]
    fn refinement_rates() {
        let rows = refinement_study(&KernelSpec::named("const:0.5", 1).unwrap(), &[1, 2, 8]).unwrap();
        assert!(rows.iter().all(|r| r.mass_error == 0.0));

        // midpoint integrates x exactly
        let rows = refinement_study(&KernelSpec::named("product", 1).unwrap(), &[2, 5]).unwrap();
        assert!(rows.iter().all(|r| r.mass_error <= 1e-15));

        let spec = KernelSpec::new(|x, _| x * x, 1).with_exact_mass(|_| 1.0 / 3.0);
        let rows = refinement_study(&spec, &[4, 8, 16]).unwrap();
        for w in rows.windows(2) {
            let ratio = w[0].mass_error / w[1].mass_error;
            assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        }

        let rows = refinement_study(&KernelSpec::named("quadratic", 1).unwrap(), &[8, 16, 32]).unwrap();
        assert!(rows.iter().all(|r| r.holder_violation <= 1e-12));

        assert!(refinement_study(&KernelSpec::new(|_, _| 1.0, 2), &[2]).is_err());
    }
}

//! Command-line front end over the plain-text file formats.
//!
//! Exit status: 0 on success, 1 on a failed property or a cone rejection,
//! 2 on usage, parse or precondition errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::applications::{leontief_solve, pagerank_solve, Economy};
use crate::cone::{in_cone, log_convex_combine, stochastic_completion};
use crate::error::{Error, Result};
use crate::kernel::{continuous_completion_demo, discretize, refinement_study, KernelSpec};
use crate::space::{PosVec, PositiveOperator, WeightedSpace, DEFAULT_TOL};
use crate::suite::{format_reports, run_property_suite, TrialConfig};
use crate::textio::{self, fmt_num};
use crate::transforms::{exp_apply, resolvent_apply, spectral_radius, SeriesOptions};

#[derive(Parser, Debug)]
#[command(name = "stochcone", version, about = "Fixed-point wedges of substochastic operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OperatorArgs {
    /// Operator matrix file (`matrix n n`).
    #[arg(long)]
    matrix: PathBuf,
    /// Weights file (`weights n`); defaults to unit weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Comparison tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Column masses and stochasticity class.
    Classify(OperatorArgs),
    /// Check f ≫ 0 and Sf ≤ f.
    CheckCone {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Stochastic majorant fixing f.
    Complete {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Weighted geometric mean of cone elements.
    Combine {
        #[command(flatten)]
        op: OperatorArgs,
        /// Repeat once per factor.
        #[arg(long = "vector", required = true)]
        vectors: Vec<PathBuf>,
        /// Comma-separated exponents summing to 1.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
    /// Randomised certification of every inequality.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        m_min: usize,
        #[arg(long, default_value_t = 4)]
        m_max: usize,
        /// Violation tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Spectral radius by power iteration.
    Spectral {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// (λI − S)⁻¹ f.
    Resolvent {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// exp(S) f.
    Exp {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Leontief supply for a demand vector.
    Leontief {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        demand: PathBuf,
    },
    /// PageRank steady state p = x + Sp.
    Pagerank {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        births: PathBuf,
    },
    /// Discretise a named kernel and complete it around f ≡ 1.
    KernelDemo {
        /// const:<c>, sum, product or quadratic.
        #[arg(long, default_value = "const:0.5")]
        kernel: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Comma-separated grid sizes for a refinement table.
        #[arg(long, value_delimiter = ',')]
        refine: Vec<usize>,
    },
}

enum Outcome {
    Ok,
    /// Ran to completion but the answer is negative.
    Failed,
}

/// Runs one invocation; returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli.command, out) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(Error::Rejected(r)) => {
            let _ = writeln!(out, "rejected: {r}");
            1
        }
        Err(e @ Error::InternalConsistency { .. }) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn load_space(weights: Option<&PathBuf>, n: usize) -> Result<WeightedSpace> {
    match weights {
        None => WeightedSpace::uniform(n),
        Some(p) => {
            let w = textio::read_weights(p)?;
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            WeightedSpace::new(w)
        }
    }
}

fn load_operator(matrix: &Path, weights: Option<&PathBuf>) -> Result<PositiveOperator> {
    let m = textio::read_matrix(matrix)?;
    let space = load_space(weights, m.rows)?;
    m.into_operator(&space)
}

fn load_vector(path: &Path, space: &WeightedSpace) -> Result<PosVec> {
    PosVec::new(space, textio::read_vector(path)?)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Classify(op) => {
            let s = load_operator(&op.matrix, op.weights.as_ref())?;
            writeln!(out, "class={}", s.classify(op.tol))?;
            write!(out, "{}", textio::format_vector(s.column_mass().values()))?;
        }
        Command::CheckCone { op, vector } => {
            let s = load_operator(&op.matrix, op.weights.as_ref())?;
            let f = load_vector(&vector, s.space())?;
            let cert = in_cone(&s, &f, op.tol)?;
            writeln!(out, "member")?;
            write!(out, "{}", textio::format_vector(cert.slack().values()))?;
        }
        Command::Complete { op, vector } => {
            let s = load_operator(&op.matrix, op.weights.as_ref())?;
            let f = load_vector(&vector, s.space())?;
            let cert = in_cone(&s, &f, op.tol)?;
            write!(out, "{}", stochastic_completion(&s, &cert)?.to_text())?;
        }
        Command::Combine { op, vectors, alphas } => {
            let s = load_operator(&op.matrix, op.weights.as_ref())?;
            let certs = vectors
                .iter()
                .map(|p| in_cone(&s, &load_vector(p, s.space())?, op.tol))
                .collect::<Result<Vec<_>>>()?;
            let h = log_convex_combine(&certs, &alphas)?;
            write!(out, "{}", textio::format_vector(h.f().values()))?;
        }
        Command::Verify {
            seed,
            trials,
            n_min,
            n_max,
            m_min,
            m_max,
            tol,
        } => {
            let cfg = TrialConfig {
                n_range: (n_min, n_max),
                m_range: (m_min, m_max),
                trials,
                seed,
                tol,
                ..TrialConfig::default()
            };
            let reports = run_property_suite(&cfg)?;
            write!(out, "{}", format_reports(&reports))?;
            if reports.iter().any(|r| !r.pass) {
                return Ok(Outcome::Failed);
            }
        }
        Command::Spectral {
            matrix,
            weights,
            iters,
            tol,
        } => {
            let s = load_operator(&matrix, weights.as_ref())?;
            let est = spectral_radius(&s, iters, tol);
            writeln!(out, "rho={}", fmt_num(est.value))?;
            writeln!(out, "converged={}", est.converged)?;
        }
        Command::Resolvent {
            matrix,
            weights,
            vector,
            lambda,
        } => {
            let s = load_operator(&matrix, weights.as_ref())?;
            let f = load_vector(&vector, s.space())?;
            let g = resolvent_apply(&s, lambda, &f, &SeriesOptions::default())?;
            write!(out, "{}", textio::format_vector(g.values()))?;
        }
        Command::Exp {
            matrix,
            weights,
            vector,
        } => {
            let s = load_operator(&matrix, weights.as_ref())?;
            let f = load_vector(&vector, s.space())?;
            let g = exp_apply(&s, &f, &SeriesOptions::default())?;
            write!(out, "{}", textio::format_vector(g.values()))?;
        }
        Command::Leontief {
            matrix,
            weights,
            demand,
        } => {
            let s = load_operator(&matrix, weights.as_ref())?;
            let c = load_vector(&demand, s.space())?;
            let p = leontief_solve(&Economy::new(s)?, &c)?;
            write!(out, "{}", textio::format_vector(p.values()))?;
        }
        Command::Pagerank {
            matrix,
            weights,
            births,
        } => {
            let s = load_operator(&matrix, weights.as_ref())?;
            let x = load_vector(&births, s.space())?;
            let p = pagerank_solve(&s, &x)?;
            write!(out, "{}", textio::format_vector(p.values()))?;
        }
        Command::KernelDemo { kernel, n, refine } => {
            let spec = KernelSpec::named(&kernel, n)?;
            let (_, s) = discretize(&spec)?;
            writeln!(out, "class={}", s.classify(DEFAULT_TOL))?;
            write!(out, "{}", textio::format_vector(s.column_mass().values()))?;
            let completion = continuous_completion_demo(&spec);
            if !refine.is_empty() {
                for row in refinement_study(&spec, &refine)? {
                    writeln!(
                        out,
                        "refine n={} mass_error={} holder_violation={}",
                        row.n,
                        fmt_num(row.mass_error),
                        fmt_num(row.holder_violation)
                    )?;
                }
            }
            write!(out, "{}", completion?.to_text())?;
        }
    }
    Ok(Outcome::Ok)
}

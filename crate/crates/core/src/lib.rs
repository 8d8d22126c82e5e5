//! Fixed points of substochastic kernel operators on finite weighted sequence
//! spaces.
//!
//! A non-negative matrix `S` acts on `n` points with masses `ω_i` through
//! `(Sx)_i = Σ_j s_ij x_j ω_j`. When `S` is substochastic but not stochastic,
//! the set `C(S) = {f ≫ 0 : Sf ≤ f}` is exactly the set of strictly positive
//! fixed points of stochastic majorants of `S`. It is a wedge, it is closed
//! under weighted geometric means, and it is preserved by power series in `S`
//! with non-negative coefficients.
//!
//! ```
//! use stochcone::{cone, PosVec, PositiveOperator, WeightedSpace};
//!
//! let space = WeightedSpace::uniform(2)?;
//! let s = PositiveOperator::from_rows(&space, &[vec![0.2, 0.1], vec![0.3, 0.4]])?;
//! let cert = cone::in_cone(&s, &space.ones(), 1e-12)?;
//! let completion = cone::stochastic_completion(&s, &cert)?;
//! assert!((completion.lambda - 1.0).abs() < 1e-14);
//! assert!((completion.a.get(0, 0) - 0.55).abs() < 1e-14);
//! # Ok::<(), stochcone::Error>(())
//! ```

pub mod applications;
pub mod cli;
pub mod cone;
pub mod error;
pub mod inequalities;
pub mod kernel;
pub mod linalg;
pub mod space;
pub mod suite;
pub mod textio;
pub mod transforms;

pub use cone::{Completion, ConeCertificate};
pub use error::{Error, Rejection, Result};
pub use space::{NormKind, PosVec, PositiveOperator, StochClass, WeightedSpace};
pub use suite::{PropertyReport, TrialConfig};

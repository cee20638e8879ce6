//! Frequency-dependent expected log-growth (ELG) portfolio analysis.
//!
//! A portfolio of `m` assets with i.i.d. per-step returns is rebalanced to a
//! fixed weight vector `K` every `n` steps. The per-step expected log growth
//! of that scheme,
//!
//! ```text
//! g_n(K) = (1/n) E[log(1 + K' X_n)]
//! ```
//!
//! with `X_n` the n-step compound return vector, is the quantity everything
//! here revolves around. The crate evaluates `g_n(K)` exactly by enumerating
//! the n-step outcome tree of a finite-support return model, estimates it by
//! Monte Carlo when enumeration is out of budget, maximizes it over the unit
//! simplex with a conditional-gradient method whose duality gap certifies the
//! result, detects dominant assets, evaluates the closed-form buy-and-hold
//! gap bounds and the rebalancing-horizon formula, numerically probes the
//! high-frequency maximality property `g_n* <= g_1*`, and replays tick data
//! through sliding-window dominance tests and empirical gap curves.
//!
//! Heavy inner loops (outcome sums, Monte Carlo batches, scan trials, sliding
//! windows) run data-parallel under the `parallel` feature (on by default)
//! and are bitwise identical to the sequential fallback; see [`exec`].

pub mod bounds;
pub mod conjecture;
pub mod elg;
mod error;
pub mod exec;
pub mod ingest;
pub mod model;
pub mod rng;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on the number of enumerated n-step outcomes (`s^n`).
///
/// Sized for desk-scale exactness: models with up to 10 atoms stay exact
/// through horizon 7. Past the budget, callers fall back to Monte Carlo.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Default convergence tolerance for the optimizer's duality gap (nats/step).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap for the optimizer.
pub const DEFAULT_MAX_ITERS: usize = 100_000;

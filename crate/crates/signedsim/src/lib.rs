//! # signedsim
//!
//! Classical simulation of signed (quasi-) probability measures, with the
//! large-deviation diagnostics that tell the simulation apart from the
//! process it imitates.
//!
//! Any no-signaling outcome table — including ones no classical
//! probability measure on phase space can produce — is realized by a
//! *signed* measure `λ`.  The simulation runs a genuinely classical
//! sampler anyway: it doubles the phase space into positive and negative
//! copies, samples from the non-negative measure `ν = |λ|/Λ`, and cancels
//! plus against minus occurrences in the frequency counts.  On average
//! this reproduces the right statistics exactly.  Away from the average it
//! does not: the probability of a large fluctuation decays at rate
//! `D(g‖ν)` under the simulation versus `D(f‖μ)` under the imitated
//! process, and negativity can make the first rate *smaller* — a strict
//! reversal of the classical data processing inequality.  Rare events can
//! be systematically more likely in the simulation than in the system it
//! mimics.
//!
//! What lives where:
//!
//! - [`measures`] — signed measures, distributions, frequencies, KL
//!   divergence, total variation weight.
//! - [`scenario`] — measurement scenarios, outcome tables, no-signaling
//!   checks, phase-space encodings, and the minimal-negativity
//!   realization solver (plus the built-in Bell-state fixture).
//! - [`simulation`] — the doubled space, the cancellation pushforward,
//!   the signed channel decomposition `T = T⁺ − T⁻`, and seeded sampling.
//! - [`rates`] — Sanov approximations, an exact multinomial ball oracle,
//!   Monte Carlo estimation, the small-deviation quadratic form, and the
//!   two-spin Gibbs baseline with its strict classical inequality.
//! - [`reversal`] — minimal-rate deviations under an image constraint
//!   (I-projection), the signed data-processing bound for one negative
//!   weight, and the near-uniform family with its provable reversal.
//! - [`cli`] — deterministic report construction for the `signedsim`
//!   binary (JSON/CSV emission, exit codes).
//!
//! ```
//! use signedsim::scenario::bell_fixture;
//! use signedsim::simulation::{double, signed_pushforward, OutcomeMap};
//! use signedsim::scenario::canonical_phase_space;
//!
//! let (model, lam) = bell_fixture();
//! let sim = double(&lam);
//! assert_eq!(sim.total_weight(), 1.25);
//!
//! // cancelling the simulation measure itself recovers the table
//! let space = canonical_phase_space(model.scenario()).unwrap();
//! let chi = OutcomeMap::from_context(&space, &[0, 0]).unwrap();
//! let image = signed_pushforward(&sim.as_dist(), &chi).unwrap();
//! let row = model.row(&[0, 0]).unwrap();
//! for (a, b) in image.dist.probs().iter().zip(row.probs()) {
//!     assert!((a - b).abs() < 1e-12);
//! }
//! ```

pub mod cli;
mod error;
mod linprog;
pub mod measures;
pub mod rates;
pub mod reversal;
pub mod scenario;
pub mod simulation;

pub use error::{Error, Result};

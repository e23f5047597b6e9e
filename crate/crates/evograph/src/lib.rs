//! Weak-selection evolutionary dynamics of n-strategy, (k+1)-player games on
//! degree-k regular graphs.
//!
//! The crate has two halves that check each other:
//!
//! * a deterministic pair-approximation engine: configuration enumeration
//!   ([`config_space`]), payoff structures ([`payoff`]), conditional edge
//!   closure and statistical mean payoffs ([`pair_approx`]), replicator
//!   right-hand sides for the pairwise-comparison and death-birth rules
//!   ([`replicator`]), and simplex ODE analysis with closed-form punishment
//!   thresholds ([`analysis`]);
//! * an agent-based Monte Carlo simulator on finite random regular graphs
//!   ([`mc`]) implementing the exact microscopic update rules, used to
//!   validate the closure and the direction of selection.
//!
//! The `evograph` binary exposes both halves behind reproducible,
//! manifest-stamped commands.

pub mod analysis;
pub mod cli;
pub mod config_space;
pub mod error;
mod linalg;
pub mod mc;
pub mod pair_approx;
pub mod payoff;
pub mod plot;
pub mod replicator;

pub use error::{ErrorCategory, EvoError, Result};

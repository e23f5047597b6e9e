//! Dynamical analysis on top of the replicator vector fields: trajectory
//! integration, equilibrium location and classification, closed-form
//! punishment thresholds, and phase-diagram construction.

pub mod equilibria;
pub mod integrate;
pub mod phase;
pub mod thresholds;

pub use equilibria::{
    classify_stability, find_equilibria, write_equilibria_csv, Equilibrium, EquilibriumKind,
    SegmentProfile, SegmentSample, Stability,
};
pub use integrate::{integrate, TerminalReason, Trajectory};
pub use phase::{
    phase_classify, phase_diagram, write_phase_csv, Phase, PhaseDiagram, PhaseOptions,
};
pub use thresholds::{
    edge_equilibrium_fractions, peer_thresholds, pool_thresholds, EdgeFractions, GameThresholds,
    Population, PunishmentKind,
};

//! Agent-based Monte Carlo: graph generation plus the microscopic
//! simulator used to cross-check the pair-approximation dynamics.

pub mod graph;
pub mod sim;

pub use graph::{random_regular_graph, ring_lattice, RegularGraph};
pub use sim::{
    accumulated_payoff, fermi_probability, run, validate_closure, ClosureReport, InitialCondition,
    SimConfig, SimResult, SimSummary,
};

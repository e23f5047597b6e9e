//! Weak-selection replicator right-hand sides on degree-k regular graphs
//! under pairwise-comparison and death-birth updating, plus the well-mixed
//! baseline. Structured rules come in two assemblies: a general path built
//! from single-game mean tables that works for any payoff model, and a
//! closed-form fast path for linear payoffs. Both are exposed and agree.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EvoError, Result};
use crate::pair_approx::{
    accumulated_neighbor, accumulated_second_order, accumulated_self, edge_closure, CachedPayoffs,
    EdgeClosure, PopulationState, TableMode,
};
use crate::payoff::{try_linear_fit, LinearPayoff, PayoffModel};

/// Microscopic strategy update process the mean-field equations describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Focal player imitates a random neighbor with the Fermi probability.
    PairwiseComparison,
    /// Focal player dies; neighbors compete for the vacancy by fitness.
    DeathBirth,
    /// No graph: frequencies evolve by mean payoff advantage directly.
    WellMixed,
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UpdateRule::PairwiseComparison => "pc",
            UpdateRule::DeathBirth => "db",
            UpdateRule::WellMixed => "wellmixed",
        };
        f.write_str(s)
    }
}

impl FromStr for UpdateRule {
    type Err = EvoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pc" | "pairwise_comparison" | "pairwise-comparison" => {
                Ok(UpdateRule::PairwiseComparison)
            }
            "db" | "death_birth" | "death-birth" => Ok(UpdateRule::DeathBirth),
            "wm" | "wellmixed" | "well_mixed" | "well-mixed" => Ok(UpdateRule::WellMixed),
            other => Err(EvoError::InvalidArgument(format!(
                "unknown update rule '{other}' (expected pc, db, or wellmixed)"
            ))),
        }
    }
}

/// Which right-hand-side assembly to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsPath {
    /// Single-game mean tables; works for every payoff model.
    General,
    /// Closed form in (b, c); requires a linear payoff structure.
    LinearFast,
    /// LinearFast when the model admits an exact linear fit, else General.
    Auto,
}

impl FromStr for RhsPath {
    type Err = EvoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(RhsPath::General),
            "linear" | "linear_fast" | "linear-fast" => Ok(RhsPath::LinearFast),
            "auto" => Ok(RhsPath::Auto),
            other => Err(EvoError::InvalidArgument(format!(
                "unknown rhs path '{other}' (expected general, linear, or auto)"
            ))),
        }
    }
}

/// A replicator vector field dx/dt over the strategy simplex, parameterized
/// by payoff model, degree, update rule, and selection strength delta.
///
/// delta only rescales time under weak selection, so equilibria and their
/// stability are delta-invariant; trajectories are reported in the rescaled
/// time. delta = 0 is accepted and yields the neutral (zero) field.
pub struct ReplicatorSystem {
    model: Arc<dyn PayoffModel>,
    rule: UpdateRule,
    delta: f64,
    path: RhsPath,
    cache: CachedPayoffs,
    linear: Option<LinearPayoff>,
}

impl fmt::Debug for ReplicatorSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReplicatorSystem")
            .field("n", &self.n())
            .field("k", &self.k())
            .field("rule", &self.rule)
            .field("delta", &self.delta)
            .field("path", &self.path)
            .field("linear", &self.linear.is_some())
            .finish()
    }
}

impl ReplicatorSystem {
    /// Builds a system with automatic path selection.
    pub fn new(model: Arc<dyn PayoffModel>, rule: UpdateRule, delta: f64) -> Result<Self> {
        ReplicatorSystem::with_path(model, rule, delta, RhsPath::Auto)
    }

    pub fn with_path(
        model: Arc<dyn PayoffModel>,
        rule: UpdateRule,
        delta: f64,
        path: RhsPath,
    ) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(EvoError::InvalidArgument(format!(
                "selection strength delta = {delta} must be finite and >= 0"
            )));
        }
        let k = model.k();
        if rule != UpdateRule::WellMixed && k < 3 {
            return Err(EvoError::DegenerateDegree { k });
        }
        let cache = CachedPayoffs::new(&*model);
        let linear = try_linear_fit(&*model);
        if path == RhsPath::LinearFast && linear.is_none() {
            return Err(EvoError::NonlinearModel(format!(
                "model with strategies {:?} has no exact linear payoff form",
                model.strategy_names()
            )));
        }
        Ok(ReplicatorSystem {
            model,
            rule,
            delta,
            path,
            cache,
            linear,
        })
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn k(&self) -> u32 {
        self.model.k()
    }

    pub fn rule(&self) -> UpdateRule {
        self.rule
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn path(&self) -> RhsPath {
        self.path
    }

    pub fn model(&self) -> &Arc<dyn PayoffModel> {
        &self.model
    }

    /// The exact linear payoff form, when the model has one.
    pub fn linear_form(&self) -> Option<&LinearPayoff> {
        self.linear.as_ref()
    }

    /// Whether evaluation will take the closed-form linear assembly.
    pub fn uses_linear_path(&self) -> bool {
        match self.path {
            RhsPath::General => false,
            RhsPath::LinearFast => true,
            RhsPath::Auto => self.linear.is_some(),
        }
    }

    /// Wraps raw frequencies into a validated state with this system's degree.
    pub fn state(&self, x: &[f64]) -> Result<PopulationState> {
        let state = PopulationState::new(x.to_vec(), self.k())?;
        self.check_state(&state)?;
        Ok(state)
    }

    /// dx/dt at raw frequencies.
    pub fn rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.rhs_state(&self.state(x)?)
    }

    /// dx/dt at a validated state.
    pub fn rhs_state(&self, state: &PopulationState) -> Result<Vec<f64>> {
        self.check_state(state)?;
        match self.rule {
            UpdateRule::WellMixed => Ok(wellmixed_inner(&self.cache, state.x())),
            UpdateRule::PairwiseComparison => {
                let closure = edge_closure(state)?;
                if self.uses_linear_path() {
                    let linear = self.require_linear()?;
                    Ok(pc_linear_inner(linear, state.x(), self.delta))
                } else {
                    Ok(pc_general_inner(
                        &self.cache,
                        &closure,
                        state.x(),
                        self.delta,
                    ))
                }
            }
            UpdateRule::DeathBirth => {
                let closure = edge_closure(state)?;
                if self.uses_linear_path() {
                    let linear = self.require_linear()?;
                    Ok(db_linear_inner(linear, state.x(), self.delta))
                } else {
                    db_general_inner(&self.cache, &closure, state.x(), self.delta)
                }
            }
        }
    }

    fn require_linear(&self) -> Result<&LinearPayoff> {
        self.linear.as_ref().ok_or_else(|| {
            EvoError::NonlinearModel(format!(
                "model with strategies {:?} has no exact linear payoff form",
                self.model.strategy_names()
            ))
        })
    }

    fn require_rule(&self, rule: UpdateRule) -> Result<()> {
        if self.rule != rule {
            return Err(EvoError::InvalidArgument(format!(
                "system was built for rule {}, requested assembly needs {}",
                self.rule, rule
            )));
        }
        Ok(())
    }

    fn check_state(&self, state: &PopulationState) -> Result<()> {
        if state.n() != self.n() {
            return Err(EvoError::DimensionMismatch {
                context: "replicator system vs population state",
                expected: self.n(),
                got: state.n(),
            });
        }
        if state.k() != self.k() {
            return Err(EvoError::InvalidArgument(format!(
                "system degree k = {} but state degree k = {}",
                self.k(),
                state.k()
            )));
        }
        Ok(())
    }
}

/// Pairwise comparison, general path: the single-game decomposition
/// dx_i/dt = delta (k-2)/(2(k-1)) x_i sum_j x_j B_ij with
/// B_ij = a_self[i][j] + (k-1) a_neigh[i][j] + a_self[i][i] - a_self[j][i]
///        - a_neigh[j][i] - (k-2) sum_l x_l a_neigh[j][l] - a_self[j][j].
pub fn pc_general_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.require_rule(UpdateRule::PairwiseComparison)?;
    system.check_state(state)?;
    let closure = edge_closure(state)?;
    Ok(pc_general_inner(
        &system.cache,
        &closure,
        state.x(),
        system.delta,
    ))
}

/// Pairwise comparison assembled through accumulated payoffs,
/// dx_i/dt = (delta/2) x_i (<pi_i> - sum_j q_{j|i} <pi_j^{k_{+i}}>).
/// Equivalent to [`pc_general_rhs`]; kept as an independent assembly.
pub fn pc_accumulated_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.require_rule(UpdateRule::PairwiseComparison)?;
    system.check_state(state)?;
    let closure = edge_closure(state)?;
    let k = system.k();
    let tables = system.cache.mean_tables(&closure, TableMode::PairOnly);
    let pi_self = accumulated_self(&tables, &closure, k);
    let pi_neighbor = accumulated_neighbor(&tables, &closure, k);
    let n = system.n();
    let x = state.x();
    Ok((0..n)
        .map(|i| {
            let rivals: f64 = (0..n).map(|j| closure.at(j, i) * pi_neighbor[j][i]).sum();
            0.5 * system.delta * x[i] * (pi_self[i] - rivals)
        })
        .collect())
}

/// Pairwise comparison, linear fast path:
///
/// ```text
/// dx_i/dt = delta (k-2)/(2(k-1)) x_i [ (k+1)(pibar_i - pibar)
///     + 3 sum_j x_j (b_ii - b_ij - b_ji - b_jj) + 6 sum_jl x_j x_l b_jl ]
/// ```
///
/// with pibar_i = k sum_l x_l b_il + c_i the well-mixed mean payoffs.
pub fn pc_linear_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.require_rule(UpdateRule::PairwiseComparison)?;
    system.check_state(state)?;
    let linear = system.require_linear()?;
    Ok(pc_linear_inner(linear, state.x(), system.delta))
}

/// Death-birth, general path: competition with second-order neighbors,
/// dx_i/dt = delta (k-1)/k x_i (<pi_i> - sum_j sum_i' q_{i'|j} q_{j|i} T[i'][i][j])
/// with T the accumulated second-order tensor.
pub fn db_general_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.require_rule(UpdateRule::DeathBirth)?;
    system.check_state(state)?;
    let closure = edge_closure(state)?;
    db_general_inner(&system.cache, &closure, state.x(), system.delta)
}

/// Death-birth, linear fast path:
/// dx_i/dt = delta (k-2)/(k (k-1)^2) x_i { (k^2-2)^2/k (pibar_i - pibar)
/// + (3k^2-4)/k [(k b_ii + c_i) - sum_j x_j (k b_jj + c_j)]
/// - (k^2+2k-4) sum_j x_j (b_ji - sum_l x_l b_jl) }.
pub fn db_linear_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.require_rule(UpdateRule::DeathBirth)?;
    system.check_state(state)?;
    let linear = system.require_linear()?;
    Ok(db_linear_inner(linear, state.x(), system.delta))
}

/// Well-mixed baseline dx_i/dt = x_i (pibar_i - pibar), with pibar_i the
/// full-neighborhood mean payoff weighted by the frequencies themselves.
/// Selection strength does not enter; time is measured in payoff units.
pub fn wellmixed_rhs(system: &ReplicatorSystem, state: &PopulationState) -> Result<Vec<f64>> {
    system.check_state(state)?;
    Ok(wellmixed_inner(&system.cache, state.x()))
}

/// Residual of the condition under which structured pairwise comparison is
/// proportional to the well-mixed dynamics. One entry per strategy:
/// b_ii - sum_j x_j (b_ij + b_ji + b_jj) + 2 sum_jl x_j x_l b_jl.
/// All residuals vanishing across the simplex means the graph leaves the
/// linear game's phase portrait unchanged up to a time rescaling.
pub fn pc_neutrality_condition(linear: &LinearPayoff, state: &PopulationState) -> Vec<f64> {
    let n = state.n();
    assert_eq!(
        linear.b().len(),
        n,
        "payoff matrix and state must agree on n"
    );
    let x = state.x();
    let cross: f64 = (0..n)
        .map(|j| (0..n).map(|l| x[j] * x[l] * linear.b_at(j, l)).sum::<f64>())
        .sum();
    (0..n)
        .map(|i| {
            let mixed: f64 = (0..n)
                .map(|j| x[j] * (linear.b_at(i, j) + linear.b_at(j, i) + linear.b_at(j, j)))
                .sum();
            linear.b_at(i, i) - mixed + 2.0 * cross
        })
        .collect()
}

fn pc_general_inner(
    cache: &CachedPayoffs,
    closure: &EdgeClosure,
    x: &[f64],
    delta: f64,
) -> Vec<f64> {
    let n = cache.n();
    let kf = f64::from(cache.k());
    let tables = cache.mean_tables(closure, TableMode::PairOnly);
    let a_self = tables.a_self();
    let a_neigh = tables.a_neigh();
    // sum_l x_l a_neigh[j][l], one value per rival strategy j.
    let mixed: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|l| x[l] * a_neigh[j][l]).sum())
        .collect();
    let prefactor = delta * (kf - 2.0) / (2.0 * (kf - 1.0));
    (0..n)
        .map(|i| {
            let total: f64 = (0..n)
                .map(|j| {
                    x[j] * (a_self[i][j] + (kf - 1.0) * a_neigh[i][j] + a_self[i][i]
                        - a_self[j][i]
                        - a_neigh[j][i]
                        - (kf - 2.0) * mixed[j]
                        - a_self[j][j])
                })
                .sum();
            prefactor * x[i] * total
        })
        .collect()
}

fn pc_linear_inner(linear: &LinearPayoff, x: &[f64], delta: f64) -> Vec<f64> {
    let n = x.len();
    let kf = f64::from(linear.k());
    let pibar = wellmixed_linear_means(linear, x);
    let mean: f64 = (0..n).map(|i| x[i] * pibar[i]).sum();
    let cross: f64 = (0..n)
        .map(|j| (0..n).map(|l| x[j] * x[l] * linear.b_at(j, l)).sum::<f64>())
        .sum();
    let prefactor = delta * (kf - 2.0) / (2.0 * (kf - 1.0));
    (0..n)
        .map(|i| {
            let skew: f64 = (0..n)
                .map(|j| {
                    x[j] * (linear.b_at(i, i)
                        - linear.b_at(i, j)
                        - linear.b_at(j, i)
                        - linear.b_at(j, j))
                })
                .sum();
            prefactor * x[i] * ((kf + 1.0) * (pibar[i] - mean) + 3.0 * skew + 6.0 * cross)
        })
        .collect()
}

fn db_general_inner(
    cache: &CachedPayoffs,
    closure: &EdgeClosure,
    x: &[f64],
    delta: f64,
) -> Result<Vec<f64>> {
    let n = cache.n();
    let k = cache.k();
    let kf = f64::from(k);
    let tables = cache.mean_tables(closure, TableMode::WithTriples);
    let pi_self = accumulated_self(&tables, closure, k);
    let tensor = accumulated_second_order(&tables, closure, k)?;
    let prefactor = delta * (kf - 1.0) / kf;
    Ok((0..n)
        .map(|i| {
            let second_order: f64 = (0..n)
                .map(|j| {
                    let qji = closure.at(j, i);
                    (0..n)
                        .map(|ip| closure.at(ip, j) * qji * tensor[ip][i][j])
                        .sum::<f64>()
                })
                .sum();
            prefactor * x[i] * (pi_self[i] - second_order)
        })
        .collect())
}

fn db_linear_inner(linear: &LinearPayoff, x: &[f64], delta: f64) -> Vec<f64> {
    let n = x.len();
    let kf = f64::from(linear.k());
    let pibar = wellmixed_linear_means(linear, x);
    let mean: f64 = (0..n).map(|i| x[i] * pibar[i]).sum();
    let own: Vec<f64> = (0..n)
        .map(|i| kf * linear.b_at(i, i) + linear.c_at(i))
        .collect();
    let own_mean: f64 = (0..n).map(|j| x[j] * own[j]).sum();
    let prefactor = delta * (kf - 2.0) / (kf * (kf - 1.0) * (kf - 1.0));
    let c1 = (kf * kf - 2.0) * (kf * kf - 2.0) / kf;
    let c2 = (3.0 * kf * kf - 4.0) / kf;
    let c3 = kf * kf + 2.0 * kf - 4.0;
    (0..n)
        .map(|i| {
            let column: f64 = (0..n)
                .map(|j| {
                    let row_mean: f64 = (0..n).map(|l| x[l] * linear.b_at(j, l)).sum();
                    x[j] * (linear.b_at(j, i) - row_mean)
                })
                .sum();
            prefactor * x[i] * (c1 * (pibar[i] - mean) + c2 * (own[i] - own_mean) - c3 * column)
        })
        .collect()
}

fn wellmixed_inner(cache: &CachedPayoffs, x: &[f64]) -> Vec<f64> {
    let pibar = cache.wellmixed_mean_payoffs(x);
    let mean: f64 = x.iter().zip(&pibar).map(|(xi, pi)| xi * pi).sum();
    x.iter()
        .zip(&pibar)
        .map(|(xi, pi)| xi * (pi - mean))
        .collect()
}

fn wellmixed_linear_means(linear: &LinearPayoff, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let kf = f64::from(linear.k());
    (0..n)
        .map(|i| kf * (0..n).map(|l| x[l] * linear.b_at(i, l)).sum::<f64>() + linear.c_at(i))
        .collect()
}

//! Pair-approximation machinery: the conditional edge closure q_{j|i}, the
//! edge master equation whose fixed point it is, and the statistical mean
//! payoff tables (single-game and accumulated) that the replicator engines
//! assemble.
//!
//! All means are exact configuration sums over spaces of total k-1 (pair
//! level) and k-2 (triple level, death-birth only); no sampling is involved.

use crate::config_space::{weight_counts, ConfigurationSpace};
use crate::error::{EvoError, Result};
use crate::payoff::PayoffModel;

/// Strategy frequencies on the simplex together with the graph degree.
#[derive(Debug, Clone)]
pub struct PopulationState {
    x: Vec<f64>,
    k: u32,
}

impl PopulationState {
    /// Validates and stores a simplex point. Entries may carry rounding dust:
    /// negatives above -1e-12 are clipped to zero and the vector is
    /// renormalized, so downstream sums see an exact simplex.
    pub fn new(x: Vec<f64>, k: u32) -> Result<Self> {
        if x.is_empty() {
            return Err(EvoError::InvalidArgument(
                "population state needs at least one strategy".into(),
            ));
        }
        if k == 0 {
            return Err(EvoError::InvalidArgument(
                "degree k must be positive".into(),
            ));
        }
        let mut x = x;
        for v in &mut x {
            if !v.is_finite() || *v < -1e-12 || *v > 1.0 + 1e-12 {
                return Err(EvoError::InvalidArgument(format!(
                    "frequency {v} outside [0, 1]"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EvoError::InvalidArgument(format!(
                "frequencies sum to {sum}, not 1"
            )));
        }
        for v in &mut x {
            *v /= sum;
        }
        Ok(PopulationState { x, k })
    }

    /// The barycenter (1/n, ..., 1/n).
    pub fn uniform(n: usize, k: u32) -> Result<Self> {
        PopulationState::new(vec![1.0 / n as f64; n], k)
    }

    /// The monomorphic state e_i.
    pub fn vertex(n: usize, i: usize, k: u32) -> Result<Self> {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        PopulationState::new(x, k)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Conditional edge frequencies q_{j|i}: the probability that a neighbor of
/// an i-player uses strategy j. Column i (all j) is a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeClosure {
    // rows[j][i] = q_{j|i}; cols[i][j] = q_{j|i} (contiguous per conditioning
    // strategy, which is what the weighting loops consume).
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<f64>>,
}

impl EdgeClosure {
    fn from_cols(cols: Vec<Vec<f64>>) -> Self {
        let n = cols.len();
        let mut rows = vec![vec![0.0; n]; n];
        for (i, col) in cols.iter().enumerate() {
            for (j, &v) in col.iter().enumerate() {
                rows[j][i] = v;
            }
        }
        EdgeClosure { rows, cols }
    }

    /// q_{j|i}.
    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.rows[j][i]
    }

    /// The matrix with entry [j][i] = q_{j|i}.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The distribution of neighbor strategies around an i-player,
    /// q_{.|i} as a contiguous slice.
    pub fn neighbor_distribution(&self, i: usize) -> &[f64] {
        &self.cols[i]
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }
}

/// The pair closure q_{j|i} = [(k-2) x_j + theta_ij]/(k-1), the stable point
/// of the fast edge dynamics under both update rules. Requires k >= 3: at
/// k = 2 the x-dependence vanishes and the closure degenerates.
pub fn edge_closure(state: &PopulationState) -> Result<EdgeClosure> {
    let k = state.k();
    if k < 3 {
        return Err(EvoError::DegenerateDegree { k });
    }
    let n = state.n();
    let km1 = f64::from(k - 1);
    let km2 = f64::from(k - 2);
    let cols = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let theta = if i == j { 1.0 } else { 0.0 };
                    (km2 * state.x()[j] + theta) / km1
                })
                .collect()
        })
        .collect();
    Ok(EdgeClosure::from_cols(cols))
}

/// Leading-order master equation of the conditional edge frequencies:
/// dq_{l|i}/dt = (1/k) [theta_il + (k-1) sum_j q_{l|j} q_{j|i} - k q_{l|i}].
/// `q` uses the row layout q[l][i]. The closure is the fixed point.
pub fn edge_dynamics_rhs(state: &PopulationState, q: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = state.n();
    if q.len() != n || q.iter().any(|row| row.len() != n) {
        return Err(EvoError::DimensionMismatch {
            context: "edge_dynamics_rhs q matrix",
            expected: n,
            got: q.len(),
        });
    }
    let k = f64::from(state.k());
    let mut out = vec![vec![0.0; n]; n];
    for l in 0..n {
        for i in 0..n {
            let theta = if i == l { 1.0 } else { 0.0 };
            let two_step: f64 = (0..n).map(|j| q[l][j] * q[j][i]).sum();
            out[l][i] = (theta + (k - 1.0) * two_step - k * q[l][i]) / k;
        }
    }
    Ok(out)
}

/// Whether the triple table (death-birth only) is materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    PairOnly,
    WithTriples,
}

/// Statistical mean payoffs of single games.
///
/// * `a_self[i][j]` = mean payoff of a focal i-player in its own game given
///   one known j co-player, the remaining k-1 weighted by q_{.|i};
/// * `a_neigh[i][j]` = same payoff but with the k-1 unknowns weighted by
///   q_{.|j} (the game is anchored at the known j player);
/// * `a_triple[i'][i][j]` = mean payoff of an i'-player with known i and j
///   co-players, the remaining k-2 weighted by q_{.|j}.
///
/// The diagonals of `a_self` and `a_neigh` coincide: both average
/// a_{i|k_{+i}} with weights q_{.|i}.
#[derive(Debug, Clone)]
pub struct MeanPayoffTables {
    a_self: Vec<Vec<f64>>,
    a_neigh: Vec<Vec<f64>>,
    a_triple: Option<Vec<Vec<Vec<f64>>>>,
}

impl MeanPayoffTables {
    pub fn a_self(&self) -> &[Vec<f64>] {
        &self.a_self
    }

    pub fn a_neigh(&self) -> &[Vec<f64>] {
        &self.a_neigh
    }

    /// Present only under [`TableMode::WithTriples`].
    pub fn a_triple(&self) -> Option<&Vec<Vec<Vec<f64>>>> {
        self.a_triple.as_ref()
    }
}

/// Payoff evaluations memoized per (model, degree): the three configuration
/// spaces of totals k, k-1, k-2, the full payoff matrix over the total-k
/// space, and index lifts c -> c_{+l} between consecutive spaces. Built once,
/// then every mean table is a pure weighted sum. Immutable and shareable.
#[derive(Debug)]
pub struct CachedPayoffs {
    n: usize,
    k: u32,
    space_k: ConfigurationSpace,
    space_km1: ConfigurationSpace,
    space_km2: Option<ConfigurationSpace>,
    values_k: Vec<Vec<f64>>,
    lift_km1: Vec<Vec<usize>>,
    lift_km2: Vec<Vec<usize>>,
}

impl CachedPayoffs {
    pub fn new(model: &dyn PayoffModel) -> Self {
        let n = model.n();
        let k = model.k();
        assert!(k >= 1, "degree must be positive");
        let space_k = ConfigurationSpace::new(n, k);
        let space_km1 = ConfigurationSpace::new(n, k - 1);
        let values_k = (0..n)
            .map(|i| space_k.iter().map(|c| model.evaluate(i, c)).collect())
            .collect();
        let lift_km1 = space_km1
            .iter()
            .map(|c| {
                (0..n)
                    .map(|l| space_k.index_of(c.with_added(l).counts()).unwrap())
                    .collect()
            })
            .collect();
        let (space_km2, lift_km2) = if k >= 2 {
            let space = ConfigurationSpace::new(n, k - 2);
            let lift = space
                .iter()
                .map(|c| {
                    (0..n)
                        .map(|l| space_km1.index_of(c.with_added(l).counts()).unwrap())
                        .collect()
                })
                .collect();
            (Some(space), lift)
        } else {
            (None, Vec::new())
        };
        CachedPayoffs {
            n,
            k,
            space_k,
            space_km1,
            space_km2,
            values_k,
            lift_km1,
            lift_km2,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// The generalized payoff matrix over the total-k space, row per strategy.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values_k
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space_k
    }

    /// Mean payoff of each strategy in a well-mixed population: full-k
    /// configuration sums weighted by the frequencies themselves.
    pub fn wellmixed_mean_payoffs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (idx, c) in self.space_k.iter().enumerate() {
            let w = weight_counts(c.counts(), x);
            if w == 0.0 {
                continue;
            }
            for (i, acc) in out.iter_mut().enumerate() {
                *acc += w * self.values_k[i][idx];
            }
        }
        out
    }

    /// Single-game mean tables at the given edge weighting.
    pub fn mean_tables(&self, closure: &EdgeClosure, mode: TableMode) -> MeanPayoffTables {
        let n = self.n;
        let mut a_self = vec![vec![0.0; n]; n];
        let mut a_neigh = vec![vec![0.0; n]; n];
        for who in 0..n {
            let p = closure.neighbor_distribution(who);
            for (idx, c) in self.space_km1.iter().enumerate() {
                let w = weight_counts(c.counts(), p);
                if w == 0.0 {
                    continue;
                }
                let lifted = &self.lift_km1[idx];
                // a_self row `who`: focal is the conditioning player.
                for j in 0..n {
                    a_self[who][j] += w * self.values_k[who][lifted[j]];
                }
                // a_neigh column `who`: the conditioning player is the known
                // co-player.
                let full = lifted[who];
                for (i, row) in a_neigh.iter_mut().enumerate() {
                    row[who] += w * self.values_k[i][full];
                }
            }
        }
        let a_triple = match mode {
            TableMode::PairOnly => None,
            TableMode::WithTriples => Some(self.triple_table(closure)),
        };
        MeanPayoffTables {
            a_self,
            a_neigh,
            a_triple,
        }
    }

    fn triple_table(&self, closure: &EdgeClosure) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        let space_km2 = self.space_km2.as_ref().expect("triple table needs k >= 2");
        let mut a_triple = vec![vec![vec![0.0; n]; n]; n];
        for j in 0..n {
            let p = closure.neighbor_distribution(j);
            for (idx, c) in space_km2.iter().enumerate() {
                let w = weight_counts(c.counts(), p);
                if w == 0.0 {
                    continue;
                }
                for i in 0..n {
                    let mid = self.lift_km2[idx][i];
                    let full = self.lift_km1[mid][j];
                    for (ip, table) in a_triple.iter_mut().enumerate() {
                        table[i][j] += w * self.values_k[ip][full];
                    }
                }
            }
        }
        a_triple
    }
}

/// Single-game mean payoff tables at the closure of `state`.
pub fn mean_single_game(
    model: &dyn PayoffModel,
    state: &PopulationState,
    mode: TableMode,
) -> Result<MeanPayoffTables> {
    check_state(model, state)?;
    let closure = edge_closure(state)?;
    Ok(CachedPayoffs::new(model).mean_tables(&closure, mode))
}

/// Accumulated mean payoff <pi_i> over the 1+k games an i-player joins:
/// its own game plus one game per neighbor.
pub fn mean_accumulated_self(model: &dyn PayoffModel, state: &PopulationState) -> Result<Vec<f64>> {
    check_state(model, state)?;
    let closure = edge_closure(state)?;
    let tables = CachedPayoffs::new(model).mean_tables(&closure, TableMode::PairOnly);
    Ok(accumulated_self(&tables, &closure, state.k()))
}

/// Accumulated mean payoff of a j-player known to have an i-neighbor;
/// entry [j][i].
pub fn mean_accumulated_neighbor(
    model: &dyn PayoffModel,
    state: &PopulationState,
) -> Result<Vec<Vec<f64>>> {
    check_state(model, state)?;
    let closure = edge_closure(state)?;
    let tables = CachedPayoffs::new(model).mean_tables(&closure, TableMode::PairOnly);
    Ok(accumulated_neighbor(&tables, &closure, state.k()))
}

/// Accumulated mean payoff of a second-order competitor: entry [i'][i][j] is
/// the payoff of an i'-player in the game-neighborhood of a j-player whose
/// configuration contains both the i and i' players.
pub fn mean_accumulated_second_order(
    model: &dyn PayoffModel,
    state: &PopulationState,
) -> Result<Vec<Vec<Vec<f64>>>> {
    check_state(model, state)?;
    let closure = edge_closure(state)?;
    let tables = CachedPayoffs::new(model).mean_tables(&closure, TableMode::WithTriples);
    accumulated_second_order(&tables, &closure, state.k())
}

/// <pi_i> assembled from tables: sum_j q_{j|i} a_self[i][j]
/// + k sum_l q_{l|i} a_neigh[i][l].
pub fn accumulated_self(tables: &MeanPayoffTables, closure: &EdgeClosure, k: u32) -> Vec<f64> {
    let n = closure.n();
    let kf = f64::from(k);
    (0..n)
        .map(|i| {
            let q_i = closure.neighbor_distribution(i);
            let own: f64 = (0..n).map(|j| q_i[j] * tables.a_self()[i][j]).sum();
            let neighbors: f64 = (0..n).map(|l| q_i[l] * tables.a_neigh()[i][l]).sum();
            own + kf * neighbors
        })
        .collect()
}

/// <pi_j^{k_{+i}}> assembled from tables: a_self[j][i] + a_neigh[j][i]
/// + (k-1) sum_l q_{l|j} a_neigh[j][l]. Entry [j][i].
pub fn accumulated_neighbor(
    tables: &MeanPayoffTables,
    closure: &EdgeClosure,
    k: u32,
) -> Vec<Vec<f64>> {
    let n = closure.n();
    let km1 = f64::from(k - 1);
    (0..n)
        .map(|j| {
            let q_j = closure.neighbor_distribution(j);
            let tail: f64 = (0..n).map(|l| q_j[l] * tables.a_neigh()[j][l]).sum();
            (0..n)
                .map(|i| tables.a_self()[j][i] + tables.a_neigh()[j][i] + km1 * tail)
                .collect()
        })
        .collect()
}

/// Second-order tensor assembled from tables: entry [i'][i][j] =
/// a_triple[i'][i][j] + a_self[i'][j] + (k-1) sum_l q_{l|i'} a_neigh[i'][l].
pub fn accumulated_second_order(
    tables: &MeanPayoffTables,
    closure: &EdgeClosure,
    k: u32,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let a_triple = tables.a_triple().ok_or_else(|| {
        EvoError::InvalidArgument(
            "second-order means need tables built with TableMode::WithTriples".into(),
        )
    })?;
    let n = closure.n();
    let km1 = f64::from(k - 1);
    let tails: Vec<f64> = (0..n)
        .map(|ip| {
            let q_ip = closure.neighbor_distribution(ip);
            km1 * (0..n)
                .map(|l| q_ip[l] * tables.a_neigh()[ip][l])
                .sum::<f64>()
        })
        .collect();
    Ok((0..n)
        .map(|ip| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| a_triple[ip][i][j] + tables.a_self()[ip][j] + tails[ip])
                        .collect()
                })
                .collect()
        })
        .collect())
}

fn check_state(model: &dyn PayoffModel, state: &PopulationState) -> Result<()> {
    if model.n() != state.n() {
        return Err(EvoError::DimensionMismatch {
            context: "payoff model vs population state",
            expected: model.n(),
            got: state.n(),
        });
    }
    if model.k() != state.k() {
        return Err(EvoError::InvalidArgument(format!(
            "model degree k = {} but state degree k = {}",
            model.k(),
            state.k()
        )));
    }
    Ok(())
}

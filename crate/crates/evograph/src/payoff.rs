//! Payoff structures a_{i|k}: the generic evaluator interface, the linear
//! (b, c) specialization, the three built-in public-goods games, and loading
//! of user-supplied payoff tables.
//!
//! Strategy indices are 0-based throughout the code; docs and file formats
//! use 1-based labels or strategy names. Built-in orderings: public goods
//! game (C, D); peer punishment (C, D, E); pool punishment (C, D, O).

use crate::config_space::{binomial, Configuration, ConfigurationSpace, MAX_TOTAL};
use crate::error::{EvoError, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Residual bound below which a least-squares (b, c) fit counts as exact.
/// Chosen well above double rounding noise and far below any meaningful game
/// parameter.
pub const LINEAR_FIT_TOLERANCE: f64 = 1e-9;

/// A payoff structure for one (k+1)-player game: the payoff of a focal
/// i-player given the strategy counts of its k co-players.
pub trait PayoffModel: Send + Sync {
    /// Number of strategies.
    fn n(&self) -> usize;

    /// Number of co-players per game (the graph degree).
    fn k(&self) -> u32;

    /// a_{i|k} for co-player counts `counts` (length n, summing to k).
    fn payoff(&self, focal: usize, counts: &[u32]) -> f64;

    /// Configuration-typed convenience wrapper around [`payoff`].
    ///
    /// [`payoff`]: PayoffModel::payoff
    fn evaluate(&self, focal: usize, config: &Configuration) -> f64 {
        self.payoff(focal, config.counts())
    }

    /// Display names, one per strategy.
    fn strategy_names(&self) -> Vec<String> {
        (1..=self.n()).map(|i| format!("s{i}")).collect()
    }

    /// The exact (b, c) coefficients when the model is linear by
    /// construction. Models that merely happen to be linear return None and
    /// are recovered by [`try_linear_fit`].
    fn linear_form(&self) -> Option<LinearPayoff> {
        None
    }
}

/// Linear payoff a_{i|k} = sum_j b_ij k_j + c_i.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPayoff {
    k: u32,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    names: Vec<String>,
}

impl LinearPayoff {
    pub fn new(b: Vec<Vec<f64>>, c: Vec<f64>, k: u32) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(EvoError::InvalidArgument(
                "linear payoff needs at least one strategy".into(),
            ));
        }
        if b.len() != n || b.iter().any(|row| row.len() != n) {
            return Err(EvoError::DimensionMismatch {
                context: "LinearPayoff coefficient matrix",
                expected: n,
                got: b.len(),
            });
        }
        if k == 0 || k > MAX_TOTAL {
            return Err(EvoError::InvalidArgument(format!(
                "co-player count k = {k} out of range 1..={MAX_TOTAL}"
            )));
        }
        let names = (1..=n).map(|i| format!("s{i}")).collect();
        Ok(LinearPayoff { k, b, c, names })
    }

    pub fn with_names(mut self, names: &[&str]) -> Self {
        assert_eq!(names.len(), self.c.len());
        self.names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn b_at(&self, i: usize, j: usize) -> f64 {
        self.b[i][j]
    }

    pub fn c_at(&self, i: usize) -> f64 {
        self.c[i]
    }
}

impl PayoffModel for LinearPayoff {
    fn n(&self) -> usize {
        self.c.len()
    }

    fn k(&self) -> u32 {
        self.k
    }

    fn payoff(&self, focal: usize, counts: &[u32]) -> f64 {
        let row = &self.b[focal];
        let mut acc = self.c[focal];
        for (b_ij, &k_j) in row.iter().zip(counts) {
            acc += b_ij * f64::from(k_j);
        }
        acc
    }

    fn strategy_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn linear_form(&self) -> Option<LinearPayoff> {
        Some(self.clone())
    }
}

/// Parameters of the built-in public-goods family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GameParams {
    /// Synergy factor applied to pooled contributions.
    pub r: f64,
    /// Contribution cost c.
    pub cost: f64,
    /// Punishment cost alpha (per punished defector for peer; flat for pool).
    pub alpha: f64,
    /// Punishment fine beta.
    pub beta: f64,
}

impl GameParams {
    pub fn new(r: f64, cost: f64, alpha: f64, beta: f64) -> Result<Self> {
        let params = GameParams {
            r,
            cost,
            alpha,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r <= 0.0 || self.r.is_nan() {
            return Err(EvoError::InvalidArgument(format!(
                "synergy factor r must be positive, got {}",
                self.r
            )));
        }
        if self.cost <= 0.0 || self.cost.is_nan() {
            return Err(EvoError::InvalidArgument(format!(
                "contribution cost must be positive, got {}",
                self.cost
            )));
        }
        if self.alpha < 0.0 || self.alpha.is_nan() {
            return Err(EvoError::InvalidArgument(format!(
                "punishment cost alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 || self.beta.is_nan() {
            return Err(EvoError::InvalidArgument(format!(
                "punishment fine beta must be non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

fn check_degree(k: u32) {
    assert!(
        (1..=MAX_TOTAL).contains(&k),
        "co-player count k = {k} out of range 1..={MAX_TOTAL}"
    );
}

/// Public goods game, strategies (C, D). Each cooperator contributes `cost`,
/// the pot is multiplied by r and split among the k+1 participants.
pub fn pgg(params: &GameParams, k: u32) -> LinearPayoff {
    check_degree(k);
    let share = params.r * params.cost / f64::from(k + 1);
    let b = vec![vec![share, 0.0], vec![share, 0.0]];
    let c = vec![share - params.cost, 0.0];
    LinearPayoff {
        k,
        b,
        c,
        names: vec!["C".into(), "D".into()],
    }
}

/// Public goods game with peer punishment, strategies (C, D, E). Punishers E
/// contribute like cooperators, pay alpha per defecting co-player, and fine
/// each defector beta; defectors lose beta per punishing co-player.
pub fn peer_punishment(params: &GameParams, k: u32) -> LinearPayoff {
    check_degree(k);
    let share = params.r * params.cost / f64::from(k + 1);
    let b = vec![
        vec![share, 0.0, share],
        vec![share, 0.0, share - params.beta],
        vec![share, -params.alpha, share],
    ];
    let c = vec![share - params.cost, 0.0, share - params.cost];
    LinearPayoff {
        k,
        b,
        c,
        names: vec!["C".into(), "D".into(), "E".into()],
    }
}

/// Public goods game with pool punishment, strategies (C, D, O). Punishers O
/// pay a flat alpha into the sanctioning pool; a defector is fined beta as
/// soon as at least one punisher sits among its co-players. The step
/// function in the defector row makes this the one nonlinear built-in.
#[derive(Debug, Clone)]
pub struct PoolPunishment {
    params: GameParams,
    k: u32,
}

pub fn pool_punishment(params: &GameParams, k: u32) -> PoolPunishment {
    check_degree(k);
    PoolPunishment { params: *params, k }
}

impl PoolPunishment {
    pub fn params(&self) -> &GameParams {
        &self.params
    }
}

impl PayoffModel for PoolPunishment {
    fn n(&self) -> usize {
        3
    }

    fn k(&self) -> u32 {
        self.k
    }

    fn payoff(&self, focal: usize, counts: &[u32]) -> f64 {
        let share = self.params.r * self.params.cost / f64::from(self.k + 1);
        let contributors = f64::from(counts[0] + counts[2]);
        match focal {
            // C: own contribution included in the pot.
            0 => share * contributors + share - self.params.cost,
            // D: fined iff a punisher is present.
            1 => {
                let fine = if counts[2] > 0 { self.params.beta } else { 0.0 };
                share * contributors - fine
            }
            // O: contributes like C and pays the flat pool fee.
            2 => share * contributors + share - self.params.cost - self.params.alpha,
            _ => panic!("strategy index {focal} out of range for pool punishment"),
        }
    }

    fn strategy_names(&self) -> Vec<String> {
        vec!["C".into(), "D".into(), "O".into()]
    }
}

/// The generalized payoff matrix: row i, column = enumeration index of k,
/// entry a_{i|k}. Returned together with the column space.
pub fn as_generalized_matrix(model: &dyn PayoffModel) -> (ConfigurationSpace, Vec<Vec<f64>>) {
    let space = ConfigurationSpace::new(model.n(), model.k());
    let matrix = (0..model.n())
        .map(|i| space.iter().map(|c| model.evaluate(i, c)).collect())
        .collect();
    (space, matrix)
}

/// Recover linear (b, c) coefficients, or report the model as nonlinear.
///
/// Models that are linear by construction return their coefficients exactly.
/// Otherwise a per-strategy least-squares fit runs over the generalized
/// matrix and succeeds only if the maximum residual stays below
/// [`LINEAR_FIT_TOLERANCE`]. Because co-player counts always sum to k, the
/// coefficients are only determined up to a per-row shift (b_ij + t,
/// c_i - t k); the fit reports the representative with b_in = 0, which yields
/// identical dynamics everywhere downstream.
pub fn try_linear_fit(model: &dyn PayoffModel) -> Option<LinearPayoff> {
    if let Some(linear) = model.linear_form() {
        return Some(linear);
    }
    let n = model.n();
    let k = model.k();
    let (space, matrix) = as_generalized_matrix(model);

    // Unknowns per strategy row: b_i1..b_i,n-1 and c_i (b_in pinned to 0).
    let cols = n;
    let mut b = vec![vec![0.0; n]; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        let mut xtx = vec![vec![0.0; cols]; cols];
        let mut xty = vec![0.0; cols];
        for (idx, config) in space.iter().enumerate() {
            let row = design_row(config, n);
            let y = matrix[i][idx];
            for a in 0..cols {
                for b_col in 0..cols {
                    xtx[a][b_col] += row[a] * row[b_col];
                }
                xty[a] += row[a] * y;
            }
        }
        let sol = linalg::solve(xtx, xty)?;
        b[i][..(n - 1)].copy_from_slice(&sol[..(n - 1)]);
        c[i] = sol[n - 1];
    }

    let fitted = LinearPayoff {
        k,
        b,
        c,
        names: model.strategy_names(),
    };
    for (i, row) in matrix.iter().enumerate() {
        for (idx, config) in space.iter().enumerate() {
            if (row[idx] - fitted.evaluate(i, config)).abs() > LINEAR_FIT_TOLERANCE {
                return None;
            }
        }
    }
    Some(fitted)
}

fn design_row(config: &Configuration, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = config.counts()[..(n - 1)]
        .iter()
        .map(|&v| f64::from(v))
        .collect();
    row.push(1.0);
    row
}

/// Closure-backed model, mainly for tests and ad-hoc experiments.
pub struct FnPayoff<F> {
    n: usize,
    k: u32,
    f: F,
}

impl<F> FnPayoff<F>
where
    F: Fn(usize, &[u32]) -> f64 + Send + Sync,
{
    pub fn new(n: usize, k: u32, f: F) -> Self {
        check_degree(k);
        FnPayoff { n, k, f }
    }
}

impl<F> PayoffModel for FnPayoff<F>
where
    F: Fn(usize, &[u32]) -> f64 + Send + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> u32 {
        self.k
    }

    fn payoff(&self, focal: usize, counts: &[u32]) -> f64 {
        (self.f)(focal, counts)
    }
}

/// Explicit payoff table over the full configuration space.
#[derive(Debug, Clone)]
pub struct TabularPayoff {
    k: u32,
    names: Vec<String>,
    space: ConfigurationSpace,
    values: Vec<Vec<f64>>,
}

impl TabularPayoff {
    pub fn new(n: usize, k: u32, names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_degree(k);
        let space = ConfigurationSpace::new(n, k);
        if names.len() != n {
            return Err(EvoError::DimensionMismatch {
                context: "TabularPayoff strategy names",
                expected: n,
                got: names.len(),
            });
        }
        if values.len() != n || values.iter().any(|row| row.len() != space.len()) {
            return Err(EvoError::DimensionMismatch {
                context: "TabularPayoff value matrix",
                expected: space.len(),
                got: values.first().map_or(0, |row| row.len()),
            });
        }
        Ok(TabularPayoff {
            k,
            names,
            space,
            values,
        })
    }
}

impl PayoffModel for TabularPayoff {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn k(&self) -> u32 {
        self.k
    }

    fn payoff(&self, focal: usize, counts: &[u32]) -> f64 {
        let idx = self
            .space
            .index_of(counts)
            .unwrap_or_else(|| panic!("configuration {counts:?} not in the k={} space", self.k));
        self.values[focal][idx]
    }

    fn strategy_names(&self) -> Vec<String> {
        self.names.clone()
    }
}

/// Built-in game selector used by the CLI and the phase/threshold analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinGame {
    Pgg,
    PeerPunishment,
    PoolPunishment,
}

impl BuiltinGame {
    pub fn build(&self, params: &GameParams, k: u32) -> Arc<dyn PayoffModel> {
        match self {
            BuiltinGame::Pgg => Arc::new(pgg(params, k)),
            BuiltinGame::PeerPunishment => Arc::new(peer_punishment(params, k)),
            BuiltinGame::PoolPunishment => Arc::new(pool_punishment(params, k)),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            BuiltinGame::Pgg => 2,
            _ => 3,
        }
    }
}

// ---------------------------------------------------------------------------
// Payoff table files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PayoffDoc {
    n: usize,
    k: u32,
    #[serde(default)]
    strategies: Option<Vec<String>>,
    #[serde(default)]
    linear: Option<LinearDoc>,
    #[serde(default)]
    table: Option<Vec<TableRowDoc>>,
}

#[derive(Deserialize)]
struct LinearDoc {
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
}

#[derive(Deserialize)]
struct TableRowDoc {
    strategy: String,
    config: Vec<u32>,
    payoff: f64,
}

/// Parse a JSON payoff document: fields `n`, `k`, optional `strategies`
/// names, and exactly one of `linear: {b, c}` or `table: [{strategy, config,
/// payoff}]`. A table must cover every (strategy, configuration) pair exactly
/// once.
pub fn parse_payoff_file(text: &str) -> Result<Arc<dyn PayoffModel>> {
    let doc: PayoffDoc =
        serde_json::from_str(text).map_err(|e| EvoError::PayoffFile(e.to_string()))?;
    if doc.n < 1 {
        return Err(EvoError::PayoffFile("n must be at least 1".into()));
    }
    if doc.k == 0 || doc.k > MAX_TOTAL {
        return Err(EvoError::PayoffFile(format!(
            "k = {} out of range 1..={MAX_TOTAL}",
            doc.k
        )));
    }
    let names: Vec<String> = match doc.strategies {
        Some(names) => {
            if names.len() != doc.n {
                return Err(EvoError::PayoffFile(format!(
                    "{} strategy names for n = {}",
                    names.len(),
                    doc.n
                )));
            }
            names
        }
        None => (1..=doc.n).map(|i| format!("s{i}")).collect(),
    };

    match (doc.linear, doc.table) {
        (Some(linear), None) => {
            let model = LinearPayoff::new(linear.b, linear.c, doc.k)
                .map_err(|e| EvoError::PayoffFile(e.to_string()))?;
            if model.n() != doc.n {
                return Err(EvoError::PayoffFile(format!(
                    "linear coefficients are {}-strategy but n = {}",
                    model.n(),
                    doc.n
                )));
            }
            let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
            Ok(Arc::new(model.with_names(&name_refs)))
        }
        (None, Some(rows)) => {
            let space = ConfigurationSpace::new(doc.n, doc.k);
            let expected = doc.n * space.len();
            let mut values = vec![vec![f64::NAN; space.len()]; doc.n];
            let mut seen = vec![vec![false; space.len()]; doc.n];
            if rows.len() != expected {
                return Err(EvoError::PayoffFile(format!(
                    "table has {} rows, need exactly {expected} (n = {} strategies x {} configurations)",
                    rows.len(),
                    doc.n,
                    space.len()
                )));
            }
            for row in rows {
                let strategy = names
                    .iter()
                    .position(|s| *s == row.strategy)
                    .ok_or_else(|| {
                        EvoError::PayoffFile(format!("unknown strategy name {:?}", row.strategy))
                    })?;
                let idx = space.index_of(&row.config).ok_or_else(|| {
                    EvoError::PayoffFile(format!(
                        "configuration {:?} is not a composition of k = {} into {} parts",
                        row.config, doc.k, doc.n
                    ))
                })?;
                if seen[strategy][idx] {
                    return Err(EvoError::PayoffFile(format!(
                        "duplicate row for strategy {:?}, configuration {:?}",
                        row.strategy, row.config
                    )));
                }
                seen[strategy][idx] = true;
                values[strategy][idx] = row.payoff;
            }
            let model = TabularPayoff::new(doc.n, doc.k, names, values)
                .map_err(|e| EvoError::PayoffFile(e.to_string()))?;
            Ok(Arc::new(model))
        }
        (Some(_), Some(_)) => Err(EvoError::PayoffFile(
            "specify either linear or table, not both".into(),
        )),
        (None, None) => Err(EvoError::PayoffFile(
            "missing payoff data: specify linear {b, c} or a table".into(),
        )),
    }
}

/// Read and parse a payoff document from disk.
pub fn load_payoff_file(path: &std::path::Path) -> Result<Arc<dyn PayoffModel>> {
    let text = std::fs::read_to_string(path)?;
    parse_payoff_file(&text)
}

/// Shape helper: number of columns of the generalized matrix.
pub fn generalized_matrix_width(n: usize, k: u32) -> usize {
    binomial((k as u64) + (n as u64) - 1, k as u64) as usize
}

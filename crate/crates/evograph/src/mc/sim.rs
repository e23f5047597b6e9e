//! Agent-based Monte Carlo of the exact microscopic update rules on finite
//! regular graphs. Each node holds one strategy; an elementary update
//! touches one node, and a sweep is `nodes` elementary updates. Strategy
//! frequencies and conditional edge frequencies are measured on a sweep
//! grid, and replicas run on independent RNG streams derived from one
//! master seed so every run replays exactly.

use crate::error::{EvoError, Result};
use crate::mc::graph::{random_regular_graph, RegularGraph};
use crate::pair_approx::{edge_closure, PopulationState};
use crate::payoff::PayoffModel;
use crate::replicator::UpdateRule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

/// How the initial strategy assignment is chosen per replica.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Sample every node independently from this simplex vector.
    Frequencies(Vec<f64>),
    /// Explicit per-node strategy labels, reused by every replica.
    Labels(Vec<u8>),
}

/// Full description of one simulation campaign. The graph degree is the
/// model's co-player count, so the game and the topology always agree.
#[derive(Clone)]
pub struct SimConfig {
    pub nodes: usize,
    pub graph_seed: u64,
    pub model: Arc<dyn PayoffModel>,
    pub rule: UpdateRule,
    pub delta: f64,
    pub initial: InitialCondition,
    pub sweeps: u32,
    pub measure_every: u32,
    pub replicas: u32,
    pub seed: u64,
}

impl SimConfig {
    pub fn degree(&self) -> u32 {
        self.model.k()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.model.n();
        let k = self.model.k();
        if matches!(self.rule, UpdateRule::WellMixed) {
            return Err(EvoError::InvalidArgument(
                "the agent-based simulator needs a graph rule (pc or db)".into(),
            ));
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(EvoError::InvalidArgument(format!(
                "selection strength must be finite and >= 0, got {}",
                self.delta
            )));
        }
        if self.sweeps == 0 || self.measure_every == 0 || self.replicas == 0 {
            return Err(EvoError::InvalidArgument(
                "sweeps, measure_every, and replicas must all be >= 1".into(),
            ));
        }
        if n > u8::MAX as usize {
            return Err(EvoError::InvalidArgument(format!(
                "too many strategies for node labels: {n}"
            )));
        }
        match &self.initial {
            InitialCondition::Frequencies(x) => {
                // Reuses the simplex checks; the degree is irrelevant here.
                PopulationState::new(x.clone(), k.max(3))?;
                if x.len() != n {
                    return Err(EvoError::DimensionMismatch {
                        context: "initial frequencies",
                        expected: n,
                        got: x.len(),
                    });
                }
            }
            InitialCondition::Labels(labels) => {
                if labels.len() != self.nodes {
                    return Err(EvoError::DimensionMismatch {
                        context: "initial labels",
                        expected: self.nodes,
                        got: labels.len(),
                    });
                }
                if let Some(&bad) = labels.iter().find(|&&s| s as usize >= n) {
                    return Err(EvoError::InvalidArgument(format!(
                        "initial label {bad} out of range for {n} strategies"
                    )));
                }
            }
        }
        // Graph feasibility errors surface here rather than mid-run.
        if k == 0 || self.nodes <= k as usize {
            return Err(EvoError::InvalidArgument(format!(
                "need more than {k} nodes for a degree-{k} graph, got {}",
                self.nodes
            )));
        }
        if !self.nodes.is_multiple_of(2) && !k.is_multiple_of(2) {
            return Err(EvoError::InvalidArgument(format!(
                "no regular graph exists: {} * {k} stubs is odd",
                self.nodes
            )));
        }
        Ok(())
    }
}

/// Measured series and replay seeds for one campaign. Series are indexed
/// `[replica][measurement]`; edge frequencies are row-major n x n with
/// entry (i, j) holding q_{j|i}, the fraction of edges leaving an i-node
/// that point at a j-node (zero when no i-nodes exist).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub names: Vec<String>,
    pub nodes: usize,
    pub degree: u32,
    pub sweeps: Vec<u32>,
    pub frequencies: Vec<Vec<Vec<f64>>>,
    pub edge_frequencies: Vec<Vec<Vec<f64>>>,
    pub terminal: Vec<Vec<f64>>,
    pub master_seed: u64,
    pub rng_streams: Vec<u64>,
    pub graph_seeds: Vec<u64>,
    pub triangle_counts: Vec<u64>,
}

impl SimResult {
    pub fn replicas(&self) -> usize {
        self.frequencies.len()
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    /// Frequency change of one strategy over the whole run, per replica.
    pub fn replica_drifts(&self, strategy: usize) -> Vec<f64> {
        self.frequencies
            .iter()
            .map(|series| series.last().expect("nonempty series")[strategy] - series[0][strategy])
            .collect()
    }

    /// Ensemble mean and standard error of the final frequencies.
    pub fn final_mean_and_se(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let r = self.replicas() as f64;
        let mut mean = vec![0.0; n];
        for series in &self.frequencies {
            let last = series.last().expect("nonempty series");
            for (m, &v) in mean.iter_mut().zip(last) {
                *m += v / r;
            }
        }
        let mut se = vec![0.0; n];
        if self.replicas() > 1 {
            for series in &self.frequencies {
                let last = series.last().expect("nonempty series");
                for (s, (&v, &m)) in se.iter_mut().zip(last.iter().zip(&mean)) {
                    *s += (v - m) * (v - m);
                }
            }
            for s in &mut se {
                *s = (*s / (r - 1.0)).sqrt() / r.sqrt();
            }
        }
        (mean, se)
    }

    /// One row per (replica, measurement): frequencies, then the edge
    /// matrix row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["replica".to_string(), "sweep".to_string()];
        for name in &self.names {
            header.push(format!("x_{name}"));
        }
        for from in &self.names {
            for to in &self.names {
                header.push(format!("q_{to}|{from}"));
            }
        }
        writer.write_record(&header)?;
        for (replica, (xs, qs)) in self
            .frequencies
            .iter()
            .zip(&self.edge_frequencies)
            .enumerate()
        {
            for ((&sweep, x), q) in self.sweeps.iter().zip(xs).zip(qs) {
                let mut row = vec![replica.to_string(), sweep.to_string()];
                row.extend(x.iter().map(|v| format!("{v:.10e}")));
                row.extend(q.iter().map(|v| format!("{v:.10e}")));
                writer.write_record(&row)?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    /// Compact ensemble summary for JSON output.
    pub fn summary(&self) -> SimSummary {
        let (final_mean, final_se) = self.final_mean_and_se();
        let n = self.n();
        let r = self.replicas() as f64;
        let mut drift_mean = vec![0.0; n];
        let mut drift_se = vec![0.0; n];
        for (i, (dm, ds)) in drift_mean.iter_mut().zip(&mut drift_se).enumerate() {
            let drifts = self.replica_drifts(i);
            let mean: f64 = drifts.iter().sum::<f64>() / r;
            *dm = mean;
            if drifts.len() > 1 {
                let var: f64 =
                    drifts.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (r - 1.0);
                *ds = (var / r).sqrt();
            }
        }
        SimSummary {
            names: self.names.clone(),
            nodes: self.nodes,
            degree: self.degree,
            replicas: self.replicas(),
            measurements: self.sweeps.len(),
            last_sweep: *self.sweeps.last().expect("nonempty sweep grid"),
            mean_triangle_count: self.triangle_counts.iter().sum::<u64>() as f64
                / self.triangle_counts.len() as f64,
            final_mean,
            final_se,
            drift_mean,
            drift_se,
        }
    }
}

/// Ensemble statistics of a finished campaign.
#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub names: Vec<String>,
    pub nodes: usize,
    pub degree: u32,
    pub replicas: usize,
    pub measurements: usize,
    pub last_sweep: u32,
    pub mean_triangle_count: f64,
    pub final_mean: Vec<f64>,
    pub final_se: Vec<f64>,
    pub drift_mean: Vec<f64>,
    pub drift_se: Vec<f64>,
}

/// Fermi adoption probability: chance that the focal player copies a
/// neighbor whose accumulated payoff exceeds its own by `payoff_diff`.
/// Symmetric around 1/2 and exactly 1/2 at zero selection strength.
pub fn fermi_probability(delta: f64, payoff_diff: f64) -> f64 {
    1.0 / (1.0 + (-delta * payoff_diff).exp())
}

/// Total payoff of `node` across the 1 + k games it participates in: the
/// game organized around its own neighborhood plus one organized around
/// each neighbor.
pub fn accumulated_payoff(
    graph: &RegularGraph,
    strategies: &[u8],
    model: &dyn PayoffModel,
    node: usize,
) -> f64 {
    let n = model.n();
    let s = strategies[node] as usize;
    let mut counts = vec![0u32; n];
    for &w in graph.neighbors(node) {
        counts[strategies[w as usize] as usize] += 1;
    }
    let mut total = model.payoff(s, &counts);
    for &w in graph.neighbors(node) {
        counts.fill(0);
        counts[strategies[w as usize] as usize] += 1;
        for &u in graph.neighbors(w as usize) {
            if u as usize != node {
                counts[strategies[u as usize] as usize] += 1;
            }
        }
        total += model.payoff(s, &counts);
    }
    total
}

struct World {
    graph: RegularGraph,
    strategies: Vec<u8>,
    // Node counts per strategy and ordered adjacent-pair counts; both are
    // maintained incrementally, so measurement is O(n^2) not O(nodes).
    node_counts: Vec<u64>,
    pair_counts: Vec<Vec<u64>>,
    n: usize,
}

impl World {
    fn new(graph: RegularGraph, strategies: Vec<u8>, n: usize) -> Self {
        let mut node_counts = vec![0u64; n];
        for &s in &strategies {
            node_counts[s as usize] += 1;
        }
        let mut pair_counts = vec![vec![0u64; n]; n];
        for v in 0..graph.nodes() {
            let sv = strategies[v] as usize;
            for &w in graph.neighbors(v) {
                pair_counts[sv][strategies[w as usize] as usize] += 1;
            }
        }
        World {
            graph,
            strategies,
            node_counts,
            pair_counts,
            n,
        }
    }

    fn flip(&mut self, node: usize, new: u8) {
        let old = self.strategies[node] as usize;
        let new_idx = new as usize;
        self.node_counts[old] -= 1;
        self.node_counts[new_idx] += 1;
        for &w in self.graph.neighbors(node) {
            let t = self.strategies[w as usize] as usize;
            self.pair_counts[old][t] -= 1;
            self.pair_counts[t][old] -= 1;
            self.pair_counts[new_idx][t] += 1;
            self.pair_counts[t][new_idx] += 1;
        }
        self.strategies[node] = new;
    }

    fn is_monomorphic(&self) -> bool {
        self.node_counts
            .iter()
            .any(|&c| c as usize == self.graph.nodes())
    }

    fn frequencies(&self) -> Vec<f64> {
        let total = self.graph.nodes() as f64;
        self.node_counts.iter().map(|&c| c as f64 / total).collect()
    }

    fn edge_frequencies(&self) -> Vec<f64> {
        let k = self.graph.degree() as f64;
        let mut q = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let out_edges = self.node_counts[i] as f64 * k;
            if out_edges == 0.0 {
                continue;
            }
            for j in 0..self.n {
                q[i * self.n + j] = self.pair_counts[i][j] as f64 / out_edges;
            }
        }
        q
    }

    fn step_pc(&mut self, model: &dyn PayoffModel, delta: f64, rng: &mut ChaCha12Rng) {
        let focal = rng.gen_range(0..self.graph.nodes());
        let k = self.graph.degree() as usize;
        let neighbor = self.graph.neighbors(focal)[rng.gen_range(0..k)] as usize;
        let (sf, sn) = (self.strategies[focal], self.strategies[neighbor]);
        if sf == sn {
            // Copying an identical strategy is a no-op either way.
            return;
        }
        let p = if delta == 0.0 {
            0.5
        } else {
            let pi_f = accumulated_payoff(&self.graph, &self.strategies, model, focal);
            let pi_n = accumulated_payoff(&self.graph, &self.strategies, model, neighbor);
            fermi_probability(delta, pi_n - pi_f)
        };
        if rng.gen::<f64>() < p {
            self.flip(focal, sn);
        }
    }

    fn step_db(&mut self, model: &dyn PayoffModel, delta: f64, rng: &mut ChaCha12Rng) {
        let focal = rng.gen_range(0..self.graph.nodes());
        let k = self.graph.degree() as usize;
        let winner = if delta == 0.0 {
            self.graph.neighbors(focal)[rng.gen_range(0..k)] as usize
        } else {
            // Fitness exp(delta pi), rescaled by the maximum so the
            // exponentials stay bounded; the focal's fitness plays no role.
            let payoffs: Vec<f64> = self
                .graph
                .neighbors(focal)
                .iter()
                .map(|&w| accumulated_payoff(&self.graph, &self.strategies, model, w as usize))
                .collect();
            let top = payoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = payoffs.iter().map(|&p| (delta * (p - top)).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut draw = rng.gen::<f64>() * total;
            let mut chosen = k - 1;
            for (idx, &w) in weights.iter().enumerate() {
                draw -= w;
                if draw <= 0.0 {
                    chosen = idx;
                    break;
                }
            }
            self.graph.neighbors(focal)[chosen] as usize
        };
        let s = self.strategies[winner];
        if s != self.strategies[focal] {
            self.flip(focal, s);
        }
    }
}

fn initial_strategies(config: &SimConfig, nodes: usize, rng: &mut ChaCha12Rng) -> Vec<u8> {
    match &config.initial {
        InitialCondition::Labels(labels) => labels.clone(),
        InitialCondition::Frequencies(x) => {
            let mut cumulative = Vec::with_capacity(x.len());
            let mut acc = 0.0;
            for &v in x {
                acc += v;
                cumulative.push(acc);
            }
            (0..nodes)
                .map(|_| {
                    let draw = rng.gen::<f64>();
                    cumulative
                        .iter()
                        .position(|&c| draw < c)
                        .unwrap_or(x.len() - 1) as u8
                })
                .collect()
        }
    }
}

/// Runs every replica on its own RNG stream and graph seed. Replicas are
/// independent and order-stable, so rerunning a config reproduces the
/// result bytewise.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.model.n();
    let measure_sweeps: Vec<u32> = (0..=config.sweeps)
        .filter(|s| s % config.measure_every == 0)
        .collect();
    let replica_outputs: Vec<ReplicaOutput> = (0..config.replicas as u64)
        .into_par_iter()
        .map(|replica| run_replica(config, replica, &measure_sweeps))
        .collect::<Result<_>>()?;

    let mut result = SimResult {
        names: config.model.strategy_names(),
        nodes: config.nodes,
        degree: config.degree(),
        sweeps: measure_sweeps,
        frequencies: Vec::with_capacity(replica_outputs.len()),
        edge_frequencies: Vec::with_capacity(replica_outputs.len()),
        terminal: Vec::with_capacity(replica_outputs.len()),
        master_seed: config.seed,
        rng_streams: Vec::with_capacity(replica_outputs.len()),
        graph_seeds: Vec::with_capacity(replica_outputs.len()),
        triangle_counts: Vec::with_capacity(replica_outputs.len()),
    };
    debug_assert_eq!(n, result.names.len());
    for output in replica_outputs {
        result.frequencies.push(output.frequencies);
        result.edge_frequencies.push(output.edge_frequencies);
        result.terminal.push(output.terminal);
        result.rng_streams.push(output.rng_stream);
        result.graph_seeds.push(output.graph_seed);
        result.triangle_counts.push(output.triangle_count);
    }
    Ok(result)
}

struct ReplicaOutput {
    frequencies: Vec<Vec<f64>>,
    edge_frequencies: Vec<Vec<f64>>,
    terminal: Vec<f64>,
    rng_stream: u64,
    graph_seed: u64,
    triangle_count: u64,
}

fn run_replica(config: &SimConfig, replica: u64, measure_sweeps: &[u32]) -> Result<ReplicaOutput> {
    let graph_seed = config.graph_seed.wrapping_add(replica);
    let graph = random_regular_graph(config.nodes, config.degree(), graph_seed)?;
    let triangle_count = graph.triangle_count();
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(replica);

    let strategies = initial_strategies(config, config.nodes, &mut rng);
    let mut world = World::new(graph, strategies, config.model.n());

    fn record(world: &World, freqs: &mut Vec<Vec<f64>>, edges: &mut Vec<Vec<f64>>) {
        freqs.push(world.frequencies());
        edges.push(world.edge_frequencies());
    }
    let mut frequencies = Vec::with_capacity(measure_sweeps.len());
    let mut edge_frequencies = Vec::with_capacity(measure_sweeps.len());
    record(&world, &mut frequencies, &mut edge_frequencies);

    let model = config.model.as_ref();
    let mut next_measurement = 1;
    for sweep in 1..=config.sweeps {
        // Monomorphic states are absorbing, so the tail is constant.
        if world.is_monomorphic() {
            break;
        }
        for _ in 0..config.nodes {
            match config.rule {
                UpdateRule::PairwiseComparison => world.step_pc(model, config.delta, &mut rng),
                UpdateRule::DeathBirth => world.step_db(model, config.delta, &mut rng),
                UpdateRule::WellMixed => unreachable!("rejected by validate"),
            }
        }
        if next_measurement < measure_sweeps.len() && measure_sweeps[next_measurement] == sweep {
            record(&world, &mut frequencies, &mut edge_frequencies);
            next_measurement += 1;
        }
    }
    // Measurements skipped by early absorption all see the frozen state.
    while frequencies.len() < measure_sweeps.len() {
        record(&world, &mut frequencies, &mut edge_frequencies);
    }

    Ok(ReplicaOutput {
        terminal: world.frequencies(),
        frequencies,
        edge_frequencies,
        rng_stream: replica,
        graph_seed,
        triangle_count,
    })
}

/// Per-entry comparison of the measured conditional edge frequencies
/// against the pair closure evaluated at the concurrent node frequencies,
/// averaged over the post-burn-in measurements of each replica.
#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub burn_in: u32,
    pub replicas: usize,
    pub samples_per_replica: usize,
    /// Largest |ensemble mean deviation| over entries, the headline number.
    pub max_abs_deviation: f64,
    /// Entry (i, j) is the mean deviation of measured q_{j|i}.
    pub mean_deviation: Vec<Vec<f64>>,
    /// Mean deviation over its standard error across replicas; zero where
    /// the spread vanishes.
    pub z_scores: Vec<Vec<f64>>,
}

pub fn validate_closure(result: &SimResult, burn_in: u32) -> Result<ClosureReport> {
    let n = result.names.len();
    let k = result.degree;
    let kept: Vec<usize> = result
        .sweeps
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= burn_in)
        .map(|(idx, _)| idx)
        .collect();
    if kept.is_empty() {
        return Err(EvoError::InvalidArgument(format!(
            "burn-in of {burn_in} sweeps leaves no measurements (last sweep {})",
            result.sweeps.last().copied().unwrap_or(0)
        )));
    }

    // Per replica, time-average the deviation of every measured entry.
    let mut per_replica: Vec<Vec<Vec<f64>>> = Vec::with_capacity(result.replicas());
    for (xs, qs) in result.frequencies.iter().zip(&result.edge_frequencies) {
        let mut sums = vec![vec![0.0; n]; n];
        let mut counts = vec![0u32; n];
        for &t in &kept {
            let x = &xs[t];
            let closure = edge_closure(&PopulationState::new(x.clone(), k)?)?;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                counts[i] += 1;
                for j in 0..n {
                    sums[i][j] += qs[t][i * n + j] - closure.at(j, i);
                }
            }
        }
        for (i, row) in sums.iter_mut().enumerate() {
            for entry in row.iter_mut() {
                if counts[i] > 0 {
                    *entry /= counts[i] as f64;
                }
            }
        }
        per_replica.push(sums);
    }

    let r = per_replica.len() as f64;
    let mut mean_deviation = vec![vec![0.0; n]; n];
    for devs in &per_replica {
        for i in 0..n {
            for j in 0..n {
                mean_deviation[i][j] += devs[i][j] / r;
            }
        }
    }
    let mut z_scores = vec![vec![0.0; n]; n];
    if per_replica.len() > 1 {
        for i in 0..n {
            for j in 0..n {
                let var: f64 = per_replica
                    .iter()
                    .map(|d| {
                        let diff = d[i][j] - mean_deviation[i][j];
                        diff * diff
                    })
                    .sum::<f64>()
                    / (r - 1.0);
                let se = (var / r).sqrt();
                if se > 0.0 {
                    z_scores[i][j] = mean_deviation[i][j] / se;
                }
            }
        }
    }
    let max_abs_deviation = mean_deviation
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &d| acc.max(d.abs()));

    Ok(ClosureReport {
        burn_in,
        replicas: result.replicas(),
        samples_per_replica: kept.len(),
        max_abs_deviation,
        mean_deviation,
        z_scores,
    })
}

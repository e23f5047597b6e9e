//! Shared helpers for the integration suites: random model draws and raw
//! configuration-sum oracles that rebuild the mean-payoff quantities from
//! nothing but `PayoffModel::payoff` and multinomial weights.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use evograph::config_space::weighted_sum;
use evograph::pair_approx::{edge_closure, EdgeClosure, PopulationState};
use evograph::payoff::{pool_punishment, GameParams, LinearPayoff, PayoffModel};

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// A frequency vector with every entry at least 0.1 before normalization,
/// so no strategy is numerically extinct.
pub fn random_interior<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn random_linear<R: Rng>(rng: &mut R, n: usize, k: u32) -> Arc<dyn PayoffModel> {
    let b = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let c = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Arc::new(LinearPayoff::new(b, c, k).expect("square coefficients"))
}

pub fn random_pool<R: Rng>(rng: &mut R, k: u32) -> Arc<dyn PayoffModel> {
    let params = GameParams::new(
        rng.gen_range(1.0..f64::from(k)),
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.1..2.0),
        rng.gen_range(0.1..5.0),
    )
    .expect("positive parameters");
    Arc::new(pool_punishment(&params, k))
}

/// Runs `check` on `draws` random (model, state) pairs per case, sweeping
/// k in {3, 4, 5} with linear payoffs at n in {2, 3} and the nonlinear
/// pool game at n = 3.
pub fn for_each_draw<F>(seed: u64, draws: usize, mut check: F)
where
    F: FnMut(&dyn PayoffModel, &PopulationState),
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for k in [3u32, 4, 5] {
        for n in [2usize, 3] {
            for _ in 0..draws {
                let model = random_linear(&mut rng, n, k);
                let state = PopulationState::new(random_interior(&mut rng, n), k).unwrap();
                check(model.as_ref(), &state);
            }
        }
        for _ in 0..draws {
            let model = random_pool(&mut rng, k);
            let state = PopulationState::new(random_interior(&mut rng, 3), k).unwrap();
            check(model.as_ref(), &state);
        }
    }
}

/// Single-game mean for an i-player with a forced j co-player, the k-1
/// free slots drawn from the focal player's own edge distribution.
pub fn raw_a_self(model: &dyn PayoffModel, closure: &EdgeClosure, i: usize, j: usize) -> f64 {
    weighted_sum(
        model.n(),
        model.k() - 1,
        closure.neighbor_distribution(i),
        |c| model.payoff(i, c.with_added(j).counts()),
    )
}

/// Same forced-j mean, but with the free slots drawn from the j-player's
/// edge distribution: the i-player sits in a game organized by j.
pub fn raw_a_neigh(model: &dyn PayoffModel, closure: &EdgeClosure, i: usize, j: usize) -> f64 {
    weighted_sum(
        model.n(),
        model.k() - 1,
        closure.neighbor_distribution(j),
        |c| model.payoff(i, c.with_added(j).counts()),
    )
}

/// Single-game mean of a `focal` player in a game organized by `organizer`
/// that is known to also contain an `other` co-player.
pub fn raw_a_triple(
    model: &dyn PayoffModel,
    closure: &EdgeClosure,
    focal: usize,
    other: usize,
    organizer: usize,
) -> f64 {
    weighted_sum(
        model.n(),
        model.k() - 2,
        closure.neighbor_distribution(organizer),
        |c| model.payoff(focal, c.with_added(other).with_added(organizer).counts()),
    )
}

/// Mean payoff an i-player accumulates over its own game plus the k games
/// of its neighbors, rebuilt from raw configuration sums.
pub fn raw_accumulated_self(model: &dyn PayoffModel, closure: &EdgeClosure, i: usize) -> f64 {
    let n = model.n();
    let k = model.k();
    let q_i = closure.neighbor_distribution(i);
    let own = weighted_sum(n, k, q_i, |c| model.payoff(i, c.counts()));
    let per_neighbor: f64 = (0..n)
        .map(|l| {
            q_i[l]
                * weighted_sum(n, k - 1, closure.neighbor_distribution(l), |c| {
                    model.payoff(i, c.with_added(l).counts())
                })
        })
        .sum();
    own + f64::from(k) * per_neighbor
}

/// Mean accumulated payoff of an i-player known to have a j-neighbor:
/// its own game with j forced in, the game j organizes, and the k-1 games
/// of its remaining neighbors.
pub fn raw_accumulated_neighbor(
    model: &dyn PayoffModel,
    closure: &EdgeClosure,
    i: usize,
    j: usize,
) -> f64 {
    let n = model.n();
    let q_i = closure.neighbor_distribution(i);
    let rest: f64 = (0..n)
        .map(|l| q_i[l] * raw_a_neigh(model, closure, i, l))
        .sum();
    raw_a_self(model, closure, i, j)
        + raw_a_neigh(model, closure, i, j)
        + f64::from(model.k() - 1) * rest
}

/// Mean accumulated payoff of a `focal` player that shares the game of
/// `organizer` with a known `other` co-player: entry order matches the
/// second-order tensor.
pub fn raw_accumulated_second_order(
    model: &dyn PayoffModel,
    closure: &EdgeClosure,
    focal: usize,
    other: usize,
    organizer: usize,
) -> f64 {
    let n = model.n();
    let q_f = closure.neighbor_distribution(focal);
    let rest: f64 = (0..n)
        .map(|l| q_f[l] * raw_a_neigh(model, closure, focal, l))
        .sum();
    raw_a_triple(model, closure, focal, other, organizer)
        + raw_a_self(model, closure, focal, organizer)
        + f64::from(model.k() - 1) * rest
}

/// Convenience: closure for a state, unwrapped.
pub fn closure_of(state: &PopulationState) -> EdgeClosure {
    edge_closure(state).unwrap()
}

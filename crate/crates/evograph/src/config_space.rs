//! Co-player configurations (the "balls into boxes" objects), their
//! enumeration, and multinomial weighting.
//!
//! A configuration k = (k_1,...,k_n) counts how many of a focal player's
//! co-players use each of the n strategies. Every statistical mean in the
//! framework is a sum over one of these spaces, weighted by a multinomial
//! distribution with some probability vector p (strategy frequencies x or a
//! column of the conditional edge matrix q).

use crate::error::{EvoError, Result};
use std::collections::HashMap;
use std::sync::LazyLock;

/// Upper bound on co-player totals. Weights are computed through
/// log-factorial tables, so larger totals would only cost precision, but the
/// framework targets graph degrees well below this.
pub const MAX_TOTAL: u32 = 64;

/// ln(x!) for x in 0..=130, covering totals up to MAX_TOTAL plus the +1/+2
/// co-player variants with headroom.
static LN_FACTORIAL: LazyLock<[f64; 131]> = LazyLock::new(|| {
    let mut table = [0.0f64; 131];
    for x in 2..table.len() {
        table[x] = table[x - 1] + (x as f64).ln();
    }
    table
});

#[inline]
fn ln_factorial(x: u32) -> f64 {
    LN_FACTORIAL[x as usize]
}

/// Exact binomial coefficient, used for cardinality checks.
pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// A composition of some total m into n non-negative strategy counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    pub fn new(counts: Vec<u32>) -> Self {
        Configuration { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of strategies n.
    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Total number of co-players m = sum of counts.
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn count(&self, strategy: usize) -> u32 {
        self.counts[strategy]
    }

    /// The variant k_{+l}: one extra co-player of strategy l; total m+1.
    pub fn with_added(&self, l: usize) -> Configuration {
        let mut counts = self.counts.clone();
        counts[l] += 1;
        Configuration { counts }
    }

    /// The variant k_{-i,+j}: one co-player switched from strategy i to j;
    /// total unchanged. Fails when there is no i-co-player to switch.
    pub fn with_swapped(&self, i: usize, j: usize) -> Result<Configuration> {
        if self.counts[i] == 0 {
            return Err(EvoError::ConfigUnderflow {
                strategy: i,
                counts: self.counts.clone(),
            });
        }
        let mut counts = self.counts.clone();
        counts[i] -= 1;
        counts[j] += 1;
        Ok(Configuration { counts })
    }
}

/// All configurations of a fixed total, in a fixed enumeration order, plus a
/// reverse index. Immutable after construction; shared freely across threads.
///
/// The enumeration order is lexicographic descending on the count vector:
/// (m,0,...,0) first, (0,...,0,m) last. Cached payoff matrices are keyed by
/// this index, so the order is part of the public contract.
#[derive(Debug, Clone)]
pub struct ConfigurationSpace {
    n: usize,
    m: u32,
    configs: Vec<Configuration>,
    index: HashMap<Vec<u32>, usize>,
}

impl ConfigurationSpace {
    pub fn new(n: usize, m: u32) -> Self {
        assert!(n >= 1, "need at least one strategy");
        assert!(m <= MAX_TOTAL, "co-player total {m} exceeds {MAX_TOTAL}");
        let configs = enumerate_configurations(n, m);
        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.counts.clone(), i))
            .collect();
        ConfigurationSpace {
            n,
            m,
            configs,
            index,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configurations(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn get(&self, idx: usize) -> &Configuration {
        &self.configs[idx]
    }

    /// Enumeration index of the given counts, if they belong to this space.
    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Configuration> {
        self.configs.iter()
    }
}

/// All compositions of m into n parts, lexicographic descending, length
/// binomial(m+n-1, m).
pub fn enumerate_configurations(n: usize, m: u32) -> Vec<Configuration> {
    assert!(n >= 1, "need at least one strategy");
    let mut out = Vec::with_capacity(binomial((m as u64) + (n as u64) - 1, m as u64) as usize);
    let mut prefix = Vec::with_capacity(n);
    fill(n, m, &mut prefix, &mut out);
    out
}

fn fill(n_left: usize, m_left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Configuration>) {
    if n_left == 1 {
        let mut counts = prefix.clone();
        counts.push(m_left);
        out.push(Configuration::new(counts));
        return;
    }
    for v in (0..=m_left).rev() {
        prefix.push(v);
        fill(n_left - 1, m_left - v, prefix, out);
        prefix.pop();
    }
}

/// Multinomial weight m!/(prod k_i!) * prod p_i^{k_i}, with the convention
/// 0^0 = 1 so boundary probability vectors (p_i = 0 with k_i = 0) contribute
/// factor 1 rather than NaN.
pub fn multinomial_weight(c: &Configuration, p: &[f64]) -> Result<f64> {
    if c.n() != p.len() {
        return Err(EvoError::DimensionMismatch {
            context: "multinomial_weight",
            expected: c.n(),
            got: p.len(),
        });
    }
    Ok(weight_counts(c.counts(), p))
}

/// Weight without the dimension check, for inner loops that iterate a space
/// against a matching probability vector.
#[inline]
pub(crate) fn weight_counts(counts: &[u32], p: &[f64]) -> f64 {
    let m: u32 = counts.iter().sum();
    let mut log_w = ln_factorial(m);
    for (&k_i, &p_i) in counts.iter().zip(p) {
        if k_i == 0 {
            continue;
        }
        if p_i <= 0.0 {
            return 0.0;
        }
        log_w += f64::from(k_i) * p_i.ln() - ln_factorial(k_i);
    }
    log_w.exp()
}

/// Sum of multinomial_weight(c, p) * f(c) over every configuration of total m.
pub fn weighted_sum<F>(n: usize, m: u32, p: &[f64], mut f: F) -> f64
where
    F: FnMut(&Configuration) -> f64,
{
    let mut acc = 0.0;
    for c in enumerate_configurations(n, m) {
        let w = weight_counts(c.counts(), p);
        if w != 0.0 {
            acc += w * f(&c);
        }
    }
    acc
}

/// The count-reduction identity: the expectation of k_i * g(k) over
/// configurations of total m equals m * p_i times the expectation of g(k_{+i})
/// over configurations of total m-1. Evaluating the right-hand side cuts one
/// factor of configuration-space size.
pub fn weighted_count_sum<F>(n: usize, m: u32, p: &[f64], i: usize, mut g: F) -> f64
where
    F: FnMut(&Configuration) -> f64,
{
    if m == 0 {
        return 0.0;
    }
    f64::from(m) * p[i] * weighted_sum(n, m - 1, p, |c| g(&c.with_added(i)))
}

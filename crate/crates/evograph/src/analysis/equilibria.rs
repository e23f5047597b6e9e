//! Equilibrium location and linear stability for replicator systems with at
//! most four strategies.
//!
//! The search walks every support of the simplex: vertices are stationary by
//! construction, two-strategy edges are screened for fully stationary line
//! segments before root-finding, and larger faces are covered by damped
//! Newton iteration from a barycentric grid. Stability comes from the
//! eigenvalues of the Jacobian reduced to the simplex tangent space.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{EvoError, Result};
use crate::linalg;
use crate::replicator::ReplicatorSystem;

/// Where an equilibrium sits in the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Vertex,
    Edge,
    Interior,
    /// A whole two-strategy edge on which the field vanishes identically.
    LineSegment,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::Vertex => write!(f, "vertex"),
            EquilibriumKind::Edge => write!(f, "edge"),
            EquilibriumKind::Interior => write!(f, "interior"),
            EquilibriumKind::LineSegment => write!(f, "line_segment"),
        }
    }
}

/// Sign structure of the reduced Jacobian spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Saddle,
    /// At least one eigenvalue sits inside the +-1e-7 margin around zero,
    /// as happens everywhere on a stationary line.
    DegenerateLine,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stability::Stable => write!(f, "stable"),
            Stability::Unstable => write!(f, "unstable"),
            Stability::Saddle => write!(f, "saddle"),
            Stability::DegenerateLine => write!(f, "degenerate_line"),
        }
    }
}

/// One sampled point of a stationary segment with its off-segment growth
/// rates, one per absent strategy, as (strategy index, rate) pairs.
#[derive(Debug, Clone)]
pub struct SegmentSample {
    pub point: Vec<f64>,
    pub transverse_rates: Vec<(usize, f64)>,
}

/// A fully stationary edge: the supporting strategy pair and a sweep of
/// sampled points with per-point invasion rates.
#[derive(Debug, Clone)]
pub struct SegmentProfile {
    pub support: (usize, usize),
    pub samples: Vec<SegmentSample>,
}

/// A located equilibrium with its linear stability data.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    point: Vec<f64>,
    kind: EquilibriumKind,
    stability: Stability,
    eigenvalues: Vec<(f64, f64)>,
    segment: Option<SegmentProfile>,
}

impl Equilibrium {
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn kind(&self) -> EquilibriumKind {
        self.kind
    }

    pub fn stability(&self) -> Stability {
        self.stability
    }

    /// Reduced-Jacobian eigenvalues as (re, im) pairs; empty for segments.
    pub fn eigenvalues(&self) -> &[(f64, f64)] {
        &self.eigenvalues
    }

    pub fn segment(&self) -> Option<&SegmentProfile> {
        self.segment.as_ref()
    }
}

const SUPPORT_FLOOR: f64 = 1e-7;
const RESIDUAL_CEILING: f64 = 1e-8;
const SEGMENT_RESIDUAL: f64 = 1e-10;
const MERGE_DISTANCE: f64 = 1e-6;
const EIGEN_MARGIN: f64 = 1e-7;
const FD_STEP: f64 = 1e-6;
const NEWTON_GRID: usize = 32;
const SEGMENT_SAMPLES: usize = 33;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Eigenvalues of the Jacobian restricted to the simplex tangent space at
/// `point`, with the sign classification they imply.
///
/// The largest coordinate is eliminated; each remaining coordinate is
/// perturbed against it so probes stay on the simplex. Central differences
/// switch to a second-order forward stencil when a coordinate sits closer
/// to the boundary than the step.
pub fn classify_stability(
    system: &ReplicatorSystem,
    point: &[f64],
) -> Result<(Stability, Vec<(f64, f64)>)> {
    let n = system.n();
    if point.len() != n {
        return Err(EvoError::DimensionMismatch {
            context: "classify_stability point",
            expected: n,
            got: point.len(),
        });
    }
    let pivot = argmax(point);
    let kept: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
    let m = kept.len();

    let probe = |coord: usize, shift: f64| -> Result<Vec<f64>> {
        let mut x = point.to_vec();
        x[coord] += shift;
        x[pivot] -= shift;
        system.rhs(&x)
    };

    let f0 = system.rhs(point)?;
    let mut jac = vec![vec![0.0; m]; m];
    for (col, &b) in kept.iter().enumerate() {
        let column: Vec<f64> = if point[b] >= FD_STEP {
            let fp = probe(b, FD_STEP)?;
            let fm = probe(b, -FD_STEP)?;
            (0..n).map(|i| (fp[i] - fm[i]) / (2.0 * FD_STEP)).collect()
        } else {
            let f1 = probe(b, FD_STEP)?;
            let f2 = probe(b, 2.0 * FD_STEP)?;
            (0..n)
                .map(|i| (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * FD_STEP))
                .collect()
        };
        for (row, &a) in kept.iter().enumerate() {
            jac[row][col] = column[a];
        }
    }

    let eigenvalues = linalg::eigenvalues(&jac)
        .ok_or_else(|| EvoError::EigenFailure(format!("unsupported reduced dimension {m}")))?;

    let stability = if eigenvalues.iter().any(|&(re, _)| re.abs() <= EIGEN_MARGIN) {
        Stability::DegenerateLine
    } else if eigenvalues.iter().all(|&(re, _)| re < 0.0) {
        Stability::Stable
    } else if eigenvalues.iter().all(|&(re, _)| re > 0.0) {
        Stability::Unstable
    } else {
        Stability::Saddle
    };
    Ok((stability, eigenvalues))
}

fn kind_from_support(point: &[f64]) -> EquilibriumKind {
    match point.iter().filter(|&&v| v > SUPPORT_FLOOR).count() {
        0 | 1 => EquilibriumKind::Vertex,
        2 => EquilibriumKind::Edge,
        _ => EquilibriumKind::Interior,
    }
}

/// Growth rate of absent strategy `invader` at `point`: the per-capita rate
/// d(ln x_invader)/dt evaluated just inside the simplex.
fn invasion_rate(system: &ReplicatorSystem, point: &[f64], invader: usize) -> Result<f64> {
    let eps = 1e-6;
    let mut x: Vec<f64> = point.iter().map(|&v| v * (1.0 - eps)).collect();
    x[invader] += eps;
    let rhs = system.rhs(&x)?;
    Ok(rhs[invader] / eps)
}

/// Screens the (i, j) edge: returns a profile when the field vanishes at
/// all sample points, meaning the whole edge is stationary.
fn screen_edge(system: &ReplicatorSystem, i: usize, j: usize) -> Result<Option<SegmentProfile>> {
    let n = system.n();
    let mut points = Vec::with_capacity(SEGMENT_SAMPLES);
    for step in 0..SEGMENT_SAMPLES {
        let s = step as f64 / (SEGMENT_SAMPLES - 1) as f64;
        let mut x = vec![0.0; n];
        x[i] = s;
        x[j] = 1.0 - s;
        if max_abs(&system.rhs(&x)?) > SEGMENT_RESIDUAL {
            return Ok(None);
        }
        points.push(x);
    }
    let mut samples = Vec::with_capacity(points.len());
    for point in points {
        let mut transverse_rates = Vec::new();
        for l in 0..n {
            if l != i && l != j {
                transverse_rates.push((l, invasion_rate(system, &point, l)?));
            }
        }
        samples.push(SegmentSample {
            point,
            transverse_rates,
        });
    }
    Ok(Some(SegmentProfile {
        support: (i, j),
        samples,
    }))
}

/// Barycentric grid points strictly inside a face of `m` strategies:
/// compositions of NEWTON_GRID into m positive parts, scaled to sum 1.
fn face_grid(m: usize) -> Vec<Vec<f64>> {
    fn recurse(parts: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            if remaining >= 1 {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for take in 1..=(remaining - parts + 1) {
            prefix.push(take);
            recurse(parts - 1, remaining - take, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    recurse(m, NEWTON_GRID, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|counts| {
            counts
                .into_iter()
                .map(|c| c as f64 / NEWTON_GRID as f64)
                .collect()
        })
        .collect()
}

/// Embeds face coordinates (all but the last support entry) into the full
/// simplex, clipping stray negatives from Newton overshoot.
fn embed(support: &[usize], u: &[f64], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut sum = 0.0;
    for (a, &s) in support[..support.len() - 1].iter().enumerate() {
        let v = u[a].max(0.0);
        x[s] = v;
        sum += v;
    }
    x[*support.last().unwrap()] = (1.0 - sum).max(0.0);
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    x
}

/// Damped Newton iteration for a stationary point inside the face spanned
/// by `support`, starting from barycentric coordinates `start`.
fn newton_root(
    system: &ReplicatorSystem,
    support: &[usize],
    start: &[f64],
) -> Result<Option<Vec<f64>>> {
    let n = system.n();
    let m = support.len();
    let dim = m - 1;

    let residual = |u: &[f64]| -> Result<Vec<f64>> {
        let rhs = system.rhs(&embed(support, u, n))?;
        Ok((0..dim).map(|a| rhs[support[a]]).collect())
    };

    let mut u: Vec<f64> = start[..dim].to_vec();
    let mut g = residual(&u)?;
    for _ in 0..50 {
        let norm = max_abs(&g);
        if norm < 1e-12 {
            let point = embed(support, &u, n);
            // Reject roots that escaped to the face boundary; they belong
            // to a smaller support.
            if support.iter().any(|&s| point[s] <= SUPPORT_FLOOR) {
                return Ok(None);
            }
            if max_abs(&system.rhs(&point)?) > RESIDUAL_CEILING {
                return Ok(None);
            }
            return Ok(Some(point));
        }
        // Abort starts that wander far outside the face.
        if u.iter().any(|&v| !(-0.5..=1.5).contains(&v)) {
            return Ok(None);
        }

        let mut jac = vec![vec![0.0; dim]; dim];
        for col in 0..dim {
            let mut up = u.clone();
            up[col] += FD_STEP;
            let mut dn = u.clone();
            dn[col] -= FD_STEP;
            let gp = residual(&up)?;
            let gn = residual(&dn)?;
            for row in 0..dim {
                jac[row][col] = (gp[row] - gn[row]) / (2.0 * FD_STEP);
            }
        }
        let Some(step) = linalg::solve(jac, g.clone()) else {
            return Ok(None);
        };

        let mut advanced = false;
        let mut damping = 1.0;
        for _ in 0..5 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(v, s)| v - damping * s).collect();
            let gt = residual(&trial)?;
            if max_abs(&gt) < norm {
                u = trial;
                g = gt;
                advanced = true;
                break;
            }
            damping *= 0.5;
        }
        if !advanced {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Locates all equilibria of `system`: every vertex, stationary edges as
/// line segments, and isolated roots on each face found by multistart
/// Newton iteration. Supports up to four strategies.
pub fn find_equilibria(system: &ReplicatorSystem) -> Result<Vec<Equilibrium>> {
    let n = system.n();
    if n > 4 {
        return Err(EvoError::InvalidArgument(format!(
            "face enumeration supports at most 4 strategies, got {n}"
        )));
    }

    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut segments: Vec<SegmentProfile> = Vec::new();

    for i in 0..n {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        points.push(x);
    }

    // Masks in increasing popcount order so smaller faces are claimed first.
    let mut masks: Vec<u32> = (1..(1u32 << n)).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|m| m.count_ones());

    for mask in masks {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if support.len() == 2 {
            if let Some(profile) = screen_edge(system, support[0], support[1])? {
                segments.push(profile);
                continue;
            }
        }
        // Skip faces whose boundary contains a stationary segment only when
        // the face IS that segment; larger faces are still searched, and
        // roots collapsing onto the segment are rejected by the support
        // floor below.
        let grid = face_grid(support.len());
        let roots: Vec<Option<Vec<f64>>> = grid
            .par_iter()
            .map(|start| newton_root(system, &support, start))
            .collect::<Result<_>>()?;
        for root in roots.into_iter().flatten() {
            let fresh = points.iter().all(|p| {
                p.iter()
                    .zip(&root)
                    .any(|(a, b)| (a - b).abs() > MERGE_DISTANCE)
            });
            if fresh {
                points.push(root);
            }
        }
    }

    let mut out = Vec::new();
    for point in points {
        let (stability, eigenvalues) = classify_stability(system, &point)?;
        out.push(Equilibrium {
            kind: kind_from_support(&point),
            point,
            stability,
            eigenvalues,
            segment: None,
        });
    }
    for profile in segments {
        let mid = profile.samples[SEGMENT_SAMPLES / 2].point.clone();
        out.push(Equilibrium {
            point: mid,
            kind: EquilibriumKind::LineSegment,
            stability: Stability::DegenerateLine,
            eigenvalues: Vec::new(),
            segment: Some(profile),
        });
    }
    Ok(out)
}

/// Writes `kind,stability,<names...>,eigenvalues` rows; eigenvalues are
/// semicolon-joined re+imi pairs, empty for line segments.
pub fn write_equilibria_csv<W: Write>(
    equilibria: &[Equilibrium],
    names: &[String],
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["kind".to_string(), "stability".to_string()];
    header.extend(names.iter().cloned());
    header.push("eigenvalues".to_string());
    writer.write_record(&header)?;
    for eq in equilibria {
        let mut row = vec![eq.kind().to_string(), eq.stability().to_string()];
        row.extend(eq.point().iter().map(|v| format!("{v:.10e}")));
        row.push(
            eq.eigenvalues()
                .iter()
                .map(|(re, im)| format!("{re:.6e}{im:+.6e}i"))
                .collect::<Vec<_>>()
                .join(";"),
        );
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

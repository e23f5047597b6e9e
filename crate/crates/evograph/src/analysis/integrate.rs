//! Adaptive trajectory integration for replicator systems.
//!
//! Uses the Dormand-Prince 5(4) embedded Runge-Kutta pair with the first-
//! same-as-last optimization. Accepted states are clipped and renormalized
//! onto the simplex, so every recorded state sums to one exactly up to
//! rounding and has no negative entries.

use std::io::Write;

use crate::error::{EvoError, Result};
use crate::replicator::ReplicatorSystem;

/// Why an integration run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    /// The field magnitude stayed below the convergence threshold for ten
    /// consecutive accepted steps away from a simplex vertex.
    Converged,
    /// Time ran out before the field slowed down.
    MaxTime,
    /// The field slowed down with one strategy at fixation.
    BoundaryAbsorbed,
}

impl std::fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalReason::Converged => write!(f, "converged"),
            TerminalReason::MaxTime => write!(f, "max_time"),
            TerminalReason::BoundaryAbsorbed => write!(f, "boundary_absorbed"),
        }
    }
}

/// A recorded solution: one state per accepted integrator step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    reason: TerminalReason,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn terminal_reason(&self) -> TerminalReason {
        self.reason
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one step")
    }

    pub fn last_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one step")
    }

    /// Writes `t,<names...>` rows, one per accepted step.
    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().cloned());
        writer.write_record(&header)?;
        for (t, state) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.10e}")];
            row.extend(state.iter().map(|v| format!("{v:.10e}")));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau. The last weight row equals the fifth-order
// solution row, so the final stage of an accepted step seeds the next one.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weight rows.
const D1: f64 = 71.0 / 57600.0;
const D3: f64 = -71.0 / 16695.0;
const D4: f64 = 71.0 / 1920.0;
const D5: f64 = -17253.0 / 339200.0;
const D6: f64 = 22.0 / 525.0;
const D7: f64 = -1.0 / 40.0;

const CONVERGED_STEPS: usize = 10;
const FIXATION_MARGIN: f64 = 1e-6;

/// Clips negative round-off to zero and rescales the sum to one. Stage
/// points of a trial step may sit slightly off the simplex; the vector
/// field is evaluated on their projection.
fn project(x: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = y.iter().sum();
    if sum > 0.0 {
        for v in &mut y {
            *v /= sum;
        }
    }
    y
}

fn combine(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (coeff, slope) in terms {
        for (o, s) in out.iter_mut().zip(slope.iter()) {
            *o += h * coeff * s;
        }
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Integrates dx/dt from `x0` to `t_max`, recording every accepted step.
///
/// `tol` is the relative local error target; the absolute component is two
/// orders tighter. The run stops early once the field magnitude stays below
/// `tol / 100` for ten consecutive steps, reporting `Converged`, or
/// `BoundaryAbsorbed` when that happens within 1e-6 of a vertex. A step
/// size driven below 1e-14 * max(t_max, 1) aborts with a step-underflow
/// error carrying the last valid state.
pub fn integrate(
    system: &ReplicatorSystem,
    x0: &[f64],
    t_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(EvoError::InvalidArgument(format!(
            "integration horizon must be positive and finite, got {t_max}"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 || tol >= 1.0 {
        return Err(EvoError::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }

    let mut y = system.state(x0)?.x().to_vec();
    let eval = |v: &[f64]| -> Result<Vec<f64>> { system.rhs(&project(v)) };

    let atol = tol * 1e-2;
    let speed_floor = tol * 1e-2;
    let h_floor = 1e-14 * t_max.max(1.0);
    // Guarantees at least twice the streak length in accepted steps, so a
    // dead field is reported as converged rather than timed out.
    let h_max = t_max / (2.0 * CONVERGED_STEPS as f64);

    let mut k1 = eval(&y)?;
    let speed = max_abs(&k1);
    let mut h = if speed > 0.0 {
        (1e-2 / speed).min(t_max / 100.0).max(h_floor * 10.0)
    } else {
        t_max / 100.0
    };

    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut slow_streak = if speed < speed_floor { 1 } else { 0 };

    let reason = loop {
        if slow_streak >= CONVERGED_STEPS {
            break if max_abs(&y) >= 1.0 - FIXATION_MARGIN {
                TerminalReason::BoundaryAbsorbed
            } else {
                TerminalReason::Converged
            };
        }
        if t >= t_max {
            break TerminalReason::MaxTime;
        }
        h = h.min(h_max).min(t_max - t);
        if h < h_floor {
            return Err(EvoError::StepSizeUnderflow {
                t,
                h_min: h,
                state: y,
            });
        }

        let k2 = eval(&combine(&y, h, &[(A21, &k1)]))?;
        let k3 = eval(&combine(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = eval(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = eval(&combine(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ))?;
        let k6 = eval(&combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ))?;
        let y5 = combine(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = eval(&y5)?;

        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let e =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            let scale = atol + tol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }

        if !err.is_finite() {
            h *= 0.2;
            continue;
        }

        if err <= 1.0 {
            t += h;
            let accepted = project(&y5);
            // The last stage sat on the unprojected point; if clipping moved
            // it materially, refresh the seed slope for the next step.
            let moved = accepted
                .iter()
                .zip(&y5)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            y = accepted;
            k1 = if moved > 1e-12 { eval(&y)? } else { k7 };
            times.push(t);
            states.push(y.clone());
            if max_abs(&k1) < speed_floor {
                slow_streak += 1;
            } else {
                slow_streak = 0;
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    };

    Ok(Trajectory {
        times,
        states,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::{peer_punishment, pgg, pool_punishment, GameParams};
    use crate::replicator::{ReplicatorSystem, UpdateRule};
    use std::sync::Arc;

    fn peer_system(beta: f64) -> ReplicatorSystem {
        let params = GameParams::new(3.0, 1.0, 0.7, beta).unwrap();
        ReplicatorSystem::new(
            Arc::new(peer_punishment(&params, 4)),
            UpdateRule::PairwiseComparison,
            1.0,
        )
        .unwrap()
    }

    fn pool_system(beta: f64) -> ReplicatorSystem {
        let params = GameParams::new(3.0, 1.0, 0.7, beta).unwrap();
        ReplicatorSystem::new(
            Arc::new(pool_punishment(&params, 4)),
            UpdateRule::PairwiseComparison,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn vertex_start_stays_put() {
        let system = peer_system(2.0);
        let traj = integrate(&system, &[0.0, 1.0, 0.0], 10.0, 1e-8).unwrap();
        assert_eq!(traj.terminal_reason(), TerminalReason::BoundaryAbsorbed);
        for state in traj.states() {
            assert!((state[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn states_remain_on_the_simplex() {
        let system = pool_system(5.0);
        let traj = integrate(&system, &[0.2, 0.5, 0.3], 50.0, 1e-8).unwrap();
        assert!(traj.len() > 5);
        for state in traj.states() {
            let sum: f64 = state.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(state.iter().all(|&v| v >= 0.0));
        }
        let times = traj.times();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn large_fine_drives_defectors_extinct() {
        // beta = 5 sits above the punisher-vertex exit fine, so defection
        // collapses from any interior start.
        let system = peer_system(5.0);
        for start in [
            [0.4, 0.4, 0.2],
            [0.1, 0.8, 0.1],
            [0.05, 0.05, 0.9],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ] {
            let traj = integrate(&system, &start, 500.0, 1e-9).unwrap();
            assert!(
                traj.last_state()[1] < 1e-4,
                "start {start:?} kept defectors at {}",
                traj.last_state()[1]
            );
            assert_ne!(traj.terminal_reason(), TerminalReason::MaxTime);
        }
    }

    #[test]
    fn intermediate_fine_splits_the_simplex_into_two_basins() {
        // beta = 0.7 lies between the edge-root entry and the punisher-vertex
        // exit fines: defector-heavy starts fixate on defection, punisher-
        // heavy starts eliminate it.
        let system = peer_system(0.7);
        let to_d = integrate(&system, &[0.05, 0.9, 0.05], 800.0, 1e-9).unwrap();
        assert!(to_d.last_state()[1] > 1.0 - 1e-4);
        assert_eq!(to_d.terminal_reason(), TerminalReason::BoundaryAbsorbed);

        let away = integrate(&system, &[0.25, 0.05, 0.7], 800.0, 1e-9).unwrap();
        assert!(away.last_state()[1] < 1e-4);
    }

    #[test]
    fn halving_the_tolerance_keeps_the_endpoint() {
        // A cycling run compares whole solution paths at a fixed final time,
        // not just a shared attractor.
        let system = pool_system(5.0);
        let start = [0.3, 0.4, 0.3];
        let coarse = integrate(&system, &start, 40.0, 1e-9).unwrap();
        let fine = integrate(&system, &start, 40.0, 5e-10).unwrap();
        assert_eq!(coarse.terminal_reason(), TerminalReason::MaxTime);
        for (a, b) in coarse.last_state().iter().zip(fine.last_state()) {
            assert!((a - b).abs() < 1e-6, "endpoints differ: {a} vs {b}");
        }
    }

    #[test]
    fn cyclic_regime_reaches_the_time_horizon() {
        // Pool punishment above the punisher-vertex exit fine cycles among
        // the three strategies instead of settling.
        let system = pool_system(5.0);
        let traj = integrate(&system, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 60.0, 1e-8).unwrap();
        assert_eq!(traj.terminal_reason(), TerminalReason::MaxTime);
        assert!((traj.last_time() - 60.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_horizon_and_tolerance() {
        let system = peer_system(1.0);
        let x = [0.3, 0.3, 0.4];
        assert!(integrate(&system, &x, 0.0, 1e-8).is_err());
        assert!(integrate(&system, &x, -5.0, 1e-8).is_err());
        assert!(integrate(&system, &x, f64::INFINITY, 1e-8).is_err());
        assert!(integrate(&system, &x, 10.0, 0.0).is_err());
        assert!(integrate(&system, &x, 10.0, 2.0).is_err());
    }

    #[test]
    fn csv_round_trip_has_header_and_rows() {
        let system = peer_system(2.0);
        let traj = integrate(&system, &[0.3, 0.3, 0.4], 5.0, 1e-8).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&system.model().strategy_names(), &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,C,D,E");
        assert_eq!(text.lines().count(), traj.len() + 1);
    }

    #[test]
    fn neutral_field_converges_immediately() {
        let params = GameParams::new(5.0 - 1e-9, 1.0, 0.0, 0.0).unwrap();
        let system = ReplicatorSystem::new(
            Arc::new(pgg(&params, 4)),
            UpdateRule::PairwiseComparison,
            1.0,
        )
        .unwrap();
        // r == k+1 up to rounding: the field is ~0 everywhere.
        let traj = integrate(&system, &[0.4, 0.6], 100.0, 1e-6).unwrap();
        assert_eq!(traj.terminal_reason(), TerminalReason::Converged);
        assert!(traj.last_time() < 100.0);
    }
}

//! Phase classification of the punishment games over the (alpha, beta)
//! parameter plane, with optional cross-validation of cell labels by direct
//! trajectory integration.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::equilibria::classify_stability;
use crate::analysis::integrate::{integrate, TerminalReason};
use crate::analysis::thresholds::{peer_thresholds, pool_thresholds, Population, PunishmentKind};
use crate::error::{EvoError, Result};
use crate::payoff::{peer_punishment, pool_punishment, GameParams, PayoffModel};
use crate::replicator::{ReplicatorSystem, UpdateRule};

/// Long-run regime of a punishment game at one parameter point.
///
/// `D` means defectors take over from every interior start. `Bistable`
/// means the defector vertex coexists with a second attracting set (the
/// cooperator-punisher line for peer punishment, the punisher vertex along
/// its edge for pool punishment). `Resolved` means defection no longer
/// resists: peer games settle on the cooperator-punisher line, pool games
/// cycle through the three strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    D,
    Bistable,
    Resolved,
}

impl Phase {
    /// Plot label for this phase under the given mechanism.
    pub fn label(self, kind: PunishmentKind) -> &'static str {
        match (self, kind) {
            (Phase::D, _) => "D",
            (Phase::Bistable, PunishmentKind::Peer) => "D<=>(C+E)_V",
            (Phase::Bistable, PunishmentKind::Pool) => "D_{O<=>D}",
            (Phase::Resolved, PunishmentKind::Peer) => "(C+E)_V",
            (Phase::Resolved, PunishmentKind::Pool) => "(D+C+O)_C",
        }
    }
}

/// Settings for `phase_diagram`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseOptions {
    /// Re-check cells on phase boundaries by integrating eight canonical
    /// starts and comparing the outcome against the analytic label.
    pub cross_validate: bool,
    /// Selection strength for validation runs.
    pub delta: f64,
    /// Time horizon for validation runs.
    pub t_max: f64,
    /// Integration tolerance for validation runs.
    pub tol: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            cross_validate: false,
            delta: 1.0,
            t_max: 400.0,
            tol: 1e-8,
        }
    }
}

/// A labeled (alpha, beta) grid. `labels[bi][ai]` is the phase at
/// `(alphas[ai], betas[bi])`; `disagreements` lists the grid indices where
/// trajectory validation contradicted the analytic label.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub kind: PunishmentKind,
    pub population: Population,
    pub r: f64,
    pub cost: f64,
    pub k: u32,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub labels: Vec<Vec<Phase>>,
    pub disagreements: Vec<(usize, usize)>,
}

/// Phase of one punishment game at fixed parameters, from the closed-form
/// thresholds. Requires the social-dilemma regime r < k + 1.
pub fn phase_classify(
    kind: PunishmentKind,
    params: &GameParams,
    k: u32,
    population: Population,
) -> Result<Phase> {
    let t = match kind {
        PunishmentKind::Peer => peer_thresholds(params.r, params.cost, params.alpha, k)?,
        PunishmentKind::Pool => pool_thresholds(params.r, params.cost, params.alpha, k)?,
    };
    Ok(match population {
        Population::WellMixed => {
            // Well-mixed populations keep the defector vertex stable at any
            // finite fine; only the edge root's entry separates regimes.
            if params.beta <= t.beta0_wm {
                Phase::D
            } else {
                Phase::Bistable
            }
        }
        Population::Structured => {
            if params.beta <= t.beta0 {
                Phase::D
            } else if params.beta < t.beta_star {
                Phase::Bistable
            } else {
                Phase::Resolved
            }
        }
    })
}

/// Interior starts used by trajectory validation, as (C, D, punisher).
const VALIDATION_STARTS: [[f64; 3]; 8] = [
    [0.90, 0.05, 0.05],
    [0.05, 0.90, 0.05],
    [0.05, 0.05, 0.90],
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [0.45, 0.45, 0.10],
    [0.10, 0.45, 0.45],
    [0.45, 0.10, 0.45],
    [0.20, 0.60, 0.20],
];

struct CellOutcome {
    all_to_d: bool,
    none_to_d: bool,
    split: bool,
    cyclic: bool,
}

fn validate_cell(
    kind: PunishmentKind,
    params: &GameParams,
    k: u32,
    options: &PhaseOptions,
) -> Result<CellOutcome> {
    let model: Arc<dyn PayoffModel> = match kind {
        PunishmentKind::Peer => Arc::new(peer_punishment(params, k)),
        PunishmentKind::Pool => Arc::new(pool_punishment(params, k)),
    };
    let system = ReplicatorSystem::new(model, UpdateRule::PairwiseComparison, options.delta)?;
    let mut to_d = 0;
    let mut away = 0;
    let mut cycling = 0;
    for start in VALIDATION_STARTS {
        let trajectory = integrate(&system, &start, options.t_max, options.tol)?;
        let x_d = trajectory.last_state()[1];
        if x_d > 0.9 {
            to_d += 1;
        }
        if x_d < 0.1 {
            away += 1;
        }
        // A run counts as cycling when it never settles, when it crosses
        // the cooperator-defector balance plane repeatedly, or when it is
        // numerically absorbed at a vertex the linearization says is left
        // again: near a heteroclinic cycle the off-vertex shares shrink
        // below the floating-point range, freezing the orbit there.
        let mut crossings = 0;
        let mut last_sign = None;
        for state in trajectory.states() {
            let diff = state[0] - state[1];
            if diff.abs() > 1e-9 {
                let sign = diff > 0.0;
                if last_sign == Some(!sign) {
                    crossings += 1;
                }
                last_sign = Some(sign);
            }
        }
        let stuck_on_unstable_vertex =
            trajectory.terminal_reason() == TerminalReason::BoundaryAbsorbed && {
                let last = trajectory.last_state();
                let mut vertex = vec![0.0; last.len()];
                let imax = (0..last.len())
                    .max_by(|&a, &b| last[a].total_cmp(&last[b]))
                    .unwrap();
                vertex[imax] = 1.0;
                let (_, eigenvalues) = classify_stability(&system, &vertex)?;
                eigenvalues.iter().any(|&(re, _)| re > 1e-7)
            };
        if trajectory.terminal_reason() == TerminalReason::MaxTime
            || crossings >= 3
            || stuck_on_unstable_vertex
        {
            cycling += 1;
        }
    }
    let total = VALIDATION_STARTS.len();
    Ok(CellOutcome {
        all_to_d: to_d == total,
        none_to_d: away == total,
        split: to_d >= 1 && away >= 1,
        cyclic: cycling * 4 >= total * 3,
    })
}

fn outcome_consistent(kind: PunishmentKind, phase: Phase, outcome: &CellOutcome) -> bool {
    match (kind, phase) {
        (_, Phase::D) => outcome.all_to_d,
        (PunishmentKind::Peer, Phase::Bistable) => outcome.split,
        (PunishmentKind::Peer, Phase::Resolved) => outcome.none_to_d,
        // Pool bistability lives on the defector-punisher edge alone;
        // interior starts still fixate on defection.
        (PunishmentKind::Pool, Phase::Bistable) => outcome.all_to_d,
        (PunishmentKind::Pool, Phase::Resolved) => outcome.cyclic,
    }
}

/// Labels every (alpha, beta) grid cell by its analytic phase. With
/// `options.cross_validate` set (structured populations only), cells whose
/// 4-neighborhood crosses a phase boundary are re-checked by integrating
/// the eight canonical starts.
#[allow(clippy::too_many_arguments)]
pub fn phase_diagram(
    kind: PunishmentKind,
    r: f64,
    cost: f64,
    k: u32,
    population: Population,
    alphas: &[f64],
    betas: &[f64],
    options: &PhaseOptions,
) -> Result<PhaseDiagram> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(EvoError::InvalidArgument(
            "phase diagram needs at least one alpha and one beta".into(),
        ));
    }
    if options.cross_validate && population == Population::WellMixed {
        return Err(EvoError::InvalidArgument(
            "trajectory cross-validation is defined for structured populations".into(),
        ));
    }

    let labels: Vec<Vec<Phase>> = betas
        .par_iter()
        .map(|&beta| {
            alphas
                .iter()
                .map(|&alpha| {
                    let params = GameParams::new(r, cost, alpha, beta)?;
                    phase_classify(kind, &params, k, population)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut disagreements = Vec::new();
    if options.cross_validate {
        let boundary: Vec<(usize, usize)> = (0..betas.len())
            .flat_map(|bi| (0..alphas.len()).map(move |ai| (ai, bi)))
            .filter(|&(ai, bi)| {
                let here = labels[bi][ai];
                let mut neighbors = Vec::new();
                if ai > 0 {
                    neighbors.push(labels[bi][ai - 1]);
                }
                if ai + 1 < alphas.len() {
                    neighbors.push(labels[bi][ai + 1]);
                }
                if bi > 0 {
                    neighbors.push(labels[bi - 1][ai]);
                }
                if bi + 1 < betas.len() {
                    neighbors.push(labels[bi + 1][ai]);
                }
                neighbors.iter().any(|&p| p != here)
            })
            .collect();

        let flagged: Vec<Option<(usize, usize)>> = boundary
            .par_iter()
            .map(|&(ai, bi)| {
                let params = GameParams::new(r, cost, alphas[ai], betas[bi])?;
                let outcome = validate_cell(kind, &params, k, options)?;
                Ok(if outcome_consistent(kind, labels[bi][ai], &outcome) {
                    None
                } else {
                    Some((ai, bi))
                })
            })
            .collect::<Result<_>>()?;
        disagreements = flagged.into_iter().flatten().collect();
    }

    Ok(PhaseDiagram {
        kind,
        population,
        r,
        cost,
        k,
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        labels,
        disagreements,
    })
}

/// Writes `alpha,beta,phase,label` rows in row-major beta-then-alpha order.
pub fn write_phase_csv<W: Write>(diagram: &PhaseDiagram, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["alpha", "beta", "phase", "label"])?;
    for (bi, beta) in diagram.betas.iter().enumerate() {
        for (ai, alpha) in diagram.alphas.iter().enumerate() {
            let phase = diagram.labels[bi][ai];
            writer.write_record([
                format!("{alpha:.10e}"),
                format!("{beta:.10e}"),
                format!("{phase:?}").to_lowercase(),
                phase.label(diagram.kind).to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(r: f64, alpha: f64, beta: f64) -> GameParams {
        GameParams::new(r, 1.0, alpha, beta).unwrap()
    }

    #[test]
    fn peer_structured_phases_bracket_the_critical_fines() {
        let classify = |beta| {
            phase_classify(
                PunishmentKind::Peer,
                &params(2.0, 0.5, beta),
                4,
                Population::Structured,
            )
            .unwrap()
        };
        // beta0 = 4.5/17, beta_star = 1 + 17/6 at alpha = 0.5.
        assert_eq!(classify(0.1), Phase::D);
        assert_eq!(classify(2.0), Phase::Bistable);
        assert_eq!(classify(4.0), Phase::Resolved);
        assert_eq!(classify(2.0).label(PunishmentKind::Peer), "D<=>(C+E)_V");
        assert_eq!(classify(4.0).label(PunishmentKind::Peer), "(C+E)_V");
    }

    #[test]
    fn pool_structured_phases_bracket_the_critical_fines() {
        let classify = |beta| {
            phase_classify(
                PunishmentKind::Pool,
                &params(2.0, 0.2, beta),
                4,
                Population::Structured,
            )
            .unwrap()
        };
        // beta_star = 1.5 + 2.5 * 0.2 = 2.
        assert_eq!(classify(0.3), Phase::D);
        assert_eq!(classify(1.5), Phase::Bistable);
        assert_eq!(classify(3.0), Phase::Resolved);
        assert_eq!(classify(3.0).label(PunishmentKind::Pool), "(D+C+O)_C");
        assert_eq!(classify(1.5).label(PunishmentKind::Pool), "D_{O<=>D}");
    }

    #[test]
    fn wellmixed_has_two_phases_only() {
        let classify = |beta| {
            phase_classify(
                PunishmentKind::Peer,
                &params(2.0, 0.0, beta),
                4,
                Population::WellMixed,
            )
            .unwrap()
        };
        // beta0_wm = 0.15 at alpha = 0.
        assert_eq!(classify(0.10), Phase::D);
        assert_eq!(classify(0.20), Phase::Bistable);
        assert_eq!(classify(100.0), Phase::Bistable);
    }

    #[test]
    fn diagram_cells_match_pointwise_classification() {
        let alphas = [0.0, 0.4, 0.8];
        let betas = [0.1, 1.0, 5.0];
        let diagram = phase_diagram(
            PunishmentKind::Pool,
            2.0,
            1.0,
            4,
            Population::Structured,
            &alphas,
            &betas,
            &PhaseOptions::default(),
        )
        .unwrap();
        assert!(diagram.disagreements.is_empty());
        for (bi, &beta) in betas.iter().enumerate() {
            for (ai, &alpha) in alphas.iter().enumerate() {
                let expected = phase_classify(
                    PunishmentKind::Pool,
                    &params(2.0, alpha, beta),
                    4,
                    Population::Structured,
                )
                .unwrap();
                assert_eq!(diagram.labels[bi][ai], expected);
            }
        }
    }

    #[test]
    fn trajectory_validation_confirms_peer_labels_near_the_boundary() {
        let alphas = [0.0, 0.5];
        let betas = [0.1, 0.7, 5.0];
        let options = PhaseOptions {
            cross_validate: true,
            t_max: 600.0,
            ..PhaseOptions::default()
        };
        let diagram = phase_diagram(
            PunishmentKind::Peer,
            3.0,
            1.0,
            4,
            Population::Structured,
            &alphas,
            &betas,
            &options,
        )
        .unwrap();
        assert!(
            diagram.disagreements.is_empty(),
            "disagreements at {:?}",
            diagram.disagreements
        );
        assert_eq!(diagram.labels[0][0], Phase::D);
        assert_eq!(diagram.labels[2][0], Phase::Resolved);
    }

    #[test]
    fn trajectory_validation_confirms_pool_labels_near_the_boundary() {
        // beta0 ~ 0.705 and beta_star = 1.75 at alpha = 0.3, so the fines
        // below land in the bistable and cyclic regimes. The horizon covers
        // the slow punisher-decay leg of the bistable transient.
        let alphas = [0.3];
        let betas = [1.2, 5.0];
        let options = PhaseOptions {
            cross_validate: true,
            t_max: 600.0,
            ..PhaseOptions::default()
        };
        let diagram = phase_diagram(
            PunishmentKind::Pool,
            3.0,
            1.0,
            4,
            Population::Structured,
            &alphas,
            &betas,
            &options,
        )
        .unwrap();
        assert!(
            diagram.disagreements.is_empty(),
            "disagreements at {:?}",
            diagram.disagreements
        );
        assert_eq!(diagram.labels[0][0], Phase::Bistable);
        assert_eq!(diagram.labels[1][0], Phase::Resolved);
    }

    #[test]
    fn wellmixed_diagram_rejects_cross_validation() {
        let options = PhaseOptions {
            cross_validate: true,
            ..PhaseOptions::default()
        };
        assert!(phase_diagram(
            PunishmentKind::Peer,
            2.0,
            1.0,
            4,
            Population::WellMixed,
            &[0.0],
            &[1.0],
            &options,
        )
        .is_err());
    }

    #[test]
    fn csv_layout_is_beta_major() {
        let diagram = phase_diagram(
            PunishmentKind::Peer,
            2.0,
            1.0,
            4,
            Population::Structured,
            &[0.0, 1.0],
            &[0.1, 2.0],
            &PhaseOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_phase_csv(&diagram, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "alpha,beta,phase,label");
        assert!(lines[1].starts_with("0.0000000000e0,1.0000000000e-1,d,D"));
    }

    #[test]
    fn thresholds_and_phases_agree_on_the_boundary_values() {
        let t = peer_thresholds(2.0, 1.0, 0.5, 4).unwrap();
        assert_abs_diff_eq!(t.beta0, 4.5 / 17.0, epsilon = 1e-12);
        let just_below = phase_classify(
            PunishmentKind::Peer,
            &params(2.0, 0.5, t.beta0 - 1e-9),
            4,
            Population::Structured,
        )
        .unwrap();
        let just_above = phase_classify(
            PunishmentKind::Peer,
            &params(2.0, 0.5, t.beta0 + 1e-9),
            4,
            Population::Structured,
        )
        .unwrap();
        assert_eq!(just_below, Phase::D);
        assert_eq!(just_above, Phase::Bistable);
    }
}

//! Closed-form punishment thresholds and edge-equilibrium fractions for the
//! public-goods game with peer or pool punishment on a degree-k regular graph,
//! together with their well-mixed counterparts.
//!
//! Throughout, strategies are ordered (C, D, P): cooperator, defector,
//! punisher. `net` denotes the per-game net cooperation payoff
//! r c / (k+1) - c, which is negative in the social-dilemma regime r < k+1.

use serde::Serialize;

use crate::error::{EvoError, Result};
use crate::payoff::GameParams;

/// Which punishment mechanism a threshold or fraction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PunishmentKind {
    Peer,
    Pool,
}

impl std::fmt::Display for PunishmentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PunishmentKind::Peer => write!(f, "peer"),
            PunishmentKind::Pool => write!(f, "pool"),
        }
    }
}

impl std::str::FromStr for PunishmentKind {
    type Err = EvoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "peer" => Ok(PunishmentKind::Peer),
            "pool" => Ok(PunishmentKind::Pool),
            other => Err(EvoError::InvalidArgument(format!(
                "unknown punishment kind '{other}'; expected peer or pool"
            ))),
        }
    }
}

/// Population structure a formula refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    WellMixed,
    Structured,
}

impl std::fmt::Display for Population {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Population::WellMixed => write!(f, "well-mixed"),
            Population::Structured => write!(f, "structured"),
        }
    }
}

impl std::str::FromStr for Population {
    type Err = EvoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wellmixed" | "well-mixed" | "well_mixed" | "wm" => Ok(Population::WellMixed),
            "structured" | "graph" => Ok(Population::Structured),
            other => Err(EvoError::InvalidArgument(format!(
                "unknown population '{other}'; expected structured or well-mixed"
            ))),
        }
    }
}

/// Critical fines for one punishment mechanism at fixed (r, c, alpha, k).
///
/// `beta0` and `beta_star` are the structured-population thresholds: the
/// defector-punisher edge root enters the simplex at `beta0` and exits
/// through the punisher vertex at `beta_star`, where the defector vertex
/// also loses stability. `beta0_wm` is the well-mixed entry threshold
/// (there is no finite well-mixed exit fine). `beta_eq` is the fine at
/// which the structured and well-mixed edge roots coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameThresholds {
    pub beta0_wm: f64,
    pub beta0: f64,
    pub beta_eq: f64,
    pub beta_star: f64,
}

/// Equilibrium fractions on the boundary of the simplex at fixed parameters.
///
/// `x_d_edge` is the defector share at the root on the defector-punisher
/// edge; it is reported unclamped, and `x_d_exists` says whether it lies
/// strictly inside the edge. For peer punishment, `x_ce_star` is the
/// critical cooperator share on the cooperator-punisher line: points with a
/// smaller cooperator share resist defector invasion. Pool punishment has
/// no such line, so those fields are `None` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeFractions {
    pub x_d_edge: f64,
    pub x_d_exists: bool,
    pub x_ce_star: Option<f64>,
    pub x_ce_exists: Option<bool>,
}

fn check_threshold_inputs(r: f64, c: f64, alpha: f64, k: u32) -> Result<f64> {
    if k < 3 {
        return Err(EvoError::DegenerateDegree { k });
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(EvoError::InvalidArgument(format!(
            "multiplication factor r must be positive and finite, got {r}"
        )));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(EvoError::InvalidArgument(format!(
            "contribution cost c must be positive and finite, got {c}"
        )));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(EvoError::InvalidArgument(format!(
            "punishment cost alpha must be nonnegative and finite, got {alpha}"
        )));
    }
    let threshold = f64::from(k) + 1.0;
    if r >= threshold {
        return Err(EvoError::NoDilemma { r, threshold });
    }
    // Net per-game payoff of a cooperator in a group of cooperators' shares,
    // negative throughout the dilemma regime.
    Ok(r * c / threshold - c)
}

/// Critical fines for peer punishment at degree k.
///
/// Requires the social-dilemma regime r < k + 1.
pub fn peer_thresholds(r: f64, c: f64, alpha: f64, k: u32) -> Result<GameThresholds> {
    let net = check_threshold_inputs(r, c, alpha, k)?;
    let kf = f64::from(k);
    let loss = -net;
    Ok(GameThresholds {
        beta0_wm: loss / kf,
        beta0: ((kf + 1.0) * loss + 3.0 * alpha) / (kf * kf + kf - 3.0),
        beta_eq: 2.0 * loss / kf + alpha,
        beta_star: (kf + 1.0) / 3.0 * (loss + kf * alpha) - alpha,
    })
}

/// Critical fines for pool punishment at degree k.
///
/// Requires the social-dilemma regime r < k + 1.
pub fn pool_thresholds(r: f64, c: f64, alpha: f64, k: u32) -> Result<GameThresholds> {
    let net = check_threshold_inputs(r, c, alpha, k)?;
    let kf = f64::from(k);
    let loss = -net;
    // (k+1)(k-1)^(k-1) and its beta_eq analogue both exceed 1, so the
    // denominators below are negative and cancel the negative net - alpha.
    let growth = (kf + 1.0) * (kf - 1.0).powi(k as i32 - 1);
    let kappa = (kf + 1.0).powf(1.0 / kf) * (kf - 1.0).powf(1.0 - 1.0 / kf) - kf + 2.0;
    let kappa_k = kappa.powf(kf);
    Ok(GameThresholds {
        beta0_wm: loss + alpha,
        beta0: growth / (1.0 - growth) * (net - alpha),
        beta_eq: kappa_k / (1.0 - kappa_k) * (net - alpha),
        beta_star: (kf + 1.0) / 2.0 * (loss + alpha),
    })
}

/// Defector share at the defector-punisher edge root, with existence flags.
///
/// Values are reported unclamped; a root outside (0, 1), or an undefined
/// expression (for example a negative pool radicand), yields
/// `x_d_exists = false`. Peer punishment additionally reports the critical
/// cooperator share on the cooperator-punisher line.
pub fn edge_equilibrium_fractions(
    kind: PunishmentKind,
    params: &GameParams,
    k: u32,
    population: Population,
) -> Result<EdgeFractions> {
    let net = check_threshold_inputs(params.r, params.cost, params.alpha, k)?;
    if params.beta <= 0.0 {
        return Err(EvoError::InvalidArgument(format!(
            "edge fractions require a positive fine, got beta = {}",
            params.beta
        )));
    }
    let kf = f64::from(k);
    let (alpha, beta) = (params.alpha, params.beta);
    let inside = |x: f64| x > 0.0 && x < 1.0;

    match (kind, population) {
        (PunishmentKind::Peer, Population::WellMixed) => {
            let x_d = (net + kf * beta) / (kf * (alpha + beta));
            let x_star = 1.0 + net / (kf * beta);
            Ok(EdgeFractions {
                x_d_edge: x_d,
                x_d_exists: inside(x_d),
                x_ce_star: Some(x_star),
                x_ce_exists: Some(inside(x_star)),
            })
        }
        (PunishmentKind::Peer, Population::Structured) => {
            let x_d = ((kf + 1.0) * (net + kf * beta) - 3.0 * (alpha + beta))
                / ((kf - 2.0) * (kf + 3.0) * (alpha + beta));
            let x_star = 1.0 + net / (kf * beta - 3.0 * (alpha + beta) / (kf + 1.0));
            Ok(EdgeFractions {
                x_d_edge: x_d,
                x_d_exists: inside(x_d),
                x_ce_star: Some(x_star),
                x_ce_exists: Some(inside(x_star)),
            })
        }
        (PunishmentKind::Pool, Population::WellMixed) => {
            let x_d = (1.0 + (net - alpha) / beta).powf(1.0 / kf);
            Ok(EdgeFractions {
                x_d_edge: x_d,
                x_d_exists: inside(x_d),
                x_ce_star: None,
                x_ce_exists: None,
            })
        }
        (PunishmentKind::Pool, Population::Structured) => {
            let radicand = (kf + 1.0) / (kf - 1.0) * (1.0 + (net - alpha) / beta);
            let x_d = (kf - 1.0) / (kf - 2.0) * (radicand.powf(1.0 / kf) - 1.0 / (kf - 1.0));
            Ok(EdgeFractions {
                x_d_edge: x_d,
                x_d_exists: inside(x_d),
                x_ce_star: None,
                x_ce_exists: None,
            })
        }
    }
}

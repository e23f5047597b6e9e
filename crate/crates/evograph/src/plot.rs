//! Minimal self-contained SVG renderings: a phase-diagram heatmap with the
//! analytic boundary lines overlaid, a ternary trajectory plot for
//! three-strategy systems, and a frequency-versus-time line chart. No
//! external assets are referenced, so the files render anywhere.

use crate::analysis::integrate::Trajectory;
use crate::analysis::phase::{Phase, PhaseDiagram};
use crate::analysis::thresholds::{peer_thresholds, pool_thresholds, Population, PunishmentKind};
use crate::error::{EvoError, Result};

const PHASE_COLORS: [(Phase, &str); 3] = [
    (Phase::D, "#c65b4e"),
    (Phase::Bistable, "#e4b363"),
    (Phase::Resolved, "#5e94c4"),
];

/// Dark2-style categorical palette for strategy curves.
const SERIES_COLORS: [&str; 6] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
];

fn phase_color(phase: Phase) -> &'static str {
    PHASE_COLORS
        .iter()
        .find(|(p, _)| *p == phase)
        .map(|(_, c)| *c)
        .expect("every phase has a color")
}

/// Shortest decimal form that is stable across runs.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.4}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Tick positions covering [lo, hi] at round-ish spacing.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(mag * 10.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        // Snap tiny rounding away from zero.
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

/// Grid-cell edges at midpoints between consecutive centers; a single
/// center gets a unit-ish pad so it still spans visible area.
fn cell_edges(centers: &[f64]) -> Vec<f64> {
    let n = centers.len();
    if n == 1 {
        let pad = centers[0].abs().max(1.0) * 0.05;
        return vec![centers[0] - pad, centers[0] + pad];
    }
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(centers[0] - (centers[1] - centers[0]) / 2.0);
    for w in centers.windows(2) {
        edges.push((w[0] + w[1]) / 2.0);
    }
    edges.push(centers[n - 1] + (centers[n - 1] - centers[n - 2]) / 2.0);
    edges
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.xmax - self.xmin).max(f64::MIN_POSITIVE);
        self.x0 + (v - self.xmin) / span * self.w
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.ymax - self.ymin).max(f64::MIN_POSITIVE);
        self.y0 + self.h - (v - self.ymin) / span * self.h
    }
}

fn axes_svg(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n",
        fmt_num(frame.x0),
        fmt_num(frame.y0),
        fmt_num(frame.w),
        fmt_num(frame.h)
    ));
    for t in ticks(frame.xmin, frame.xmax, 5) {
        let px = frame.x(t);
        s.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"#333\"/>\n",
            x = fmt_num(px),
            y = fmt_num(frame.y0 + frame.h),
            y2 = fmt_num(frame.y0 + frame.h + 5.0)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">{}</text>\n",
            fmt_num(px),
            fmt_num(frame.y0 + frame.h + 18.0),
            fmt_num(t)
        ));
    }
    for t in ticks(frame.ymin, frame.ymax, 5) {
        let py = frame.y(t);
        s.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#333\"/>\n",
            x1 = fmt_num(frame.x0 - 5.0),
            x2 = fmt_num(frame.x0),
            y = fmt_num(py)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">{}</text>\n",
            fmt_num(frame.x0 - 8.0),
            fmt_num(py + 4.0),
            fmt_num(t)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111\">{}</text>\n",
        fmt_num(frame.x0 + frame.w / 2.0),
        fmt_num(frame.y0 + frame.h + 36.0),
        escape_xml(x_label)
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\" fill=\"#111\">{}</text>\n",
        fmt_num(frame.x0 - 45.0),
        fmt_num(frame.y0 + frame.h / 2.0),
        fmt_num(frame.x0 - 45.0),
        fmt_num(frame.y0 + frame.h / 2.0),
        escape_xml(y_label)
    ));
    s
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        w = fmt_num(width),
        h = fmt_num(height)
    )
}

/// Phase-diagram heatmap over (alpha, beta) with the analytic critical
/// lines drawn on top: the edge-root entry line, and for structured
/// populations also the punisher-vertex exit line.
pub fn phase_heatmap(diagram: &PhaseDiagram) -> Result<String> {
    if diagram.alphas.is_empty() || diagram.betas.is_empty() {
        return Err(EvoError::InvalidArgument(
            "cannot render an empty phase diagram".into(),
        ));
    }
    let a_edges = cell_edges(&diagram.alphas);
    let b_edges = cell_edges(&diagram.betas);
    let frame = Frame {
        x0: 70.0,
        y0: 20.0,
        w: 420.0,
        h: 380.0,
        xmin: a_edges[0],
        xmax: *a_edges.last().unwrap(),
        ymin: b_edges[0],
        ymax: *b_edges.last().unwrap(),
    };

    let mut svg = svg_open(660.0, 470.0);
    for (bi, row) in diagram.labels.iter().enumerate() {
        for (ai, &phase) in row.iter().enumerate() {
            let x = frame.x(a_edges[ai]);
            let y = frame.y(b_edges[bi + 1]);
            let w = frame.x(a_edges[ai + 1]) - x;
            let h = frame.y(b_edges[bi]) - y;
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                fmt_num(x),
                fmt_num(y),
                fmt_num(w),
                fmt_num(h),
                phase_color(phase)
            ));
        }
    }

    // Analytic boundary lines as polylines over a dense alpha sweep.
    let (kind, r, cost, k) = (diagram.kind, diagram.r, diagram.cost, diagram.k);
    let thresholds_at = move |alpha: f64| match kind {
        PunishmentKind::Peer => peer_thresholds(r, cost, alpha, k),
        PunishmentKind::Pool => pool_thresholds(r, cost, alpha, k),
    };
    type BoundaryCurve = Box<dyn Fn(f64) -> Result<f64>>;
    let curves: Vec<(&str, BoundaryCurve)> = match diagram.population {
        Population::Structured => vec![
            (
                "boundary-entry",
                Box::new(move |a: f64| Ok(thresholds_at(a)?.beta0)) as BoundaryCurve,
            ),
            (
                "boundary-exit",
                Box::new(move |a: f64| Ok(thresholds_at(a)?.beta_star)),
            ),
        ],
        Population::WellMixed => vec![(
            "boundary-entry",
            Box::new(move |a: f64| Ok(thresholds_at(a)?.beta0_wm)) as BoundaryCurve,
        )],
    };
    for (class, curve) in curves {
        let mut points = Vec::new();
        let steps = 200;
        for i in 0..=steps {
            let alpha = frame.xmin + (frame.xmax - frame.xmin) * i as f64 / steps as f64;
            let beta = curve(alpha.max(0.0))?;
            if beta >= frame.ymin && beta <= frame.ymax {
                points.push(format!(
                    "{},{}",
                    fmt_num(frame.x(alpha)),
                    fmt_num(frame.y(beta))
                ));
            }
        }
        if points.len() >= 2 {
            let dash = if class == "boundary-exit" {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            svg.push_str(&format!(
                "<polyline class=\"{}\" points=\"{}\" fill=\"none\" stroke=\"#111\" stroke-width=\"2\"{}/>\n",
                class,
                points.join(" "),
                dash
            ));
        }
    }

    svg.push_str(&axes_svg(&frame, "alpha", "beta"));

    // Legend keyed by mechanism-specific phase labels.
    let phases: &[Phase] = match diagram.population {
        Population::Structured => &[Phase::D, Phase::Bistable, Phase::Resolved],
        Population::WellMixed => &[Phase::D, Phase::Bistable],
    };
    for (i, &phase) in phases.iter().enumerate() {
        let y = 40.0 + 26.0 * i as f64;
        svg.push_str(&format!(
            "<rect class=\"legend\" x=\"505\" y=\"{}\" width=\"16\" height=\"16\" fill=\"{}\" stroke=\"#333\"/>\n",
            fmt_num(y),
            phase_color(phase)
        ));
        svg.push_str(&format!(
            "<text x=\"527\" y=\"{}\" font-size=\"12\" fill=\"#111\">{}</text>\n",
            fmt_num(y + 12.0),
            escape_xml(phase.label(diagram.kind))
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Trajectory inside the three-strategy simplex, drawn as a path in an
/// equilateral triangle with labeled corners: first strategy bottom left,
/// second bottom right, third on top.
pub fn ternary_trajectory(trajectory: &Trajectory, names: &[String]) -> Result<String> {
    let n = trajectory.last_state().len();
    if n != 3 || names.len() != 3 {
        return Err(EvoError::InvalidArgument(format!(
            "ternary plots need exactly 3 strategies, got {n}"
        )));
    }
    let width = 520.0;
    let side = 400.0;
    let height = side * 3f64.sqrt() / 2.0;
    let left = (60.0, 40.0 + height);
    let right = (60.0 + side, 40.0 + height);
    let top = (60.0 + side / 2.0, 40.0);
    let to_px = |x: &[f64]| {
        (
            x[0] * left.0 + x[1] * right.0 + x[2] * top.0,
            x[0] * left.1 + x[1] * right.1 + x[2] * top.1,
        )
    };

    let mut svg = svg_open(width, height + 110.0);
    svg.push_str(&format!(
        "<polygon points=\"{},{} {},{} {},{}\" fill=\"#fafafa\" stroke=\"#333\" stroke-width=\"1.5\"/>\n",
        fmt_num(left.0),
        fmt_num(left.1),
        fmt_num(right.0),
        fmt_num(right.1),
        fmt_num(top.0),
        fmt_num(top.1)
    ));

    let points: Vec<String> = trajectory
        .states()
        .iter()
        .map(|x| {
            let (px, py) = to_px(x);
            format!("{},{}", fmt_num(px), fmt_num(py))
        })
        .collect();
    svg.push_str(&format!(
        "<polyline class=\"trajectory\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
        points.join(" "),
        SERIES_COLORS[0]
    ));

    let (sx, sy) = to_px(&trajectory.states()[0]);
    svg.push_str(&format!(
        "<circle class=\"start\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\"/>\n",
        fmt_num(sx),
        fmt_num(sy),
        SERIES_COLORS[4]
    ));
    let (ex, ey) = to_px(trajectory.last_state());
    svg.push_str(&format!(
        "<circle class=\"end\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"#111\"/>\n",
        fmt_num(ex),
        fmt_num(ey)
    ));

    let corners = [
        (left, names[0].as_str(), "end", 18.0),
        (right, names[1].as_str(), "start", 18.0),
        (top, names[2].as_str(), "middle", -10.0),
    ];
    for ((cx, cy), name, anchor, dy) in corners {
        svg.push_str(&format!(
            "<text class=\"corner-label\" x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"{}\" fill=\"#111\">{}</text>\n",
            fmt_num(cx),
            fmt_num(cy + dy),
            anchor,
            escape_xml(name)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Strategy frequencies against time, one polyline per strategy.
pub fn frequency_chart(trajectory: &Trajectory, names: &[String]) -> Result<String> {
    let n = trajectory.last_state().len();
    if names.len() != n {
        return Err(EvoError::DimensionMismatch {
            context: "frequency chart names",
            expected: n,
            got: names.len(),
        });
    }
    let frame = Frame {
        x0: 70.0,
        y0: 20.0,
        w: 430.0,
        h: 330.0,
        xmin: 0.0,
        xmax: trajectory.last_time().max(f64::MIN_POSITIVE),
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut svg = svg_open(660.0, 420.0);
    for (i, name) in names.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let points: Vec<String> = trajectory
            .times()
            .iter()
            .zip(trajectory.states())
            .map(|(&t, x)| format!("{},{}", fmt_num(frame.x(t)), fmt_num(frame.y(x[i]))))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>\n",
            points.join(" "),
            color
        ));
        let y = 40.0 + 24.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"515\" y1=\"{y}\" x2=\"540\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            y = fmt_num(y),
        ));
        svg.push_str(&format!(
            "<text x=\"548\" y=\"{}\" font-size=\"12\" fill=\"#111\">{}</text>\n",
            fmt_num(y + 4.0),
            escape_xml(name)
        ));
    }
    svg.push_str(&axes_svg(&frame, "t", "frequency"));
    svg.push_str("</svg>\n");
    Ok(svg)
}

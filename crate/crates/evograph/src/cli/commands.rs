//! Subcommand bodies: resolve flags against the config file, call the
//! library, write artifacts, and drop a manifest describing the run.

use super::config::{fill_from_section, parse_range, parse_simplex, Section};
use super::{
    EquilibriaArgs, IntegrateArgs, ModelArgs, PayoffExportArgs, PhaseArgs, RhsArgs, SimulateArgs,
    ThresholdsArgs, ValidateArgs,
};
use crate::analysis::{
    find_equilibria, integrate, peer_thresholds, phase_diagram, pool_thresholds,
    write_equilibria_csv, write_phase_csv, GameThresholds, Phase, PhaseOptions, Population,
    PunishmentKind,
};
use crate::error::{EvoError, Result};
use crate::mc::{run as run_simulation, validate_closure, InitialCondition, SimConfig};
use crate::payoff::{
    as_generalized_matrix, load_payoff_file, BuiltinGame, GameParams, PayoffModel,
};
use crate::plot;
use crate::replicator::{ReplicatorSystem, RhsPath, UpdateRule};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| {
        EvoError::InvalidArgument(format!(
            "missing {flag} (pass the flag or set it in the config file)"
        ))
    })
}

fn parse_game(raw: &str) -> Result<BuiltinGame> {
    match raw.to_ascii_lowercase().as_str() {
        "pgg" | "public_goods" => Ok(BuiltinGame::Pgg),
        "peer" | "peer_punishment" => Ok(BuiltinGame::PeerPunishment),
        "pool" | "pool_punishment" => Ok(BuiltinGame::PoolPunishment),
        other => Err(EvoError::InvalidArgument(format!(
            "unknown game '{other}' (expected pgg, peer, or pool)"
        ))),
    }
}

fn game_name(game: BuiltinGame) -> &'static str {
    match game {
        BuiltinGame::Pgg => "pgg",
        BuiltinGame::PeerPunishment => "peer",
        BuiltinGame::PoolPunishment => "pool",
    }
}

struct ResolvedModel {
    model: Arc<dyn PayoffModel>,
    echo: serde_json::Value,
}

impl ModelArgs {
    fn resolve(mut self, section: &Section<'_>) -> Result<ResolvedModel> {
        fill_from_section!(self, section, [game, payoff_file, k, r, c, alpha, beta]);
        if let Some(path) = &self.payoff_file {
            let model = load_payoff_file(path)?;
            let echo = json!({ "payoff_file": path.display().to_string(), "k": model.k() });
            return Ok(ResolvedModel { model, echo });
        }
        let game = parse_game(&required(self.game, "--game")?)?;
        let k = required(self.k, "--k")?;
        let r = required(self.r, "--r")?;
        let c = required(self.c, "--c")?;
        let alpha = self.alpha.unwrap_or(0.0);
        let beta = self.beta.unwrap_or(0.0);
        let params = GameParams::new(r, c, alpha, beta)?;
        let echo = json!({
            "game": game_name(game),
            "k": k,
            "r": r,
            "c": c,
            "alpha": alpha,
            "beta": beta,
        });
        Ok(ResolvedModel {
            model: game.build(&params, k),
            echo,
        })
    }
}

fn parse_rule(raw: Option<String>) -> Result<UpdateRule> {
    raw.as_deref().unwrap_or("pc").parse()
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    println!("wrote {}", path.display());
    Ok(path)
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    library_version: &'static str,
    parameters: serde_json::Value,
    seeds: serde_json::Value,
    outputs: Vec<String>,
    wall_time_seconds: f64,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    parameters: serde_json::Value,
    seeds: serde_json::Value,
    outputs: Vec<String>,
    started: Instant,
) -> Result<()> {
    let manifest = Manifest {
        command: command.to_string(),
        library_version: env!("CARGO_PKG_VERSION"),
        parameters,
        seeds,
        outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_artifact(dir, &format!("{command}_manifest.json"), text.as_bytes())?;
    Ok(())
}

fn basename(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn cmd_rhs(mut args: RhsArgs, section: Section<'_>) -> Result<()> {
    fill_from_section!(args, section, [rule, path, delta, x, format]);
    let resolved = args.model.resolve(&section)?;
    let rule = parse_rule(args.rule)?;
    let path: RhsPath = args.path.as_deref().unwrap_or("auto").parse()?;
    let delta = args.delta.unwrap_or(1.0);
    let x = parse_simplex(&required(args.x, "--x")?)?;
    let system = ReplicatorSystem::with_path(resolved.model, rule, delta, path)?;
    let rhs = system.rhs(&x)?;
    let active = if system.uses_linear_path() {
        "linear"
    } else {
        "general"
    };
    let names = system.model().strategy_names();
    match args.format.as_deref().unwrap_or("text") {
        "text" => {
            println!("rule: {rule}");
            println!("path: {active}");
            for (name, v) in names.iter().zip(&rhs) {
                println!("dx_{name}/dt = {v:.10e}");
            }
        }
        "json" => {
            let report = json!({
                "rule": rule.to_string(),
                "delta": delta,
                "path": active,
                "names": names,
                "x": x,
                "rhs": rhs,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        other => {
            return Err(EvoError::InvalidArgument(format!(
                "unknown format '{other}' (expected text or json)"
            )));
        }
    }
    Ok(())
}

pub fn cmd_integrate(mut args: IntegrateArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(args, section, [rule, delta, x, t_max, tol, out]);
    let resolved = args.model.resolve(&section)?;
    let rule = parse_rule(args.rule)?;
    let delta = args.delta.unwrap_or(1.0);
    let x = parse_simplex(&required(args.x, "--x")?)?;
    let t_max = args.t_max.unwrap_or(400.0);
    let tol = args.tol.unwrap_or(1e-8);
    let out = args.out.unwrap_or_else(|| "trajectory.csv".to_string());

    let system = ReplicatorSystem::new(resolved.model, rule, delta)?;
    let names = system.model().strategy_names();
    let trajectory = integrate(&system, &x, t_max, tol)?;

    let mut outputs = Vec::new();
    let mut buffer = Vec::new();
    trajectory.write_csv(&names, &mut buffer)?;
    outputs.push(basename(&write_artifact(dir, &out, &buffer)?));

    let stem = out.strip_suffix(".csv").unwrap_or(&out);
    if system.n() == 3 {
        let svg = plot::ternary_trajectory(&trajectory, &names)?;
        outputs.push(basename(&write_artifact(
            dir,
            &format!("{stem}_ternary.svg"),
            svg.as_bytes(),
        )?));
    }
    let chart = plot::frequency_chart(&trajectory, &names)?;
    outputs.push(basename(&write_artifact(
        dir,
        &format!("{stem}_frequencies.svg"),
        chart.as_bytes(),
    )?));

    let last = trajectory.last_state();
    println!(
        "terminal: {} at t = {:.6}, x = [{}]",
        trajectory.terminal_reason(),
        trajectory.last_time(),
        last.iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    );

    let mut parameters = resolved.echo;
    merge_json(
        &mut parameters,
        json!({
            "rule": rule.to_string(),
            "delta": delta,
            "x": x,
            "t_max": t_max,
            "tol": tol,
        }),
    );
    write_manifest(dir, "integrate", parameters, json!({}), outputs, started)
}

pub fn cmd_equilibria(mut args: EquilibriaArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(args, section, [rule, delta, out]);
    let resolved = args.model.resolve(&section)?;
    let rule = parse_rule(args.rule)?;
    let delta = args.delta.unwrap_or(1.0);
    let out = args.out.unwrap_or_else(|| "equilibria.csv".to_string());

    let system = ReplicatorSystem::new(resolved.model, rule, delta)?;
    let names = system.model().strategy_names();
    let equilibria = find_equilibria(&system)?;

    let mut buffer = Vec::new();
    write_equilibria_csv(&equilibria, &names, &mut buffer)?;
    let path = write_artifact(dir, &out, &buffer)?;

    println!("found {} equilibria:", equilibria.len());
    for eq in &equilibria {
        println!(
            "  {:<12} {:<15} [{}]",
            eq.kind().to_string(),
            eq.stability().to_string(),
            eq.point()
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    let mut parameters = resolved.echo;
    merge_json(
        &mut parameters,
        json!({ "rule": rule.to_string(), "delta": delta }),
    );
    write_manifest(
        dir,
        "equilibria",
        parameters,
        json!({}),
        vec![basename(&path)],
        started,
    )
}

fn thresholds_for(
    kind: PunishmentKind,
    r: f64,
    c: f64,
    alpha: f64,
    k: u32,
) -> Result<GameThresholds> {
    match kind {
        PunishmentKind::Peer => peer_thresholds(r, c, alpha, k),
        PunishmentKind::Pool => pool_thresholds(r, c, alpha, k),
    }
}

pub fn cmd_thresholds(mut args: ThresholdsArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(args, section, [game, k, r, c, alpha, out]);
    let kind: PunishmentKind = required(args.game, "--game")?.parse()?;
    let k = required(args.k, "--k")?;
    let r = required(args.r, "--r")?;
    let c = required(args.c, "--c")?;
    let out = args.out.unwrap_or_else(|| "thresholds.json".to_string());

    // Every threshold is affine in alpha, so two evaluations give the
    // exact intercept and slope.
    let at0 = thresholds_for(kind, r, c, 0.0, k)?;
    let at1 = thresholds_for(kind, r, c, 1.0, k)?;
    let slope = GameThresholds {
        beta0_wm: at1.beta0_wm - at0.beta0_wm,
        beta0: at1.beta0 - at0.beta0,
        beta_eq: at1.beta_eq - at0.beta_eq,
        beta_star: at1.beta_star - at0.beta_star,
    };
    let rows = [
        ("beta0_wm", at0.beta0_wm, slope.beta0_wm),
        ("beta0", at0.beta0, slope.beta0),
        ("beta_eq", at0.beta_eq, slope.beta_eq),
        ("beta_star", at0.beta_star, slope.beta_star),
    ];
    for (name, intercept, slope) in rows {
        println!("{name:<9} = {intercept:.10} + {slope:.10} alpha");
    }
    let evaluated = match args.alpha {
        Some(alpha) => {
            let at = thresholds_for(kind, r, c, alpha, k)?;
            let labels = [
                ("beta0_wm", at.beta0_wm),
                ("beta0", at.beta0),
                ("beta_eq", at.beta_eq),
                ("beta_star", at.beta_star),
            ];
            for (name, value) in labels {
                println!("{name:<9}({alpha}) = {value:.10}");
            }
            Some(json!({ "alpha": alpha, "values": at }))
        }
        None => None,
    };

    let report = json!({
        "game": kind.to_string(),
        "k": k,
        "r": r,
        "c": c,
        "intercept": at0,
        "slope": slope,
        "at_alpha": evaluated,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let path = write_artifact(dir, &out, text.as_bytes())?;

    write_manifest(
        dir,
        "thresholds",
        json!({ "game": kind.to_string(), "k": k, "r": r, "c": c, "alpha": args.alpha }),
        json!({}),
        vec![basename(&path)],
        started,
    )
}

pub fn cmd_phase(mut args: PhaseArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(
        args,
        section,
        [
            game,
            k,
            r,
            c,
            alpha,
            beta,
            population,
            cross_validate,
            delta,
            t_max,
            tol,
            out,
            plot
        ]
    );
    let kind: PunishmentKind = required(args.game, "--game")?.parse()?;
    let k = required(args.k, "--k")?;
    let r = required(args.r, "--r")?;
    let c = required(args.c, "--c")?;
    let alphas = parse_range(&required(args.alpha, "--alpha")?)?;
    let betas = parse_range(&required(args.beta, "--beta")?)?;
    let population: Population = args.population.as_deref().unwrap_or("structured").parse()?;
    let options = PhaseOptions {
        cross_validate: args.cross_validate.unwrap_or(false),
        delta: args.delta.unwrap_or(1.0),
        t_max: args.t_max.unwrap_or(400.0),
        tol: args.tol.unwrap_or(1e-8),
    };
    let out = args.out.unwrap_or_else(|| "phase.csv".to_string());
    let plot_name = args.plot.unwrap_or_else(|| "phase.svg".to_string());

    let diagram = phase_diagram(kind, r, c, k, population, &alphas, &betas, &options)?;

    let mut buffer = Vec::new();
    write_phase_csv(&diagram, &mut buffer)?;
    let csv_path = write_artifact(dir, &out, &buffer)?;
    let svg = plot::phase_heatmap(&diagram)?;
    let svg_path = write_artifact(dir, &plot_name, svg.as_bytes())?;

    let mut counts = [0usize; 3];
    for row in &diagram.labels {
        for &phase in row {
            counts[match phase {
                Phase::D => 0,
                Phase::Bistable => 1,
                Phase::Resolved => 2,
            }] += 1;
        }
    }
    println!(
        "cells: {} x {} = {} ({} defection, {} bistable, {} resolved)",
        alphas.len(),
        betas.len(),
        alphas.len() * betas.len(),
        counts[0],
        counts[1],
        counts[2]
    );
    if options.cross_validate {
        println!(
            "cross-validation disagreements: {}",
            diagram.disagreements.len()
        );
    }

    write_manifest(
        dir,
        "phase",
        json!({
            "game": kind.to_string(),
            "k": k,
            "r": r,
            "c": c,
            "alpha": alphas,
            "beta": betas,
            "population": population.to_string(),
            "cross_validate": options.cross_validate,
            "delta": options.delta,
            "t_max": options.t_max,
            "tol": options.tol,
        }),
        json!({}),
        vec![basename(&csv_path), basename(&svg_path)],
        started,
    )
}

struct SimSetup {
    config: SimConfig,
    parameters: serde_json::Value,
}

fn build_sim(
    mut args: SimulateArgs,
    section: &Section<'_>,
    default_delta: f64,
) -> Result<SimSetup> {
    fill_from_section!(
        args,
        section,
        [
            rule,
            nodes,
            delta,
            x,
            sweeps,
            measure_every,
            replicas,
            seed,
            graph_seed,
            out,
            summary
        ]
    );
    // The node count answers to both spellings, like the flag does.
    if args.nodes.is_none() {
        args.nodes = section.get("N")?;
    }
    let resolved = args.model.resolve(section)?;
    let rule = parse_rule(args.rule)?;
    let nodes = required(args.nodes, "--N")?;
    let delta = args.delta.unwrap_or(default_delta);
    let n = resolved.model.n();
    let x = match args.x {
        Some(raw) => parse_simplex(&raw)?,
        None => vec![1.0 / n as f64; n],
    };
    let sweeps = args.sweeps.unwrap_or(200);
    let measure_every = args.measure_every.unwrap_or(1);
    let replicas = args.replicas.unwrap_or(20);
    let seed = args.seed.unwrap_or(1);
    let graph_seed = args.graph_seed.unwrap_or(1);

    let mut parameters = resolved.echo;
    merge_json(
        &mut parameters,
        json!({
            "rule": rule.to_string(),
            "N": nodes,
            "delta": delta,
            "x": x,
            "sweeps": sweeps,
            "measure_every": measure_every,
            "replicas": replicas,
        }),
    );
    Ok(SimSetup {
        config: SimConfig {
            nodes,
            graph_seed,
            model: resolved.model,
            rule,
            delta,
            initial: InitialCondition::Frequencies(x),
            sweeps,
            measure_every,
            replicas,
            seed,
        },
        parameters,
    })
}

fn sim_seeds(config: &SimConfig) -> serde_json::Value {
    json!({
        "master": config.seed,
        "graph": config.graph_seed,
        "streams": "replica index, graph seeds offset by replica index",
    })
}

pub fn cmd_simulate(args: SimulateArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    let out = args.out.clone();
    let summary_name = args.summary.clone();
    let setup = build_sim(args, &section, 0.0)?;
    let result = run_simulation(&setup.config)?;

    let out = out
        .or_else(|| section.raw("out").map(str::to_string))
        .unwrap_or_else(|| "simulation.csv".to_string());
    let summary_name = summary_name
        .or_else(|| section.raw("summary").map(str::to_string))
        .unwrap_or_else(|| "simulation_summary.json".to_string());

    let mut buffer = Vec::new();
    result.write_csv(&mut buffer)?;
    let csv_path = write_artifact(dir, &out, &buffer)?;

    let summary = result.summary();
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    let json_path = write_artifact(dir, &summary_name, text.as_bytes())?;

    let (mean, se) = result.final_mean_and_se();
    for ((name, m), s) in result.names.iter().zip(&mean).zip(&se) {
        println!("final x_{name} = {m:.6} +- {s:.6}");
    }

    write_manifest(
        dir,
        "simulate",
        setup.parameters,
        sim_seeds(&setup.config),
        vec![basename(&csv_path), basename(&json_path)],
        started,
    )
}

pub fn cmd_validate(mut args: ValidateArgs, section: Section<'_>, dir: &Path) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(args, section, [burn_in, report]);
    let out = args.simulate.out.clone();
    let setup = build_sim(args.simulate, &section, 0.0)?;
    let burn_in = args.burn_in.unwrap_or(20);
    let report_name = args
        .report
        .unwrap_or_else(|| "closure_report.json".to_string());
    let out = out
        .or_else(|| section.raw("out").map(str::to_string))
        .unwrap_or_else(|| "simulation.csv".to_string());

    let result = run_simulation(&setup.config)?;
    let report = validate_closure(&result, burn_in)?;

    let mut buffer = Vec::new();
    result.write_csv(&mut buffer)?;
    let csv_path = write_artifact(dir, &out, &buffer)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let report_path = write_artifact(dir, &report_name, text.as_bytes())?;

    let worst_z = report
        .z_scores
        .iter()
        .flatten()
        .fold(0.0f64, |acc, z| acc.max(z.abs()));
    println!(
        "max |measured - closure| = {:.6} over {} replicas x {} samples (worst |z| = {:.2})",
        report.max_abs_deviation, report.replicas, report.samples_per_replica, worst_z
    );

    let mut parameters = setup.parameters;
    merge_json(&mut parameters, json!({ "burn_in": burn_in }));
    write_manifest(
        dir,
        "validate",
        parameters,
        sim_seeds(&setup.config),
        vec![basename(&csv_path), basename(&report_path)],
        started,
    )
}

pub fn cmd_games_list() -> Result<()> {
    let params = GameParams::new(2.0, 1.0, 0.0, 0.0)?;
    let games = [
        (
            BuiltinGame::Pgg,
            "r, c",
            "public goods game: contributors pay c into a pot multiplied by r",
        ),
        (
            BuiltinGame::PeerPunishment,
            "r, c, alpha, beta",
            "punishers pay alpha per defecting co-player to fine each defector beta",
        ),
        (
            BuiltinGame::PoolPunishment,
            "r, c, alpha, beta",
            "punishers pay a flat alpha; defectors lose beta if any punisher plays",
        ),
    ];
    for (game, parameters, description) in games {
        let model = game.build(&params, 4);
        println!(
            "{:<5} strategies: {:<8} parameters: {:<18} {}",
            game_name(game),
            model.strategy_names().join(", "),
            parameters,
            description
        );
    }
    Ok(())
}

pub fn cmd_payoff_export(
    mut args: PayoffExportArgs,
    section: Section<'_>,
    dir: &Path,
) -> Result<()> {
    let started = Instant::now();
    fill_from_section!(args, section, [out]);
    let resolved = args.model.resolve(&section)?;
    let out = args.out.unwrap_or_else(|| "payoff_matrix.csv".to_string());

    let (space, matrix) = as_generalized_matrix(resolved.model.as_ref());
    let names = resolved.model.strategy_names();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["strategy".to_string()];
    for config in space.iter() {
        header.push(
            config
                .counts()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("+"),
        );
    }
    writer.write_record(&header)?;
    for (name, row) in names.iter().zip(&matrix) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|v| format!("{v:.10e}")));
        writer.write_record(&record)?;
    }
    let buffer = writer
        .into_inner()
        .map_err(|e| EvoError::InvalidArgument(format!("csv buffer: {e}")))?;
    let path = write_artifact(dir, &out, &buffer)?;
    println!(
        "{} strategies x {} configurations",
        names.len(),
        space.configurations().len()
    );

    write_manifest(
        dir,
        "payoff",
        resolved.echo,
        json!({}),
        vec![basename(&path)],
        started,
    )
}

/// Appends the fields of `extra` to the object `base`.
fn merge_json(base: &mut serde_json::Value, extra: serde_json::Value) {
    if let (Some(base_map), serde_json::Value::Object(extra_map)) = (base.as_object_mut(), extra) {
        base_map.extend(extra_map);
    }
}

use std::collections::HashMap;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use coalnet::audit::{all_passed, audit, AuditItem};
use coalnet::game::{structure_reports, Condition};
use coalnet::partition::Partitions;
use coalnet::scenario::{with_symmetric_encounter, Scenario};
use coalnet::slot_sim::{EncounterModel, SlotSimulator};
use coalnet::{
    analytic_pair_encounter, estimate_encounter_matrix, labelled_structure, stability_verdict,
    structure_id, structure_label, CoalitionStructure, Error, GameConfig, GeometryConfig,
    Membership, Placement,
};
use rayon::prelude::*;

use crate::output::{emit, num};
use crate::{Cli, Command, EXIT_INVARIANT};

pub const DEFAULT_SCENARIO: &str = include_str!("../../../configs/default.toml");
const DEFAULT_SLOTS: u64 = 1_000_000;

struct RunContext {
    scenario: Scenario,
    config_label: String,
}

fn load(cli: &Cli) -> Result<RunContext> {
    let (scenario, config_label) = match &cli.config {
        Some(path) => (
            Scenario::load(path).with_context(|| format!("loading {}", path.display()))?,
            path.display().to_string(),
        ),
        None => (DEFAULT_SCENARIO.parse()?, "builtin:default".to_string()),
    };
    Ok(RunContext {
        scenario,
        config_label,
    })
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let ctx = load(cli)?;
    match &cli.command {
        Command::Enumerate => enumerate(cli, &ctx),
        Command::Encounter => encounter(cli, &ctx),
        Command::Payoffs { use_matrix } => payoffs(cli, &ctx, *use_matrix),
        Command::Core => core(cli, &ctx),
        Command::Simulate { geometric } => simulate(cli, &ctx, *geometric),
        Command::Check => check(cli, &ctx),
    }
}

/// Resolves `--structure`; the grand coalition when absent.
pub fn resolve_structure(arg: Option<&str>, players: usize) -> Result<CoalitionStructure> {
    let Some(arg) = arg.map(str::trim) else {
        return Ok(CoalitionStructure::grand(players));
    };
    let cs = if arg.eq_ignore_ascii_case("grand") {
        CoalitionStructure::grand(players)
    } else if arg.eq_ignore_ascii_case("singletons") {
        CoalitionStructure::singletons(players)
    } else if let Ok(id) = arg.parse::<usize>() {
        id.checked_sub(1)
            .and_then(|i| Partitions::new(players).ok()?.nth(i))
            .ok_or_else(|| Error::InvalidStructure(format!("no structure with id {id}")))?
    } else if arg.starts_with(['C', 'c']) && arg[1..].chars().all(|c| c.is_ascii_digit()) {
        labelled_structure(arg)
            .ok_or_else(|| Error::InvalidStructure(format!("unknown label {arg}")))?
    } else {
        arg.parse()?
    };
    if cs.players() != players {
        return Err(Error::InvalidStructure(format!(
            "{cs} covers {} players, scenario has {players}",
            cs.players()
        ))
        .into());
    }
    Ok(cs)
}

fn geometry(cli: &Cli, ctx: &RunContext) -> Result<(GeometryConfig, Vec<f64>)> {
    let k = ctx.scenario.game.vehicles;
    let (mut geo, mut sweep) = match &ctx.scenario.geometry {
        Some(g) => (g.config.clone(), g.d_sweep.clone()),
        None => (
            GeometryConfig {
                side_km: 1.0,
                placement: Placement::Continuous,
                range_km: vec![0.0; k],
                n_slots: DEFAULT_SLOTS,
                seed: 0,
            },
            Vec::new(),
        ),
    };
    if let Some(p) = &cli.placement {
        geo.placement = Placement::parse(p)?;
    }
    if let Some(s) = cli.seed {
        geo.seed = s;
    }
    if let Some(n) = cli.slots {
        geo.n_slots = n;
    }
    if let Some(d) = &cli.d_sweep {
        sweep = d.clone();
    }
    geo.validate(k)?;
    Ok((geo, sweep))
}

fn enumerate(cli: &Cli, ctx: &RunContext) -> Result<ExitCode> {
    let cfg = &ctx.scenario.game;
    let rows: Vec<Vec<String>> = Partitions::new(cfg.player_count())?
        .enumerate()
        .map(|(i, cs)| {
            let norm = cs.normalize(cfg.vehicles);
            let label = if cfg.vehicles == 2 && cfg.rsus == 2 {
                structure_label(&cs).unwrap_or_default()
            } else {
                ""
            };
            vec![
                (i + 1).to_string(),
                label.to_string(),
                cs.to_string(),
                norm.to_string(),
                structure_id(&norm).to_string(),
            ]
        })
        .collect();
    emit(
        cli.out.as_deref(),
        &["id", "label", "structure", "normalized", "normalized_id"],
        &rows,
        "enumerate",
        &ctx.config_label,
        None,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn encounter(cli: &Cli, ctx: &RunContext) -> Result<ExitCode> {
    let cfg = &ctx.scenario.game;
    let (k, m) = (cfg.vehicles, cfg.rsus);
    let (geo, sweep) = geometry(cli, ctx)?;
    if sweep.is_empty() {
        bail!(Error::Geometry(
            "empty d sweep; pass --d-sweep or set geometry.d_sweep".into()
        ));
    }
    let blocks = sweep
        .par_iter()
        .map(|&d| -> Result<Vec<Vec<String>>> {
            let point = GeometryConfig {
                range_km: vec![d; k],
                ..geo.clone()
            };
            let est = estimate_encounter_matrix(&point, k, m)?;
            let analytic = analytic_pair_encounter(d, geo.side_km).ok();
            let mut rows = Vec::with_capacity(k * m);
            for j in 0..m {
                for i in 0..k {
                    rows.push(vec![
                        num(d),
                        format!("{}-{}", k + j + 1, i + 1),
                        num(est.probability[j][i]),
                        num(est.stderr[j][i]),
                        analytic.map(num).unwrap_or_default(),
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<_> = blocks.into_iter().flatten().collect();
    emit(
        cli.out.as_deref(),
        &["d", "pair", "estimate", "stderr", "analytic"],
        &rows,
        "encounter",
        &ctx.config_label,
        Some(geo.seed),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn payoff_rows(
    d: Option<f64>,
    cs: &CoalitionStructure,
    cfg: &GameConfig<f64>,
) -> Result<Vec<Vec<String>>> {
    let d = d.map(num).unwrap_or_default();
    let mut rows = Vec::new();
    for report in structure_reports(cs, cfg)? {
        let coalition = report.coalition.to_string();
        for v in &report.vehicles {
            rows.push(vec![
                d.clone(),
                coalition.clone(),
                v.id.to_string(),
                "vehicle".into(),
                num(v.throughput),
                num(v.payment),
                String::new(),
                String::new(),
                num(v.payoff),
            ]);
        }
        for r in &report.rsus {
            rows.push(vec![
                d.clone(),
                coalition.clone(),
                r.id.to_string(),
                "rsu".into(),
                String::new(),
                String::new(),
                num(r.revenue),
                num(r.cost),
                num(r.payoff),
            ]);
        }
    }
    // player order inside each sweep point
    rows.sort_by_key(|r| r[2].parse::<usize>().unwrap_or(0));
    Ok(rows)
}

fn payoffs(cli: &Cli, ctx: &RunContext, use_matrix: bool) -> Result<ExitCode> {
    let cfg = &ctx.scenario.game;
    let cs = resolve_structure(cli.structure.as_deref(), cfg.player_count())?;
    let (geo, sweep) = geometry(cli, ctx)?;
    let rows: Vec<Vec<String>> = if use_matrix || sweep.is_empty() {
        payoff_rows(None, &cs, cfg)?
    } else {
        sweep
            .par_iter()
            .map(|&d| {
                payoff_rows(
                    Some(d),
                    &cs,
                    &with_symmetric_encounter(cfg, d, geo.side_km)?,
                )
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    };
    emit(
        cli.out.as_deref(),
        &[
            "d",
            "coalition",
            "player",
            "role",
            "throughput",
            "payment",
            "revenue",
            "cost",
            "payoff",
        ],
        &rows,
        "payoffs",
        &ctx.config_label,
        None,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn describe(c: &Condition) -> String {
    match c {
        Condition::Holds => "holds".into(),
        Condition::Fails(w) => format!("fails for player {} in {}", w.player, w.coalition),
    }
}

fn core(cli: &Cli, ctx: &RunContext) -> Result<ExitCode> {
    let cfg = &ctx.scenario.game;
    let verdict = stability_verdict(cfg)?;
    let c = &verdict.conditions;
    let conditions = [
        ("positive_weights", &c.positive_weights),
        ("coalition_surplus", &c.coalition_surplus),
        ("grand_dominance", &c.grand_dominance),
    ];
    let summary = format!(
        "sufficient conditions {}; grand vector {}",
        if c.all_hold() { "hold" } else { "do not hold" },
        match &verdict.membership {
            Membership::Unblocked => "in core".to_string(),
            Membership::Blocked { coalition, .. } => format!("blocked by {coalition}"),
        }
    );
    println!("{summary}");
    for (name, cond) in conditions {
        println!("  {name}: {}", describe(cond));
    }
    for (i, u) in verdict.grand_payoffs.0.iter().enumerate() {
        println!("  u[{}] = {u}", i + 1);
    }

    if let Some(out) = cli.out.as_deref() {
        let mut rows: Vec<Vec<String>> = conditions
            .iter()
            .map(|(name, cond)| {
                let (coalition, player) = match cond {
                    Condition::Holds => (String::new(), String::new()),
                    Condition::Fails(w) => (w.coalition.to_string(), w.player.to_string()),
                };
                vec![
                    name.to_string(),
                    cond.holds().to_string(),
                    coalition,
                    player,
                    String::new(),
                ]
            })
            .collect();
        let blocking = match &verdict.membership {
            Membership::Unblocked => String::new(),
            Membership::Blocked { coalition, .. } => coalition.to_string(),
        };
        rows.push(vec![
            "core_membership".into(),
            verdict.membership.is_core_member().to_string(),
            blocking,
            String::new(),
            String::new(),
        ]);
        for (i, u) in verdict.grand_payoffs.0.iter().enumerate() {
            rows.push(vec![
                "grand_payoff".into(),
                String::new(),
                String::new(),
                (i + 1).to_string(),
                num(*u),
            ]);
        }
        emit(
            Some(out),
            &["item", "holds", "coalition", "player", "value"],
            &rows,
            "core",
            &ctx.config_label,
            None,
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(cli: &Cli, ctx: &RunContext, geometric: bool) -> Result<ExitCode> {
    let cfg = &ctx.scenario.game;
    let cs = resolve_structure(cli.structure.as_deref(), cfg.player_count())?;
    let (geo, _) = geometry(cli, ctx)?;
    let model = if geometric {
        if ctx.scenario.geometry.is_none() {
            bail!(Error::Geometry(
                "--geometric needs a [geometry] section".into()
            ));
        }
        EncounterModel::Geometry {
            side_km: geo.side_km,
            placement: geo.placement,
            range_km: geo.range_km.clone(),
        }
    } else {
        EncounterModel::Matrix
    };
    let report = SlotSimulator::new(&cs, cfg)?
        .encounters(model)?
        .run(geo.n_slots, geo.seed)?;

    let mut analytic: HashMap<(usize, &str), f64> = HashMap::new();
    for r in structure_reports(&cs, cfg)? {
        for v in &r.vehicles {
            analytic.insert((v.id.index(), "throughput"), v.throughput);
            analytic.insert((v.id.index(), "payment"), v.payment);
            analytic.insert((v.id.index(), "payoff"), v.payoff);
        }
        for x in &r.rsus {
            analytic.insert((x.id.index(), "revenue"), x.revenue);
            analytic.insert((x.id.index(), "cost"), x.cost);
            analytic.insert((x.id.index(), "payoff"), x.payoff);
        }
    }

    let rows: Vec<Vec<String>> = report
        .rows()
        .into_iter()
        .map(|r| {
            let a = analytic[&(r.player.index(), r.quantity)];
            let diff = r.estimate.mean - a;
            let z = if r.estimate.stderr > 0.0 {
                num(diff / r.estimate.stderr)
            } else if diff == 0.0 {
                num(0.0)
            } else {
                String::new()
            };
            vec![
                r.player.to_string(),
                r.quantity.to_string(),
                num(r.estimate.mean),
                num(r.estimate.stderr),
                report.n_slots.to_string(),
                report.seed.to_string(),
                num(a),
                z,
            ]
        })
        .collect();
    emit(
        cli.out.as_deref(),
        &[
            "player", "quantity", "estimate", "stderr", "n_slots", "seed", "analytic", "z",
        ],
        &rows,
        "simulate",
        &ctx.config_label,
        Some(geo.seed),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn check(cli: &Cli, ctx: &RunContext) -> Result<ExitCode> {
    let items: Vec<AuditItem> = audit(&ctx.scenario.game)?;
    for item in &items {
        println!("{item}");
    }
    if let Some(out) = cli.out.as_deref() {
        let rows: Vec<Vec<String>> = items
            .iter()
            .map(|i| {
                vec![
                    i.name.to_string(),
                    i.status.to_string(),
                    i.cases.to_string(),
                    i.max_residual.map(num).unwrap_or_default(),
                    i.detail.clone(),
                ]
            })
            .collect();
        emit(
            Some(out),
            &["invariant", "status", "cases", "max_residual", "detail"],
            &rows,
            "check",
            &ctx.config_label,
            None,
        )?;
    }
    Ok(if all_passed(&items) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVARIANT)
    })
}

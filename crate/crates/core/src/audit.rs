//! Invariant audit of one configuration.
//!
//! Runs the structural identities of the analytic engine over every
//! coalition (every partition for small games) and reports, per invariant,
//! whether it held and the largest residual seen.

use std::fmt;

use crate::analytic::Engine;
use crate::analytic::ORACLE_LIMIT;
use crate::error::{Error, Result};
use crate::game::{
    core_sufficient_conditions, pricing_cancellation_check, structure_payoffs,
    vehicle_coalition_profitability, Condition, Profitability, MAX_CORE_PLAYERS,
};
use crate::model::{normalize_structure, Coalition, CoalitionStructure, GameConfig};
use crate::partition::Partitions;
use crate::scalar::complement_product;
use crate::IDENTITY_TOL;

/// Largest game whose coalitions are all audited; bigger games only audit
/// the grand coalition and the singletons.
pub const SUBSET_LIMIT: usize = 14;
/// Largest game whose partitions are all audited.
pub const PARTITION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
    /// Reported for information; not an invariant of the model.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditItem {
    pub name: &'static str,
    pub status: Status,
    /// Number of cases evaluated.
    pub cases: usize,
    pub max_residual: Option<f64>,
    pub detail: String,
}

impl fmt::Display for AuditItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<24} cases={:<6}",
            self.status, self.name, self.cases
        )?;
        if let Some(r) = self.max_residual {
            write!(f, " max_residual={r:.3e}")?;
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

/// Running maximum of residuals against a tolerance.
struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    first_bad: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            worst: 0.0,
            first_bad: None,
        }
    }

    fn push(&mut self, residual: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        if !(residual <= self.worst) {
            self.worst = residual;
        }
        if !(residual <= IDENTITY_TOL) && self.first_bad.is_none() {
            self.first_bad = Some(format!("first violation at {}", context()));
        }
    }

    fn finish(self) -> AuditItem {
        let status = if self.cases == 0 {
            Status::Skip
        } else if self.first_bad.is_some() {
            Status::Fail
        } else {
            Status::Pass
        };
        AuditItem {
            name: self.name,
            status,
            cases: self.cases,
            max_residual: (self.cases > 0).then_some(self.worst),
            detail: self.first_bad.unwrap_or_default(),
        }
    }
}

fn audited_coalitions(n: usize) -> Vec<Coalition> {
    if n <= SUBSET_LIMIT {
        (1..1u64 << n).map(Coalition::from_mask).collect()
    } else {
        let mut out: Vec<Coalition> = (1..=n)
            .map(|i| Coalition::of(&[i]).expect("non-empty"))
            .collect();
        out.push(Coalition::grand(n));
        out
    }
}

fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().sum()
}

/// Runs every invariant on `cfg`. Items are returned in a fixed order.
pub fn audit(cfg: &GameConfig<f64>) -> Result<Vec<AuditItem>> {
    let engine = Engine::new(cfg)?;
    let k = cfg.vehicles;
    let n = cfg.player_count();
    let coalitions = audited_coalitions(n);

    let mut share = Tally::new("share-sum");
    let mut usage = Tally::new("relay-usage-sum");
    let mut chi = Tally::new("expected-price");
    let mut oracle = Tally::new("relay-oracle");
    let mut balance = Tally::new("payment-balance");
    let mut total = Tally::new("sum-payoff");
    let mut pricing = Tally::new("price-cancellation");
    let mut rsu_only = Tally::new("rsu-only-zero");
    let mut profit = Tally::new("profitability-check");
    let mut nonneg = Tally::new("nonnegative-quantities");

    for s in &coalitions {
        let label = || s.to_string();
        let report = engine.player_payoffs(s)?;
        let vehicles = s.vehicles(k);

        if vehicles.is_empty() {
            let worst = report
                .rsus
                .iter()
                .map(|r| r.payoff.abs().max(r.revenue.abs()).max(r.cost.abs()))
                .fold(0.0, f64::max);
            rsu_only.push(worst, label);
            continue;
        }

        let active = 1.0 - complement_product(vehicles.iter().map(|i| cfg.activity[i.offset()]));
        share.push(
            (sum(engine.shares(s).into_iter().map(|(_, x)| x)) - active).abs(),
            label,
        );

        for &i in vehicles {
            let ctx = || format!("{s}, vehicle {i}");
            let row = engine.relay_usage_row(s, i)?;
            let probs: Vec<f64> = s
                .rsus(k)
                .iter()
                .map(|j| cfg.encounter[j.offset() - k][i.offset()])
                .collect();
            let met = 1.0 - complement_product(probs.iter().copied());
            usage.push((sum(row.iter().copied()) - met).abs(), ctx);

            let xi = engine.price_weights(s, i);
            let closed = engine.expected_price(s, i)?;
            let by_usage = sum(row.iter().zip(&xi).map(|(e, x)| e * x));
            chi.push((closed - by_usage).abs(), ctx);

            if probs.len() <= ORACLE_LIMIT {
                let gain = engine.gain_weights(s, i);
                let o_gain = engine.oracle_relay_mean(s, i, &gain)?;
                let o_price = engine.oracle_relay_mean(s, i, &xi)?;
                let worst = [
                    (o_gain.mean - engine.rate_increase(s, i)?).abs(),
                    (o_price.mean - closed).abs(),
                ]
                .into_iter()
                .chain(o_gain.usage.iter().zip(&row).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
                oracle.push(worst, ctx);
            }
        }

        let paid = sum(report.vehicles.iter().map(|v| v.payment));
        let earned = sum(report.rsus.iter().map(|r| r.revenue));
        balance.push((paid - earned).abs(), label);

        let members = sum(report.vehicles.iter().map(|v| v.payoff))
            + sum(report.rsus.iter().map(|r| r.payoff));
        total.push((report.sum_payoff - members).abs(), label);

        let lowest = report
            .vehicles
            .iter()
            .flat_map(|v| {
                [
                    v.share,
                    v.throughput,
                    v.payment,
                    v.rate_increase,
                    v.expected_price,
                ]
            })
            .chain(report.rsus.iter().flat_map(|r| [r.revenue, r.cost]))
            .fold(0.0, f64::min);
        nonneg.push(-lowest, label);

        match pricing_cancellation_check(s, cfg) {
            Ok(check) => pricing.push(check.residual, label),
            Err(Error::WeightsNotUnit(_)) => {}
            Err(e) => return Err(e),
        }

        if s.rsus(k).is_empty() {
            let verdicts = vehicle_coalition_profitability(s, cfg)?;
            for (i, verdict) in verdicts {
                let alone = engine
                    .player_payoffs(&Coalition::new([i])?)?
                    .payoff_of(i)
                    .unwrap_or(0.0);
                let joined = report.payoff_of(i).unwrap_or(0.0);
                let diff = joined - alone;
                let scale = IDENTITY_TOL * (1.0 + alone.abs());
                let residual = match verdict {
                    Profitability::Strict if diff < -scale => -diff,
                    Profitability::Unprofitable if diff > scale => diff,
                    Profitability::Indifferent => diff.abs(),
                    _ => 0.0,
                };
                profit.push(residual, || format!("{s}, vehicle {i}: {verdict:?}"));
            }
        }
    }

    let mut items = vec![
        share.finish(),
        usage.finish(),
        chi.finish(),
        oracle.finish(),
        balance.finish(),
        total.finish(),
        nonneg.finish(),
        pricing.finish(),
        rsu_only.finish(),
        profit.finish(),
    ];

    let mut norm = Tally::new("normalization");
    if n <= PARTITION_LIMIT && n > 0 {
        for cs in Partitions::new(n)? {
            let a = structure_payoffs(&cs, cfg)?;
            let b = structure_payoffs(&normalize_structure(&cs, cfg), cfg)?;
            let worst =
                a.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
            norm.push(worst, || cs.to_string());
        }
    }
    items.push(norm.finish());

    items.push(stability_items(cfg)?);
    Ok(items)
}

fn stability_items(cfg: &GameConfig<f64>) -> Result<AuditItem> {
    let n = cfg.player_count();
    if n > MAX_CORE_PLAYERS {
        return Ok(AuditItem {
            name: "core-soundness",
            status: Status::Skip,
            cases: 0,
            max_residual: None,
            detail: format!("more than {MAX_CORE_PLAYERS} players"),
        });
    }
    let conditions = core_sufficient_conditions(cfg)?;
    let describe = |c: &Condition| match c {
        Condition::Holds => "holds".to_string(),
        Condition::Fails(w) => format!("fails at player {} in {}", w.player, w.coalition),
    };
    let detail = format!(
        "conditions: weights {}, surplus {}, grand dominance {}",
        describe(&conditions.positive_weights),
        describe(&conditions.coalition_surplus),
        describe(&conditions.grand_dominance)
    );
    if !conditions.all_hold() {
        return Ok(AuditItem {
            name: "core-soundness",
            status: Status::Info,
            cases: 0,
            max_residual: None,
            detail,
        });
    }
    let grand = structure_payoffs(&CoalitionStructure::grand(n), cfg)?;
    let member = crate::game::core_membership(&grand.0, cfg)?;
    Ok(AuditItem {
        name: "core-soundness",
        status: if member.is_core_member() {
            Status::Pass
        } else {
            Status::Fail
        },
        cases: (1usize << n) - 2,
        max_residual: None,
        detail,
    })
}

/// True when no item failed.
pub fn all_passed(items: &[AuditItem]) -> bool {
    items.iter().all(|i| i.status != Status::Fail)
}

//! Structure-level payoffs and stability of the coalitional game.
//!
//! The game is NTU: a coalition `S` can guarantee its members exactly the
//! payoffs computed by the analytic engine for `S` under the default
//! scheduler and the configured prices. A payoff vector is blocked by `S`
//! when every member of `S` does strictly better inside `S`.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::analytic::{Engine, PayoffReport};
use crate::error::{Error, Result};
use crate::model::{Coalition, CoalitionStructure, GameConfig, PlayerId};
use crate::scalar::Scalar;

/// Largest game for which every sub-coalition is enumerated.
pub const MAX_CORE_PLAYERS: usize = 20;

/// One payoff per player, indexed by `PlayerId::offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVector<T>(pub Vec<T>);

impl<T: Copy> PayoffVector<T> {
    pub fn get(&self, id: PlayerId) -> T {
        self.0[id.offset()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_structure<T>(cs: &CoalitionStructure, cfg: &GameConfig<T>) -> Result<()> {
    if cs.players() == cfg.player_count() {
        Ok(())
    } else {
        Err(Error::InvalidStructure(format!(
            "structure covers {} players, game has {}",
            cs.players(),
            cfg.player_count()
        )))
    }
}

/// Reports of every coalition in the structure, in structure order.
pub fn structure_reports<T: Scalar>(
    cs: &CoalitionStructure,
    cfg: &GameConfig<T>,
) -> Result<Vec<PayoffReport<T>>> {
    check_structure(cs, cfg)?;
    let engine = Engine::new(cfg)?;
    cs.coalitions()
        .iter()
        .map(|c| engine.player_payoffs(c))
        .collect()
}

/// Each player's payoff inside its own coalition.
///
/// A vehicle's throughput only depends on whether outsiders are silent, not
/// on how they are grouped, so the vector is well defined.
pub fn structure_payoffs<T: Scalar>(
    cs: &CoalitionStructure,
    cfg: &GameConfig<T>,
) -> Result<PayoffVector<T>> {
    let mut out = vec![T::zero(); cfg.player_count()];
    for report in structure_reports(cs, cfg)? {
        for v in &report.vehicles {
            out[v.id.offset()] = v.payoff;
        }
        for r in &report.rsus {
            out[r.id.offset()] = r.payoff;
        }
    }
    Ok(PayoffVector(out))
}

/// Outcome of joining a vehicle-only coalition versus transmitting alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profitability {
    Strict,
    Indifferent,
    Unprofitable,
}

impl Profitability {
    pub fn is_profitable(self) -> bool {
        self != Profitability::Unprofitable
    }
}

/// Profitability of a vehicle-only coalition for each member.
///
/// Member `i` weakly gains iff
/// `Π_{j∈S∖{i}} (1 - p_j) ≤ Π_{j∈S, j<i} (1 - p_j)`; the right side is the
/// probability that no higher-priority member is active. The comparison is
/// done cross-multiplied so that certain-activity members do not divide by
/// zero.
pub fn vehicle_coalition_profitability<T: Scalar>(
    s: &Coalition,
    cfg: &GameConfig<T>,
) -> Result<Vec<(PlayerId, Profitability)>> {
    cfg.validate()?;
    if !s.rsus(cfg.vehicles).is_empty() {
        return Err(Error::InvalidStructure(format!("{s} contains an RSU")));
    }
    if s.members().iter().any(|p| p.index() > cfg.player_count()) {
        return Err(Error::InvalidStructure(format!("{s} has unknown players")));
    }
    let members = s.members();
    Ok(members
        .iter()
        .enumerate()
        .map(|(t, &i)| {
            let silent = |j: &PlayerId| T::one() - cfg.activity[j.offset()];
            let higher_priority: T = members[..t].iter().map(silent).fold(T::one(), |a, b| a * b);
            let others = members
                .iter()
                .filter(|&&j| j != i)
                .map(silent)
                .fold(T::one(), |a, b| a * b);
            let verdict = match others.partial_cmp(&higher_priority) {
                Some(Ordering::Less) => Profitability::Strict,
                Some(Ordering::Equal) => Profitability::Indifferent,
                _ => Profitability::Unprofitable,
            };
            (i, verdict)
        })
        .collect())
}

/// Residuals of the price-cancellation identity for one coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingCheck<T> {
    pub sum_payoff: T,
    pub sum_payoff_without_prices: T,
    /// `Σ α_i T_i − Σ μ_j C_j`
    pub reduced_form: T,
    /// `|Σ P_i − Σ R_j|`
    pub payment_revenue_gap: T,
    /// Largest absolute deviation among the three comparisons.
    pub residual: T,
}

/// With unit payment and revenue weights the coalition sum payoff does not
/// depend on prices, because every payment is some member RSU's revenue.
pub fn pricing_cancellation_check<T: Scalar>(
    s: &Coalition,
    cfg: &GameConfig<T>,
) -> Result<PricingCheck<T>> {
    let k = cfg.vehicles;
    let engine = Engine::new(cfg)?;
    let off: Vec<String> = s
        .vehicles(k)
        .iter()
        .filter(|i| cfg.beta[i.offset()] != T::one())
        .map(|i| format!("beta of {i}"))
        .chain(
            s.rsus(k)
                .iter()
                .filter(|&&j| cfg.gamma[cfg.rsu_offset(j)] != T::one())
                .map(|j| format!("gamma of {j}")),
        )
        .collect();
    if !off.is_empty() {
        return Err(Error::WeightsNotUnit(off.join(", ")));
    }

    let priced = engine.player_payoffs(s)?;
    let mut free_cfg = cfg.clone();
    free_cfg
        .price
        .iter_mut()
        .flatten()
        .for_each(|x| *x = T::zero());
    let free = Engine::new(&free_cfg)?.player_payoffs(s)?;

    let sum = |xs: &mut dyn Iterator<Item = T>| xs.fold(T::zero(), |a, b| a + b);
    let reduced_form = sum(&mut priced
        .vehicles
        .iter()
        .map(|v| cfg.alpha[v.id.offset()] * v.throughput))
        - sum(&mut priced
            .rsus
            .iter()
            .map(|r| cfg.mu[cfg.rsu_offset(r.id)] * r.cost));
    let gap = (sum(&mut priced.vehicles.iter().map(|v| v.payment))
        - sum(&mut priced.rsus.iter().map(|r| r.revenue)))
    .abs();
    let residual = [
        (priced.sum_payoff - free.sum_payoff).abs(),
        (priced.sum_payoff - reduced_form).abs(),
        gap,
    ]
    .into_iter()
    .fold(T::zero(), |a, b| if b > a { b } else { a });

    Ok(PricingCheck {
        sum_payoff: priced.sum_payoff,
        sum_payoff_without_prices: free.sum_payoff,
        reduced_form,
        payment_revenue_gap: gap,
        residual,
    })
}

/// A player and coalition at which a condition fails. Ordered by coalition
/// (lexicographic in member ids), then player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub coalition: Coalition,
    pub player: PlayerId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Holds,
    Fails(Witness),
}

impl Condition {
    pub fn holds(&self) -> bool {
        matches!(self, Condition::Holds)
    }

    fn from_witness(w: Option<Witness>) -> Self {
        w.map_or(Condition::Holds, Condition::Fails)
    }
}

/// The three sufficient conditions for a non-empty core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientConditions {
    /// Every α, β, γ, μ is strictly positive.
    pub positive_weights: Condition,
    /// In every proper coalition with a vehicle, each vehicle member has
    /// `αT > βP` and each RSU member has `γR > μC`.
    pub coalition_surplus: Condition,
    /// Every member of every proper coalition does strictly better in the
    /// grand coalition.
    pub grand_dominance: Condition,
}

impl SufficientConditions {
    pub fn all_hold(&self) -> bool {
        self.positive_weights.holds()
            && self.coalition_surplus.holds()
            && self.grand_dominance.holds()
    }
}

fn proper_coalitions(n: usize) -> Result<impl ParallelIterator<Item = Coalition>> {
    if n > MAX_CORE_PLAYERS {
        return Err(Error::EnumerationBound {
            size: n,
            limit: MAX_CORE_PLAYERS,
        });
    }
    let full = (1u64 << n) - 1;
    Ok((1..full).into_par_iter().map(Coalition::from_mask))
}

fn member_payoffs<T: Scalar>(report: &PayoffReport<T>) -> impl Iterator<Item = (PlayerId, T)> + '_ {
    report
        .vehicles
        .iter()
        .map(|v| (v.id, v.payoff))
        .chain(report.rsus.iter().map(|r| (r.id, r.payoff)))
}

pub fn core_sufficient_conditions<T: Scalar>(cfg: &GameConfig<T>) -> Result<SufficientConditions> {
    let engine = Engine::new(cfg)?;
    let n = cfg.player_count();
    let grand = Coalition::grand(n);

    let positive_weights = Condition::from_witness(
        cfg.players()
            .find(|&p| {
                let (a, b) = if cfg.is_vehicle(p) {
                    (cfg.alpha[p.offset()], cfg.beta[p.offset()])
                } else {
                    let o = cfg.rsu_offset(p);
                    (cfg.gamma[o], cfg.mu[o])
                };
                !(a > T::zero() && b > T::zero())
            })
            .map(|player| Witness {
                coalition: grand.clone(),
                player,
            }),
    );

    let grand_payoffs = {
        let report = engine.player_payoffs(&grand)?;
        let mut x = vec![T::zero(); n];
        for (p, u) in member_payoffs(&report) {
            x[p.offset()] = u;
        }
        x
    };

    let (surplus, dominance) = proper_coalitions(n)?
        .map(|s| -> Result<(Option<Witness>, Option<Witness>)> {
            let report = engine.player_payoffs(&s)?;
            let has_vehicle = !report.vehicles.is_empty();
            let surplus = has_vehicle
                .then(|| {
                    let bad_vehicle = report.vehicles.iter().find(|v| {
                        let o = v.id.offset();
                        !(cfg.alpha[o] * v.throughput > cfg.beta[o] * v.payment)
                    });
                    let bad_rsu = report.rsus.iter().find(|r| {
                        let o = cfg.rsu_offset(r.id);
                        !(cfg.gamma[o] * r.revenue > cfg.mu[o] * r.cost)
                    });
                    bad_vehicle.map(|v| v.id).or(bad_rsu.map(|r| r.id))
                })
                .flatten();
            let dominance = member_payoffs(&report)
                .filter(|&(p, u)| !(grand_payoffs[p.offset()] > u))
                .map(|(p, _)| p)
                .min();
            let witness = |player| Witness {
                coalition: s.clone(),
                player,
            };
            Ok((surplus.map(witness), dominance.map(witness)))
        })
        .try_reduce(
            || (None, None),
            |a, b| Ok((min_opt(a.0, b.0), min_opt(a.1, b.1))),
        )?;

    Ok(SufficientConditions {
        positive_weights,
        coalition_surplus: Condition::from_witness(surplus),
        grand_dominance: Condition::from_witness(dominance),
    })
}

fn min_opt<W: Ord>(a: Option<W>, b: Option<W>) -> Option<W> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership<T> {
    Unblocked,
    /// The lexicographically smallest blocking coalition and its members'
    /// payoffs inside it.
    Blocked {
        coalition: Coalition,
        payoffs: Vec<(PlayerId, T)>,
    },
}

impl<T> Membership<T> {
    pub fn is_core_member(&self) -> bool {
        matches!(self, Membership::Unblocked)
    }
}

/// Checks that no proper coalition strictly improves on `x` for all of its
/// members.
pub fn core_membership<T: Scalar>(x: &[T], cfg: &GameConfig<T>) -> Result<Membership<T>> {
    let engine = Engine::new(cfg)?;
    let n = cfg.player_count();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let blocks = |s: &Coalition| -> Result<Option<Vec<(PlayerId, T)>>> {
        let report = engine.player_payoffs(s)?;
        let inside: Vec<_> = member_payoffs(&report).collect();
        Ok(inside
            .iter()
            .all(|&(p, u)| u > x[p.offset()])
            .then_some(inside))
    };

    let smallest = proper_coalitions(n)?
        .map(|s| Ok::<_, Error>(blocks(&s)?.map(|_| s)))
        .try_reduce(|| None, |a, b| Ok(min_opt(a, b)))?;

    match smallest {
        None => Ok(Membership::Unblocked),
        Some(coalition) => {
            let mut payoffs = blocks(&coalition)?.ok_or_else(|| {
                Error::InvariantBreach(format!(
                    "reported blocking coalition {coalition} does not block"
                ))
            })?;
            payoffs.sort_by_key(|&(p, _)| p);
            Ok(Membership::Blocked { coalition, payoffs })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict<T> {
    pub conditions: SufficientConditions,
    pub grand_payoffs: PayoffVector<T>,
    pub membership: Membership<T>,
}

/// Sufficient conditions plus core membership of the grand-coalition
/// payoff vector.
///
/// Fails with [`Error::InvariantBreach`] if the conditions hold while the
/// grand vector is blocked.
pub fn stability_verdict<T: Scalar>(cfg: &GameConfig<T>) -> Result<StabilityVerdict<T>> {
    let conditions = core_sufficient_conditions(cfg)?;
    let grand_payoffs = structure_payoffs(&CoalitionStructure::grand(cfg.player_count()), cfg)?;
    let membership = core_membership(&grand_payoffs.0, cfg)?;
    if conditions.all_hold() && !membership.is_core_member() {
        return Err(Error::InvariantBreach(
            "sufficient conditions hold but the grand payoff vector is blocked".into(),
        ));
    }
    Ok(StabilityVerdict {
        conditions,
        grand_payoffs,
        membership,
    })
}

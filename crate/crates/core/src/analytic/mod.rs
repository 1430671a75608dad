//! Exact per-player quantities for a single coalition.
//!
//! For a coalition `S` with vehicles `S_u` and RSUs `S_r`:
//!
//! * `share_i` is the fraction of slots in which vehicle `i` is the one
//!   scheduled by `S`;
//! * `ζ_i` and `χ_i` are the expected rate gain and price of the relay picked
//!   uniformly among the encountered RSUs of `S`;
//! * `T_i = share_i (1 + ζ_i) Π_{j ∉ S_u} (1 - p_j)` is the throughput, which
//!   needs every vehicle outside the coalition to stay silent;
//! * `P_i = share_i χ_i`, `R_j = Σ_i share_i η_ij ξ_ji` and
//!   `C_j = Σ_i share_i (c^f_ji η_ij + P_ji c^r_ji)` are accounted on every
//!   scheduled transmission whether or not it collides.

mod oracle;
mod relay;
mod scheduler;

pub use oracle::{enumerate_relay_choice, OracleRelay, ORACLE_LIMIT};
pub use relay::{count_distribution, mean_over_encountered, selection_probability};
pub use scheduler::{FixedPriority, MaxIndexFirst, MinIndexFirst, Scheduler};

use crate::error::{Error, Result};
use crate::model::{Coalition, GameConfig, PlayerId};
use crate::scalar::{complement_product, Scalar};

/// Quantities of one vehicle inside its coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct VehiclePayoff<T> {
    pub id: PlayerId,
    pub share: T,
    /// `ζ_i`
    pub rate_increase: T,
    /// `χ_i`
    pub expected_price: T,
    pub throughput: T,
    pub payment: T,
    pub payoff: T,
}

/// Quantities of one RSU inside its coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct RsuPayoff<T> {
    pub id: PlayerId,
    /// `η_ij` for every vehicle `i` of the coalition, in id order.
    pub relay_usage: Vec<(PlayerId, T)>,
    pub revenue: T,
    pub cost: T,
    pub payoff: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffReport<T> {
    pub coalition: Coalition,
    pub vehicles: Vec<VehiclePayoff<T>>,
    pub rsus: Vec<RsuPayoff<T>>,
    /// Sum of all member payoffs.
    pub sum_payoff: T,
}

impl<T: Scalar> PayoffReport<T> {
    pub fn payoff_of(&self, id: PlayerId) -> Option<T> {
        self.vehicles
            .iter()
            .find(|v| v.id == id)
            .map(|v| v.payoff)
            .or_else(|| self.rsus.iter().find(|r| r.id == id).map(|r| r.payoff))
    }

    pub fn vehicle(&self, id: PlayerId) -> Option<&VehiclePayoff<T>> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn rsu(&self, id: PlayerId) -> Option<&RsuPayoff<T>> {
        self.rsus.iter().find(|r| r.id == id)
    }
}

/// Evaluates coalitions of one validated game under a fixed scheduler.
#[derive(Debug, Clone)]
pub struct Engine<'a, T, S = MinIndexFirst> {
    cfg: &'a GameConfig<T>,
    scheduler: S,
}

impl<'a, T: Scalar> Engine<'a, T> {
    pub fn new(cfg: &'a GameConfig<T>) -> Result<Self> {
        Self::with_scheduler(cfg, MinIndexFirst)
    }
}

impl<'a, T: Scalar, S: Scheduler> Engine<'a, T, S> {
    pub fn with_scheduler(cfg: &'a GameConfig<T>, scheduler: S) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, scheduler })
    }

    pub fn config(&self) -> &'a GameConfig<T> {
        self.cfg
    }

    pub fn scheduler(&self) -> &S {
        &self.scheduler
    }

    fn check_players(&self, s: &Coalition) -> Result<()> {
        let n = self.cfg.player_count();
        match s.members().last() {
            Some(&p) if p.index() > n => Err(Error::UnknownPlayer {
                player: p,
                players: n,
            }),
            _ => Ok(()),
        }
    }

    fn require_vehicle(&self, s: &Coalition, i: PlayerId) -> Result<()> {
        self.check_players(s)?;
        if self.cfg.is_vehicle(i) && s.contains(i) {
            Ok(())
        } else {
            Err(Error::NotAMember {
                player: i,
                role: "vehicle",
                coalition: s.to_string(),
            })
        }
    }

    fn require_rsu(&self, s: &Coalition, j: PlayerId) -> Result<()> {
        self.check_players(s)?;
        if !self.cfg.is_vehicle(j) && s.contains(j) {
            Ok(())
        } else {
            Err(Error::NotAMember {
                player: j,
                role: "RSU",
                coalition: s.to_string(),
            })
        }
    }

    fn encounter_probs(&self, s: &Coalition, i: PlayerId) -> Vec<T> {
        s.rsus(self.cfg.vehicles)
            .iter()
            .map(|&j| self.cfg.enc(j, i))
            .collect()
    }

    /// Transmission share of every vehicle in `S_u`, in id order.
    ///
    /// The `k`-th vehicle in priority order transmits iff it is active and
    /// all higher-priority members are not.
    pub fn shares(&self, s: &Coalition) -> Vec<(PlayerId, T)> {
        let order = self.scheduler.priority_order(s.vehicles(self.cfg.vehicles));
        let mut silent_before = T::one();
        let mut out: Vec<(PlayerId, T)> = order
            .into_iter()
            .map(|i| {
                let p = self.cfg.p(i);
                let share = p * silent_before;
                silent_before = silent_before * (T::one() - p);
                (i, share)
            })
            .collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }

    pub fn transmission_share(&self, s: &Coalition, i: PlayerId) -> Result<T> {
        self.require_vehicle(s, i)?;
        Ok(self
            .shares(s)
            .into_iter()
            .find(|&(v, _)| v == i)
            .map(|(_, x)| x)
            .expect("member vehicle has a share"))
    }

    /// `η_ij(S)`: probability that vehicle `i` uses RSU `j` as its relay.
    pub fn relay_usage_prob(&self, s: &Coalition, i: PlayerId, j: PlayerId) -> Result<T> {
        self.require_vehicle(s, i)?;
        self.require_rsu(s, j)?;
        let target = s
            .rsus(self.cfg.vehicles)
            .iter()
            .position(|&r| r == j)
            .expect("RSU member");
        Ok(selection_probability(&self.encounter_probs(s, i), target))
    }

    /// `η_ij(S)` for every RSU `j` of the coalition, in id order.
    pub fn relay_usage_row(&self, s: &Coalition, i: PlayerId) -> Result<Vec<T>> {
        self.require_vehicle(s, i)?;
        let probs = self.encounter_probs(s, i);
        Ok((0..probs.len())
            .map(|t| selection_probability(&probs, t))
            .collect())
    }

    /// Expected weight of the relay used by vehicle `i`; `weights` lists one
    /// value per RSU of `S` in id order. Zero when `S` has no RSU.
    pub fn relay_weighted_mean(&self, s: &Coalition, i: PlayerId, weights: &[T]) -> Result<T> {
        self.require_vehicle(s, i)?;
        let probs = self.encounter_probs(s, i);
        if weights.len() != probs.len() {
            return Err(Error::WeightShape {
                expected: probs.len(),
                found: weights.len(),
            });
        }
        Ok(mean_over_encountered(&probs, weights))
    }

    /// Brute-force counterpart of [`relay_weighted_mean`](Self::relay_weighted_mean)
    /// and [`relay_usage_row`](Self::relay_usage_row).
    pub fn oracle_relay_mean(
        &self,
        s: &Coalition,
        i: PlayerId,
        weights: &[T],
    ) -> Result<OracleRelay<T>> {
        self.require_vehicle(s, i)?;
        enumerate_relay_choice(&self.encounter_probs(s, i), weights)
    }

    pub fn gain_weights(&self, s: &Coalition, i: PlayerId) -> Vec<T> {
        s.rsus(self.cfg.vehicles)
            .iter()
            .map(|&j| self.cfg.gain(i, j))
            .collect()
    }

    pub fn price_weights(&self, s: &Coalition, i: PlayerId) -> Vec<T> {
        s.rsus(self.cfg.vehicles)
            .iter()
            .map(|&j| self.cfg.xi(j, i))
            .collect()
    }

    /// `ζ_i(S)`
    pub fn rate_increase(&self, s: &Coalition, i: PlayerId) -> Result<T> {
        self.relay_weighted_mean(s, i, &self.gain_weights(s, i))
    }

    /// `χ_i(S)`
    pub fn expected_price(&self, s: &Coalition, i: PlayerId) -> Result<T> {
        self.relay_weighted_mean(s, i, &self.price_weights(s, i))
    }

    /// Probability that no vehicle outside `S` is active.
    pub fn outside_silence(&self, s: &Coalition) -> T {
        complement_product(
            self.cfg
                .vehicle_ids()
                .filter(|&v| !s.contains(v))
                .map(|v| self.cfg.p(v)),
        )
    }

    pub fn throughput(&self, s: &Coalition, i: PlayerId) -> Result<T> {
        let share = self.transmission_share(s, i)?;
        let zeta = self.rate_increase(s, i)?;
        Ok(share * (T::one() + zeta) * self.outside_silence(s))
    }

    /// Collisions do not cancel the charge, so no outside factor applies.
    pub fn avg_payment(&self, s: &Coalition, i: PlayerId) -> Result<T> {
        Ok(self.transmission_share(s, i)? * self.expected_price(s, i)?)
    }

    pub fn revenue(&self, s: &Coalition, j: PlayerId) -> Result<T> {
        self.require_rsu(s, j)?;
        self.shares(s)
            .into_iter()
            .try_fold(T::zero(), |acc, (i, share)| {
                Ok(acc + share * self.relay_usage_prob(s, i, j)? * self.cfg.xi(j, i))
            })
    }

    /// Receiving cost accrues on every encounter, forwarding cost only when
    /// selected.
    pub fn cost(&self, s: &Coalition, j: PlayerId) -> Result<T> {
        self.require_rsu(s, j)?;
        self.shares(s)
            .into_iter()
            .try_fold(T::zero(), |acc, (i, share)| {
                let eta = self.relay_usage_prob(s, i, j)?;
                let per = self.cfg.c_fwd(j, i) * eta + self.cfg.enc(j, i) * self.cfg.c_rcv(j, i);
                Ok(acc + share * per)
            })
    }

    /// Every quantity of every member, sharing intermediate results.
    pub fn player_payoffs(&self, s: &Coalition) -> Result<PayoffReport<T>> {
        self.check_players(s)?;
        let cfg = self.cfg;
        let k = cfg.vehicles;
        let rsus = s.rsus(k);
        let outside = self.outside_silence(s);
        let shares = self.shares(s);

        // η rows per vehicle, aligned with `rsus`
        let mut usage: Vec<Vec<T>> = Vec::with_capacity(shares.len());
        let mut vehicles = Vec::with_capacity(shares.len());
        for &(i, share) in &shares {
            let probs = self.encounter_probs(s, i);
            let zeta = mean_over_encountered(&probs, &self.gain_weights(s, i));
            let chi = mean_over_encountered(&probs, &self.price_weights(s, i));
            usage.push(
                (0..rsus.len())
                    .map(|t| selection_probability(&probs, t))
                    .collect(),
            );
            let throughput = share * (T::one() + zeta) * outside;
            let payment = share * chi;
            let o = i.offset();
            vehicles.push(VehiclePayoff {
                id: i,
                share,
                rate_increase: zeta,
                expected_price: chi,
                throughput,
                payment,
                payoff: cfg.alpha[o] * throughput - cfg.beta[o] * payment,
            });
        }

        let mut rsu_reports = Vec::with_capacity(rsus.len());
        for (t, &j) in rsus.iter().enumerate() {
            let mut revenue = T::zero();
            let mut cost = T::zero();
            let mut relay_usage = Vec::with_capacity(shares.len());
            for (row, &(i, share)) in usage.iter().zip(&shares) {
                let eta = row[t];
                relay_usage.push((i, eta));
                revenue = revenue + share * eta * cfg.xi(j, i);
                cost = cost + share * (cfg.c_fwd(j, i) * eta + cfg.enc(j, i) * cfg.c_rcv(j, i));
            }
            let o = cfg.rsu_offset(j);
            rsu_reports.push(RsuPayoff {
                id: j,
                relay_usage,
                revenue,
                cost,
                payoff: cfg.gamma[o] * revenue - cfg.mu[o] * cost,
            });
        }

        let sum_payoff = vehicles
            .iter()
            .map(|v| v.payoff)
            .chain(rsu_reports.iter().map(|r| r.payoff))
            .fold(T::zero(), |a, b| a + b);
        Ok(PayoffReport {
            coalition: s.clone(),
            vehicles,
            rsus: rsu_reports,
            sum_payoff,
        })
    }
}

/// [`Engine::player_payoffs`] under the default scheduler.
pub fn player_payoffs<T: Scalar>(s: &Coalition, cfg: &GameConfig<T>) -> Result<PayoffReport<T>> {
    Engine::new(cfg)?.player_payoffs(s)
}

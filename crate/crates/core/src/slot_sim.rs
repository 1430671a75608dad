//! Slot-by-slot simulation of the cooperative transmission protocol.
//!
//! Per slot:
//!
//! 1. every vehicle is active independently with its activity probability;
//! 2. in each coalition the scheduler picks one active vehicle;
//! 3. a scheduled vehicle succeeds iff no vehicle outside its coalition is
//!    active;
//! 4. each RSU of the coalition encounters the scheduled vehicle
//!    independently (or by distance, in geometry mode);
//! 5. the vehicle picks one encountered RSU uniformly as relay;
//! 6. on success the vehicle delivers rate `1 + Δ_ij` when relayed by `j`,
//!    `1` otherwise;
//! 7. the relay charges `ξ_ji` whether or not the slot collided;
//! 8. every encountering RSU pays `c^r_ji`, the relay also pays `c^f_ji`.
//!
//! Random draws, in order: one uniform per vehicle for activity, then (in
//! geometry mode) node positions, then per transmitting coalition one
//! uniform per member RSU for encounters and one index draw for the relay.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{MinIndexFirst, Scheduler};
use crate::error::{Error, Result};
use crate::geo::{within, Placement};
use crate::model::{CoalitionStructure, GameConfig, PlayerId};

/// How encounters are drawn.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum EncounterModel {
    /// Independent Bernoulli draws from the configured encounter matrix.
    #[default]
    Matrix,
    /// Positions redrawn every slot; encounter iff within the vehicle's
    /// range. Encounters of one slot are correlated across pairs.
    Geometry {
        side_km: f64,
        placement: Placement,
        range_km: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn estimate(&self, n: u64) -> Estimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        let stderr = if n > 1 {
            let var = ((self.sum_sq - self.sum * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleEstimate {
    pub id: PlayerId,
    pub throughput: Estimate,
    pub payment: Estimate,
    pub payoff: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsuEstimate {
    pub id: PlayerId,
    pub revenue: Estimate,
    pub cost: Estimate,
    pub payoff: Estimate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounters {
    pub scheduled: u64,
    pub collided: u64,
    pub relayed: u64,
    /// RSU–scheduled-vehicle encounters inside a coalition.
    pub encountered: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub n_slots: u64,
    pub seed: u64,
    pub vehicles: Vec<VehicleEstimate>,
    pub rsus: Vec<RsuEstimate>,
    pub counters: EventCounters,
    /// Number of relayed transmissions, `[rsu][vehicle]`.
    pub relay_events: Vec<Vec<u64>>,
}

/// One CSV row of an [`EmpiricalReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub player: PlayerId,
    pub quantity: &'static str,
    pub estimate: Estimate,
}

impl EmpiricalReport {
    pub const CSV_HEADER: [&'static str; 6] = [
        "player", "quantity", "estimate", "stderr", "n_slots", "seed",
    ];

    /// Vehicles first (throughput, payment, payoff), then RSUs (revenue,
    /// cost, payoff).
    pub fn rows(&self) -> Vec<EstimateRow> {
        let row = |player, quantity, estimate| EstimateRow {
            player,
            quantity,
            estimate,
        };
        let mut out = Vec::new();
        for v in &self.vehicles {
            out.push(row(v.id, "throughput", v.throughput));
            out.push(row(v.id, "payment", v.payment));
            out.push(row(v.id, "payoff", v.payoff));
        }
        for r in &self.rsus {
            out.push(row(r.id, "revenue", r.revenue));
            out.push(row(r.id, "cost", r.cost));
            out.push(row(r.id, "payoff", r.payoff));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::CSV_HEADER)?;
        for r in self.rows() {
            w.write_record([
                r.player.to_string(),
                r.quantity.to_string(),
                format!("{:?}", r.estimate.mean),
                format!("{:?}", r.estimate.stderr),
                self.n_slots.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Total charges per vehicle and per RSU recomputed from the integer
    /// relay counts; the two always add up to the same amount.
    pub fn charge_totals(&self, cfg: &GameConfig<f64>) -> (Vec<f64>, Vec<f64>) {
        let mut paid = vec![0.0; cfg.vehicles];
        let mut earned = vec![0.0; cfg.rsus];
        for (j, row) in self.relay_events.iter().enumerate() {
            for (i, &n) in row.iter().enumerate() {
                let amount = n as f64 * cfg.price[j][i];
                paid[i] += amount;
                earned[j] += amount;
            }
        }
        (paid, earned)
    }
}

struct Block {
    /// Vehicle offsets in priority order.
    priority: Vec<usize>,
    /// RSU offsets in id order.
    rsus: Vec<usize>,
}

pub struct SlotSimulator<'a, S = MinIndexFirst> {
    cfg: &'a GameConfig<f64>,
    structure: &'a CoalitionStructure,
    scheduler: S,
    encounters: EncounterModel,
}

impl<'a> SlotSimulator<'a> {
    pub fn new(structure: &'a CoalitionStructure, cfg: &'a GameConfig<f64>) -> Result<Self> {
        Self::with_scheduler(structure, cfg, MinIndexFirst)
    }
}

impl<'a, S: Scheduler> SlotSimulator<'a, S> {
    pub fn with_scheduler(
        structure: &'a CoalitionStructure,
        cfg: &'a GameConfig<f64>,
        scheduler: S,
    ) -> Result<Self> {
        cfg.validate()?;
        if structure.players() != cfg.player_count() {
            return Err(Error::InvalidStructure(format!(
                "structure covers {} players, game has {}",
                structure.players(),
                cfg.player_count()
            )));
        }
        Ok(Self {
            cfg,
            structure,
            scheduler,
            encounters: EncounterModel::Matrix,
        })
    }

    pub fn encounters(mut self, model: EncounterModel) -> Result<Self> {
        if let EncounterModel::Geometry {
            side_km, range_km, ..
        } = &model
        {
            if !(*side_km > 0.0) || range_km.len() != self.cfg.vehicles {
                return Err(Error::Geometry(format!(
                    "need a positive side and {} ranges",
                    self.cfg.vehicles
                )));
            }
        }
        self.encounters = model;
        Ok(self)
    }

    fn blocks(&self) -> Vec<Block> {
        let k = self.cfg.vehicles;
        self.structure
            .coalitions()
            .iter()
            .filter(|c| !c.vehicles(k).is_empty())
            .map(|c| Block {
                priority: self
                    .scheduler
                    .priority_order(c.vehicles(k))
                    .into_iter()
                    .map(PlayerId::offset)
                    .collect(),
                rsus: c.rsus(k).iter().map(|j| j.offset() - k).collect(),
            })
            .collect()
    }

    pub fn run(&self, n_slots: u64, seed: u64) -> Result<EmpiricalReport> {
        if n_slots == 0 {
            return Err(Error::ZeroSlots);
        }
        let cfg = self.cfg;
        let (k, m) = (cfg.vehicles, cfg.rsus);
        let blocks = self.blocks();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut active = vec![false; k];
        let mut positions = vec![(0.0, 0.0); k + m];
        let mut met: Vec<usize> = Vec::with_capacity(m);
        let (mut rate, mut pay) = (vec![0.0; k], vec![0.0; k]);
        let (mut rev, mut cost) = (vec![0.0; m], vec![0.0; m]);

        let mut v_moments = vec![[Moments::default(); 3]; k];
        let mut r_moments = vec![[Moments::default(); 3]; m];
        let mut counters = EventCounters::default();
        let mut relay_events = vec![vec![0u64; k]; m];

        for slot in 0..n_slots {
            for (a, &p) in active.iter_mut().zip(&cfg.activity) {
                *a = rng.random::<f64>() < p;
            }
            if let EncounterModel::Geometry {
                side_km, placement, ..
            } = &self.encounters
            {
                for pos in positions.iter_mut() {
                    *pos = placement.draw(*side_km, &mut rng);
                }
            }
            rate.fill(0.0);
            pay.fill(0.0);
            rev.fill(0.0);
            cost.fill(0.0);

            let total_active = active.iter().filter(|&&a| a).count();
            let scheduled: Vec<Option<usize>> = blocks
                .iter()
                .map(|b| b.priority.iter().copied().find(|&i| active[i]))
                .collect();
            let transmitters = scheduled.iter().flatten().count();

            for (b, sched) in blocks.iter().zip(&scheduled) {
                let Some(i) = *sched else { continue };
                let inside_active = b.priority.iter().filter(|&&v| active[v]).count();
                let success = inside_active == total_active;
                if success && transmitters != 1 {
                    return Err(Error::InvariantBreach(format!(
                        "slot {slot}: vehicle {} succeeded next to {} other transmitters",
                        i + 1,
                        transmitters - 1
                    )));
                }
                counters.scheduled += 1;
                if !success {
                    counters.collided += 1;
                }

                met.clear();
                for &j in &b.rsus {
                    let hit = match &self.encounters {
                        EncounterModel::Matrix => rng.random::<f64>() < cfg.encounter[j][i],
                        EncounterModel::Geometry { range_km, .. } => {
                            within(positions[i], positions[k + j], range_km[i])
                        }
                    };
                    if hit {
                        met.push(j);
                        cost[j] += cfg.cost_rcv[j][i];
                    }
                }
                counters.encountered += met.len() as u64;

                let mut gain = 0.0;
                if !met.is_empty() {
                    let j = met[rng.random_range(0..met.len())];
                    counters.relayed += 1;
                    relay_events[j][i] += 1;
                    pay[i] = cfg.price[j][i];
                    rev[j] = cfg.price[j][i];
                    cost[j] += cfg.cost_fwd[j][i];
                    gain = cfg.rate_gain[i][j];
                }
                if success {
                    rate[i] = 1.0 + gain;
                }
            }

            let paid: f64 = pay.iter().sum();
            let earned: f64 = rev.iter().sum();
            if paid != earned {
                return Err(Error::InvariantBreach(format!(
                    "slot {slot}: payments {paid} differ from revenues {earned}"
                )));
            }

            for i in 0..k {
                let mo = &mut v_moments[i];
                mo[0].push(rate[i]);
                mo[1].push(pay[i]);
                mo[2].push(cfg.alpha[i] * rate[i] - cfg.beta[i] * pay[i]);
            }
            for j in 0..m {
                let mo = &mut r_moments[j];
                mo[0].push(rev[j]);
                mo[1].push(cost[j]);
                mo[2].push(cfg.gamma[j] * rev[j] - cfg.mu[j] * cost[j]);
            }
        }

        Ok(EmpiricalReport {
            n_slots,
            seed,
            vehicles: v_moments
                .iter()
                .enumerate()
                .map(|(i, mo)| VehicleEstimate {
                    id: PlayerId::new(i + 1),
                    throughput: mo[0].estimate(n_slots),
                    payment: mo[1].estimate(n_slots),
                    payoff: mo[2].estimate(n_slots),
                })
                .collect(),
            rsus: r_moments
                .iter()
                .enumerate()
                .map(|(j, mo)| RsuEstimate {
                    id: PlayerId::new(k + j + 1),
                    revenue: mo[0].estimate(n_slots),
                    cost: mo[1].estimate(n_slots),
                    payoff: mo[2].estimate(n_slots),
                })
                .collect(),
            counters,
            relay_events,
        })
    }
}

/// [`SlotSimulator::run`] with the default scheduler and matrix encounters.
pub fn simulate_slots(
    cs: &CoalitionStructure,
    cfg: &GameConfig<f64>,
    n_slots: u64,
    seed: u64,
) -> Result<EmpiricalReport> {
    SlotSimulator::new(cs, cfg)?.run(n_slots, seed)
}

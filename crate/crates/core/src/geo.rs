//! Encounter probabilities from random placement in a square.
//!
//! Each slot places every node independently and uniformly in the area (or
//! on the centres of a regular grid of cells); RSU `j` encounters vehicle
//! `i` when their distance is at most the vehicle's transmission range.
//! Positions are redrawn every slot.
//!
//! Randomness comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! so a seed reproduces the same estimates on every platform. Per slot the
//! generator is consumed in node order (vehicles `1..=K`, then RSUs), two
//! draws (`x`, then `y`) per node.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Uniform over the whole square.
    #[default]
    Continuous,
    /// Uniform over the centres of a `cells × cells` grid.
    Grid { cells: usize },
}

impl Placement {
    pub const GRID_10X10: Placement = Placement::Grid { cells: 10 };

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" | "uniform" => Ok(Placement::Continuous),
            "grid" | "grid-10x10" => Ok(Self::GRID_10X10),
            other => Err(Error::Parse(format!("unknown placement `{other}`"))),
        }
    }

    pub fn name(self) -> String {
        match self {
            Placement::Continuous => "continuous".into(),
            Placement::Grid { cells } => format!("grid-{cells}x{cells}"),
        }
    }

    pub(crate) fn draw<R: Rng>(self, side: f64, rng: &mut R) -> (f64, f64) {
        match self {
            Placement::Continuous => (rng.random::<f64>() * side, rng.random::<f64>() * side),
            Placement::Grid { cells } => {
                let cell = side / cells as f64;
                let x = rng.random_range(0..cells) as f64;
                let y = rng.random_range(0..cells) as f64;
                ((x + 0.5) * cell, (y + 0.5) * cell)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub side_km: f64,
    pub placement: Placement,
    /// Transmission range of each vehicle.
    pub range_km: Vec<f64>,
    pub n_slots: u64,
    pub seed: u64,
}

impl GeometryConfig {
    pub fn validate(&self, vehicles: usize) -> Result<()> {
        if !(self.side_km > 0.0 && self.side_km.is_finite()) {
            return Err(Error::Geometry(format!(
                "side_km must be positive, got {}",
                self.side_km
            )));
        }
        if self.range_km.len() != vehicles {
            return Err(Error::Geometry(format!(
                "{} ranges for {vehicles} vehicles",
                self.range_km.len()
            )));
        }
        if let Some(d) = self.range_km.iter().find(|d| !(**d >= 0.0)) {
            return Err(Error::Geometry(format!("negative range {d}")));
        }
        if let Placement::Grid { cells: 0 } = self.placement {
            return Err(Error::Geometry("grid needs at least one cell".into()));
        }
        if self.n_slots == 0 {
            return Err(Error::ZeroSlots);
        }
        Ok(())
    }
}

/// Empirical encounter matrix, indexed `[rsu][vehicle]` like
/// [`GameConfig::encounter`](crate::GameConfig::encounter).
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterEstimate {
    pub probability: Vec<Vec<f64>>,
    /// Binomial standard error `sqrt(p̂(1-p̂)/n)`.
    pub stderr: Vec<Vec<f64>>,
    pub hits: Vec<Vec<u64>>,
    pub n_slots: u64,
}

impl EncounterEstimate {
    /// The matrix as an `[encounter]` section of a scenario file.
    pub fn to_scenario_section(&self) -> String {
        let mut out = String::from("[encounter]\nmatrix = [\n");
        for row in &self.probability {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "    [{}],", cells.join(", "));
        }
        out.push_str("]\n");
        out
    }
}

/// Draws node positions slot by slot and counts encounters.
pub struct PlacementSampler {
    side: f64,
    placement: Placement,
    rng: ChaCha8Rng,
    positions: Vec<(f64, f64)>,
}

impl PlacementSampler {
    pub fn new(side: f64, placement: Placement, nodes: usize, seed: u64) -> Self {
        Self {
            side,
            placement,
            rng: ChaCha8Rng::seed_from_u64(seed),
            positions: vec![(0.0, 0.0); nodes],
        }
    }

    /// Fresh positions for every node; vehicles first.
    pub fn redraw(&mut self) -> &[(f64, f64)] {
        for pos in &mut self.positions {
            *pos = self.placement.draw(self.side, &mut self.rng);
        }
        &self.positions
    }
}

pub(crate) fn within(a: (f64, f64), b: (f64, f64), range: f64) -> bool {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy <= range * range
}

pub fn estimate_encounter_matrix(
    geo: &GeometryConfig,
    vehicles: usize,
    rsus: usize,
) -> Result<EncounterEstimate> {
    geo.validate(vehicles)?;
    let mut sampler = PlacementSampler::new(geo.side_km, geo.placement, vehicles + rsus, geo.seed);
    let mut hits = vec![vec![0u64; vehicles]; rsus];
    for _ in 0..geo.n_slots {
        let pos = sampler.redraw();
        for (j, row) in hits.iter_mut().enumerate() {
            let rsu = pos[vehicles + j];
            for (i, count) in row.iter_mut().enumerate() {
                if within(pos[i], rsu, geo.range_km[i]) {
                    *count += 1;
                }
            }
        }
    }
    let n = geo.n_slots as f64;
    let probability: Vec<Vec<f64>> = hits
        .iter()
        .map(|row| row.iter().map(|&h| h as f64 / n).collect())
        .collect();
    let stderr = probability
        .iter()
        .map(|row| row.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect())
        .collect();
    Ok(EncounterEstimate {
        probability,
        stderr,
        hits,
        n_slots: geo.n_slots,
    })
}

/// Probability that two independent uniform points in a square of side
/// `side` are within distance `d`, for `0 ≤ d ≤ side`:
/// `π δ² − 8δ³/3 + δ⁴/2` with `δ = d / side`.
pub fn analytic_pair_encounter(d: f64, side: f64) -> Result<f64> {
    if !(side > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "side must be positive, got {side}"
        )));
    }
    if !(0.0..=side).contains(&d) {
        return Err(Error::OutOfDomain(format!(
            "closed form covers 0 <= d <= side; got d = {d}, side = {side}"
        )));
    }
    let t = d / side;
    Ok(PI * t * t - 8.0 / 3.0 * t.powi(3) + 0.5 * t.powi(4))
}

/// `[rsu][vehicle]` matrix of [`analytic_pair_encounter`] values.
pub fn analytic_encounter_matrix(
    range_km: &[f64],
    side: f64,
    rsus: usize,
) -> Result<Vec<Vec<f64>>> {
    let row = range_km
        .iter()
        .map(|&d| analytic_pair_encounter(d, side))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![row; rsus])
}

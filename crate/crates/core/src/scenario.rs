//! Scenario files.
//!
//! A scenario is a TOML document with up to three sections:
//!
//! ```toml
//! [game]
//! vehicles = 2
//! rsus = 2
//! p = 0.6                # per vehicle; scalar or list of K
//! delta = 0.5            # [vehicle][rsu]; scalar or K×M rows
//! price = 1.5            # [rsu][vehicle]; scalar or M×K rows
//! cost_fwd = 0.5         # [rsu][vehicle]
//! cost_rcv = 0.2         # [rsu][vehicle]
//! alpha = 10.0           # per vehicle
//! beta = 1.0             # per vehicle
//! gamma = 1.0            # per RSU
//! mu = 1.0               # per RSU
//!
//! [encounter]
//! matrix = 0.5           # [rsu][vehicle]; scalar or M×K rows
//! # source = "geometry"     closed form at the geometry ranges
//! # source = "geometry-mc"  Monte Carlo estimate from [geometry]
//!
//! [geometry]
//! side_km = 1.0
//! placement = "continuous"   # or "grid" (10×10 cell centres)
//! range_km = 0.2             # per vehicle
//! slots = 1000000
//! seed = 0
//! d_sweep = [0.1, 0.2, 0.3, 0.4, 0.5]
//! ```
//!
//! Scalars broadcast to the required shape. Explicit lists are taken as
//! written, so wrong lengths surface as shape mismatches during validation.
//! `alpha`, `beta`, `gamma` and `mu` default to 1.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geo::{analytic_pair_encounter, estimate_encounter_matrix, GeometryConfig, Placement};
use crate::model::GameConfig;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Vector {
    Scalar(f64),
    List(Vec<f64>),
}

impl Vector {
    fn expand(self, len: usize) -> Vec<f64> {
        match self {
            Vector::Scalar(x) => vec![x; len],
            Vector::List(v) => v,
        }
    }
}

impl Default for Vector {
    fn default() -> Self {
        Vector::Scalar(1.0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Matrix {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl Matrix {
    fn expand(self, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        match self {
            Matrix::Scalar(x) => vec![vec![x; cols]; rows],
            Matrix::Rows(r) => r,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    vehicles: usize,
    rsus: usize,
    p: Vector,
    delta: Matrix,
    price: Matrix,
    cost_fwd: Matrix,
    cost_rcv: Matrix,
    #[serde(default)]
    alpha: Vector,
    #[serde(default)]
    beta: Vector,
    #[serde(default)]
    gamma: Vector,
    #[serde(default)]
    mu: Vector,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEncounter {
    matrix: Option<Matrix>,
    source: Option<String>,
}

fn default_side() -> f64 {
    1.0
}

fn default_slots() -> u64 {
    1_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(default = "default_side")]
    side_km: f64,
    #[serde(default)]
    placement: Option<String>,
    range_km: Vector,
    #[serde(default = "default_slots")]
    slots: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    d_sweep: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    game: RawGame,
    #[serde(default)]
    encounter: RawEncounter,
    geometry: Option<RawGeometry>,
}

/// Where the encounter matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncounterSource {
    Matrix,
    /// Closed-form pair probability at each vehicle's range.
    Geometry,
    /// Monte Carlo placement estimate.
    GeometryMc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySection {
    pub config: GeometryConfig,
    /// Ranges (km) swept by the `encounter` and `payoffs` commands.
    pub d_sweep: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub game: GameConfig<f64>,
    pub encounter_source: EncounterSource,
    pub geometry: Option<GeometrySection>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// Geometry section or an error naming what needs it.
    pub fn geometry(&self) -> Result<&GeometrySection> {
        self.geometry
            .as_ref()
            .ok_or_else(|| Error::Geometry("scenario has no [geometry] section".into()))
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let g = raw.game;
        let (k, m) = (g.vehicles, g.rsus);

        let geometry = raw
            .geometry
            .map(|geo| -> Result<GeometrySection> {
                let placement = match geo.placement.as_deref() {
                    Some(s) => Placement::parse(s)?,
                    None => Placement::Continuous,
                };
                let config = GeometryConfig {
                    side_km: geo.side_km,
                    placement,
                    range_km: geo.range_km.expand(k),
                    n_slots: geo.slots,
                    seed: geo.seed,
                };
                config.validate(k)?;
                Ok(GeometrySection {
                    config,
                    d_sweep: geo.d_sweep,
                })
            })
            .transpose()?;

        let source = match (
            raw.encounter.matrix.is_some(),
            raw.encounter.source.as_deref(),
        ) {
            (true, None) => EncounterSource::Matrix,
            (false, Some("geometry")) => EncounterSource::Geometry,
            (false, Some("geometry-mc")) => EncounterSource::GeometryMc,
            (false, None) => {
                return Err(Error::Parse(
                    "[encounter] needs `matrix` or `source`".into(),
                ))
            }
            (true, Some(_)) => {
                return Err(Error::Parse(
                    "[encounter] takes either `matrix` or `source`, not both".into(),
                ))
            }
            (false, Some(other)) => {
                return Err(Error::Parse(format!("unknown encounter source `{other}`")))
            }
        };

        let encounter = match source {
            EncounterSource::Matrix => raw.encounter.matrix.unwrap().expand(m, k),
            EncounterSource::Geometry => {
                let geo = geometry_for(&geometry, "geometry")?;
                let row = geo
                    .range_km
                    .iter()
                    .map(|&d| analytic_pair_encounter(d, geo.side_km))
                    .collect::<Result<Vec<_>>>()?;
                vec![row; m]
            }
            EncounterSource::GeometryMc => {
                let geo = geometry_for(&geometry, "geometry-mc")?;
                estimate_encounter_matrix(geo, k, m)?.probability
            }
        };

        let game = GameConfig {
            vehicles: k,
            rsus: m,
            activity: g.p.expand(k),
            encounter,
            rate_gain: g.delta.expand(k, m),
            price: g.price.expand(m, k),
            cost_fwd: g.cost_fwd.expand(m, k),
            cost_rcv: g.cost_rcv.expand(m, k),
            alpha: g.alpha.expand(k),
            beta: g.beta.expand(k),
            gamma: g.gamma.expand(m),
            mu: g.mu.expand(m),
        };
        game.validate()?;
        Ok(Scenario {
            game,
            encounter_source: source,
            geometry,
        })
    }
}

fn geometry_for<'a>(geo: &'a Option<GeometrySection>, source: &str) -> Result<&'a GeometryConfig> {
    geo.as_ref().map(|g| &g.config).ok_or_else(|| {
        Error::Parse(format!(
            "encounter source `{source}` needs a [geometry] section"
        ))
    })
}

/// `cfg` with every encounter probability set to the closed-form value at
/// range `d` in a square of side `side`.
pub fn with_symmetric_encounter(
    cfg: &GameConfig<f64>,
    d: f64,
    side: f64,
) -> Result<GameConfig<f64>> {
    let p = analytic_pair_encounter(d, side)?;
    Ok(GameConfig {
        encounter: vec![vec![p; cfg.vehicles]; cfg.rsus],
        ..cfg.clone()
    })
}

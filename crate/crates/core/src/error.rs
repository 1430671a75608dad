use std::fmt;

use thiserror::Error;

use crate::model::PlayerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigIssue {
    #[error("game must contain at least one player")]
    NoPlayers,
    #[error("shape mismatch in `{field}`: expected {expected}, found {found}")]
    ShapeMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("probability out of range in `{field}`{at}: {value}")]
    ProbabilityOutOfRange {
        field: &'static str,
        at: String,
        value: String,
    },
    #[error("negative value in `{field}`{at}: {value}")]
    Negative {
        field: &'static str,
        at: String,
        value: String,
    },
}

/// Every issue found by [`GameConfig::validate`](crate::GameConfig::validate).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration issue(s)", self.0.len())?;
        for issue in &self.0 {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigErrors),
    #[error("player {player} is not a {role} member of coalition {coalition}")]
    NotAMember {
        player: PlayerId,
        role: &'static str,
        coalition: String,
    },
    #[error("player {player} does not exist in a game with {players} players")]
    UnknownPlayer { player: PlayerId, players: usize },
    #[error("set partitions of an empty set are not enumerated")]
    EmptyDomain,
    #[error("invalid coalition structure: {0}")]
    InvalidStructure(String),
    #[error("weight vector has {found} entries, coalition has {expected} RSUs")]
    WeightShape { expected: usize, found: usize },
    #[error("exhaustive enumeration over {size} elements exceeds the limit of {limit}")]
    EnumerationBound { size: usize, limit: usize },
    #[error("pricing cancellation requires unit weights: {0}")]
    WeightsNotUnit(String),
    #[error("payoff vector has {found} entries, game has {expected} players")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("argument outside the supported domain: {0}")]
    OutOfDomain(String),
    #[error("simulation needs at least one slot")]
    ZeroSlots,
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

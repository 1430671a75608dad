//! Coalitional game model of cooperative uplink transmission between
//! vehicles and roadside units (RSUs).
//!
//! Vehicles in a coalition share the channel through a scheduler; RSUs in the
//! coalition relay the scheduled vehicle's traffic when they encounter it and
//! charge a price for doing so. The crate provides
//!
//! * exact payoffs of every player for any coalition structure
//!   ([`analytic`]), generic over the scalar type;
//! * stability analysis: profitability of vehicle coalitions, price
//!   cancellation in the coalition sum payoff, sufficient conditions for a
//!   non-empty core and core membership ([`game`]);
//! * two Monte Carlo validators: encounter probabilities from random
//!   placement in a square ([`geo`]) and a slot-level protocol simulation
//!   ([`slot_sim`]);
//! * the scenario file format ([`scenario`]) and an invariant audit
//!   ([`audit`]).

pub mod analytic;
pub mod audit;
pub mod error;
pub mod game;
pub mod geo;
pub mod model;
pub mod partition;
pub mod scalar;
pub mod scenario;
pub mod slot_sim;

pub use analytic::{player_payoffs, Engine, MinIndexFirst, PayoffReport, Scheduler};
pub use error::{ConfigErrors, ConfigIssue, Error, Result};
pub use game::{
    core_membership, core_sufficient_conditions, pricing_cancellation_check, stability_verdict,
    structure_payoffs, vehicle_coalition_profitability, Membership, PayoffVector, StabilityVerdict,
    SufficientConditions,
};
pub use geo::{analytic_pair_encounter, estimate_encounter_matrix, GeometryConfig, Placement};
pub use model::{
    normalize_structure, Coalition, CoalitionStructure, GameConfig, PlayerId, Role, UniformParams,
};
pub use partition::{enumerate_partitions, labelled_structure, structure_id, structure_label};
pub use scalar::Scalar;
pub use slot_sim::{simulate_slots, EmpiricalReport};

/// Exact rational scalar for tie-sensitive checks.
pub type Rational = num_rational::Ratio<i128>;

/// Game parameters in double precision, the default numeric domain.
pub type Config = GameConfig<f64>;
/// Game parameters over exact rationals.
pub type ExactConfig = GameConfig<Rational>;
pub type Report = PayoffReport<f64>;
pub type ExactReport = PayoffReport<Rational>;
pub type Payoffs = PayoffVector<f64>;

/// Absolute tolerance for identities that hold exactly in real arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

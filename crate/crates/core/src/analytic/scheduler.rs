use crate::model::PlayerId;

/// Deterministic per-coalition scheduler.
///
/// A scheduler fixes a strict priority order over the coalition's vehicles;
/// in every slot the highest-priority active vehicle transmits and the others
/// stay silent. Transmission shares follow directly from this order.
pub trait Scheduler: Send + Sync {
    /// Coalition vehicles ordered from highest to lowest priority.
    fn priority_order(&self, vehicles: &[PlayerId]) -> Vec<PlayerId>;

    /// The vehicle chosen among `active`, if any.
    fn select(&self, active: &[PlayerId]) -> Option<PlayerId> {
        self.priority_order(active).first().copied()
    }
}

/// Smallest active index transmits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinIndexFirst;

impl Scheduler for MinIndexFirst {
    fn priority_order(&self, vehicles: &[PlayerId]) -> Vec<PlayerId> {
        let mut v = vehicles.to_vec();
        v.sort_unstable();
        v
    }

    fn select(&self, active: &[PlayerId]) -> Option<PlayerId> {
        active.iter().min().copied()
    }
}

/// Largest active index transmits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxIndexFirst;

impl Scheduler for MaxIndexFirst {
    fn priority_order(&self, vehicles: &[PlayerId]) -> Vec<PlayerId> {
        let mut v = vehicles.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// Explicit ranking; vehicles missing from the ranking come last, by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPriority(pub Vec<PlayerId>);

impl Scheduler for FixedPriority {
    fn priority_order(&self, vehicles: &[PlayerId]) -> Vec<PlayerId> {
        let mut v = vehicles.to_vec();
        v.sort_by_key(|p| (self.0.iter().position(|q| q == p).unwrap_or(usize::MAX), *p));
        v
    }
}

//! Players, game parameters and coalition structures.
//!
//! Players are numbered from 1: vehicles occupy `1..=K` and roadside units
//! (RSUs) occupy `K+1..=K+M`. The network operator receiving all uplink
//! traffic is not a player.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigErrors, ConfigIssue, Error, Result};
use crate::scalar::Scalar;

/// 1-based player index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(usize);

impl PlayerId {
    /// # Panics
    /// If `index` is zero.
    pub const fn new(index: usize) -> Self {
        assert!(index >= 1, "player ids start at 1");
        Self(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }

    /// Zero-based position in per-player vectors.
    pub const fn offset(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Player class together with the zero-based position inside that class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Vehicle(usize),
    Rsu(usize),
}

/// Every exogenous parameter of the game.
///
/// Matrices indexed by RSU first are `[rsu][vehicle]`; `rate_gain` is
/// `[vehicle][rsu]`. Fields are public so a configuration can hold invalid
/// data until [`validate`](Self::validate) is called; the analytic engine
/// validates on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig<T> {
    pub vehicles: usize,
    pub rsus: usize,
    /// Per-slot activity probability of each vehicle.
    pub activity: Vec<T>,
    /// Probability that RSU `j` encounters vehicle `i` during a slot.
    pub encounter: Vec<Vec<T>>,
    /// Rate increase of vehicle `i` when relayed by RSU `j`.
    pub rate_gain: Vec<Vec<T>>,
    /// Price charged by RSU `j` to vehicle `i` per relayed transmission.
    pub price: Vec<Vec<T>>,
    pub cost_fwd: Vec<Vec<T>>,
    pub cost_rcv: Vec<Vec<T>>,
    /// Vehicle weight on throughput.
    pub alpha: Vec<T>,
    /// Vehicle weight on payment.
    pub beta: Vec<T>,
    /// RSU weight on revenue.
    pub gamma: Vec<T>,
    /// RSU weight on cost.
    pub mu: Vec<T>,
}

/// Scalar values broadcast to every entry by [`GameConfig::uniform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformParams<T> {
    pub activity: T,
    pub encounter: T,
    pub rate_gain: T,
    pub price: T,
    pub cost_fwd: T,
    pub cost_rcv: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub mu: T,
}

impl UniformParams<f64> {
    /// Two-vehicle, two-RSU evaluation values: `Δ=0.5, p=0.6, ξ=1.5,
    /// c^f=0.5, c^r=0.2, α=10, β=1, γ=μ=1`.
    pub fn reference(encounter: f64) -> Self {
        Self {
            activity: 0.6,
            encounter,
            rate_gain: 0.5,
            price: 1.5,
            cost_fwd: 0.5,
            cost_rcv: 0.2,
            alpha: 10.0,
            beta: 1.0,
            gamma: 1.0,
            mu: 1.0,
        }
    }
}

impl<T: Scalar> GameConfig<T> {
    pub fn uniform(vehicles: usize, rsus: usize, u: &UniformParams<T>) -> Self {
        let rv = |x: T| vec![vec![x; vehicles]; rsus];
        Self {
            vehicles,
            rsus,
            activity: vec![u.activity; vehicles],
            encounter: rv(u.encounter),
            rate_gain: vec![vec![u.rate_gain; rsus]; vehicles],
            price: rv(u.price),
            cost_fwd: rv(u.cost_fwd),
            cost_rcv: rv(u.cost_rcv),
            alpha: vec![u.alpha; vehicles],
            beta: vec![u.beta; vehicles],
            gamma: vec![u.gamma; rsus],
            mu: vec![u.mu; rsus],
        }
    }

    /// Returns every violated invariant; never stops at the first one.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let (k, m) = (self.vehicles, self.rsus);
        let mut issues = Vec::new();
        if k + m == 0 {
            issues.push(ConfigIssue::NoPlayers);
        }

        let vectors: [(&'static str, &Vec<T>, usize, Bound); 5] = [
            ("activity", &self.activity, k, Bound::Probability),
            ("alpha", &self.alpha, k, Bound::Free),
            ("beta", &self.beta, k, Bound::Free),
            ("gamma", &self.gamma, m, Bound::Free),
            ("mu", &self.mu, m, Bound::Free),
        ];
        for (field, values, len, bound) in vectors {
            if values.len() != len {
                issues.push(ConfigIssue::ShapeMismatch {
                    field,
                    expected: len.to_string(),
                    found: values.len().to_string(),
                });
                continue;
            }
            for (i, &x) in values.iter().enumerate() {
                bound.check(field, format!("[{i}]"), x, &mut issues);
            }
        }

        let matrices: [(&'static str, &Vec<Vec<T>>, usize, usize, Bound); 5] = [
            ("encounter", &self.encounter, m, k, Bound::Probability),
            ("rate_gain", &self.rate_gain, k, m, Bound::NonNegative),
            ("price", &self.price, m, k, Bound::NonNegative),
            ("cost_fwd", &self.cost_fwd, m, k, Bound::NonNegative),
            ("cost_rcv", &self.cost_rcv, m, k, Bound::NonNegative),
        ];
        for (field, rows, nrows, ncols, bound) in matrices {
            let shape_ok = rows.len() == nrows && rows.iter().all(|r| r.len() == ncols);
            if !shape_ok {
                let found = match rows.iter().map(Vec::len).collect::<BTreeSet<_>>() {
                    cols if cols.len() == 1 => {
                        format!("{}x{}", rows.len(), cols.first().copied().unwrap_or(0))
                    }
                    cols if cols.is_empty() => format!("{}x0", rows.len()),
                    _ => format!("{} ragged rows", rows.len()),
                };
                issues.push(ConfigIssue::ShapeMismatch {
                    field,
                    expected: format!("{nrows}x{ncols}"),
                    found,
                });
                continue;
            }
            for (r, row) in rows.iter().enumerate() {
                for (c, &x) in row.iter().enumerate() {
                    bound.check(field, format!("[{r}][{c}]"), x, &mut issues);
                }
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues))
        }
    }

    /// Applies `f` to every numeric entry, e.g. to move to exact rationals.
    pub fn map<U>(&self, mut f: impl FnMut(T) -> U) -> GameConfig<U> {
        let mut vec = |v: &Vec<T>| v.iter().map(|&x| f(x)).collect::<Vec<U>>();
        let activity = vec(&self.activity);
        let alpha = vec(&self.alpha);
        let beta = vec(&self.beta);
        let gamma = vec(&self.gamma);
        let mu = vec(&self.mu);
        let mut mat = |m: &Vec<Vec<T>>| {
            m.iter()
                .map(|r| r.iter().map(|&x| f(x)).collect())
                .collect::<Vec<Vec<U>>>()
        };
        GameConfig {
            vehicles: self.vehicles,
            rsus: self.rsus,
            activity,
            encounter: mat(&self.encounter),
            rate_gain: mat(&self.rate_gain),
            price: mat(&self.price),
            cost_fwd: mat(&self.cost_fwd),
            cost_rcv: mat(&self.cost_rcv),
            alpha,
            beta,
            gamma,
            mu,
        }
    }
}

#[derive(Clone, Copy)]
enum Bound {
    Probability,
    NonNegative,
    Free,
}

impl Bound {
    fn check<T: Scalar>(self, field: &'static str, at: String, x: T, out: &mut Vec<ConfigIssue>) {
        match self {
            // written so that NaN fails
            Bound::Probability if !(x >= T::zero() && x <= T::one()) => {
                out.push(ConfigIssue::ProbabilityOutOfRange {
                    field,
                    at,
                    value: format!("{x:?}"),
                });
            }
            Bound::NonNegative if !(x >= T::zero()) => out.push(ConfigIssue::Negative {
                field,
                at,
                value: format!("{x:?}"),
            }),
            _ => {}
        }
    }
}

impl<T> GameConfig<T> {
    pub fn player_count(&self) -> usize {
        self.vehicles + self.rsus
    }

    pub fn role(&self, id: PlayerId) -> Option<Role> {
        match id.index() {
            i if i <= self.vehicles => Some(Role::Vehicle(i - 1)),
            i if i <= self.vehicles + self.rsus => Some(Role::Rsu(i - 1 - self.vehicles)),
            _ => None,
        }
    }

    pub fn is_vehicle(&self, id: PlayerId) -> bool {
        id.index() <= self.vehicles
    }

    pub fn vehicle_ids(&self) -> impl Iterator<Item = PlayerId> {
        (1..=self.vehicles).map(PlayerId::new)
    }

    pub fn rsu_ids(&self) -> impl Iterator<Item = PlayerId> {
        let k = self.vehicles;
        (k + 1..=k + self.rsus).map(PlayerId::new)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (1..=self.player_count()).map(PlayerId::new)
    }
}

// Accessors keyed by player id. Callers pass a vehicle id for `i` and an RSU
// id for `j`; the engine guarantees this.
impl<T: Copy> GameConfig<T> {
    pub(crate) fn p(&self, i: PlayerId) -> T {
        self.activity[i.offset()]
    }
    pub(crate) fn enc(&self, j: PlayerId, i: PlayerId) -> T {
        self.encounter[self.rsu_offset(j)][i.offset()]
    }
    pub(crate) fn gain(&self, i: PlayerId, j: PlayerId) -> T {
        self.rate_gain[i.offset()][self.rsu_offset(j)]
    }
    pub(crate) fn xi(&self, j: PlayerId, i: PlayerId) -> T {
        self.price[self.rsu_offset(j)][i.offset()]
    }
    pub(crate) fn c_fwd(&self, j: PlayerId, i: PlayerId) -> T {
        self.cost_fwd[self.rsu_offset(j)][i.offset()]
    }
    pub(crate) fn c_rcv(&self, j: PlayerId, i: PlayerId) -> T {
        self.cost_rcv[self.rsu_offset(j)][i.offset()]
    }
    pub(crate) fn rsu_offset(&self, j: PlayerId) -> usize {
        j.offset() - self.vehicles
    }
}

/// A non-empty set of players, kept sorted.
///
/// Because vehicles have the smallest ids, the vehicle members always form a
/// prefix of the member list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition {
    members: Vec<PlayerId>,
}

impl Coalition {
    pub fn new(members: impl IntoIterator<Item = PlayerId>) -> Result<Self> {
        let set: BTreeSet<PlayerId> = members.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidStructure("empty coalition".into()));
        }
        Ok(Self {
            members: set.into_iter().collect(),
        })
    }

    /// Convenience constructor from raw 1-based indices.
    pub fn of(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidStructure("player ids start at 1".into()));
        }
        Self::new(indices.iter().map(|&i| PlayerId::new(i)))
    }

    /// Coalition of all players `1..=n`.
    pub fn grand(n: usize) -> Self {
        assert!(n > 0);
        Self {
            members: (1..=n).map(PlayerId::new).collect(),
        }
    }

    /// Members encoded by bit `b` ↔ player `b + 1`.
    pub(crate) fn from_mask(mask: u64) -> Self {
        debug_assert!(mask != 0);
        Self {
            members: (0..64)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| PlayerId::new(b + 1))
                .collect(),
        }
    }

    pub fn members(&self) -> &[PlayerId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: PlayerId) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    /// Vehicle members `S_u` for a game with `k` vehicles.
    pub fn vehicles(&self, k: usize) -> &[PlayerId] {
        &self.members[..self.split(k)]
    }

    /// RSU members `S_r` for a game with `k` vehicles.
    pub fn rsus(&self, k: usize) -> &[PlayerId] {
        &self.members[self.split(k)..]
    }

    fn split(&self, k: usize) -> usize {
        self.members.partition_point(|p| p.index() <= k)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, p) in self.members.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// A partition of all players `1..=n` into disjoint coalitions.
///
/// Coalitions are kept ordered by their smallest member, so two structures
/// describing the same partition compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoalitionStructure {
    coalitions: Vec<Coalition>,
    players: usize,
}

impl CoalitionStructure {
    pub fn new(mut coalitions: Vec<Coalition>, players: usize) -> Result<Self> {
        let mut seen = vec![false; players];
        for c in &coalitions {
            for p in c.members() {
                let slot = seen.get_mut(p.offset()).ok_or_else(|| {
                    Error::InvalidStructure(format!("player {p} outside 1..={players}"))
                })?;
                if std::mem::replace(slot, true) {
                    return Err(Error::InvalidStructure(format!(
                        "player {p} appears in more than one coalition"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidStructure(format!(
                "player {} is not covered",
                missing + 1
            )));
        }
        coalitions.sort();
        Ok(Self {
            coalitions,
            players,
        })
    }

    /// Every player in its own coalition.
    pub fn singletons(players: usize) -> Self {
        Self {
            coalitions: (1..=players)
                .map(|i| Coalition {
                    members: vec![PlayerId::new(i)],
                })
                .collect(),
            players,
        }
    }

    pub fn grand(players: usize) -> Self {
        Self {
            coalitions: vec![Coalition::grand(players)],
            players,
        }
    }

    /// Builds the structure encoded by a restricted-growth string.
    pub(crate) fn from_rgs(rgs: &[usize]) -> Self {
        let blocks = rgs.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); blocks];
        for (pos, &b) in rgs.iter().enumerate() {
            members[b].push(PlayerId::new(pos + 1));
        }
        Self {
            coalitions: members
                .into_iter()
                .map(|members| Coalition { members })
                .collect(),
            players: rgs.len(),
        }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn coalition_of(&self, id: PlayerId) -> Option<&Coalition> {
        self.coalitions.iter().find(|c| c.contains(id))
    }

    /// Splits every coalition without vehicles into RSU singletons.
    ///
    /// RSUs gain nothing by grouping among themselves, so this never changes
    /// any player's payoff.
    pub fn normalize(&self, vehicles: usize) -> Self {
        let mut out = Vec::with_capacity(self.coalitions.len());
        for c in &self.coalitions {
            if c.vehicles(vehicles).is_empty() && c.len() > 1 {
                out.extend(c.members().iter().map(|&p| Coalition { members: vec![p] }));
            } else {
                out.push(c.clone());
            }
        }
        out.sort();
        Self {
            coalitions: out,
            players: self.players,
        }
    }
}

/// Free-function form of [`CoalitionStructure::normalize`].
pub fn normalize_structure<T>(cs: &CoalitionStructure, cfg: &GameConfig<T>) -> CoalitionStructure {
    cs.normalize(cfg.vehicles)
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.coalitions.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses `{1,2},{3},{4}`. The player count is the largest id mentioned.
impl FromStr for CoalitionStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("malformed coalition structure `{s}`"));
        let inner = compact
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(bad)?;
        let mut coalitions = Vec::new();
        let mut max_id = 0;
        for block in inner.split("},{") {
            let ids = block
                .split(',')
                .map(|t| t.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            max_id = ids.iter().copied().fold(max_id, usize::max);
            coalitions.push(Coalition::of(&ids)?);
        }
        CoalitionStructure::new(coalitions, max_id)
    }
}

//! Set-partition enumeration in restricted-growth-string order.
//!
//! A restricted-growth string `a` of length `n` has `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])`; element `i + 1` goes to block `a[i]`. Walking
//! the strings in lexicographic order visits every partition exactly once.

use crate::error::{Error, Result};
use crate::model::CoalitionStructure;

/// Iterator over all partitions of `{1..=n}`.
#[derive(Debug, Clone)]
pub struct Partitions {
    rgs: Vec<usize>,
    // prefix maxima: maxes[i] = max(rgs[..=i])
    maxes: Vec<usize>,
    done: bool,
}

impl Partitions {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDomain);
        }
        Ok(Self {
            rgs: vec![0; n],
            maxes: vec![0; n],
            done: false,
        })
    }

    fn advance(&mut self) {
        let n = self.rgs.len();
        for i in (1..n).rev() {
            if self.rgs[i] <= self.maxes[i - 1] {
                self.rgs[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.rgs[i]);
                for t in i + 1..n {
                    self.rgs[t] = 0;
                    self.maxes[t] = self.maxes[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = CoalitionStructure;

    fn next(&mut self) -> Option<CoalitionStructure> {
        if self.done {
            return None;
        }
        let out = CoalitionStructure::from_rgs(&self.rgs);
        self.advance();
        Some(out)
    }
}

/// All partitions of `{1..=n}` in canonical order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<CoalitionStructure>> {
    Ok(Partitions::new(n)?.collect())
}

/// Labels `C1..C15` conventionally attached to the partitions of the
/// two-vehicle, two-RSU game, in label order.
pub const TWO_BY_TWO_LABELS: [(&str, &str); 15] = [
    ("C1", "{1,2,3,4}"),
    ("C2", "{1,3,4},{2}"),
    ("C3", "{1,2},{3},{4}"),
    ("C4", "{1},{2},{3},{4}"),
    ("C5", "{1},{3},{2,4}"),
    ("C6", "{1,3},{2,4}"),
    ("C7", "{1,2,3},{4}"),
    ("C8", "{1},{2,3,4}"),
    ("C9", "{1,4},{2,3}"),
    ("C10", "{1},{4},{2,3}"),
    ("C11", "{1,2},{3,4}"),
    ("C12", "{1},{2},{3,4}"),
    ("C13", "{1,2,4},{3}"),
    ("C14", "{1,4},{2},{3}"),
    ("C15", "{2},{4},{1,3}"),
];

/// Structure carrying a `C1..C15` label (two vehicles, two RSUs only).
pub fn labelled_structure(label: &str) -> Option<CoalitionStructure> {
    TWO_BY_TWO_LABELS
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, s)| s.parse().expect("label table is well formed"))
}

/// Reverse lookup of [`labelled_structure`].
pub fn structure_label(cs: &CoalitionStructure) -> Option<&'static str> {
    if cs.players() != 4 {
        return None;
    }
    TWO_BY_TWO_LABELS
        .iter()
        .find(|(_, s)| s.parse::<CoalitionStructure>().ok().as_ref() == Some(cs))
        .map(|(l, _)| *l)
}

/// Canonical 1-based id of a structure, i.e. its position in
/// [`enumerate_partitions`].
pub fn structure_id(cs: &CoalitionStructure) -> usize {
    Partitions::new(cs.players())
        .expect("structures have at least one player")
        .position(|s| s == *cs)
        .map(|i| i + 1)
        .expect("every valid structure is enumerated")
}

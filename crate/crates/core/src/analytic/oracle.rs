//! Brute-force reference for the relay functionals.
//!
//! Lists all `2^n` encounter patterns, weights each by its probability and
//! lets the vehicle choose uniformly inside the pattern. Kept separate from
//! the closed forms in [`relay`](super::relay) so the two can be compared.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest relay set the oracle agrees to enumerate.
pub const ORACLE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRelay<T> {
    /// Expected weight of the chosen relay (zero when none is met).
    pub mean: T,
    /// Selection probability of each relay.
    pub usage: Vec<T>,
}

pub fn enumerate_relay_choice<T: Scalar>(probs: &[T], weights: &[T]) -> Result<OracleRelay<T>> {
    let n = probs.len();
    if n > ORACLE_LIMIT {
        return Err(Error::EnumerationBound {
            size: n,
            limit: ORACLE_LIMIT,
        });
    }
    if weights.len() != n {
        return Err(Error::WeightShape {
            expected: n,
            found: weights.len(),
        });
    }
    let mut mean = T::zero();
    let mut usage = vec![T::zero(); n];
    for pattern in 1u32..(1 << n) {
        let met = |j: usize| pattern >> j & 1 == 1;
        let prob = (0..n).fold(T::one(), |acc, j| {
            acc * if met(j) {
                probs[j]
            } else {
                T::one() - probs[j]
            }
        });
        let each = prob / T::from_count(pattern.count_ones() as usize);
        for j in (0..n).filter(|&j| met(j)) {
            usage[j] = usage[j] + each;
            mean = mean + each * weights[j];
        }
    }
    Ok(OracleRelay { mean, usage })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_relay_set() {
        let r = enumerate_relay_choice::<f64>(&[], &[]).unwrap();
        assert_eq!(r.mean, 0.0);
        assert!(r.usage.is_empty());
    }

    #[test]
    fn certain_pair_averages_weights() {
        let r = enumerate_relay_choice(&[1.0, 1.0], &[1.0, 3.0]).unwrap();
        assert_eq!(r.mean, 2.0);
        assert_eq!(r.usage, vec![0.5, 0.5]);
    }

    #[test]
    fn bound_and_shape_errors() {
        assert!(matches!(
            enumerate_relay_choice(&[0.5; 21], &[0.0; 21]),
            Err(Error::EnumerationBound { size: 21, .. })
        ));
        assert!(matches!(
            enumerate_relay_choice(&[0.5; 2], &[0.0; 3]),
            Err(Error::WeightShape { .. })
        ));
    }
}

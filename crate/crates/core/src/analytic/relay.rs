//! Closed forms for uniform relay selection among encountered RSUs.
//!
//! A scheduled vehicle sees each coalition RSU independently with its
//! encounter probability and picks one encountered RSU uniformly. All sums
//! here are organised by the number of encountered RSUs and evaluated in
//! `O(n^2)` through the distribution of that count, so no subset is listed.

use crate::scalar::Scalar;

/// `dist[b]` is the probability that exactly `b` of the independent events
/// with probabilities `probs` occur.
pub fn count_distribution<T: Scalar>(probs: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut dist = vec![T::one()];
    for q in probs {
        let mut next = vec![T::zero(); dist.len() + 1];
        for (b, &d) in dist.iter().enumerate() {
            next[b] = next[b] + d * (T::one() - q);
            next[b + 1] = next[b + 1] + d * q;
        }
        dist = next;
    }
    dist
}

/// Probability that relay `target` is the one selected.
///
/// Equals `q_target * Σ_b Pr[b other relays encountered] / (b + 1)`; the
/// `b`-th term is the bracketed term of size `b` in the expanded form.
pub fn selection_probability<T: Scalar>(probs: &[T], target: usize) -> T {
    let others = probs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != target)
        .map(|(_, &q)| q);
    let bracket = count_distribution(others)
        .into_iter()
        .enumerate()
        .fold(T::zero(), |acc, (b, d)| acc + d / T::from_count(b + 1));
    probs[target] * bracket
}

/// Expected mean weight of the encountered set, zero when nothing is met.
///
/// Sums `mean(w over A) · Pr(A)` over non-empty encountered sets `A`,
/// grouped by `|A|`: `by_size[a]` holds `Σ_{|A|=a} Pr(A)` and `weighted[a]`
/// holds `Σ_{|A|=a} (Σ_{j∈A} w_j) Pr(A)` as relays are added one at a time.
pub fn mean_over_encountered<T: Scalar>(probs: &[T], weights: &[T]) -> T {
    assert_eq!(probs.len(), weights.len());
    let n = probs.len();
    let mut by_size = vec![T::zero(); n + 1];
    let mut weighted = vec![T::zero(); n + 1];
    by_size[0] = T::one();
    for (t, (&q, &w)) in probs.iter().zip(weights).enumerate() {
        let miss = T::one() - q;
        for a in (1..=t + 1).rev() {
            weighted[a] = weighted[a] * miss + (weighted[a - 1] + w * by_size[a - 1]) * q;
            by_size[a] = by_size[a] * miss + by_size[a - 1] * q;
        }
        by_size[0] = by_size[0] * miss;
    }
    (1..=n).fold(T::zero(), |acc, a| acc + weighted[a] / T::from_count(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_distribution_of_fair_coins() {
        let d = count_distribution([0.5, 0.5, 0.5]);
        assert_eq!(d, vec![0.125, 0.375, 0.375, 0.125]);
    }

    #[test]
    fn single_relay_is_picked_when_met() {
        assert_eq!(selection_probability(&[0.3], 0), 0.3);
    }

    #[test]
    fn two_relays_at_one_half() {
        // q(1-q) + q^2/2
        assert!((selection_probability(&[0.5f64, 0.5], 0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn two_certain_relays_split_evenly() {
        assert_eq!(selection_probability(&[1.0, 1.0], 1), 0.5);
        assert_eq!(mean_over_encountered(&[1.0, 1.0], &[2.0, 4.0]), 3.0);
    }

    #[test]
    fn no_relays_means_zero() {
        assert_eq!(mean_over_encountered::<f64>(&[], &[]), 0.0);
    }

    #[test]
    fn equal_weights_reduce_to_at_least_one_met() {
        let probs = [0.2f64, 0.7, 0.4];
        let got = mean_over_encountered(&probs, &[0.5; 3]);
        let want = 0.5 * (1.0 - 0.8 * 0.3 * 0.6);
        assert!((got - want).abs() < 1e-15);
    }
}

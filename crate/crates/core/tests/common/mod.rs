#![allow(dead_code)]

use coalnet::scenario::Scenario;
use coalnet::{Coalition, GameConfig, PlayerId};
use rand::Rng;

pub fn default_scenario() -> Scenario {
    Scenario::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/default.toml"
    ))
    .expect("default scenario loads")
}

/// Probability in [0, 1] that hits both endpoints now and then.
pub fn prob<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    }
}

pub fn random_config<R: Rng>(rng: &mut R, k: usize, m: usize) -> GameConfig<f64> {
    let mat = |rows: usize, cols: usize, f: &mut dyn FnMut() -> f64| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| f()).collect())
            .collect()
    };
    let activity = (0..k).map(|_| prob(rng)).collect();
    let encounter = mat(m, k, &mut || prob(rng));
    let rate_gain = mat(k, m, &mut || rng.random_range(0.0..2.0));
    let price = mat(m, k, &mut || rng.random_range(0.0..3.0));
    let cost_fwd = mat(m, k, &mut || rng.random_range(0.0..1.0));
    let cost_rcv = mat(m, k, &mut || rng.random_range(0.0..1.0));
    let mut weights =
        |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.1..10.0)).collect() };
    GameConfig {
        vehicles: k,
        rsus: m,
        activity,
        encounter,
        rate_gain,
        price,
        cost_fwd,
        cost_rcv,
        alpha: weights(k),
        beta: weights(k),
        gamma: weights(m),
        mu: weights(m),
    }
}

pub fn unit_payment_weights(cfg: &mut GameConfig<f64>) {
    cfg.beta.iter_mut().for_each(|x| *x = 1.0);
    cfg.gamma.iter_mut().for_each(|x| *x = 1.0);
}

pub fn coalition_from_mask(mask: u64) -> Coalition {
    Coalition::new(
        (0..64)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| PlayerId::new(b + 1)),
    )
    .expect("non-empty mask")
}

/// Random coalition of `n` players holding at least one vehicle.
pub fn random_coalition_with_vehicle<R: Rng>(rng: &mut R, k: usize, n: usize) -> Coalition {
    loop {
        let mask = rng.random_range(1..1u64 << n);
        if mask & ((1 << k) - 1) != 0 {
            return coalition_from_mask(mask);
        }
    }
}

/// Relay choice by listing every encounter pattern: the vehicle picks
/// uniformly among the RSUs it met. Returns the expected weight and the
/// selection probability of each RSU.
pub fn brute_relay(probs: &[f64], weights: &[f64]) -> (f64, Vec<f64>) {
    let n = probs.len();
    let mut mean = 0.0;
    let mut usage = vec![0.0; n];
    for mask in 0u32..1 << n {
        let pattern: f64 = (0..n)
            .map(|b| {
                if mask >> b & 1 == 1 {
                    probs[b]
                } else {
                    1.0 - probs[b]
                }
            })
            .product();
        let met: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).collect();
        if met.is_empty() {
            continue;
        }
        let each = pattern / met.len() as f64;
        for &b in &met {
            usage[b] += each;
            mean += each * weights[b];
        }
    }
    (mean, usage)
}

/// Share of each vehicle in `members` (sorted ids, 0-based offsets) by
/// listing activity patterns; the smallest active id transmits.
pub fn brute_shares(activity: &[f64], members: &[usize]) -> Vec<f64> {
    let n = members.len();
    let mut shares = vec![0.0; n];
    for mask in 0u32..1 << n {
        let pattern: f64 = (0..n)
            .map(|b| {
                let p = activity[members[b]];
                if mask >> b & 1 == 1 {
                    p
                } else {
                    1.0 - p
                }
            })
            .product();
        if mask != 0 {
            shares[mask.trailing_zeros() as usize] += pattern;
        }
    }
    shares
}

pub fn verdict(id: &str, what: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    if detail.is_empty() {
        println!("[{tag}] {id}: {what}");
    } else {
        println!("[{tag}] {id}: {what} ({detail})");
    }
}

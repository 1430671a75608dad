//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line per
//! criterion; run with `cargo test --test acceptance -- --nocapture` to see
//! them.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use coalnet::analytic::enumerate_relay_choice;
use coalnet::game::{structure_payoffs, Profitability};
use coalnet::partition::TWO_BY_TWO_LABELS;
use coalnet::scenario::with_symmetric_encounter;
use coalnet::{
    analytic_pair_encounter, core_membership, core_sufficient_conditions, enumerate_partitions,
    estimate_encounter_matrix, labelled_structure, normalize_structure, simulate_slots,
    vehicle_coalition_profitability, Coalition, CoalitionStructure, Engine, GameConfig,
    GeometryConfig, Membership, Placement, PlayerId, Rational, UniformParams,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn id(i: usize) -> PlayerId {
    PlayerId::new(i)
}

#[test]
fn ac01_partitions_of_two_vehicles_two_rsus() {
    let start = Instant::now();
    let got: HashSet<CoalitionStructure> = enumerate_partitions(4).unwrap().into_iter().collect();
    let elapsed = start.elapsed();
    let table: HashSet<CoalitionStructure> = TWO_BY_TWO_LABELS
        .iter()
        .map(|(_, s)| s.parse().unwrap())
        .collect();
    let count = enumerate_partitions(4).unwrap().len();
    let ok = count == 15 && got == table && elapsed < Duration::from_secs(1);
    verdict(
        "1",
        "15 structures, set-equal to the labelled table, under 1 s",
        ok,
        &format!("{count} structures in {elapsed:?}"),
    );
    assert!(ok);
}

#[test]
fn ac02_transmission_shares() {
    let cfg = GameConfig::uniform(2, 2, &UniformParams::reference(0.5));
    let grand = Coalition::grand(4);
    let shares = Engine::new(&cfg).unwrap().shares(&grand);

    let exact = cfg.map(|x| Rational::approximate_float(x).unwrap());
    let exact_shares = Engine::new(&exact).unwrap().shares(&grand);

    let ok = (shares[0].1 - 0.6).abs() <= 1e-15
        && (shares[1].1 - 0.24).abs() <= 1e-15
        && exact_shares[0].1 == Rational::new(3, 5)
        && exact_shares[1].1 == Rational::new(6, 25);
    verdict(
        "2",
        "shares 0.6 and 0.24 in a joint coalition",
        ok,
        &format!("f64 {:?}, exact {:?}", shares, exact_shares),
    );
    assert!(ok);
}

#[test]
fn ac03_identity_suite() {
    let mut r = rng(3);
    let mut worst = [0.0f64; 6];
    let names = [
        "share sum",
        "relay usage sum",
        "expected price",
        "payment balance",
        "direct definitions",
        "reduced sum payoff",
    ];
    for _ in 0..1000 {
        let k = r.random_range(1..=4);
        let m = r.random_range(0..=5);
        let mut cfg = random_config(&mut r, k, m);
        if r.random_bool(0.5) {
            unit_payment_weights(&mut cfg);
        }
        let n = k + m;
        let engine = Engine::new(&cfg).unwrap();
        for s in [
            random_coalition_with_vehicle(&mut r, k, n),
            Coalition::grand(n),
        ] {
            let veh = s.vehicles(k);
            let rsus = s.rsus(k);
            let report = engine.player_payoffs(&s).unwrap();
            let bump = |w: &mut f64, x: f64| *w = w.max(x);

            let active = 1.0
                - veh
                    .iter()
                    .map(|i| 1.0 - cfg.activity[i.offset()])
                    .product::<f64>();
            let share_sum: f64 = engine.shares(&s).iter().map(|x| x.1).sum();
            bump(&mut worst[0], (share_sum - active).abs());

            let offsets: Vec<usize> = veh.iter().map(|i| i.offset()).collect();
            let shares = brute_shares(&cfg.activity, &offsets);
            let silent: f64 = (0..k)
                .filter(|i| !offsets.contains(i))
                .map(|i| 1.0 - cfg.activity[i])
                .product();
            let mut revenue = vec![0.0; rsus.len()];
            let mut cost = vec![0.0; rsus.len()];
            for (t, &i) in veh.iter().enumerate() {
                let probs: Vec<f64> = rsus
                    .iter()
                    .map(|j| cfg.encounter[j.offset() - k][i.offset()])
                    .collect();
                let gains: Vec<f64> = rsus
                    .iter()
                    .map(|j| cfg.rate_gain[i.offset()][j.offset() - k])
                    .collect();
                let xi: Vec<f64> = rsus
                    .iter()
                    .map(|j| cfg.price[j.offset() - k][i.offset()])
                    .collect();
                let row = engine.relay_usage_row(&s, i).unwrap();
                let met = 1.0 - probs.iter().map(|q| 1.0 - q).product::<f64>();
                bump(&mut worst[1], (row.iter().sum::<f64>() - met).abs());
                let chi = engine.expected_price(&s, i).unwrap();
                let by_usage: f64 = row.iter().zip(&xi).map(|(e, x)| e * x).sum();
                bump(&mut worst[2], (chi - by_usage).abs());

                let (zeta, usage) = brute_relay(&probs, &gains);
                let (chi_b, _) = brute_relay(&probs, &xi);
                let v = report.vehicle(i).unwrap();
                let t_direct = shares[t] * (1.0 + zeta) * silent;
                let p_direct = shares[t] * chi_b;
                bump(&mut worst[4], (v.throughput - t_direct).abs());
                bump(&mut worst[4], (v.payment - p_direct).abs());
                bump(
                    &mut worst[4],
                    (v.payoff
                        - (cfg.alpha[i.offset()] * t_direct - cfg.beta[i.offset()] * p_direct))
                        .abs(),
                );
                for (b, j) in rsus.iter().enumerate() {
                    let jo = j.offset() - k;
                    revenue[b] += shares[t] * usage[b] * xi[b];
                    cost[b] += shares[t]
                        * (cfg.cost_fwd[jo][i.offset()] * usage[b]
                            + probs[b] * cfg.cost_rcv[jo][i.offset()]);
                }
            }
            for (b, j) in rsus.iter().enumerate() {
                let x = report.rsu(*j).unwrap();
                bump(&mut worst[4], (x.revenue - revenue[b]).abs());
                bump(&mut worst[4], (x.cost - cost[b]).abs());
            }

            let paid: f64 = report.vehicles.iter().map(|v| v.payment).sum();
            let earned: f64 = report.rsus.iter().map(|x| x.revenue).sum();
            bump(&mut worst[3], (paid - earned).abs());

            if cfg.beta.iter().chain(&cfg.gamma).all(|&w| w == 1.0) {
                let reduced: f64 = report
                    .vehicles
                    .iter()
                    .map(|v| cfg.alpha[v.id.offset()] * v.throughput)
                    .sum::<f64>()
                    - report
                        .rsus
                        .iter()
                        .map(|x| cfg.mu[x.id.offset() - k] * x.cost)
                        .sum::<f64>();
                bump(&mut worst[5], (report.sum_payoff - reduced).abs());
            }
        }
    }
    let mut all = true;
    for (name, w) in names.iter().zip(worst) {
        let ok = w <= TOL;
        all &= ok;
        verdict(
            "3",
            name,
            ok,
            &format!("max residual {w:.3e} over 1000 configs"),
        );
    }
    assert!(all);
}

#[test]
fn ac04_oracle_equivalence() {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut worst_crate_oracle = 0.0f64;
    for _ in 0..1000 {
        let k = r.random_range(1..=3);
        let m = r.random_range(0..=5);
        let cfg = random_config(&mut r, k, m);
        let engine = Engine::new(&cfg).unwrap();
        let n = k + m;
        let s = random_coalition_with_vehicle(&mut r, k, n);
        for &i in s.vehicles(k) {
            let probs: Vec<f64> = s
                .rsus(k)
                .iter()
                .map(|j| cfg.encounter[j.offset() - k][i.offset()])
                .collect();
            let gains = engine.gain_weights(&s, i);
            let xi = engine.price_weights(&s, i);
            let (zeta, usage) = brute_relay(&probs, &gains);
            let (chi, _) = brute_relay(&probs, &xi);
            let closed_zeta = engine.rate_increase(&s, i).unwrap();
            let closed_chi = engine.expected_price(&s, i).unwrap();
            let row = engine.relay_usage_row(&s, i).unwrap();
            worst = worst
                .max((zeta - closed_zeta).abs())
                .max((chi - closed_chi).abs());
            for (a, b) in usage.iter().zip(&row) {
                worst = worst.max((a - b).abs());
            }
            let o = enumerate_relay_choice(&probs, &gains).unwrap();
            worst_crate_oracle = worst_crate_oracle.max((o.mean - zeta).abs());
            for (a, b) in o.usage.iter().zip(&usage) {
                worst_crate_oracle = worst_crate_oracle.max((a - b).abs());
            }
        }
    }
    let ok = worst <= TOL && worst_crate_oracle <= TOL;
    verdict(
        "4",
        "closed-form zeta, chi, eta against subset enumeration",
        ok,
        &format!("max abs error {worst:.3e}, library oracle {worst_crate_oracle:.3e}"),
    );
    assert!(ok);
}

#[test]
fn ac05_price_rescaling_invariance() {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut configs = vec![GameConfig::uniform(2, 2, &UniformParams::reference(0.5))];
    for _ in 0..300 {
        let (k, m) = (r.random_range(1..=4), r.random_range(0..=4));
        let mut cfg = random_config(&mut r, k, m);
        unit_payment_weights(&mut cfg);
        configs.push(cfg);
    }
    for cfg in &configs {
        let n = cfg.player_count();
        let base = Engine::new(cfg).unwrap();
        for mask in 1u64..1 << n {
            let s = coalition_from_mask(mask);
            let f = base.player_payoffs(&s).unwrap().sum_payoff;
            for factor in [0.0, 2.0, 10.0] {
                let mut scaled = cfg.clone();
                scaled.price.iter_mut().flatten().for_each(|x| *x *= factor);
                let g = Engine::new(&scaled)
                    .unwrap()
                    .player_payoffs(&s)
                    .unwrap()
                    .sum_payoff;
                worst = worst.max((f - g).abs());
                cases += 1;
            }
        }
    }
    let ok = worst <= TOL;
    verdict(
        "5",
        "coalition sum payoff unchanged by price scaling x0, x2, x10",
        ok,
        &format!("max residual {worst:.3e} over {cases} cases"),
    );
    assert!(ok);
}

#[test]
fn ac06_rsu_only_coalitions_and_normalization() {
    let mut r = rng(6);
    let mut nonzero = 0;
    let mut changed = 0;
    let mut structures = 0;
    let mut configs = vec![GameConfig::uniform(2, 2, &UniformParams::reference(0.5))];
    for _ in 0..100 {
        let (k, m) = (r.random_range(1..=3), r.random_range(1..=3));
        configs.push(random_config(&mut r, k, m));
    }
    for cfg in &configs {
        let k = cfg.vehicles;
        let n = cfg.player_count();
        let engine = Engine::new(cfg).unwrap();
        for mask in 1u64..1 << n {
            if mask & ((1 << k) - 1) != 0 {
                continue;
            }
            let report = engine.player_payoffs(&coalition_from_mask(mask)).unwrap();
            if report
                .rsus
                .iter()
                .any(|x| x.payoff != 0.0 || x.revenue != 0.0 || x.cost != 0.0)
            {
                nonzero += 1;
            }
        }
        for cs in enumerate_partitions(n).unwrap() {
            let a = structure_payoffs(&cs, cfg).unwrap();
            let b = structure_payoffs(&normalize_structure(&cs, cfg), cfg).unwrap();
            structures += 1;
            if a != b {
                changed += 1;
            }
        }
    }
    let ok_zero = nonzero == 0;
    let ok_norm = changed == 0;
    verdict(
        "6",
        "RSU-only coalitions pay exactly zero",
        ok_zero,
        &format!("{nonzero} nonzero"),
    );
    verdict(
        "6",
        "normalization preserves the payoff vector exactly",
        ok_norm,
        &format!("{changed} of {structures} structures changed"),
    );
    assert!(ok_zero && ok_norm);
}

#[test]
fn ac07_slot_simulation_cross_validation() {
    let cfg = GameConfig::uniform(2, 2, &UniformParams::reference(0.5));
    let grand = CoalitionStructure::grand(4);
    let start = Instant::now();
    let rep = simulate_slots(&grand, &cfg, 1_000_000, 7).unwrap();
    let elapsed = start.elapsed();
    let analytic = Engine::new(&cfg)
        .unwrap()
        .player_payoffs(&Coalition::grand(4))
        .unwrap();

    let mut pairs = Vec::new();
    for v in &analytic.vehicles {
        let e = &rep.vehicles[v.id.offset()];
        pairs.push((format!("T{}", v.id), e.throughput, v.throughput));
        pairs.push((format!("P{}", v.id), e.payment, v.payment));
        pairs.push((format!("u{}", v.id), e.payoff, v.payoff));
    }
    for x in &analytic.rsus {
        let e = &rep.rsus[x.id.offset() - 2];
        pairs.push((format!("R{}", x.id), e.revenue, x.revenue));
        pairs.push((format!("C{}", x.id), e.cost, x.cost));
        pairs.push((format!("u{}", x.id), e.payoff, x.payoff));
    }
    let mut all = true;
    for (name, est, exact) in &pairs {
        let ok = (est.mean - exact).abs() <= 3.0 * est.stderr;
        all &= ok;
        println!(
            "    {name}: empirical {:.6} +- {:.6}, analytic {:.6}, z = {:+.2}",
            est.mean,
            est.stderr,
            exact,
            (est.mean - exact) / est.stderr
        );
    }
    let fast = elapsed < Duration::from_secs(60);
    verdict(
        "7",
        "slot simulation within 3 standard errors of analytic values, under 1 min",
        all && fast,
        &format!("{} quantities, 10^6 slots in {elapsed:?}", pairs.len()),
    );
    assert!(all && fast);
}

#[test]
fn ac08_geometric_encounter_estimates() {
    let side = 1.0;
    let sweep = [0.1, 0.2, 0.3, 0.4, 0.5];
    let mut within = true;
    let mut monotone = true;
    let mut symmetric = true;
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for d in sweep {
        let geo = GeometryConfig {
            side_km: side,
            placement: Placement::Continuous,
            range_km: vec![d * side; 2],
            n_slots: 1_000_000,
            seed: 8,
        };
        let est = estimate_encounter_matrix(&geo, 2, 2).unwrap();
        let exact = analytic_pair_encounter(d * side, side).unwrap();
        let cells: Vec<(f64, f64)> = est
            .probability
            .iter()
            .flatten()
            .copied()
            .zip(est.stderr.iter().flatten().copied())
            .collect();
        for &(p, se) in &cells {
            within &= (p - exact).abs() <= 3.0 * se;
        }
        for a in 0..cells.len() {
            for b in a + 1..cells.len() {
                let pooled = (cells[a].1.powi(2) + cells[b].1.powi(2)).sqrt();
                symmetric &= (cells[a].0 - cells[b].0).abs() <= 4.0 * pooled;
            }
        }
        if let Some(prev) = &prev {
            for (row, prow) in est.probability.iter().zip(prev) {
                for (x, y) in row.iter().zip(prow) {
                    monotone &= x >= y;
                }
            }
        }
        println!(
            "    d = {d}: closed form {exact:.6}, estimates {:?}",
            est.probability
        );
        prev = Some(est.probability);
    }
    verdict(
        "8",
        "estimates within 3 standard errors of the closed form",
        within,
        "",
    );
    verdict("8", "estimates nondecreasing in d", monotone, "");
    verdict(
        "8",
        "pairs agree within 4 pooled standard errors",
        symmetric,
        "",
    );
    assert!(within && monotone && symmetric);
}

fn sweep_payoffs(label: &str, cfg: &GameConfig<f64>) -> Vec<f64> {
    structure_payoffs(&labelled_structure(label).unwrap(), cfg)
        .unwrap()
        .0
}

fn sweep_configs() -> Vec<(f64, GameConfig<f64>)> {
    let sc = default_scenario();
    let geo = sc.geometry.as_ref().expect("default scenario has geometry");
    geo.d_sweep
        .iter()
        .map(|&d| {
            (
                d,
                with_symmetric_encounter(&sc.game, d, geo.config.side_km).unwrap(),
            )
        })
        .collect()
}

#[test]
fn ac09a_grand_coalition_best_for_everyone() {
    let mut failures = Vec::new();
    for (d, cfg) in sweep_configs() {
        let grand = sweep_payoffs("C1", &cfg);
        for label in ["C2", "C3", "C4", "C5", "C6", "C7"] {
            let other = sweep_payoffs(label, &cfg);
            for (p, (g, o)) in grand.iter().zip(&other).enumerate() {
                if *g < o - TOL {
                    failures.push(format!("d={d} {label} player {}: {o:.4} > {g:.4}", p + 1));
                }
            }
        }
    }
    let ok = failures.is_empty();
    verdict(
        "9a",
        "every payoff in C1 at least its payoff in C2..C7 at every d",
        ok,
        &failures.join("; "),
    );
    assert!(ok, "{failures:#?}");
}

#[test]
fn ac09b_grand_coalition_ordering() {
    let mut ok = true;
    for (_, cfg) in sweep_configs() {
        let u = sweep_payoffs("C1", &cfg);
        ok &= u[0] > u[1] && (u[2] - u[3]).abs() <= TOL;
    }
    verdict("9b", "u1 > u2 and u3 = u4 in C1", ok, "");
    assert!(ok);
}

#[test]
fn ac09c_vehicle_pair_against_singletons() {
    let mut ok = true;
    for (_, cfg) in sweep_configs() {
        let c3 = sweep_payoffs("C3", &cfg);
        let c4 = sweep_payoffs("C4", &cfg);
        ok &= (1..4).all(|p| (c3[p] - c4[p]).abs() <= TOL) && c3[0] > c4[0];
    }
    verdict(
        "9c",
        "u2, u3, u4 equal in C3 and C4; u1 larger in C3",
        ok,
        "",
    );
    assert!(ok);
}

#[test]
fn ac09d_payoffs_positive() {
    let mut bad = Vec::new();
    for (d, cfg) in sweep_configs() {
        for label in ["C1", "C2", "C3", "C4", "C5", "C6", "C7"] {
            let cs = labelled_structure(label).unwrap();
            let u = structure_payoffs(&cs, &cfg).unwrap();
            for c in cs.coalitions() {
                let with_vehicle = !c.vehicles(cfg.vehicles).is_empty();
                for &p in c.members() {
                    let x = u.get(p);
                    let fine = if with_vehicle { x > 0.0 } else { x == 0.0 };
                    if !fine {
                        bad.push(format!("d={d} {label} player {p}: {x}"));
                    }
                }
            }
        }
    }
    let ok = bad.is_empty();
    verdict(
        "9d",
        "payoffs positive for every player cooperating with a vehicle (isolated RSUs exactly 0)",
        ok,
        &bad.join("; "),
    );
    assert!(ok);
}

#[test]
fn ac10a_sufficient_conditions_hold_for_default() {
    let cfg = default_scenario().game;
    let c = core_sufficient_conditions(&cfg).unwrap();
    let ok = c.all_hold();
    verdict(
        "10a",
        "sufficient conditions for a non-empty core hold on the default scenario",
        ok,
        &format!("{c:?}"),
    );
    assert!(ok, "{c:?}");
}

#[test]
fn ac10b_grand_vector_in_core() {
    let cfg = default_scenario().game;
    let grand = structure_payoffs(&CoalitionStructure::grand(4), &cfg).unwrap();
    let m = core_membership(&grand.0, &cfg).unwrap();
    let ok = m == Membership::Unblocked;
    verdict(
        "10b",
        "grand-coalition payoff vector unblocked by all 14 proper coalitions",
        ok,
        &format!("{:?}", grand.0),
    );
    assert!(ok);
}

#[test]
fn ac10c_sufficient_conditions_are_sound() {
    let mut r = rng(10);
    let (mut accepted, mut counterexamples, mut tried) = (0, 0, 0);
    while accepted < 200 && tried < 200_000 {
        tried += 1;
        let k = r.random_range(1..=3);
        let m = r.random_range(0..=2);
        if k + m < 2 {
            continue;
        }
        let mut cfg = random_config(&mut r, k, m);
        // RSU-independent gains make relaying attractive more often.
        for row in cfg.rate_gain.iter_mut() {
            let g = row.first().copied().unwrap_or(0.0);
            row.iter_mut().for_each(|x| *x = g);
        }
        if !core_sufficient_conditions(&cfg).unwrap().all_hold() {
            continue;
        }
        accepted += 1;
        let grand = structure_payoffs(&CoalitionStructure::grand(k + m), &cfg).unwrap();
        if !core_membership(&grand.0, &cfg).unwrap().is_core_member() {
            counterexamples += 1;
        }
    }
    let ok = accepted == 200 && counterexamples == 0;
    verdict(
        "10c",
        "conditions imply core membership on 200 random configurations",
        ok,
        &format!("{accepted} accepted of {tried} drawn, {counterexamples} counterexamples"),
    );
    assert!(ok);
}

#[test]
fn ac11_vehicle_coalition_profitability() {
    let mut r = rng(11);

    let mut weak_fail = 0;
    let mut checked = 0;
    for _ in 0..100 {
        let k = r.random_range(1..=6);
        let mut cfg = random_config(&mut r, k, 0);
        let p = r.random::<f64>();
        cfg.activity = vec![p; k];
        for mask in 1u64..1 << k {
            for (_, v) in vehicle_coalition_profitability(&coalition_from_mask(mask), &cfg).unwrap()
            {
                checked += 1;
                if !v.is_profitable() {
                    weak_fail += 1;
                }
            }
        }
    }
    let ok_equal = weak_fail == 0;
    verdict(
        "11",
        "equal activity: every member of every vehicle coalition weakly profits",
        ok_equal,
        &format!("{weak_fail} of {checked} unprofitable"),
    );

    // exact arithmetic so that ties are decided without tolerance
    let mut disagree = 0;
    for _ in 0..1000 {
        let k = r.random_range(1..=6);
        let mut cfg = random_config(&mut r, k, 0);
        for p in cfg.activity.iter_mut() {
            *p = r.random_range(1..=19) as f64 / 20.0;
        }
        for a in cfg.alpha.iter_mut().chain(cfg.beta.iter_mut()) {
            *a = r.random_range(1..=10) as f64;
        }
        let exact = cfg.map(|x| Rational::approximate_float(x).unwrap());
        let engine = Engine::new(&exact).unwrap();
        let s = coalition_from_mask(r.random_range(1..1u64 << k));
        for (i, v) in vehicle_coalition_profitability(&s, &exact).unwrap() {
            let joined = engine.player_payoffs(&s).unwrap().payoff_of(i).unwrap();
            let alone = engine
                .player_payoffs(&Coalition::new([i]).unwrap())
                .unwrap()
                .payoff_of(i)
                .unwrap();
            let direct = match joined.cmp(&alone) {
                std::cmp::Ordering::Greater => Profitability::Strict,
                std::cmp::Ordering::Equal => Profitability::Indifferent,
                std::cmp::Ordering::Less => Profitability::Unprofitable,
            };
            if direct != v {
                disagree += 1;
            }
        }
    }
    let ok_agree = disagree == 0;
    verdict(
        "11",
        "checker agrees with direct payoff comparison on 1000 coalitions",
        ok_agree,
        &format!("{disagree} disagreements"),
    );
    assert!(ok_equal && ok_agree);
}

#[test]
fn ac_reference_singletons() {
    let cfg = default_scenario().game;
    let u = structure_payoffs(&labelled_structure("C4").unwrap(), &cfg).unwrap();
    let ok = (u.get(id(1)) - 2.4).abs() <= TOL
        && (u.get(id(2)) - 2.4).abs() <= TOL
        && u.get(id(3)) == 0.0
        && u.get(id(4)) == 0.0;
    verdict(
        "ref",
        "singleton payoffs 2.4, 2.4, 0, 0",
        ok,
        &format!("{:?}", u.0),
    );
    assert!(ok);
}

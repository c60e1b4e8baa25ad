mod common;

use coop_ht::error::Error;
use coop_ht::prob::{CondPmf, Pmf};
use coop_ht::sim::*;
use coop_ht::solver::AuxiliarySystem;
use proptest::prelude::*;

use common::fig_source;

const P_FLIP: f64 = 0.75;
const Q_FLIP: f64 = 0.95;
const C: f64 = 0.2;

/// `U1` constant, `U2 = X2 ⊕ Bern(C)`.
fn small_aux() -> AuxiliarySystem {
    let one = Pmf::point_mass(1, 0).unwrap();
    AuxiliarySystem::new(CondPmf::constant(2, &one).unwrap(), CondPmf::bsc(C).unwrap()).unwrap()
}

fn typical(seqs: &[&[u8]], probs: &[f64], mu: f64) -> bool {
    let n = seqs[0].len();
    let mut counts = vec![0usize; probs.len()];
    for j in 0..n {
        counts[seqs.iter().fold(0, |acc, s| acc * 2 + s[j] as usize)] += 1;
    }
    counts.iter().zip(probs).all(|(&c, &p)| if p == 0.0 { c == 0 } else { (c as f64 / n as f64 - p).abs() <= mu })
}

fn bits(v: usize, n: usize) -> Vec<u8> {
    (0..n).rev().map(|k| ((v >> k) & 1) as u8).collect()
}

fn seq_prob(seq: &[u8], p1: f64) -> f64 {
    seq.iter().map(|&v| if v == 1 { p1 } else { 1.0 - p1 }).product()
}

/// Exact `(α, β)` of a fixed codebook pair for the binary example with the
/// auxiliaries of [`small_aux`], by summing over every block.
fn exact_errors(scheme: &Scheme, n: usize, epsilon: f64, mu: f64) -> (f64, f64) {
    let blocks: Vec<Vec<u8>> = (0..1usize << n).map(|v| bits(v, n)).collect();
    let px1 = [0.5, 0.5];
    // (U1, U2, X2) with U1 constant: P(x2) B(u2|x2), cell index u2*2 + x2
    let bsc = |flip: f64, a: usize, b: usize| if a == b { 1.0 - flip } else { flip };
    let p_u2x2: Vec<f64> = (0..4).map(|k| 0.5 * bsc(C, k % 2, k / 2)).collect();
    let p_u2y: Vec<f64> = (0..4)
        .map(|k| (0..2).map(|x2| 0.5 * bsc(C, x2, k / 2) * bsc(Q_FLIP, x2, k % 2)).sum())
        .collect();

    let p_typ: f64 = blocks.iter().filter(|x| typical(&[x], &px1, mu)).map(|x| seq_prob(x, 0.5)).sum();
    let coin = ((epsilon - mu) / p_typ).min(1.0);

    let cb1 = scheme.codebook1();
    let cb2 = scheme.codebook2();
    let zeros = vec![0u8; n];
    // every U1 codeword is all zeros, so typicality with (u1, ·) reduces to
    // typicality of the remaining sequences
    assert!((1..=cb1.count()).all(|m| cb1.entry(m) == &zeros[..]));

    let (mut accept_h0, mut accept_h1) = (0.0, 0.0);
    for x1 in &blocks {
        let not_in_sn = if typical(&[x1], &px1, mu) { 1.0 - coin } else { 1.0 };
        // every codeword of C_U1 is jointly typical with x1 iff x1 is typical
        if !typical(&[x1], &px1, mu) {
            continue;
        }
        let w1 = not_in_sn * seq_prob(x1, 0.5);
        for x2 in &blocks {
            let p_x2_given_x1: f64 = x1.iter().zip(x2).map(|(&a, &b)| bsc(P_FLIP, a as usize, b as usize)).product();
            for y in &blocks {
                let p_y_given_x2: f64 = x2.iter().zip(y).map(|(&a, &b)| bsc(Q_FLIP, a as usize, b as usize)).product();
                let mut pass = 0.0;
                for m1 in 1..=cb1.count() {
                    let matches: Vec<usize> = (1..=cb2.count())
                        .filter(|&m2| typical(&[cb2.entry(m1, m2), x2], &p_u2x2, mu))
                        .collect();
                    if matches.is_empty() {
                        continue;
                    }
                    let ok = matches.iter().filter(|&&m2| typical(&[cb2.entry(m1, m2), y], &p_u2y, mu)).count();
                    pass += ok as f64 / matches.len() as f64;
                }
                pass /= cb1.count() as f64;
                accept_h0 += w1 * p_x2_given_x1 * p_y_given_x2 * pass;
                // under H1, y is independent of (x1, x2) with P_Y uniform
                accept_h1 += w1 * p_x2_given_x1 * seq_prob(y, 0.5) * pass;
            }
        }
    }
    (1.0 - accept_h0, accept_h1)
}

#[test]
fn monte_carlo_matches_exhaustive_errors() {
    let s = fig_source();
    let (n, epsilon, mu) = (6, 0.5, 0.2);
    let mut cfg = SimConfig::new(n, epsilon, small_aux(), 100_000, 42);
    cfg.mu = Some(mu);
    let sim = Simulation::new(&s, &cfg).unwrap();
    assert!(sim.scheme().codebook1().count() <= 4 && sim.scheme().codebook2().count() <= 16);
    let (alpha, beta) = exact_errors(sim.scheme(), n, epsilon, mu);
    let r = sim.run().unwrap();
    let se_a = (alpha * (1.0 - alpha) / 1e5).sqrt();
    let se_b = (beta * (1.0 - beta) / 1e5).sqrt();
    assert!((r.alpha_hat - alpha).abs() <= 3.0 * se_a, "alpha {} vs exact {alpha}", r.alpha_hat);
    assert!((r.beta_hat - beta).abs() <= 3.0 * se_b, "beta {} vs exact {beta}", r.beta_hat);
    assert!(beta > 0.0 && alpha < 1.0);
}

#[test]
fn sn_measure_window_by_enumeration() {
    let sn = SubsetSn::build(
        &Pmf::uniform(2).unwrap(),
        10,
        0.07,
        0.01,
        SnMode::Enumerate,
        Typicality::Absolute,
        0,
    )
    .unwrap();
    // recount the members directly
    let mut measure = 0.0;
    for v in 0..1024usize {
        let seq = bits(v, 10);
        measure += sn.membership_probability(&seq).unwrap() / 1024.0;
    }
    assert!((measure - sn.measure()).abs() < 1e-12);
    assert!(measure <= 0.06 && measure >= 0.06 - 2f64.powi(-10), "measure {measure}");
}

#[test]
fn flags_force_rejection() {
    let s = fig_source();
    let mut cfg = SimConfig::new(6, 0.5, small_aux(), 1, 3);
    cfg.mu = Some(0.2);
    let sc = Scheme::new(&s, &cfg).unwrap();
    let one = string_of_int(1).unwrap();
    for v in 0..64usize {
        let y = bits(v, 6);
        assert_eq!(sc.decide(&y, &BitString::flag(), &one).unwrap(), 1);
        assert_eq!(sc.decide(&y, &one, &BitString::flag()).unwrap(), 1);
    }
}

#[test]
fn codebook_guard_names_sizes() {
    let s = fig_source();
    let cfg = SimConfig::new(64, 0.07, AuxiliarySystem::identity(2, 2), 10, 0);
    match run_monte_carlo(&s, &cfg) {
        Err(Error::Guard(m)) => assert!(m.contains("|C_U2(m1)|")),
        other => panic!("expected a guard error, got {other:?}"),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let s = fig_source();
    let mut cfg = SimConfig::new(8, 0.07, small_aux(), 10, 0);
    cfg.mu = Some(0.08);
    assert!(matches!(run_monte_carlo(&s, &cfg), Err(Error::Domain(_))));
    cfg.mu = None;
    cfg.trials = 0;
    assert!(run_monte_carlo(&s, &cfg).is_err());
    let mut cfg = SimConfig::new(30, 0.07, small_aux(), 10, 0);
    cfg.s_n_mode = SnMode::Enumerate;
    assert!(matches!(run_monte_carlo(&s, &cfg), Err(Error::Usage(_))));
}

#[test]
fn config_round_trips_through_json() {
    let cfg = SimConfig::new(16, 0.07, small_aux(), 100, 5);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: SimConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    assert!((back.mu() - 0.0175).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn report_invariants(n in 8usize..24, seed in any::<u64>(), c in 0.15f64..0.45) {
        let s = fig_source();
        let one = Pmf::point_mass(1, 0).unwrap();
        let aux = AuxiliarySystem::new(CondPmf::constant(2, &one).unwrap(), CondPmf::bsc(c).unwrap()).unwrap();
        let (epsilon, mu) = (0.3, 0.1);
        let mut cfg = SimConfig::new(n, epsilon, aux, 2000, seed);
        cfg.mu = Some(mu);
        let r = run_monte_carlo(&s, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.alpha_hat) && (0.0..=1.0).contains(&r.beta_hat));
        prop_assert_eq!(r.paths_h0.total(), 2000);
        prop_assert_eq!(r.paths_h1.total(), 2000);
        prop_assert!(r.mean_len1 >= 1.0 && r.mean_len2 >= 1.0);
        let nf = n as f64;
        let bound1 = (epsilon - mu) + (1.0 - epsilon + mu) * (nf * (r.i_u1_x1 + mu) + 1.0);
        let bound2 = (epsilon - mu) + (1.0 - epsilon + mu) * (nf * (r.i_u2_x2_given_u1 + mu) + 1.0);
        prop_assert!(r.mean_len1 <= bound1 + 3.0 * r.mean_len1_se + 1e-9);
        prop_assert!(r.mean_len2 <= bound2 + 3.0 * r.mean_len2_se + 1e-9);
        let again = run_monte_carlo(&s, &cfg).unwrap();
        prop_assert_eq!(again, r);
    }

    #[test]
    fn string_of_int_round_trips(m in 1u64..u64::MAX) {
        let b = string_of_int(m).unwrap();
        prop_assert_eq!(b.dec(), m);
        prop_assert!(!b.is_flag());
        prop_assert_eq!(b.len() as u32, 64 - m.leading_zeros());
    }
}

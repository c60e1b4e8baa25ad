mod common;

use coop_ht::prob::mutual_information;
use coop_ht::solver::*;
use coop_ht::source::{binary_example, BinaryExampleParams};
use proptest::prelude::*;

use common::{fig_source, h2};

fn quick() -> SolverConfig {
    SolverConfig { restarts: 6, max_iters: 200, u1_size: Some(2), u2_size: Some(2), ..Default::default() }
}

#[test]
fn ample_rates_reach_saturation() {
    let s = fig_source();
    let r = fixed_length_exponent(&s, RatePair::new(1.0, 0.82).unwrap(), &SolverConfig::default()).unwrap();
    assert!((r.theta - 0.7136).abs() < 2e-3, "theta {}", r.theta);
    assert!(r.feasible);
}

#[test]
fn zero_rates_give_zero() {
    let r = fixed_length_exponent(&fig_source(), RatePair::new(0.0, 0.0).unwrap(), &quick()).unwrap();
    assert!(r.theta.abs() < 1e-9, "{r:?}");
}

#[test]
fn single_sensor_rate_matches_bsc_oracle() {
    // With R1 = 0 only U2 -- X2 -- Y matters; for symmetric binary sources
    // the optimum at I(U2;X2) = R is the BSC test channel, which gives
    // 1 - h(c * (1 - 2q) + q) with h(c) = 1 - R and a crossover q = 0.95.
    let s = fig_source();
    let r2: f64 = 0.4;
    let mut lo = 0.0;
    let mut hi = 0.5;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - h2(mid) > r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let oracle = 1.0 - h2(c * (1.0 - 2.0 * 0.95) + 0.95);
    let r = fixed_length_exponent(&s, RatePair::new(0.0, r2).unwrap(), &quick()).unwrap();
    assert!(r.feasible);
    assert!((r.theta - oracle).abs() < 1e-4, "theta {} oracle {oracle}", r.theta);
}

#[test]
fn variable_length_is_fixed_length_at_boosted_rates() {
    let s = fig_source();
    let cfg = quick();
    for &(r1, r2) in &[(0.0, 0.0), (0.3, 0.6), (1.2, 0.3)] {
        let vl = variable_length_exponent(&s, RatePair::new(r1, r2).unwrap(), 0.07, &cfg).unwrap();
        let fl = fixed_length_exponent(&s, RatePair::new(r1 / 0.93, r2 / 0.93).unwrap(), &cfg).unwrap();
        assert_eq!(vl.theta.to_bits(), fl.theta.to_bits());
        assert_eq!(vl.achieving, fl.achieving);
    }
}

#[test]
fn epsilon_outside_unit_interval_is_rejected() {
    let s = fig_source();
    let rates = RatePair::new(0.5, 0.5).unwrap();
    for eps in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(variable_length_exponent(&s, rates, eps, &quick()).is_err());
    }
}

#[test]
fn solver_dominates_grid_oracle() {
    let cfg = quick();
    for (a, p, q, r1, r2) in [(0.5, 0.75, 0.95, 0.3, 0.3), (0.3, 0.2, 0.1, 0.2, 0.4)] {
        let s = binary_example(BinaryExampleParams::new(a, p, q).unwrap()).unwrap();
        let rates = RatePair::new(r1, r2).unwrap();
        let ours = fixed_length_exponent(&s, rates, &cfg).unwrap();
        let grid = brute_force_exponent(&s, rates, 0.1, 2, 2).unwrap();
        assert!(grid.feasible);
        assert!(ours.theta >= grid.theta - 1e-3, "{} < {}", ours.theta, grid.theta);
    }
}

#[test]
fn envelope_reports_best_split() {
    let s = fig_source();
    let env = sum_rate_envelope(&s, 0.6, RateModel::Fixed, 4, &quick()).unwrap();
    assert_eq!(env.points.len(), 4);
    assert!((env.points[3].r1 - 0.6).abs() < 1e-15 && env.points[3].r2 == 0.0);
    assert!(env.points.iter().all(|p| p.theta <= env.max()));
    assert!(sum_rate_envelope(&s, 0.6, RateModel::Fixed, 1, &quick()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_properties(r1 in 0.0f64..1.2, r2 in 0.0f64..1.2, extra in 0.05f64..0.4) {
        let s = fig_source();
        let cfg = quick();
        let base = fixed_length_exponent(&s, RatePair::new(r1, r2).unwrap(), &cfg).unwrap();
        let more = fixed_length_exponent(&s, RatePair::new(r1 + extra, r2 + extra).unwrap(), &cfg).unwrap();
        let bound = mutual_information(&s.null_joint(), &[1], &[2]).unwrap();

        prop_assert!(base.feasible);
        prop_assert!(base.i_u1_x1 <= r1 + 1e-6 && base.i_u2_x2_given_u1 <= r2 + 1e-6);
        prop_assert!(base.theta >= -1e-12 && base.theta <= bound + 1e-9);
        prop_assert!(more.theta >= base.theta - 1e-4);

        let (i1, i2, theta) = evaluate(&base.achieving, &s).unwrap();
        prop_assert_eq!((i1, i2, theta), (base.i_u1_x1, base.i_u2_x2_given_u1, base.theta));

        let vl = variable_length_exponent(&s, RatePair::new(r1, r2).unwrap(), 0.07, &cfg).unwrap();
        prop_assert!(vl.theta >= base.theta - 1e-6);
    }
}

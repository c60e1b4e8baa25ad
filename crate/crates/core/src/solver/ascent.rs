//! Multi-start projected gradient ascent with an exterior quadratic penalty
//! on the two rate constraints, followed by a feasibility-restoration step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::objective::{Objective, Terms};
use super::{AuxiliarySystem, ExponentResult, RatePair, SolverConfig};
use crate::error::Result;
use crate::source::SourceModel;

/// Sufficient-increase constant for the Armijo test.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1e3;
/// Restored points are accepted when the constraint holds to this slack.
const THETA_TIE: f64 = 1e-12;

/// Euclidean projection of `v` onto the probability simplex, in place.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - tau).max(0.0));
}

#[derive(Clone)]
struct Point {
    a: Vec<f64>,
    b: Vec<f64>,
}

struct Stage<'a> {
    obj: &'a Objective,
    rates: RatePair,
    weight: f64,
}

impl Stage<'_> {
    fn violations(&self, t: &Terms) -> (f64, f64) {
        ((t.i1 - self.rates.r1).max(0.0), (t.i2 - self.rates.r2).max(0.0))
    }

    fn value(&self, t: &Terms) -> f64 {
        let (v1, v2) = self.violations(t);
        t.theta - self.weight * (v1 * v1 + v2 * v2)
    }

    fn value_at(&self, p: &Point) -> f64 {
        self.value(&self.obj.terms(&p.a, &p.b))
    }

    fn value_and_gradient(&self, p: &Point) -> (f64, Point) {
        let t = self.obj.terms(&p.a, &p.b);
        let (v1, v2) = self.violations(&t);
        let weights = [-2.0 * self.weight * v1, -2.0 * self.weight * v2, 1.0];
        let (t, g) = self.obj.gradient(&p.a, &p.b, weights);
        (self.value(&t), Point { a: g.a, b: g.b })
    }

    fn project(&self, p: &mut Point) {
        p.a.chunks_mut(self.obj.nu1).for_each(project_simplex);
        p.b.chunks_mut(self.obj.nu2).for_each(project_simplex);
    }

    fn run(&self, mut x: Point, cfg: &SolverConfig) -> Point {
        let (mut f, mut g) = self.value_and_gradient(&x);
        let mut step = cfg.initial_step;
        for _ in 0..cfg.max_iters {
            let mut accepted = None;
            while step >= MIN_STEP {
                let mut y = Point {
                    a: x.a.iter().zip(&g.a).map(|(v, d)| v + step * d).collect(),
                    b: x.b.iter().zip(&g.b).map(|(v, d)| v + step * d).collect(),
                };
                self.project(&mut y);
                let ascent: f64 = y.a.iter().zip(&x.a).zip(&g.a).map(|((n, o), d)| (n - o) * d).sum::<f64>()
                    + y.b.iter().zip(&x.b).zip(&g.b).map(|((n, o), d)| (n - o) * d).sum::<f64>();
                let fy = self.value_at(&y);
                if fy >= f + ARMIJO * ascent && ascent >= 0.0 {
                    accepted = Some((y, fy));
                    break;
                }
                step *= cfg.backtrack;
            }
            let Some((y, fy)) = accepted else { break };
            let gain = fy - f;
            if gain <= cfg.tolerance * (1.0 + f.abs()) {
                x = y;
                break;
            }
            let (f_new, g_new) = self.value_and_gradient(&y);
            step = bb_step(&x, &y, &g, &g_new);
            x = y;
            f = f_new;
            g = g_new;
        }
        x
    }
}

/// Barzilai-Borwein step `s·s / -(s·Δg)` for the ascent, clamped to
/// `[MIN_STEP, MAX_STEP]`; falls back to `MAX_STEP` on nonnegative curvature.
fn bb_step(x: &Point, y: &Point, g: &Point, g_new: &Point) -> f64 {
    let mut ss = 0.0;
    let mut sy = 0.0;
    for (((xn, xo), gn), go) in y.a.iter().chain(&y.b).zip(x.a.iter().chain(&x.b)).zip(g_new.a.iter().chain(&g_new.b)).zip(g.a.iter().chain(&g.b)) {
        let d = xn - xo;
        ss += d * d;
        sy += d * (gn - go);
    }
    if sy < 0.0 {
        (ss / -sy).clamp(MIN_STEP, MAX_STEP)
    } else {
        MAX_STEP
    }
}

/// Smallest mixing weight `t` such that `constraint((1-t)·from + t·to) <= limit`.
/// Assumes the constraint holds at `t = 1`.
fn bisect_mix(from: &[f64], to: &[f64], limit: f64, constraint: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mix = |t: f64| -> Vec<f64> { from.iter().zip(to).map(|(f, c)| (1.0 - t) * f + t * c).collect() };
    if constraint(from) <= limit {
        return from.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if constraint(&mix(mid)) <= limit {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    mix(hi)
}

/// Pulls `P(u1|x1)` towards the channel whose rows all equal `P(u1)`, then
/// `P(u2|u1,x2)` towards `P(u2|u1)`, until both constraints hold. Each
/// target makes its own constraint exactly zero.
fn restore(obj: &Objective, s: &SourceModel, rates: RatePair, x: Point) -> Point {
    let (nx1, nx2, nu1, nu2) = (obj.nx1, obj.nx2, obj.nu1, obj.nu2);
    let px1 = s.px1();
    let pxx = s.px1x2().probs();

    let mut pu1 = vec![0.0; nu1];
    for x1 in 0..nx1 {
        for u1 in 0..nu1 {
            pu1[u1] += px1.get(x1) * x.a[x1 * nu1 + u1];
        }
    }
    let flat_a: Vec<f64> = pu1.repeat(nx1);
    let a = bisect_mix(&x.a, &flat_a, rates.r1, |a| obj.terms(a, &x.b).i1);

    // P(x2|u1) under the restored first channel
    let mut px2u1 = vec![0.0; nu1 * nx2];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for u1 in 0..nu1 {
                px2u1[u1 * nx2 + x2] += pxx[x1 * nx2 + x2] * a[x1 * nu1 + u1];
            }
        }
    }
    let mut flat_b = vec![0.0; x.b.len()];
    for u1 in 0..nu1 {
        let mass: f64 = px2u1[u1 * nx2..(u1 + 1) * nx2].iter().sum();
        let mut row = vec![0.0; nu2];
        for x2 in 0..nx2 {
            let w = if mass > 0.0 { px2u1[u1 * nx2 + x2] / mass } else { 1.0 / nx2 as f64 };
            for u2 in 0..nu2 {
                row[u2] += w * x.b[(u1 * nx2 + x2) * nu2 + u2];
            }
        }
        for x2 in 0..nx2 {
            flat_b[(u1 * nx2 + x2) * nu2..(u1 * nx2 + x2 + 1) * nu2].copy_from_slice(&row);
        }
    }
    let b = bisect_mix(&x.b, &flat_b, rates.r2, |b| obj.terms(&a, b).i2);
    Point { a, b }
}

fn identity_like(obj: &Objective) -> Point {
    let (nx1, nx2, nu1, nu2) = (obj.nx1, obj.nx2, obj.nu1, obj.nu2);
    let mut a = vec![0.0; obj.a_len()];
    for x1 in 0..nx1 {
        a[x1 * nu1 + x1.min(nu1 - 1)] = 1.0;
    }
    let mut b = vec![0.0; obj.b_len()];
    for u1 in 0..nu1 {
        for x2 in 0..nx2 {
            let row = u1 * nx2 + x2;
            b[row * nu2 + row.min(nu2 - 1)] = 1.0;
        }
    }
    Point { a, b }
}

fn uniform_point(obj: &Objective) -> Point {
    Point {
        a: vec![1.0 / obj.nu1 as f64; obj.a_len()],
        b: vec![1.0 / obj.nu2 as f64; obj.b_len()],
    }
}

fn dirichlet_rows(rng: &mut ChaCha8Rng, len: usize, width: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    for row in v.chunks_mut(width) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    v
}

fn initial_point(obj: &Objective, seed: u64, restart: usize) -> Point {
    match restart {
        0 => identity_like(obj),
        1 => uniform_point(obj),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let a = dirichlet_rows(&mut rng, obj.a_len(), obj.nu1);
            let b = dirichlet_rows(&mut rng, obj.b_len(), obj.nu2);
            Point { a, b }
        }
    }
}

fn single_restart(obj: &Objective, s: &SourceModel, rates: RatePair, cfg: &SolverConfig, restart: usize) -> (Point, Terms) {
    let mut x = initial_point(obj, cfg.seed, restart);
    let mut weight = cfg.penalty_initial;
    for _ in 0..cfg.penalty_stages {
        x = Stage { obj, rates, weight }.run(x, cfg);
        weight *= cfg.penalty_growth;
    }
    let x = restore(obj, s, rates, x);
    let t = obj.terms(&x.a, &x.b);
    (x, t)
}

pub(crate) fn solve(s: &SourceModel, rates: RatePair, cfg: &SolverConfig) -> Result<ExponentResult> {
    let (nu1, nu2) = cfg.alphabet_sizes(s);
    let obj = Objective::new(s, nu1, nu2);
    let runs: Vec<(Point, Terms)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| single_restart(&obj, s, rates, cfg, r))
        .collect();

    let mut best = 0;
    for (r, (_, t)) in runs.iter().enumerate().skip(1) {
        if t.theta > runs[best].1.theta + THETA_TIE {
            best = r;
        }
    }
    let (x, _) = runs.into_iter().nth(best).expect("at least one restart");
    let aux = AuxiliarySystem::from_tables(obj.nx1, nu1, obj.nx2, nu2, x.a, x.b)?;
    ExponentResult::from_aux(aux, s, rates, cfg.restarts, best)
}

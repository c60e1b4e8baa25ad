//! Exhaustive grid search over auxiliary channels, used to validate the
//! ascent solver on small alphabets.
//!
//! Every channel row is restricted to `{k/K : k = 0..K}` with `K = round(1/δ)`.
//! For a fixed `P(u1|x1)` both `I(U2;X2|U1)` and `I(U2;Y|U1)` split into
//! per-`u1` contributions, so the `P(u2|u1,x2)` rows for different `u1`
//! are enumerated separately and combined over their Pareto fronts. The
//! result is the exact maximum over the grid.

use super::{AuxiliarySystem, ExponentResult, RatePair};
use crate::error::{Error, Result};
use crate::prob::mi_table;
use crate::source::SourceModel;

/// Nominal grid size above which the oracle refuses to run.
pub const GRID_GUARD: f64 = 1e8;
const FEAS_TOL: f64 = 1e-12;

/// All rows `(k_1/K, .., k_m/K)` with `Σ k_i = K`.
fn grid_rows(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in (0..=left).rev() {
            cur.push(i);
            rec(left - i, m - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::with_capacity(m), &mut out);
    out.into_iter()
        .map(|r| r.into_iter().map(|c| c as f64 / k as f64).collect())
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Advances a mixed-radix counter; returns false after wrapping around.
fn odometer(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Clone, Copy)]
struct FrontPoint {
    cost: f64,
    gain: f64,
    choice: usize,
}

fn pareto(mut pts: Vec<FrontPoint>) -> Vec<FrontPoint> {
    pts.sort_by(|x, y| x.cost.total_cmp(&y.cost).then(y.gain.total_cmp(&x.gain)).then(x.choice.cmp(&y.choice)));
    let mut front: Vec<FrontPoint> = Vec::new();
    for p in pts {
        if front.last().is_none_or(|l| p.gain > l.gain) {
            front.push(p);
        }
    }
    front
}

fn best_combination(fronts: &[Vec<FrontPoint>], budget: f64) -> Option<(f64, Vec<usize>)> {
    fn rec(
        fronts: &[Vec<FrontPoint>],
        depth: usize,
        budget: f64,
        gain: f64,
        picked: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if depth == fronts.len() {
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                *best = Some((gain, picked.clone()));
            }
            return;
        }
        for (i, p) in fronts[depth].iter().enumerate() {
            if p.cost > budget + FEAS_TOL {
                break;
            }
            picked.push(i);
            rec(fronts, depth + 1, budget - p.cost, gain + p.gain, picked, best);
            picked.pop();
        }
    }
    let mut best = None;
    rec(fronts, 0, budget, 0.0, &mut Vec::new(), &mut best);
    best
}

/// Best feasible grid point for the fixed-length problem at the given rates
/// and auxiliary alphabet sizes.
pub fn brute_force_exponent(
    s: &SourceModel,
    rates: RatePair,
    grid_resolution: f64,
    u1_size: usize,
    u2_size: usize,
) -> Result<ExponentResult> {
    if !(grid_resolution > 0.0 && grid_resolution <= 0.5) {
        return Err(Error::Usage(format!("grid resolution {grid_resolution} outside (0, 0.5]")));
    }
    if u1_size == 0 || u2_size == 0 {
        return Err(Error::Usage("auxiliary alphabet sizes must be positive".into()));
    }
    let rates = RatePair::new(rates.r1, rates.r2)?;
    let (nx1, nx2, ny) = (s.x1_size(), s.x2_size(), s.y_size());
    let k = (1.0 / grid_resolution).round() as usize;
    let n_rows_a = binomial(k + u1_size - 1, u1_size - 1);
    let n_rows_b = binomial(k + u2_size - 1, u2_size - 1);
    let nominal = n_rows_a.powi(nx1 as i32) * n_rows_b.powi((u1_size * nx2) as i32);
    if nominal >= GRID_GUARD {
        return Err(Error::Guard(format!(
            "grid oracle would enumerate {nominal:.3e} points (limit {GRID_GUARD:.0e}); \
             shrink the auxiliary alphabets (now {u1_size}, {u2_size}) or coarsen the grid"
        )));
    }

    let rows_a = grid_rows(k, u1_size);
    let rows_b = grid_rows(k, u2_size);
    let pxx = s.px1x2().probs();
    let w = s.py_given_x2();

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut idx_a = vec![0usize; nx1];
    loop {
        let a: Vec<f64> = idx_a.iter().flat_map(|&i| rows_a[i].iter().copied()).collect();
        // [u1][x1], [u1][x2], [u1][y]
        let mut p_u1x1 = vec![0.0; u1_size * nx1];
        let mut p_u1x2 = vec![0.0; u1_size * nx2];
        let mut p_u1y = vec![0.0; u1_size * ny];
        for x1 in 0..nx1 {
            for u1 in 0..u1_size {
                let av = a[x1 * u1_size + u1];
                for x2 in 0..nx2 {
                    let p = av * pxx[x1 * nx2 + x2];
                    p_u1x1[u1 * nx1 + x1] += p;
                    p_u1x2[u1 * nx2 + x2] += p;
                    for y in 0..ny {
                        p_u1y[u1 * ny + y] += p * w.get(x2, y);
                    }
                }
            }
        }
        let i1 = mi_table(&p_u1x1, u1_size, nx1);
        if i1 <= rates.r1 + FEAS_TOL {
            let base = mi_table(&p_u1y, u1_size, ny);
            let mut fronts = Vec::with_capacity(u1_size);
            for u1 in 0..u1_size {
                let mass: f64 = p_u1x2[u1 * nx2..(u1 + 1) * nx2].iter().sum();
                if mass <= 0.0 {
                    fronts.push(vec![FrontPoint { cost: 0.0, gain: 0.0, choice: 0 }]);
                    continue;
                }
                let px2: Vec<f64> = p_u1x2[u1 * nx2..(u1 + 1) * nx2].iter().map(|p| p / mass).collect();
                let mut pts = Vec::new();
                let mut idx_b = vec![0usize; nx2];
                let mut choice = 0;
                loop {
                    let mut t_u2x2 = vec![0.0; u2_size * nx2];
                    let mut t_u2y = vec![0.0; u2_size * ny];
                    for (x2, &bi) in idx_b.iter().enumerate() {
                        for (u2, &bv) in rows_b[bi].iter().enumerate() {
                            let p = px2[x2] * bv;
                            t_u2x2[u2 * nx2 + x2] += p;
                            for y in 0..ny {
                                t_u2y[u2 * ny + y] += p * w.get(x2, y);
                            }
                        }
                    }
                    pts.push(FrontPoint {
                        cost: mass * mi_table(&t_u2x2, u2_size, nx2),
                        gain: mass * mi_table(&t_u2y, u2_size, ny),
                        choice,
                    });
                    choice += 1;
                    if !odometer(&mut idx_b, rows_b.len()) {
                        break;
                    }
                }
                fronts.push(pareto(pts));
            }
            if let Some((gain, picked)) = best_combination(&fronts, rates.r2) {
                let theta = base + gain;
                if best.as_ref().is_none_or(|(t, _, _)| theta > *t) {
                    let mut b = Vec::with_capacity(u1_size * nx2 * u2_size);
                    for (front, &p) in fronts.iter().zip(&picked) {
                        let mut choice = front[p].choice;
                        let mut digits = vec![0usize; nx2];
                        for d in digits.iter_mut().rev() {
                            *d = choice % rows_b.len();
                            choice /= rows_b.len();
                        }
                        for d in digits {
                            b.extend_from_slice(&rows_b[d]);
                        }
                    }
                    best = Some((theta, a.clone(), b));
                }
            }
        }
        if !odometer(&mut idx_a, rows_a.len()) {
            break;
        }
    }

    let (_, a, b) = best.expect("the constant channel lies on every grid and is feasible");
    let aux = AuxiliarySystem::from_tables(nx1, u1_size, nx2, u2_size, a, b)?;
    let mut result = ExponentResult::from_aux(aux, s, rates, 0, 0)?;
    result.diagnostics.grid_points = Some(nominal as u64);
    Ok(result)
}

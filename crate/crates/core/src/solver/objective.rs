//! The three information terms of the exponent problem as functions of the
//! raw channel tables, together with their analytic gradients.
//!
//! Tables are plain slices so that the ascent (and finite-difference checks)
//! can evaluate them off the simplex: `a` is `P(u1|x1)` with rows indexed by
//! `x1`, `b` is `P(u2|u1,x2)` with rows indexed by `u1 * |X2| + x2`. The
//! information terms are extended off the simplex by the usual
//! `Σ p log p(ab)/(p(a)p(b))` formulas applied to the unnormalised product
//! table.

use std::f64::consts::LN_2;

use crate::source::SourceModel;

/// Substitute for `log2(0)` in gradient entries. Those directions have an
/// unbounded slope; a large finite value keeps the ascent well defined.
const LOG_FLOOR: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms {
    /// `I(U1;X1)`
    pub i1: f64,
    /// `I(U2;X2|U1)`
    pub i2: f64,
    /// `I(U1U2;Y)`
    pub theta: f64,
}

/// Gradient with respect to the `a` and `b` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGradient {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Objective {
    pub nx1: usize,
    pub nx2: usize,
    pub ny: usize,
    pub nu1: usize,
    pub nu2: usize,
    /// `P(x1,x2) P(y|x2)`, indexed `[x1][x2][y]`.
    q: Vec<f64>,
}

#[inline]
fn log_ratio(num: f64, den: f64) -> f64 {
    if num > 0.0 && den > 0.0 {
        (num / den).log2()
    } else if num > 0.0 || den <= 0.0 {
        0.0
    } else {
        LOG_FLOOR
    }
}

struct Marginals {
    /// `[u1][x1]`
    t1: Vec<f64>,
    t1_u1: Vec<f64>,
    t1_x1: Vec<f64>,
    /// `[u2][x2][u1]`
    t2: Vec<f64>,
    t2_u1: Vec<f64>,
    t2_u2u1: Vec<f64>,
    t2_x2u1: Vec<f64>,
    /// `[u1 u2][y]`
    t3: Vec<f64>,
    t3_u: Vec<f64>,
    t3_y: Vec<f64>,
}

impl Objective {
    pub fn new(source: &SourceModel, nu1: usize, nu2: usize) -> Self {
        let (nx1, nx2, ny) = (source.x1_size(), source.x2_size(), source.y_size());
        let pxx = source.px1x2().probs();
        let w = source.py_given_x2();
        let mut q = Vec::with_capacity(nx1 * nx2 * ny);
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                q.extend(w.row(x2).iter().map(|&wy| pxx[x1 * nx2 + x2] * wy));
            }
        }
        Self { nx1, nx2, ny, nu1, nu2, q }
    }

    pub fn a_len(&self) -> usize {
        self.nx1 * self.nu1
    }

    pub fn b_len(&self) -> usize {
        self.nu1 * self.nx2 * self.nu2
    }

    #[inline]
    fn q(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.q[(x1 * self.nx2 + x2) * self.ny + y]
    }

    fn marginals(&self, a: &[f64], b: &[f64]) -> Marginals {
        let (nx1, nx2, ny, nu1, nu2) = (self.nx1, self.nx2, self.ny, self.nu1, self.nu2);
        let mut m = Marginals {
            t1: vec![0.0; nu1 * nx1],
            t1_u1: vec![0.0; nu1],
            t1_x1: vec![0.0; nx1],
            t2: vec![0.0; nu2 * nx2 * nu1],
            t2_u1: vec![0.0; nu1],
            t2_u2u1: vec![0.0; nu2 * nu1],
            t2_x2u1: vec![0.0; nx2 * nu1],
            t3: vec![0.0; nu1 * nu2 * ny],
            t3_u: vec![0.0; nu1 * nu2],
            t3_y: vec![0.0; ny],
        };
        for u1 in 0..nu1 {
            for u2 in 0..nu2 {
                for x1 in 0..nx1 {
                    let av = a[x1 * nu1 + u1];
                    for x2 in 0..nx2 {
                        let ab = av * b[(u1 * nx2 + x2) * nu2 + u2];
                        for y in 0..ny {
                            let p = ab * self.q(x1, x2, y);
                            m.t1[u1 * nx1 + x1] += p;
                            m.t2[(u2 * nx2 + x2) * nu1 + u1] += p;
                            m.t3[(u1 * nu2 + u2) * ny + y] += p;
                        }
                    }
                }
            }
        }
        for u1 in 0..nu1 {
            for x1 in 0..nx1 {
                let v = m.t1[u1 * nx1 + x1];
                m.t1_u1[u1] += v;
                m.t1_x1[x1] += v;
            }
        }
        for u2 in 0..nu2 {
            for x2 in 0..nx2 {
                for u1 in 0..nu1 {
                    let v = m.t2[(u2 * nx2 + x2) * nu1 + u1];
                    m.t2_u1[u1] += v;
                    m.t2_u2u1[u2 * nu1 + u1] += v;
                    m.t2_x2u1[x2 * nu1 + u1] += v;
                }
            }
        }
        for u in 0..nu1 * nu2 {
            for y in 0..ny {
                let v = m.t3[u * ny + y];
                m.t3_u[u] += v;
                m.t3_y[y] += v;
            }
        }
        m
    }

    fn terms_from(&self, m: &Marginals) -> Terms {
        let (nx1, nx2, ny, nu1, nu2) = (self.nx1, self.nx2, self.ny, self.nu1, self.nu2);
        let mut i1 = 0.0;
        for u1 in 0..nu1 {
            for x1 in 0..nx1 {
                let v = m.t1[u1 * nx1 + x1];
                if v > 0.0 {
                    i1 += v * (v / (m.t1_u1[u1] * m.t1_x1[x1])).log2();
                }
            }
        }
        let mut i2 = 0.0;
        for u2 in 0..nu2 {
            for x2 in 0..nx2 {
                for u1 in 0..nu1 {
                    let v = m.t2[(u2 * nx2 + x2) * nu1 + u1];
                    if v > 0.0 {
                        i2 += v
                            * (v * m.t2_u1[u1] / (m.t2_u2u1[u2 * nu1 + u1] * m.t2_x2u1[x2 * nu1 + u1]))
                                .log2();
                    }
                }
            }
        }
        let mut theta = 0.0;
        for u in 0..nu1 * nu2 {
            for y in 0..ny {
                let v = m.t3[u * ny + y];
                if v > 0.0 {
                    theta += v * (v / (m.t3_u[u] * m.t3_y[y])).log2();
                }
            }
        }
        Terms { i1, i2, theta }
    }

    pub fn terms(&self, a: &[f64], b: &[f64]) -> Terms {
        self.terms_from(&self.marginals(a, b))
    }

    /// Terms and the gradient of `weights[0]·I1 + weights[1]·I2 + weights[2]·θ`.
    pub fn gradient(&self, a: &[f64], b: &[f64], weights: [f64; 3]) -> (Terms, TableGradient) {
        let (nx1, nx2, ny, nu1, nu2) = (self.nx1, self.nx2, self.ny, self.nu1, self.nu2);
        let m = self.marginals(a, b);
        let terms = self.terms_from(&m);
        let [w1, w2, w3] = weights;

        // d/dp of each term at the marginal cell a full cell projects onto
        let g1: Vec<f64> = (0..nu1 * nx1)
            .map(|k| {
                let (u1, x1) = (k / nx1, k % nx1);
                log_ratio(m.t1[k], m.t1_u1[u1] * m.t1_x1[x1]) - 1.0 / LN_2
            })
            .collect();
        let g2: Vec<f64> = (0..nu2 * nx2 * nu1)
            .map(|k| {
                let u1 = k % nu1;
                let x2 = (k / nu1) % nx2;
                let u2 = k / (nu1 * nx2);
                log_ratio(
                    m.t2[k] * m.t2_u1[u1],
                    m.t2_u2u1[u2 * nu1 + u1] * m.t2_x2u1[x2 * nu1 + u1],
                )
            })
            .collect();
        let g3: Vec<f64> = (0..nu1 * nu2 * ny)
            .map(|k| {
                let (u, y) = (k / ny, k % ny);
                log_ratio(m.t3[k], m.t3_u[u] * m.t3_y[y]) - 1.0 / LN_2
            })
            .collect();

        let mut ga = vec![0.0; a.len()];
        let mut gb = vec![0.0; b.len()];
        for u1 in 0..nu1 {
            for u2 in 0..nu2 {
                for x1 in 0..nx1 {
                    let ai = x1 * nu1 + u1;
                    let av = a[ai];
                    let c1 = w1 * g1[u1 * nx1 + x1];
                    for x2 in 0..nx2 {
                        let bi = (u1 * nx2 + x2) * nu2 + u2;
                        let bv = b[bi];
                        let c2 = w2 * g2[(u2 * nx2 + x2) * nu1 + u1];
                        let mut s = 0.0;
                        for y in 0..ny {
                            let g = c1 + c2 + w3 * g3[(u1 * nu2 + u2) * ny + y];
                            s += g * self.q(x1, x2, y);
                        }
                        ga[ai] += s * bv;
                        gb[bi] += s * av;
                    }
                }
            }
        }
        (terms, TableGradient { a: ga, b: gb })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{binary_example, BinaryExampleParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row: Vec<f64> = (0..cols).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            v.extend(row.into_iter().map(|x| x / s));
        }
        v
    }

    #[test]
    fn terms_match_the_dense_joint_route() {
        let s = binary_example(BinaryExampleParams::new(0.4, 0.75, 0.9).unwrap()).unwrap();
        let obj = Objective::new(&s, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_rows(&mut rng, 2, 3);
        let b = random_rows(&mut rng, 6, 4);
        let t = obj.terms(&a, &b);
        let aux = crate::solver::AuxiliarySystem::from_tables(2, 3, 2, 4, a, b).unwrap();
        let (i1, i2, theta) = crate::solver::evaluate(&aux, &s).unwrap();
        assert!((t.i1 - i1).abs() < 1e-12);
        assert!((t.i2 - i2).abs() < 1e-12);
        assert!((t.theta - theta).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_linear_in_weights() {
        let s = binary_example(BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()).unwrap();
        let obj = Objective::new(&s, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_rows(&mut rng, 2, 2);
        let b = random_rows(&mut rng, 4, 3);
        let parts: Vec<TableGradient> = (0..3)
            .map(|k| {
                let mut w = [0.0; 3];
                w[k] = 1.0;
                obj.gradient(&a, &b, w).1
            })
            .collect();
        let (_, mixed) = obj.gradient(&a, &b, [2.0, -0.5, 1.5]);
        for i in 0..a.len() {
            let want = 2.0 * parts[0].a[i] - 0.5 * parts[1].a[i] + 1.5 * parts[2].a[i];
            assert!((mixed.a[i] - want).abs() < 1e-9);
        }
        for i in 0..b.len() {
            let want = 2.0 * parts[0].b[i] - 0.5 * parts[1].b[i] + 1.5 * parts[2].b[i];
            assert!((mixed.b[i] - want).abs() < 1e-9);
        }
    }
}

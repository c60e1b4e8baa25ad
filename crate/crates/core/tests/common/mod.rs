#![allow(dead_code)]

use coop_ht::prob::{CondPmf, JointPmf};
use coop_ht::solver::AuxiliarySystem;
use coop_ht::source::{binary_example, BinaryExampleParams, SourceModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fig_source() -> SourceModel {
    binary_example(BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()).unwrap()
}

/// Row-stochastic table with every entry at least `floor / cols`.
pub fn random_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize, floor: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let raw: Vec<f64> = (0..cols).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let sum: f64 = raw.iter().sum();
        out.extend(raw.iter().map(|v| (1.0 - floor) * v / sum + floor / cols as f64));
    }
    out
}

pub fn random_source(rng: &mut ChaCha8Rng, nx1: usize, nx2: usize, ny: usize) -> SourceModel {
    let pxx = random_rows(rng, 1, nx1 * nx2, 0.0);
    let joint = JointPmf::new(vec!["X1".into(), "X2".into()], vec![nx1, nx2], pxx).unwrap();
    let w = CondPmf::from_flat(nx2, ny, random_rows(rng, nx2, ny, 0.0)).unwrap();
    SourceModel::new(joint, w).unwrap()
}

pub fn random_aux(rng: &mut ChaCha8Rng, nx1: usize, nu1: usize, nx2: usize, nu2: usize) -> AuxiliarySystem {
    let a = random_rows(rng, nx1, nu1, 0.0);
    let b = random_rows(rng, nu1 * nx2, nu2, 0.0);
    AuxiliarySystem::from_tables(nx1, nu1, nx2, nu2, a, b).unwrap()
}

/// Binary entropy in bits, written out independently of the library.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

//! The subset `S_n` of typical `X1` sequences, of probability `ε - μ`, on
//! which the first encoder sends the flag instead of a codeword index.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::typical::{Typicality, TypicalSet};
use crate::error::{Error, Result};
use crate::prob::Pmf;

/// Largest `|X1|^n` the enumerate mode will walk.
pub const ENUMERATE_LIMIT: f64 = 1e7;
/// Work bound `|X1|·(n+1)^2` for computing the typical-set probability by
/// dynamic programming; beyond it a Monte-Carlo estimate is used.
const DP_LIMIT: f64 = 1e8;
const MC_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnMode {
    /// Each typical sequence joins `S_n` independently per block with
    /// probability `(ε-μ)/Pr[T]`.
    #[default]
    Coin,
    /// A fixed set of typical sequences, most probable first, whose total
    /// probability does not exceed `ε - μ`.
    Enumerate,
}

#[derive(Debug, Clone)]
enum Membership {
    Coin { accept: f64 },
    Enumerate { members: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct SubsetSn {
    typical: TypicalSet,
    alphabet: usize,
    membership: Membership,
    target: f64,
    typical_probability: f64,
    measure: f64,
    warnings: Vec<String>,
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for i in 1..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `Pr[X^n ∈ T_μ^n]` for i.i.d. `X ~ p`, summed over admissible types.
fn typical_probability_exact(p: &Pmf, n: usize, mu: f64, rule: Typicality) -> f64 {
    let lf = log_factorials(n);
    // log Σ Π_k p_k^{c_k} / c_k! over partial count vectors with total s
    let mut acc = vec![f64::NEG_INFINITY; n + 1];
    acc[0] = 0.0;
    for &pk in p.probs() {
        let mut next = vec![f64::NEG_INFINITY; n + 1];
        for c in 0..=n {
            if !rule.allows(c, n, pk, mu) {
                continue;
            }
            let term = if c == 0 { 0.0 } else { c as f64 * pk.ln() } - lf[c];
            for s in 0..=n - c {
                if acc[s] > f64::NEG_INFINITY {
                    next[s + c] = log_add(next[s + c], acc[s] + term);
                }
            }
        }
        acc = next;
    }
    if acc[n] == f64::NEG_INFINITY {
        0.0
    } else {
        (lf[n] + acc[n]).exp().min(1.0)
    }
}

fn typical_probability_mc(p: &Pmf, typical: &TypicalSet, n: usize, seed: u64) -> Result<f64> {
    let dist = WeightedIndex::new(p.probs()).map_err(|e| Error::Validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(super::STREAM_TYPICAL_ESTIMATE);
    let mut counts = vec![0usize; p.len()];
    let mut hits = 0usize;
    for _ in 0..MC_SAMPLES {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            counts[dist.sample(&mut rng)] += 1;
        }
        hits += typical.counts_typical(&counts) as usize;
    }
    Ok(hits as f64 / MC_SAMPLES as f64)
}

/// Lexicographic rank of a sequence (first symbol most significant).
fn rank(seq: &[u8], alphabet: usize) -> u64 {
    seq.iter().fold(0u64, |acc, &v| acc * alphabet as u64 + v as u64)
}

impl SubsetSn {
    pub fn build(
        px1: &Pmf,
        n: usize,
        epsilon: f64,
        mu: f64,
        mode: SnMode,
        rule: Typicality,
        seed: u64,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu < epsilon && epsilon < 1.0) {
            return Err(Error::Domain(format!("need 0 < mu < epsilon < 1, got mu = {mu}, epsilon = {epsilon}")));
        }
        let typical = TypicalSet::for_pmf(px1, n, mu, rule)?;
        let alphabet = px1.len();
        let target = epsilon - mu;
        let mut warnings = Vec::new();
        match mode {
            SnMode::Coin => {
                let work = alphabet as f64 * ((n + 1) as f64).powi(2);
                let p_typ = if work <= DP_LIMIT {
                    typical_probability_exact(px1, n, mu, rule)
                } else {
                    warnings.push(format!(
                        "typical-set probability estimated from {MC_SAMPLES} samples"
                    ));
                    typical_probability_mc(px1, &typical, n, seed)?
                };
                let accept = if p_typ <= 0.0 {
                    warnings.push("typical set of X1 has probability 0; S_n is empty".into());
                    0.0
                } else if target / p_typ > 1.0 {
                    warnings.push(format!(
                        "(epsilon - mu)/Pr[typical] = {:.6} exceeds 1; clamped to 1",
                        target / p_typ
                    ));
                    1.0
                } else {
                    target / p_typ
                };
                Ok(Self {
                    typical,
                    alphabet,
                    membership: Membership::Coin { accept },
                    target,
                    typical_probability: p_typ,
                    measure: accept * p_typ,
                    warnings,
                })
            }
            SnMode::Enumerate => {
                let total = (alphabet as f64).powi(n as i32);
                if total > ENUMERATE_LIMIT {
                    return Err(Error::Usage(format!(
                        "enumerate mode would walk {total:.3e} sequences (limit {ENUMERATE_LIMIT:.0e}); use coin mode"
                    )));
                }
                let total = total as u64;
                let mut seq = vec![0u8; n];
                let mut candidates = Vec::new();
                let mut p_typ = 0.0;
                for idx in 0..total {
                    let mut r = idx;
                    for j in (0..n).rev() {
                        seq[j] = (r % alphabet as u64) as u8;
                        r /= alphabet as u64;
                    }
                    if typical.contains(&[&seq])? {
                        let prob: f64 = seq.iter().map(|&v| px1.get(v as usize)).product();
                        p_typ += prob;
                        candidates.push((prob, idx));
                    }
                }
                candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                let mut members = Vec::new();
                let mut measure = 0.0;
                for (prob, idx) in candidates {
                    if measure + prob > target {
                        break;
                    }
                    measure += prob;
                    members.push(idx);
                }
                if measure < target && p_typ < target {
                    warnings.push(format!(
                        "typical set has probability {p_typ:.6} < epsilon - mu = {target:.6}; S_n is the whole typical set"
                    ));
                }
                members.sort_unstable();
                Ok(Self {
                    typical,
                    alphabet,
                    membership: Membership::Enumerate { members },
                    target,
                    typical_probability: p_typ,
                    measure,
                    warnings,
                })
            }
        }
    }

    /// `ε - μ`.
    pub fn target(&self) -> f64 {
        self.target
    }

    /// `Pr[X1^n ∈ S_n]` (exact in enumerate mode, the expectation in coin mode).
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// `Pr[X1^n ∈ T_μ^n(P_X1)]`.
    pub fn typical_probability(&self) -> f64 {
        self.typical_probability
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Probability that this particular sequence is placed in `S_n`.
    pub fn membership_probability(&self, x1: &[u8]) -> Result<f64> {
        if !self.typical.contains(&[x1])? {
            return Ok(0.0);
        }
        Ok(match &self.membership {
            Membership::Coin { accept } => *accept,
            Membership::Enumerate { members } => {
                members.binary_search(&rank(x1, self.alphabet)).is_ok() as u8 as f64
            }
        })
    }

    /// Membership test for one block. Coin mode consumes one uniform draw
    /// from `rng` on every call.
    pub fn contains<R: Rng + ?Sized>(&self, x1: &[u8], rng: &mut R) -> Result<bool> {
        let coin: f64 = match self.membership {
            Membership::Coin { .. } => rng.random(),
            Membership::Enumerate { .. } => 0.0,
        };
        if !self.typical.contains(&[x1])? {
            return Ok(false);
        }
        Ok(match &self.membership {
            Membership::Coin { accept } => coin < *accept,
            Membership::Enumerate { members } => members.binary_search(&rank(x1, self.alphabet)).is_ok(),
        })
    }
}

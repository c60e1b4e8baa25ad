//! Strong typicality tests on symbol sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{JointPmf, Pmf};

/// How the slack `μ` bounds the deviation of empirical frequencies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Typicality {
    /// `|N(v)/n - p(v)| <= μ`
    #[default]
    Absolute,
    /// `|N(v)/n - p(v)| <= μ·p(v)`
    Proportional,
}

impl Typicality {
    /// Whether `count` occurrences in a length-`n` block are allowed for a
    /// symbol of probability `p`. Zero-probability symbols may never occur.
    #[inline]
    pub fn allows(self, count: usize, n: usize, p: f64, mu: f64) -> bool {
        if p == 0.0 {
            return count == 0;
        }
        let dev = (count as f64 / n as f64 - p).abs();
        match self {
            Typicality::Absolute => dev <= mu,
            Typicality::Proportional => dev <= mu * p,
        }
    }
}

/// A typicality test for tuples of sequences against a fixed joint pmf and
/// blocklength, with the admissible count ranges precomputed.
#[derive(Debug, Clone)]
pub struct TypicalSet {
    n: usize,
    sizes: Vec<usize>,
    /// `allowed[cell * (n+1) + count]`
    allowed: Vec<bool>,
}

impl TypicalSet {
    pub fn new(p: &JointPmf, n: usize, mu: f64, rule: Typicality) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Domain(format!("typicality slack must be positive, got {mu}")));
        }
        if n == 0 {
            return Err(Error::Usage("blocklength must be positive".into()));
        }
        let mut allowed = Vec::with_capacity(p.probs().len() * (n + 1));
        for &pv in p.probs() {
            allowed.extend((0..=n).map(|c| rule.allows(c, n, pv, mu)));
        }
        Ok(Self { n, sizes: p.sizes().to_vec(), allowed })
    }

    pub fn for_pmf(p: &Pmf, n: usize, mu: f64, rule: Typicality) -> Result<Self> {
        Self::new(&JointPmf::from_pmf("V", p), n, mu, rule)
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.allowed.len() / (self.n + 1)
    }

    /// Whether the empirical count vector (indexed like the pmf) is typical.
    #[inline]
    pub fn counts_typical(&self, counts: &[usize]) -> bool {
        counts.iter().enumerate().all(|(cell, &c)| self.allowed[cell * (self.n + 1) + c])
    }

    pub fn contains(&self, seqs: &[&[u8]]) -> Result<bool> {
        if seqs.len() != self.sizes.len() {
            return Err(Error::Usage(format!(
                "{} sequences for a {}-variable pmf",
                seqs.len(),
                self.sizes.len()
            )));
        }
        for (k, s) in seqs.iter().enumerate() {
            if s.len() != self.n {
                return Err(Error::Usage(format!("sequence {k} has length {}, expected {}", s.len(), self.n)));
            }
            if let Some(&bad) = s.iter().find(|&&v| v as usize >= self.sizes[k]) {
                return Err(Error::Usage(format!(
                    "symbol {bad} outside alphabet of size {} in sequence {k}",
                    self.sizes[k]
                )));
            }
        }
        let mut counts = vec![0usize; self.cells()];
        Ok(self.contains_unchecked(seqs, &mut counts))
    }

    /// `contains` without input validation; `counts` is scratch space of
    /// length `cells()`.
    pub(crate) fn contains_unchecked(&self, seqs: &[&[u8]], counts: &mut [usize]) -> bool {
        counts.fill(0);
        for j in 0..self.n {
            let cell = seqs.iter().zip(&self.sizes).fold(0, |acc, (s, &m)| acc * m + s[j] as usize);
            counts[cell] += 1;
        }
        self.counts_typical(counts)
    }
}

/// `seq ∈ T_μ^n(p)`.
pub fn is_typical(seq: &[u8], p: &Pmf, mu: f64, rule: Typicality) -> Result<bool> {
    TypicalSet::for_pmf(p, seq.len(), mu, rule)?.contains(&[seq])
}

/// `(seqs[0], seqs[1], ..) ∈ T_μ^n(p)` for a joint pmf whose axes follow
/// the order of `seqs`.
pub fn is_jointly_typical(seqs: &[&[u8]], p: &JointPmf, mu: f64, rule: Typicality) -> Result<bool> {
    let n = seqs.first().map_or(0, |s| s.len());
    TypicalSet::new(p, n, mu, rule)?.contains(seqs)
}

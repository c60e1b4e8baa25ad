use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use super::scheme::SchemeTables;
use super::{SimConfig, STREAM_CODEBOOK};
use crate::error::{Error, Result};
use crate::source::SourceModel;

/// `C_U1`: codewords `u1^n(m1)`, `m1 = 1..=count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook1 {
    n: usize,
    count: usize,
    symbols: Vec<u8>,
}

/// `C_U2(m1)` for every `m1`: codewords `u2^n(m2|m1)`, `m2 = 1..=count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook2 {
    n: usize,
    m1_count: usize,
    count: usize,
    symbols: Vec<u8>,
}

fn check_len(n: usize, cw: &[u8]) -> Result<()> {
    if cw.len() != n {
        return Err(Error::Usage(format!("codeword of length {} in a blocklength-{n} codebook", cw.len())));
    }
    Ok(())
}

impl Codebook1 {
    pub fn from_entries(n: usize, entries: Vec<Vec<u8>>) -> Result<Self> {
        if entries.is_empty() || n == 0 {
            return Err(Error::Usage("codebooks need at least one codeword of positive length".into()));
        }
        let count = entries.len();
        let mut symbols = Vec::with_capacity(count * n);
        for cw in entries {
            check_len(n, &cw)?;
            symbols.extend(cw);
        }
        Ok(Self { n, count, symbols })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Codeword for message `m1` (1-based).
    pub fn entry(&self, m1: usize) -> &[u8] {
        &self.symbols[(m1 - 1) * self.n..m1 * self.n]
    }
}

impl Codebook2 {
    /// `entries[m1 - 1][m2 - 1]`; every sub-codebook must have the same size.
    pub fn from_entries(n: usize, entries: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        let m1_count = entries.len();
        let count = entries.first().map_or(0, Vec::len);
        if m1_count == 0 || count == 0 || n == 0 {
            return Err(Error::Usage("codebooks need at least one codeword of positive length".into()));
        }
        let mut symbols = Vec::with_capacity(m1_count * count * n);
        for sub in entries {
            if sub.len() != count {
                return Err(Error::Usage("sub-codebooks differ in size".into()));
            }
            for cw in sub {
                check_len(n, &cw)?;
                symbols.extend(cw);
            }
        }
        Ok(Self { n, m1_count, count, symbols })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn m1_count(&self) -> usize {
        self.m1_count
    }

    /// Codewords per first-stage message.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Codeword `u2^n(m2|m1)`, both 1-based.
    pub fn entry(&self, m1: usize, m2: usize) -> &[u8] {
        let start = ((m1 - 1) * self.count + (m2 - 1)) * self.n;
        &self.symbols[start..start + self.n]
    }
}

/// `(⌈2^{n(I1+μ)}⌉, ⌈2^{n(I2+μ)}⌉)` as floats, so oversize requests can be
/// reported before anything is allocated.
pub fn codebook_sizes(i1: f64, i2: f64, n: usize, mu: f64) -> (f64, f64) {
    // tolerate rounding just above an exact power of two
    let size = |i: f64| (2f64.powf(n as f64 * (i + mu)) - 1e-9).ceil().max(1.0);
    (size(i1), size(i2))
}

/// Draws `C_U1` i.i.d. from `P_U1` and, for each of its codewords, `C_U2(m1)`
/// with the `j`-th symbol drawn from `P_{U2|U1}(·|u1_j(m1))`.
pub fn generate_codebooks(s: &SourceModel, cfg: &SimConfig, seed: u64) -> Result<(Codebook1, Codebook2)> {
    cfg.validate(s)?;
    let tables = SchemeTables::new(s, &cfg.aux)?;
    generate_from_tables(&tables, cfg, seed)
}

pub(crate) fn generate_from_tables(tables: &SchemeTables, cfg: &SimConfig, seed: u64) -> Result<(Codebook1, Codebook2)> {
    let n = cfg.n;
    let (m1, m2) = codebook_sizes(tables.i_u1_x1, tables.i_u2_x2_given_u1, n, cfg.mu());
    let total = m1 * n as f64 * (1.0 + m2);
    if total > cfg.max_codebook_symbols {
        return Err(Error::Guard(format!(
            "codebooks need {total:.3e} symbols (|C_U1| = {m1:.0}, |C_U2(m1)| = {m2:.0}, n = {n}), \
             limit {:.0e}",
            cfg.max_codebook_symbols
        )));
    }
    let (m1, m2) = (m1 as usize, m2 as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CODEBOOK);

    let pu1 = WeightedIndex::new(tables.p_u1.probs()).map_err(|e| Error::Validation(e.to_string()))?;
    let pu2: Vec<WeightedIndex<f64>> = (0..tables.p_u2_given_u1.input_size())
        .map(|u1| WeightedIndex::new(tables.p_u2_given_u1.row(u1)).map_err(|e| Error::Validation(e.to_string())))
        .collect::<Result<_>>()?;

    let symbols1: Vec<u8> = (0..m1 * n).map(|_| pu1.sample(&mut rng) as u8).collect();
    let mut symbols2 = Vec::with_capacity(m1 * m2 * n);
    for cw in symbols1.chunks(n) {
        for _ in 0..m2 {
            symbols2.extend(cw.iter().map(|&u1| pu2[u1 as usize].sample(&mut rng) as u8));
        }
    }
    Ok((
        Codebook1 { n, count: m1, symbols: symbols1 },
        Codebook2 { n, m1_count: m1, count: m2, symbols: symbols2 },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{CondPmf, Pmf};
    use crate::solver::AuxiliarySystem;
    use crate::source::{binary_example, BinaryExampleParams};

    #[test]
    fn size_formula() {
        let (m1, _) = codebook_sizes(0.5, 0.0, 8, 0.05);
        assert_eq!(m1, 22.0);
        // constant U1: ⌈2^{nμ}⌉
        let (m1, m2) = codebook_sizes(0.0, 0.0, 10, 0.1);
        assert_eq!((m1, m2), (2.0, 2.0));
        let (m1, _) = codebook_sizes(0.0, 0.0, 10, 0.15);
        assert_eq!(m1, 3.0);
    }

    #[test]
    fn guard_reports_sizes() {
        let s = binary_example(BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()).unwrap();
        let cfg = SimConfig::new(64, 0.07, AuxiliarySystem::identity(2, 2), 1, 0);
        let e = generate_codebooks(&s, &cfg, 0).unwrap_err();
        assert!(matches!(e, Error::Guard(m) if m.contains("|C_U1|")));
    }

    #[test]
    fn symbol_frequencies_follow_pu1() {
        let s = binary_example(BinaryExampleParams::new(0.3, 0.75, 0.95).unwrap()).unwrap();
        let one = Pmf::point_mass(1, 0).unwrap();
        let aux = AuxiliarySystem::new(CondPmf::bsc(0.2).unwrap(), CondPmf::constant(4, &one).unwrap()).unwrap();
        let mut cfg = SimConfig::new(40, 0.5, aux, 1, 11);
        cfg.mu = Some(0.05);
        let (cb1, cb2) = generate_codebooks(&s, &cfg, 11).unwrap();
        let tables = SchemeTables::new(&s, &cfg.aux).unwrap();
        let total = cb1.count() * cb1.blocklength();
        let ones: usize = (1..=cb1.count()).map(|m| cb1.entry(m).iter().filter(|&&v| v == 1).count()).sum();
        let p1 = tables.p_u1.get(1);
        let freq = ones as f64 / total as f64;
        let se = (p1 * (1.0 - p1) / total as f64).sqrt();
        assert!((freq - p1).abs() < 3.0 * se, "freq {freq} vs {p1} (se {se})");
        assert_eq!(cb2.m1_count(), cb1.count());
        assert!(cb2.entry(1, cb2.count()).iter().all(|&v| v == 0));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = binary_example(BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()).unwrap();
        let mut cfg = SimConfig::new(6, 0.4, AuxiliarySystem::identity(2, 2), 1, 0);
        cfg.mu = Some(0.1);
        let a = generate_codebooks(&s, &cfg, 3).unwrap();
        let b = generate_codebooks(&s, &cfg, 3).unwrap();
        let c = generate_codebooks(&s, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }
}

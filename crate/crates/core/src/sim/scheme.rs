use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bits::{string_of_int, BitString};
use super::codebook::{generate_from_tables, Codebook1, Codebook2};
use super::subset::SubsetSn;
use super::typical::TypicalSet;
use super::SimConfig;
use crate::error::{Error, Result};
use crate::prob::{axes, CondPmf, JointPmf, Pmf};
use crate::solver::{evaluate, AuxiliarySystem};
use crate::source::SourceModel;

/// Distributions the scheme is built from, all derived from the null joint
/// of `(U1, U2, X1, X2, Y)`.
#[derive(Debug, Clone)]
pub struct SchemeTables {
    pub p_u1: Pmf,
    /// Rows for `u1` with zero mass are uniform.
    pub p_u2_given_u1: CondPmf,
    /// Axes `(U1, X1)`.
    pub p_u1x1: JointPmf,
    /// Axes `(U1, U2, X2)`.
    pub p_u1u2x2: JointPmf,
    /// Axes `(U1, U2, Y)`.
    pub p_u1u2y: JointPmf,
    pub i_u1_x1: f64,
    pub i_u2_x2_given_u1: f64,
    pub i_u1u2_y: f64,
}

impl SchemeTables {
    pub fn new(s: &SourceModel, aux: &AuxiliarySystem) -> Result<Self> {
        use axes::*;
        let joint = aux.joint(s)?;
        let p_u1 = joint.marginal_pmf(U1)?;
        let p_u1u2 = joint.marginalize(&[U1, U2])?;
        let (nu1, nu2) = (aux.u1_size(), aux.u2_size());
        let mut rows = Vec::with_capacity(nu1);
        for u1 in 0..nu1 {
            let mass = p_u1.get(u1);
            rows.push(if mass > 0.0 {
                (0..nu2).map(|u2| p_u1u2.get(&[u1, u2]) / mass).collect()
            } else {
                vec![1.0 / nu2 as f64; nu2]
            });
        }
        let (i_u1_x1, i_u2_x2_given_u1, i_u1u2_y) = evaluate(aux, s)?;
        Ok(Self {
            p_u1,
            p_u2_given_u1: CondPmf::from_rows(rows)?,
            p_u1x1: joint.marginalize(&[U1, X1])?,
            p_u1u2x2: joint.marginalize(&[U1, U2, X2])?,
            p_u1u2y: joint.marginalize(&[U1, U2, Y])?,
            i_u1_x1,
            i_u2_x2_given_u1,
            i_u1u2_y,
        })
    }
}

/// Branch of the protocol that produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionPath {
    /// `x1 ∈ S_n`; transmitter 1 sent the flag.
    SnHit,
    /// No codeword of `C_U1` jointly typical with `x1`.
    Tx1Failure,
    /// No codeword of `C_U2(m1)` jointly typical with `(u1, x2)`.
    Tx2Failure,
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockOutcome {
    pub decision: u8,
    pub path: DecisionPath,
    pub len1: usize,
    pub len2: usize,
}

/// Codebooks, typicality tests and `S_n` for one run of the scheme.
#[derive(Debug, Clone)]
pub struct Scheme {
    n: usize,
    tables: SchemeTables,
    cb1: Codebook1,
    cb2: Codebook2,
    sn: SubsetSn,
    t_u1x1: TypicalSet,
    t_u1u2x2: TypicalSet,
    t_u1u2y: TypicalSet,
    sizes: [usize; 3],
}

fn check_seq(seq: &[u8], n: usize, alphabet: usize, name: &str) -> Result<()> {
    if seq.len() != n {
        return Err(Error::Usage(format!("{name} has length {}, expected {n}", seq.len())));
    }
    if let Some(&bad) = seq.iter().find(|&&v| v as usize >= alphabet) {
        return Err(Error::Usage(format!("symbol {bad} outside the {name} alphabet of size {alphabet}")));
    }
    Ok(())
}

fn check_codebook(seqs: &[u8], alphabet: usize, name: &str) -> Result<()> {
    if let Some(&bad) = seqs.iter().find(|&&v| v as usize >= alphabet) {
        return Err(Error::Usage(format!("{name} contains symbol {bad}, alphabet size {alphabet}")));
    }
    Ok(())
}

impl Scheme {
    /// Draws the codebooks from `cfg.seed`.
    pub fn new(s: &SourceModel, cfg: &SimConfig) -> Result<Self> {
        cfg.validate(s)?;
        let tables = SchemeTables::new(s, &cfg.aux)?;
        let (cb1, cb2) = generate_from_tables(&tables, cfg, cfg.seed)?;
        Self::assemble(s, cfg, tables, cb1, cb2)
    }

    /// Uses the given codebooks instead of random ones.
    pub fn with_codebooks(s: &SourceModel, cfg: &SimConfig, cb1: Codebook1, cb2: Codebook2) -> Result<Self> {
        cfg.validate(s)?;
        if cb1.blocklength() != cfg.n || cb2.blocklength() != cfg.n {
            return Err(Error::Usage(format!("codebooks are not of blocklength {}", cfg.n)));
        }
        if cb2.m1_count() != cb1.count() {
            return Err(Error::Usage(format!(
                "{} second-stage codebooks for {} first-stage codewords",
                cb2.m1_count(),
                cb1.count()
            )));
        }
        for m1 in 1..=cb1.count() {
            check_codebook(cb1.entry(m1), cfg.aux.u1_size(), "C_U1")?;
            for m2 in 1..=cb2.count() {
                check_codebook(cb2.entry(m1, m2), cfg.aux.u2_size(), "C_U2")?;
            }
        }
        let tables = SchemeTables::new(s, &cfg.aux)?;
        Self::assemble(s, cfg, tables, cb1, cb2)
    }

    fn assemble(s: &SourceModel, cfg: &SimConfig, tables: SchemeTables, cb1: Codebook1, cb2: Codebook2) -> Result<Self> {
        let (n, mu) = (cfg.n, cfg.mu());
        let sn = SubsetSn::build(&s.px1(), n, cfg.epsilon, mu, cfg.s_n_mode, cfg.typicality, cfg.seed)?;
        Ok(Self {
            n,
            t_u1x1: TypicalSet::new(&tables.p_u1x1, n, mu, cfg.typicality)?,
            t_u1u2x2: TypicalSet::new(&tables.p_u1u2x2, n, mu, cfg.typicality)?,
            t_u1u2y: TypicalSet::new(&tables.p_u1u2y, n, mu, cfg.typicality)?,
            sizes: [s.x1_size(), s.x2_size(), s.y_size()],
            tables,
            cb1,
            cb2,
            sn,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn tables(&self) -> &SchemeTables {
        &self.tables
    }

    pub fn codebook1(&self) -> &Codebook1 {
        &self.cb1
    }

    pub fn codebook2(&self) -> &Codebook2 {
        &self.cb2
    }

    pub fn subset(&self) -> &SubsetSn {
        &self.sn
    }

    fn message_index(&self, m: &BitString, count: usize, name: &str) -> Result<usize> {
        let v = m.dec();
        if v == 0 || v > count as u64 {
            return Err(Error::Usage(format!("{name} = {m} decodes to {v}, outside 1..={count}")));
        }
        Ok(v as usize)
    }

    fn pick<R: Rng + ?Sized>(matches: &[usize], rng: &mut R) -> Result<BitString> {
        if matches.is_empty() {
            return Ok(BitString::flag());
        }
        let m = matches[rng.random_range(0..matches.len())];
        string_of_int(m as u64)
    }

    /// The first message and whether it came from `S_n`.
    fn encode1_unchecked<R: Rng + ?Sized>(
        &self,
        x1: &[u8],
        rng: &mut R,
        counts: &mut Vec<usize>,
    ) -> Result<(BitString, bool)> {
        if self.sn.contains(x1, rng)? {
            return Ok((BitString::flag(), true));
        }
        counts.resize(self.t_u1x1.cells(), 0);
        let matches: Vec<usize> = (1..=self.cb1.count())
            .filter(|&m| self.t_u1x1.contains_unchecked(&[self.cb1.entry(m), x1], counts))
            .collect();
        Ok((Self::pick(&matches, rng)?, false))
    }

    fn encode2_unchecked<R: Rng + ?Sized>(
        &self,
        x2: &[u8],
        m1: &BitString,
        rng: &mut R,
        counts: &mut Vec<usize>,
    ) -> Result<BitString> {
        if m1.is_flag() {
            return Ok(BitString::flag());
        }
        let m1 = self.message_index(m1, self.cb1.count(), "m1")?;
        let u1 = self.cb1.entry(m1);
        counts.resize(self.t_u1u2x2.cells(), 0);
        let matches: Vec<usize> = (1..=self.cb2.count())
            .filter(|&m2| self.t_u1u2x2.contains_unchecked(&[u1, self.cb2.entry(m1, m2), x2], counts))
            .collect();
        Self::pick(&matches, rng)
    }

    fn decide_unchecked(&self, y: &[u8], m1: &BitString, m2: &BitString, counts: &mut Vec<usize>) -> Result<u8> {
        if m1.is_flag() || m2.is_flag() {
            return Ok(1);
        }
        let m1 = self.message_index(m1, self.cb1.count(), "m1")?;
        let m2 = self.message_index(m2, self.cb2.count(), "m2")?;
        counts.resize(self.t_u1u2y.cells(), 0);
        let typical = self.t_u1u2y.contains_unchecked(&[self.cb1.entry(m1), self.cb2.entry(m1, m2), y], counts);
        Ok(if typical { 0 } else { 1 })
    }

    /// Transmitter 1: the flag if `x1 ∈ S_n` or no codeword is jointly
    /// typical with `x1`, otherwise a uniformly chosen typical index.
    pub fn encode1<R: Rng + ?Sized>(&self, x1: &[u8], rng: &mut R) -> Result<BitString> {
        check_seq(x1, self.n, self.sizes[0], "x1")?;
        Ok(self.encode1_unchecked(x1, rng, &mut Vec::new())?.0)
    }

    /// Transmitter 2: forwards the flag, otherwise a uniformly chosen index
    /// of `C_U2(m1)` jointly typical with `(u1^n(m1), x2)`, or the flag.
    pub fn encode2<R: Rng + ?Sized>(&self, x2: &[u8], m1: &BitString, rng: &mut R) -> Result<BitString> {
        check_seq(x2, self.n, self.sizes[1], "x2")?;
        self.encode2_unchecked(x2, m1, rng, &mut Vec::new())
    }

    /// Receiver: 0 iff neither message is the flag and
    /// `(u1^n(m1), u2^n(m2|m1), y)` is jointly typical.
    pub fn decide(&self, y: &[u8], m1: &BitString, m2: &BitString) -> Result<u8> {
        check_seq(y, self.n, self.sizes[2], "y")?;
        self.decide_unchecked(y, m1, m2, &mut Vec::new())
    }

    /// Runs both transmitters and the receiver on one block.
    pub fn run_block<R: Rng + ?Sized>(&self, x1: &[u8], x2: &[u8], y: &[u8], rng: &mut R) -> Result<BlockOutcome> {
        check_seq(x1, self.n, self.sizes[0], "x1")?;
        check_seq(x2, self.n, self.sizes[1], "x2")?;
        check_seq(y, self.n, self.sizes[2], "y")?;
        self.run_block_unchecked(x1, x2, y, rng, &mut Vec::new())
    }

    pub(crate) fn run_block_unchecked<R: Rng + ?Sized>(
        &self,
        x1: &[u8],
        x2: &[u8],
        y: &[u8],
        rng: &mut R,
        counts: &mut Vec<usize>,
    ) -> Result<BlockOutcome> {
        let (m1, in_sn) = self.encode1_unchecked(x1, rng, counts)?;
        let m2 = self.encode2_unchecked(x2, &m1, rng, counts)?;
        let decision = self.decide_unchecked(y, &m1, &m2, counts)?;
        let path = if in_sn {
            DecisionPath::SnHit
        } else if m1.is_flag() {
            DecisionPath::Tx1Failure
        } else if m2.is_flag() {
            DecisionPath::Tx2Failure
        } else if decision == 0 {
            DecisionPath::Accept
        } else {
            DecisionPath::Reject
        };
        Ok(BlockOutcome { decision, path, len1: m1.len(), len2: m2.len() })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::source::{binary_example, BinaryExampleParams};

    fn source() -> SourceModel {
        binary_example(BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()).unwrap()
    }

    /// Identity auxiliaries at n = 8 with hand-made codebooks. Every
    /// fixture block below has an exact type, so typicality at μ = 0.1 is
    /// decided by the zero-probability cells alone.
    fn fixture() -> Scheme {
        let s = source();
        let mut cfg = SimConfig::new(8, 0.2, AuxiliarySystem::identity(2, 2), 1, 0);
        cfg.mu = Some(0.1);
        cfg.s_n_mode = super::super::SnMode::Enumerate;
        let cb1 = Codebook1::from_entries(
            8,
            vec![
                vec![0, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 1, 1, 1, 1, 1, 1, 1],
                vec![1, 1, 1, 1, 0, 0, 0, 0],
                vec![1, 1, 1, 0, 0, 0, 0, 1],
            ],
        )
        .unwrap();
        let row = vec![vec![1, 0, 0, 0, 0, 1, 1, 1], vec![1; 8]];
        let cb2 = Codebook2::from_entries(8, vec![row; 4]).unwrap();
        Scheme::with_codebooks(&s, &cfg, cb1, cb2).unwrap()
    }

    const X1: [u8; 8] = [1, 1, 1, 1, 0, 0, 0, 0];
    const X2: [u8; 8] = [1, 0, 0, 0, 0, 1, 1, 1];
    const Y: [u8; 8] = [0, 1, 1, 1, 1, 0, 0, 0];

    #[test]
    fn encode1_picks_unique_typical_index() {
        let sc = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // S_n holds the lexicographically first balanced sequences, X1 is the last
        assert_eq!(sc.subset().membership_probability(&X1).unwrap(), 0.0);
        assert_eq!(sc.encode1(&X1, &mut rng).unwrap().to_string(), "11");
        assert_eq!(sc.subset().membership_probability(&[0, 0, 0, 0, 1, 1, 1, 1]).unwrap(), 1.0);
        assert!(sc.encode1(&[0, 0, 0, 0, 1, 1, 1, 1], &mut rng).unwrap().is_flag());
    }

    #[test]
    fn encode1_flags_without_match() {
        let sc = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sc.encode1(&[0, 0, 0, 0, 0, 0, 0, 1], &mut rng).unwrap().is_flag());
    }

    #[test]
    fn encode2_rules() {
        let sc = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sc.encode2(&X2, &BitString::flag(), &mut rng).unwrap().is_flag());
        let m1 = BitString::parse("11").unwrap();
        assert_eq!(sc.encode2(&X2, &m1, &mut rng).unwrap().to_string(), "1");
        assert!(sc.encode2(&[1, 1, 0, 0, 0, 0, 1, 1], &m1, &mut rng).unwrap().is_flag());
        let e = sc.encode2(&X2, &BitString::parse("101").unwrap(), &mut rng).unwrap_err();
        assert!(matches!(e, Error::Usage(_)));
    }

    #[test]
    fn decide_rules() {
        let sc = fixture();
        let (m1, m2) = (BitString::parse("11").unwrap(), BitString::parse("1").unwrap());
        let flag = BitString::flag();
        for y in [Y, X2, [0; 8]] {
            assert_eq!(sc.decide(&y, &flag, &m2).unwrap(), 1);
            assert_eq!(sc.decide(&y, &m1, &flag).unwrap(), 1);
        }
        assert_eq!(sc.decide(&Y, &m1, &m2).unwrap(), 0);
        assert_eq!(sc.decide(&X2, &m1, &m2).unwrap(), 1);
        assert!(sc.decide(&Y, &BitString::parse("111").unwrap(), &m2).is_err());
        assert!(sc.decide(&Y[..7], &m1, &m2).is_err());
    }

    #[test]
    fn block_paths() {
        let sc = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = sc.run_block(&X1, &X2, &Y, &mut rng).unwrap();
        assert_eq!((out.decision, out.path, out.len1, out.len2), (0, DecisionPath::Accept, 2, 1));
        let out = sc.run_block(&X1, &X2, &X2, &mut rng).unwrap();
        assert_eq!(out.path, DecisionPath::Reject);
        let out = sc.run_block(&[0, 0, 0, 0, 1, 1, 1, 1], &X2, &Y, &mut rng).unwrap();
        assert_eq!((out.decision, out.path, out.len1, out.len2), (1, DecisionPath::SnHit, 1, 1));
        let out = sc.run_block(&[0, 0, 0, 0, 0, 0, 0, 1], &X2, &Y, &mut rng).unwrap();
        assert_eq!(out.path, DecisionPath::Tx1Failure);
        let out = sc.run_block(&X1, &[1, 1, 0, 0, 0, 0, 1, 1], &Y, &mut rng).unwrap();
        assert_eq!(out.path, DecisionPath::Tx2Failure);
    }

    #[test]
    fn conditional_rows_for_identity() {
        let t = SchemeTables::new(&source(), &AuxiliarySystem::identity(2, 2)).unwrap();
        // P(U2 = 1 | U1 = 0) = P(X2 = 1 | X1 = 0) = 0.75
        assert!((t.p_u2_given_u1.get(0, 1) - 0.75).abs() < 1e-12);
        assert!((t.i_u1_x1 - 1.0).abs() < 1e-12);
    }
}

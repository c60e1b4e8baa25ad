use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{BlockOutcome, DecisionPath, Scheme};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::source::SourceModel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCounts {
    pub sn_hit: u64,
    pub tx1_failure: u64,
    pub tx2_failure: u64,
    pub accept: u64,
    pub reject: u64,
}

impl PathCounts {
    pub fn total(&self) -> u64 {
        self.sn_hit + self.tx1_failure + self.tx2_failure + self.accept + self.reject
    }

    fn record(&mut self, path: DecisionPath) {
        match path {
            DecisionPath::SnHit => self.sn_hit += 1,
            DecisionPath::Tx1Failure => self.tx1_failure += 1,
            DecisionPath::Tx2Failure => self.tx2_failure += 1,
            DecisionPath::Accept => self.accept += 1,
            DecisionPath::Reject => self.reject += 1,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.sn_hit += o.sn_hit;
        self.tx1_failure += o.tx1_failure;
        self.tx2_failure += o.tx2_failure;
        self.accept += o.accept;
        self.reject += o.reject;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub mu: f64,
    pub alpha_hat: f64,
    pub alpha_se: f64,
    pub beta_hat: f64,
    pub beta_se: f64,
    /// Mean message lengths in bits, over the null-hypothesis trials.
    pub mean_len1: f64,
    pub mean_len1_se: f64,
    pub mean_len2: f64,
    pub mean_len2_se: f64,
    /// `-log2(beta_hat)/n`; absent when no type-II error was observed.
    pub empirical_exponent: Option<f64>,
    pub paths_h0: PathCounts,
    pub paths_h1: PathCounts,
    pub sn_measure: f64,
    pub sn_typical_probability: f64,
    pub codebook1_size: usize,
    pub codebook2_size: usize,
    pub i_u1_x1: f64,
    pub i_u2_x2_given_u1: f64,
    pub i_u1u2_y: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    paths: PathCounts,
    ones: u64,
    len1: u64,
    len1_sq: u64,
    len2: u64,
    len2_sq: u64,
}

impl Tally {
    fn from_outcome(o: &BlockOutcome) -> Self {
        let mut t = Tally {
            ones: o.decision as u64,
            len1: o.len1 as u64,
            len1_sq: (o.len1 * o.len1) as u64,
            len2: o.len2 as u64,
            len2_sq: (o.len2 * o.len2) as u64,
            ..Default::default()
        };
        t.paths.record(o.path);
        t
    }

    fn merge(self, o: Self) -> Self {
        Tally {
            paths: self.paths.merge(o.paths),
            ones: self.ones + o.ones,
            len1: self.len1 + o.len1,
            len1_sq: self.len1_sq + o.len1_sq,
            len2: self.len2 + o.len2,
            len2_sq: self.len2_sq + o.len2_sq,
        }
    }
}

/// A scheme together with samplers for the source, ready to run trials.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    scheme: Scheme,
    x1x2: WeightedIndex<f64>,
    y_given_x2: Vec<WeightedIndex<f64>>,
    y: WeightedIndex<f64>,
    x2_size: usize,
}

fn sampler(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights).map_err(|e| Error::Validation(e.to_string()))
}

impl Simulation {
    pub fn new(s: &SourceModel, cfg: &SimConfig) -> Result<Self> {
        Self::with_scheme(s, cfg, Scheme::new(s, cfg)?)
    }

    /// Runs trials against an existing scheme, e.g. one with hand-built
    /// codebooks.
    pub fn with_scheme(s: &SourceModel, cfg: &SimConfig, scheme: Scheme) -> Result<Self> {
        cfg.validate(s)?;
        let w = s.py_given_x2();
        Ok(Self {
            cfg: cfg.clone(),
            scheme,
            x1x2: sampler(s.px1x2().probs())?,
            y_given_x2: (0..w.input_size()).map(|x2| sampler(w.row(x2))).collect::<Result<_>>()?,
            y: sampler(s.py().probs())?,
            x2_size: s.x2_size(),
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// One block under hypothesis `h`; trial `t` uses stream `2t + h`.
    fn trial(&self, t: u64, h: u64, buf: &mut Buffers) -> Result<Tally> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(2 * t + h);
        let n = self.cfg.n;
        buf.x1.clear();
        buf.x2.clear();
        buf.y.clear();
        for _ in 0..n {
            let c = self.x1x2.sample(&mut rng);
            buf.x1.push((c / self.x2_size) as u8);
            buf.x2.push((c % self.x2_size) as u8);
        }
        for j in 0..n {
            let y = if h == 0 { self.y_given_x2[buf.x2[j] as usize].sample(&mut rng) } else { self.y.sample(&mut rng) };
            buf.y.push(y as u8);
        }
        let out = self.scheme.run_block_unchecked(&buf.x1, &buf.x2, &buf.y, &mut rng, &mut buf.counts)?;
        Ok(Tally::from_outcome(&out))
    }

    fn tally(&self, h: u64) -> Result<Tally> {
        (0..self.cfg.trials as u64)
            .into_par_iter()
            .map_init(Buffers::default, |buf, t| self.trial(t, h, buf))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    }

    pub fn run(&self) -> Result<SimReport> {
        let h0 = self.tally(0)?;
        let h1 = self.tally(1)?;
        let trials = self.cfg.trials as f64;
        let n = self.cfg.n;
        let alpha = h0.ones as f64 / trials;
        let beta = (h1.paths.total() - h1.ones) as f64 / trials;
        let se = |p: f64| (p * (1.0 - p) / trials).sqrt();
        let mean_se = |sum: u64, sq: u64| {
            let m = sum as f64 / trials;
            let var = (sq as f64 / trials - m * m).max(0.0);
            (m, (var / trials).sqrt())
        };
        let (mean_len1, mean_len1_se) = mean_se(h0.len1, h0.len1_sq);
        let (mean_len2, mean_len2_se) = mean_se(h0.len2, h0.len2_sq);
        let mut warnings = self.scheme.subset().warnings().to_vec();
        let empirical_exponent = if beta > 0.0 {
            Some(-beta.log2() / n as f64)
        } else {
            warnings.push("no type-II errors observed; empirical exponent undefined".into());
            None
        };
        let t = self.scheme.tables();
        Ok(SimReport {
            n,
            trials: self.cfg.trials,
            epsilon: self.cfg.epsilon,
            mu: self.cfg.mu(),
            alpha_hat: alpha,
            alpha_se: se(alpha),
            beta_hat: beta,
            beta_se: se(beta),
            mean_len1,
            mean_len1_se,
            mean_len2,
            mean_len2_se,
            empirical_exponent,
            paths_h0: h0.paths,
            paths_h1: h1.paths,
            sn_measure: self.scheme.subset().measure(),
            sn_typical_probability: self.scheme.subset().typical_probability(),
            codebook1_size: self.scheme.codebook1().count(),
            codebook2_size: self.scheme.codebook2().count(),
            i_u1_x1: t.i_u1_x1,
            i_u2_x2_given_u1: t.i_u2_x2_given_u1,
            i_u1u2_y: t.i_u1u2_y,
            warnings,
        })
    }
}

#[derive(Default)]
struct Buffers {
    x1: Vec<u8>,
    x2: Vec<u8>,
    y: Vec<u8>,
    counts: Vec<usize>,
}

/// Draws one codebook pair from `cfg.seed` and estimates both error
/// probabilities and the mean message lengths.
pub fn run_monte_carlo(s: &SourceModel, cfg: &SimConfig) -> Result<SimReport> {
    Simulation::new(s, cfg)?.run()
}

//! Monte-Carlo simulation of the variable-length random-coding scheme.
//!
//! Sensor 1 sends the flag `"0"` when its block falls in `S_n` (a typical
//! subset of probability `ε - μ`) or when no codeword of `C_U1` is jointly
//! typical with it, and otherwise the index of a jointly typical codeword.
//! Sensor 2 forwards the flag or sends the index of a codeword of
//! `C_U2(m1)` jointly typical with `(u1^n(m1), x2^n)`. The receiver declares
//! `H = 0` only when neither message is the flag and
//! `(u1^n(m1), u2^n(m2|m1), y^n)` is jointly typical.

mod bits;
mod codebook;
mod monte_carlo;
mod scheme;
mod subset;
mod typical;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::AuxiliarySystem;
use crate::source::SourceModel;

pub use bits::{string_of_int, BitString};
pub use codebook::{codebook_sizes, generate_codebooks, Codebook1, Codebook2};
pub use monte_carlo::{run_monte_carlo, PathCounts, SimReport, Simulation};
pub use scheme::{DecisionPath, Scheme, SchemeTables};
pub use subset::{SnMode, SubsetSn, ENUMERATE_LIMIT};
pub use typical::{is_jointly_typical, is_typical, TypicalSet, Typicality};

/// RNG stream used to draw the codebooks.
pub(crate) const STREAM_CODEBOOK: u64 = u64::MAX;
/// RNG stream for the Monte-Carlo estimate of `Pr[T_μ^n(P_X1)]`.
pub(crate) const STREAM_TYPICAL_ESTIMATE: u64 = u64::MAX - 1;

/// Default cap on the total number of stored codebook symbols.
pub const DEFAULT_CODEBOOK_GUARD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Blocklength.
    pub n: usize,
    /// Typicality slack; `None` means `ε/4`.
    #[serde(default)]
    pub mu: Option<f64>,
    /// Type-I budget.
    pub epsilon: f64,
    pub aux: AuxiliarySystem,
    /// Blocks simulated under each hypothesis.
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub s_n_mode: SnMode,
    #[serde(default)]
    pub typicality: Typicality,
    #[serde(default = "default_guard")]
    pub max_codebook_symbols: f64,
}

fn default_guard() -> f64 {
    DEFAULT_CODEBOOK_GUARD
}

impl SimConfig {
    pub fn new(n: usize, epsilon: f64, aux: AuxiliarySystem, trials: usize, seed: u64) -> Self {
        Self {
            n,
            mu: None,
            epsilon,
            aux,
            trials,
            seed,
            s_n_mode: SnMode::default(),
            typicality: Typicality::default(),
            max_codebook_symbols: DEFAULT_CODEBOOK_GUARD,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(self.epsilon / 4.0)
    }

    pub fn validate(&self, s: &SourceModel) -> Result<()> {
        let mu = self.mu();
        if !(mu > 0.0 && mu < self.epsilon && self.epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "need 0 < mu < epsilon < 1, got mu = {mu}, epsilon = {}",
                self.epsilon
            )));
        }
        if self.n == 0 || self.trials == 0 {
            return Err(Error::Usage("blocklength and trials must be positive".into()));
        }
        if self.aux.x1_size() != s.x1_size() || self.aux.x2_size() != s.x2_size() {
            return Err(Error::Usage(format!(
                "auxiliaries are for |X1| = {}, |X2| = {}, source has {}, {}",
                self.aux.x1_size(),
                self.aux.x2_size(),
                s.x1_size(),
                s.x2_size()
            )));
        }
        let widest = [s.x1_size(), s.x2_size(), s.y_size(), self.aux.u1_size(), self.aux.u2_size()];
        if widest.iter().any(|&m| m > 256) {
            return Err(Error::Usage("alphabets larger than 256 symbols are not supported".into()));
        }
        Ok(())
    }
}

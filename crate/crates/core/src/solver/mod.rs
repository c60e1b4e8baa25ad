//! Optimal type-II error exponents.
//!
//! The fixed-length exponent maximises `I(U1U2;Y)` over channels
//! `P(u1|x1)` and `P(u2|u1,x2)` subject to `I(U1;X1) <= R1` and
//! `I(U2;X2|U1) <= R2`. Under expected-length constraints with type-I budget
//! `ε` the optimum equals the fixed-length one at rates `R/(1-ε)`, and that
//! identity is the only way the variable-length exponent is computed here.

mod ascent;
mod envelope;
pub mod objective;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{axes, build_cooperative_joint, conditional_mutual_information, mutual_information, CondPmf, Pmf};
use crate::source::SourceModel;

pub use envelope::{sum_rate_envelope, Envelope, EnvelopePoint, RateModel};
pub use oracle::brute_force_exponent;

/// Slack allowed on the rate constraints when declaring a point feasible.
pub const RATE_TOL: f64 = 1e-6;

/// Rates in bits per source symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::Domain(format!("rates must be finite and nonnegative, got ({r1}, {r2})")));
        }
        Ok(Self { r1, r2 })
    }

    /// Rates divided by `1 - ε`.
    pub fn boosted(self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Self::new(self.r1 / (1.0 - epsilon), self.r2 / (1.0 - epsilon))
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    Ok(())
}

/// Alphabet sizes for `U1` and `U2` that suffice for the exponent problem:
/// `|U1| = |X1| + 2` and `|U2| = |U1||X2| + 1`.
pub fn cardinality_bounds(x1_size: usize, x2_size: usize) -> (usize, usize) {
    let u1 = x1_size + 2;
    (u1, u1 * x2_size + 1)
}

/// The pair of auxiliary channels `P(u1|x1)` and `P(u2|u1,x2)`; the second
/// is indexed by `u1 * |X2| + x2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySystem {
    pub pu1_given_x1: CondPmf,
    pub pu2_given_u1x2: CondPmf,
}

impl AuxiliarySystem {
    pub fn new(pu1_given_x1: CondPmf, pu2_given_u1x2: CondPmf) -> Result<Self> {
        let nu1 = pu1_given_x1.output_size();
        if pu2_given_u1x2.input_size() % nu1 != 0 {
            return Err(Error::Usage(format!(
                "P(u2|u1,x2) has {} rows, not a multiple of |U1| = {nu1}",
                pu2_given_u1x2.input_size()
            )));
        }
        Ok(Self { pu1_given_x1, pu2_given_u1x2 })
    }

    pub fn from_tables(nx1: usize, nu1: usize, nx2: usize, nu2: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(CondPmf::from_flat(nx1, nu1, a)?, CondPmf::from_flat(nu1 * nx2, nu2, b)?)
    }

    /// Single-symbol auxiliaries: nothing is described.
    pub fn constant(nx1: usize, nx2: usize) -> Self {
        let one = Pmf::point_mass(1, 0).expect("size 1");
        Self {
            pu1_given_x1: CondPmf::constant(nx1, &one).expect("valid"),
            pu2_given_u1x2: CondPmf::constant(nx2, &one).expect("valid"),
        }
    }

    /// `U1 = X1`, `U2 = X2`.
    pub fn identity(nx1: usize, nx2: usize) -> Self {
        let mut b = vec![0.0; nx1 * nx2 * nx2];
        for u1 in 0..nx1 {
            for x2 in 0..nx2 {
                b[(u1 * nx2 + x2) * nx2 + x2] = 1.0;
            }
        }
        Self {
            pu1_given_x1: CondPmf::identity(nx1).expect("valid"),
            pu2_given_u1x2: CondPmf::from_flat(nx1 * nx2, nx2, b).expect("valid"),
        }
    }

    pub fn u1_size(&self) -> usize {
        self.pu1_given_x1.output_size()
    }

    pub fn u2_size(&self) -> usize {
        self.pu2_given_u1x2.output_size()
    }

    pub fn x1_size(&self) -> usize {
        self.pu1_given_x1.input_size()
    }

    pub fn x2_size(&self) -> usize {
        self.pu2_given_u1x2.input_size() / self.u1_size()
    }

    /// The five-variable joint `(U1, U2, X1, X2, Y)` under the null.
    pub fn joint(&self, s: &SourceModel) -> Result<crate::prob::JointPmf> {
        build_cooperative_joint(s.px1x2(), s.py_given_x2(), &self.pu1_given_x1, &self.pu2_given_u1x2)
    }
}

/// `(I(U1;X1), I(U2;X2|U1), I(U1U2;Y))` for the given auxiliaries.
pub fn evaluate(aux: &AuxiliarySystem, s: &SourceModel) -> Result<(f64, f64, f64)> {
    use axes::*;
    let j = aux.joint(s)?;
    Ok((
        mutual_information(&j, &[U1], &[X1])?,
        conditional_mutual_information(&j, &[U2], &[X2], &[U1])?,
        mutual_information(&j, &[U1, U2], &[Y])?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub restarts: usize,
    /// Ascent iterations per penalty stage.
    pub max_iters: usize,
    pub initial_step: f64,
    /// Step shrink factor during backtracking, in (0,1).
    pub backtrack: f64,
    pub penalty_initial: f64,
    pub penalty_growth: f64,
    pub penalty_stages: usize,
    pub tolerance: f64,
    /// Grid spacing for the brute-force oracle.
    pub grid_resolution: f64,
    pub seed: u64,
    /// Overrides for the auxiliary alphabet sizes; `None` uses [`cardinality_bounds`].
    pub u1_size: Option<usize>,
    pub u2_size: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            initial_step: 1.0,
            backtrack: 0.5,
            penalty_initial: 10.0,
            penalty_growth: 10.0,
            penalty_stages: 5,
            tolerance: 1e-12,
            grid_resolution: 0.05,
            seed: 0,
            u1_size: None,
            u2_size: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || self.penalty_stages == 0 {
            return Err(Error::Usage("restarts, max_iters and penalty_stages must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::Usage("tolerance and initial_step must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Usage(format!("backtrack must lie in (0,1), got {}", self.backtrack)));
        }
        if !(self.penalty_initial > 0.0 && self.penalty_growth >= 1.0) {
            return Err(Error::Usage("penalty_initial must be > 0 and penalty_growth >= 1".into()));
        }
        if self.u1_size == Some(0) || self.u2_size == Some(0) {
            return Err(Error::Usage("auxiliary alphabet sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn alphabet_sizes(&self, s: &SourceModel) -> (usize, usize) {
        let (u1, u2) = cardinality_bounds(s.x1_size(), s.x2_size());
        (self.u1_size.unwrap_or(u1), self.u2_size.unwrap_or(u2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Restarts run (0 for the grid oracle).
    pub restarts: usize,
    pub best_restart: usize,
    /// Rates the constraints were checked against (scaled for variable-length).
    pub effective_rates: RatePair,
    /// `R1 - I(U1;X1)` and `R2 - I(U2;X2|U1)`.
    pub slack_r1: f64,
    pub slack_r2: f64,
    /// Grid points covered by the brute-force oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub theta: f64,
    pub achieving: AuxiliarySystem,
    pub i_u1_x1: f64,
    pub i_u2_x2_given_u1: f64,
    pub i_u1u2_y: f64,
    pub feasible: bool,
    pub diagnostics: Diagnostics,
}

impl ExponentResult {
    pub(crate) fn from_aux(
        aux: AuxiliarySystem,
        s: &SourceModel,
        rates: RatePair,
        restarts: usize,
        best_restart: usize,
    ) -> Result<Self> {
        let (i1, i2, theta) = evaluate(&aux, s)?;
        Ok(Self {
            theta,
            achieving: aux,
            i_u1_x1: i1,
            i_u2_x2_given_u1: i2,
            i_u1u2_y: theta,
            feasible: i1 <= rates.r1 + RATE_TOL && i2 <= rates.r2 + RATE_TOL,
            diagnostics: Diagnostics {
                restarts,
                best_restart,
                effective_rates: rates,
                slack_r1: rates.r1 - i1,
                slack_r2: rates.r2 - i2,
                grid_points: None,
            },
        })
    }
}

/// Exponent under fixed-length (maximum-rate) coding.
pub fn fixed_length_exponent(s: &SourceModel, rates: RatePair, cfg: &SolverConfig) -> Result<ExponentResult> {
    cfg.validate()?;
    let rates = RatePair::new(rates.r1, rates.r2)?;
    ascent::solve(s, rates, cfg)
}

/// Exponent under expected-length coding with type-I budget `epsilon`,
/// computed as the fixed-length exponent at rates `R/(1-ε)`.
pub fn variable_length_exponent(
    s: &SourceModel,
    rates: RatePair,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<ExponentResult> {
    let boosted = rates.boosted(epsilon)?;
    fixed_length_exponent(s, boosted, cfg)
}

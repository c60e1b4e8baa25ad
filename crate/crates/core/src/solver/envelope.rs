use serde::{Deserialize, Serialize};

use super::{check_epsilon, fixed_length_exponent, variable_length_exponent, RatePair, SolverConfig};
use crate::error::{Error, Result};
use crate::source::SourceModel;

/// Which rate constraint the envelope is computed under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateModel {
    Fixed,
    Variable { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub total_rate: f64,
    pub points: Vec<EnvelopePoint>,
    /// Index into `points` of the maximum (first one on ties).
    pub best: usize,
}

impl Envelope {
    pub fn max(&self) -> f64 {
        self.points[self.best].theta
    }

    pub fn best_point(&self) -> EnvelopePoint {
        self.points[self.best]
    }
}

/// Best exponent over the splits `r1 = i·R/(g-1)`, `r2 = R - r1`,
/// `i = 0..g`.
pub fn sum_rate_envelope(
    s: &SourceModel,
    total_rate: f64,
    model: RateModel,
    split_grid: usize,
    cfg: &SolverConfig,
) -> Result<Envelope> {
    if !(total_rate >= 0.0 && total_rate.is_finite()) {
        return Err(Error::Domain(format!("total rate must be finite and nonnegative, got {total_rate}")));
    }
    if split_grid < 2 {
        return Err(Error::Usage(format!("split grid needs at least 2 points, got {split_grid}")));
    }
    if let RateModel::Variable { epsilon } = model {
        check_epsilon(epsilon)?;
    }
    let mut points = Vec::with_capacity(split_grid);
    for i in 0..split_grid {
        let r1 = if i + 1 == split_grid { total_rate } else { total_rate * i as f64 / (split_grid - 1) as f64 };
        let r2 = (total_rate - r1).max(0.0);
        let rates = RatePair::new(r1, r2)?;
        let res = match model {
            RateModel::Fixed => fixed_length_exponent(s, rates, cfg)?,
            RateModel::Variable { epsilon } => variable_length_exponent(s, rates, epsilon, cfg)?,
        };
        points.push(EnvelopePoint { r1, r2, theta: res.theta });
    }
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.theta > points[best].theta {
            best = i;
        }
    }
    Ok(Envelope { total_rate, points, best })
}

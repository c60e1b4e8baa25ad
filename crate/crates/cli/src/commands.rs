//! The four commands. Each returns the rendered output document.

use std::fmt::Write as _;

use coop_ht::error::{Error, Result};
use coop_ht::sim::{run_monte_carlo, SimReport};
use coop_ht::solver::{
    brute_force_exponent, fixed_length_exponent, sum_rate_envelope, variable_length_exponent, ExponentResult,
    RateModel, RatePair, SolverConfig,
};
use coop_ht::source::SourceModel;
use serde::Serialize;

use crate::config::{Format, RunConfig};

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Serialize)]
pub struct VariableLength {
    pub epsilon: f64,
    pub result: ExponentResult,
}

#[derive(Debug, Serialize)]
pub struct ExponentReport {
    pub rates: RatePair,
    pub fixed_length: ExponentResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable_length: Option<VariableLength>,
}

pub fn exponent(cfg: &RunConfig, s: &SourceModel) -> Result<ExponentReport> {
    let rates = cfg.rates()?;
    let fixed_length = fixed_length_exponent(s, rates, &cfg.solver)?;
    let variable_length = match cfg.epsilon {
        Some(epsilon) => Some(VariableLength { epsilon, result: variable_length_exponent(s, rates, epsilon, &cfg.solver)? }),
        None => None,
    };
    Ok(ExponentReport { rates, fixed_length, variable_length })
}

pub fn render_exponent(r: &ExponentReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return to_json(r);
    }
    let mut out = String::from(
        "model,epsilon,r1,r2,effective_r1,effective_r2,theta,i_u1_x1,i_u2_x2_given_u1,feasible,pu1_given_x1,pu2_given_u1x2\n",
    );
    let mut row = |model: &str, eps: Option<f64>, res: &ExponentResult| {
        let e = res.diagnostics.effective_rates;
        let _ = writeln!(
            out,
            "{model},{},{},{},{},{},{},{},{},{},{},{}",
            eps.map_or(String::new(), |e| e.to_string()),
            r.rates.r1,
            r.rates.r2,
            e.r1,
            e.r2,
            res.theta,
            res.i_u1_x1,
            res.i_u2_x2_given_u1,
            res.feasible,
            join(res.achieving.pu1_given_x1.table()),
            join(res.achieving.pu2_given_u1x2.table()),
        );
    };
    row("fixed", None, &r.fixed_length);
    if let Some(vl) = &r.variable_length {
        row("variable", Some(vl.epsilon), &vl.result);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "R")]
    pub total_rate: f64,
    pub theta_vl: f64,
    pub theta_fix: f64,
    pub best_r1_vl: f64,
    pub best_r1_fix: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub epsilon: f64,
    pub split_grid: usize,
    pub rows: Vec<SweepRow>,
}

pub fn sweep(cfg: &RunConfig, s: &SourceModel) -> Result<SweepReport> {
    let epsilon = cfg.epsilon()?;
    let mut rows = Vec::new();
    for total_rate in cfg.sum_rates()? {
        let vl = sum_rate_envelope(s, total_rate, RateModel::Variable { epsilon }, cfg.split_grid, &cfg.solver)?;
        let fix = sum_rate_envelope(s, total_rate, RateModel::Fixed, cfg.split_grid, &cfg.solver)?;
        rows.push(SweepRow {
            total_rate,
            theta_vl: vl.max(),
            theta_fix: fix.max(),
            best_r1_vl: vl.best_point().r1,
            best_r1_fix: fix.best_point().r1,
        });
    }
    Ok(SweepReport { epsilon, split_grid: cfg.split_grid, rows })
}

pub fn render_sweep(r: &SweepReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return to_json(r);
    }
    let mut out = String::from("R,theta_vl,theta_fix,best_r1_vl,best_r1_fix\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            row.total_rate, row.theta_vl, row.theta_fix, row.best_r1_vl, row.best_r1_fix
        );
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub rates: RatePair,
    pub u1_size: usize,
    pub u2_size: usize,
    pub grid_resolution: f64,
    pub oracle: ExponentResult,
    /// The ascent solver at the same alphabet sizes.
    pub solver: ExponentResult,
    /// `solver.theta - oracle.theta`
    pub gap: f64,
}

pub fn oracle(cfg: &RunConfig, s: &SourceModel) -> Result<OracleReport> {
    let rates = cfg.rates()?;
    cfg.solver.validate()?;
    let (u1_size, u2_size) = cfg.solver.alphabet_sizes(s);
    let oracle = brute_force_exponent(s, rates, cfg.solver.grid_resolution, u1_size, u2_size)?;
    let solver_cfg = SolverConfig { u1_size: Some(u1_size), u2_size: Some(u2_size), ..cfg.solver.clone() };
    let solver = fixed_length_exponent(s, rates, &solver_cfg)?;
    Ok(OracleReport {
        rates,
        u1_size,
        u2_size,
        grid_resolution: cfg.solver.grid_resolution,
        gap: solver.theta - oracle.theta,
        oracle,
        solver,
    })
}

pub fn render_oracle(r: &OracleReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return to_json(r);
    }
    let mut out = String::from("method,r1,r2,u1_size,u2_size,theta,i_u1_x1,i_u2_x2_given_u1,feasible\n");
    for (name, res) in [("grid", &r.oracle), ("ascent", &r.solver)] {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{},{},{}",
            r.rates.r1, r.rates.r2, r.u1_size, r.u2_size, res.theta, res.i_u1_x1, res.i_u2_x2_given_u1, res.feasible
        );
    }
    Ok(out)
}

pub fn simulate(cfg: &RunConfig, s: &SourceModel) -> Result<SimReport> {
    run_monte_carlo(s, &cfg.sim_config(s)?)
}

pub fn render_simulate(r: &SimReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return to_json(r);
    }
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::from(
        "n,trials,epsilon,mu,alpha_hat,alpha_se,beta_hat,beta_se,mean_len1,mean_len1_se,mean_len2,mean_len2_se,\
         empirical_exponent,h0_sn_hit,h0_tx1_failure,h0_tx2_failure,h0_accept,h0_reject,\
         h1_sn_hit,h1_tx1_failure,h1_tx2_failure,h1_accept,h1_reject,sn_measure,codebook1_size,codebook2_size,\
         i_u1_x1,i_u2_x2_given_u1,i_u1u2_y\n",
    );
    let (a, b) = (&r.paths_h0, &r.paths_h1);
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.n,
        r.trials,
        r.epsilon,
        r.mu,
        r.alpha_hat,
        r.alpha_se,
        r.beta_hat,
        r.beta_se,
        r.mean_len1,
        r.mean_len1_se,
        r.mean_len2,
        r.mean_len2_se,
        opt(r.empirical_exponent),
        a.sn_hit,
        a.tx1_failure,
        a.tx2_failure,
        a.accept,
        a.reject,
        b.sn_hit,
        b.tx1_failure,
        b.tx2_failure,
        b.accept,
        b.reject,
        r.sn_measure,
        r.codebook1_size,
        r.codebook2_size,
        r.i_u1_x1,
        r.i_u2_x2_given_u1,
        r.i_u1u2_y,
    );
    Ok(out)
}

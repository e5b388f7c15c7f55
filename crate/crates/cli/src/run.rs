use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use relay_outage::outage::asymptotic::network_asymptotic_outage;
use relay_outage::outage::exact::network_user_outage;
use relay_outage::outage::system::network_system_outage;
use relay_outage::simulate::{estimate_network_system_outage, estimate_network_user_outage, McEstimate};
use relay_outage::{Interference, Network, User};

use crate::config::{Config, Curve, SweepMethod, SweepSpec};
use crate::error::CliError;

pub const CSV_HEADER: &str = "variable,value,method,p,stderr,trials,seed";

/// Knobs that do not belong in the scenario file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Multiplies C in the closed forms only. A value other than 1 is a
    /// negative control for validation.
    pub corrupt_gain: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { corrupt_gain: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub method: String,
    pub p: f64,
    pub mc: Option<McEstimate>,
}

/// `x` with 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn user_tag(u: User) -> String {
    format!("u{}", u.index())
}

fn closed_network(config: &Config, curve: Curve, value: Option<f64>, opts: RunOptions) -> Result<Network, CliError> {
    let net = config.scenario(curve, value).resolve()?;
    Ok(if opts.corrupt_gain == 1.0 {
        net
    } else {
        net.with_scaled_gain(opts.corrupt_gain)
    })
}

fn point_rows(config: &Config, sweep: &SweepSpec, curve: Curve, value: f64, opts: RunOptions) -> Result<Vec<Row>, CliError> {
    let scenario = config.scenario(curve, Some(value));
    let exact_net = scenario.resolve()?;
    let closed = closed_network(config, curve, Some(value), opts)?;
    let tag = format!("[{curve}]");
    let mut rows = Vec::new();
    let mut push = |method: String, p: f64, mc: Option<McEstimate>| {
        rows.push(Row {
            value,
            method: method + &tag,
            p,
            mc,
        })
    };
    for &u in &config.users {
        if sweep.has(SweepMethod::Exact) {
            push(format!("exact-{}", user_tag(u)), network_user_outage(&closed, u)?.p, None);
        }
        if sweep.has(SweepMethod::Asymptotic) {
            if let Interference::ProportionalToSnr(_) = scenario.interference {
                return Err(CliError::Config(
                    "asymptotes need fixed INRs; drop `asymptotic` when `inr_ratio` is set".into(),
                ));
            }
            let a = network_asymptotic_outage(&closed, u)?;
            push(format!("asym-{}", user_tag(u)), a.evaluate(closed.snr), None);
        }
        if sweep.has(SweepMethod::Mc) {
            let e = estimate_network_user_outage(&exact_net, u, config.trials, config.seed)?;
            push(format!("mc-{}", user_tag(u)), e.p, Some(e));
        }
    }
    if sweep.has(SweepMethod::System) {
        let parts = network_system_outage(&closed, config.series)?;
        let r = parts.result();
        let label = if r.method.tag().ends_with("quadrature") {
            "system-quadrature"
        } else {
            "system"
        };
        push(label.to_string(), r.p, None);
        if sweep.has(SweepMethod::Mc) {
            let e = estimate_network_system_outage(&exact_net, config.trials, config.seed)?;
            push("mc-system".into(), e.p, Some(e));
        }
    }
    Ok(rows)
}

fn require_sweep(config: &Config) -> Result<&SweepSpec, CliError> {
    config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the config has no `sweep` section".into()))
}

/// All rows of the sweep, ordered by (value, method).
pub fn sweep_rows(config: &Config, opts: RunOptions) -> Result<Vec<Row>, CliError> {
    let sweep = require_sweep(config)?;
    let jobs: Vec<(Curve, f64)> = config
        .curves()
        .into_iter()
        .flat_map(|c| sweep.grid().into_iter().map(move |v| (c, v)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(c, v)| point_rows(config, sweep, c, v, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<Row> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(rows)
}

pub fn render_csv(variable: &str, rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{variable},{},{},{},", sig12(r.value), r.method, sig12(r.p));
        match &r.mc {
            Some(e) => {
                let _ = writeln!(out, "{},{},{}", sig12(e.stderr), e.trials, e.seed);
            }
            None => out.push_str(",,\n"),
        }
    }
    out
}

/// Computes the whole sweep, then writes the CSV; nothing is written on error.
pub fn run_sweep(config: &Config, out: &Path, opts: RunOptions) -> Result<usize, CliError> {
    let sweep = require_sweep(config)?;
    let rows = sweep_rows(config, opts)?;
    let csv = render_csv(sweep.variable.name(), &rows);
    std::fs::write(out, csv).map_err(|e| CliError::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    Ok(rows.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Closed form below the configured floor.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub value: f64,
    pub method: String,
    pub closed: f64,
    pub mc: McEstimate,
    pub verdict: Verdict,
}

impl Check {
    /// |Δ|/σ
    pub fn z(&self) -> f64 {
        (self.closed - self.mc.p).abs() / self.mc.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:>14} {:<34} {:>14} {:>14} {:>11} {:>7}  verdict\n",
            "value", "method", "closed", "mc", "stderr", "|d|/s"
        );
        for c in &self.checks {
            let v = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Skip => "skip",
            };
            let _ = writeln!(
                out,
                "{:>14} {:<34} {:>14.6e} {:>14.6e} {:>11.3e} {:>7.2}  {v}",
                sig12(c.value),
                c.method,
                c.closed,
                c.mc.p,
                c.mc.stderr,
                c.z()
            );
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed, {} skipped",
            self.checks.len(),
            self.failures(),
            self.checks.iter().filter(|c| c.verdict == Verdict::Skip).count()
        );
        out
    }
}

fn check(value: f64, method: String, closed: f64, mc: McEstimate, min_p: f64) -> Check {
    let verdict = if closed < min_p {
        Verdict::Skip
    } else if mc.agrees_with(closed, 3.0) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Check {
        value,
        method,
        closed,
        mc,
        verdict,
    }
}

fn point_checks(config: &Config, curve: Curve, at: Option<f64>, opts: RunOptions, system: bool) -> Result<Vec<Check>, CliError> {
    let exact_net = config.scenario(curve, at).resolve()?;
    let closed = closed_network(config, curve, at, opts)?;
    let value = at.unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for &u in &config.users {
        let p = network_user_outage(&closed, u)?.p;
        let e = estimate_network_user_outage(&exact_net, u, config.trials, config.seed)?;
        out.push(check(value, format!("exact-{}[{curve}]", user_tag(u)), p, e, config.validate_min_p));
    }
    if system {
        let p = network_system_outage(&closed, config.series)?.result().p;
        let e = estimate_network_system_outage(&exact_net, config.trials, config.seed)?;
        out.push(check(value, format!("system[{curve}]"), p, e, config.validate_min_p));
    }
    Ok(out)
}

/// Every applicable closed form against Monte Carlo at each grid point, or
/// at the single configured point when there is no sweep.
pub fn validate(config: &Config, opts: RunOptions) -> Result<Report, CliError> {
    let grid: Vec<Option<f64>> = match &config.sweep {
        Some(s) => s.grid().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let system = config.interference == crate::config::InterferenceSpec::None;
    let jobs: Vec<(Curve, Option<f64>)> = config
        .curves()
        .into_iter()
        .flat_map(|c| grid.iter().map(move |&v| (c, v)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(c, v)| point_checks(config, c, v, opts, system))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks: Vec<Check> = chunks.into_iter().flatten().collect();
    checks.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(Report { checks })
}

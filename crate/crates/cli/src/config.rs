//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! antennas = 3x2, 2x2
//! rho = 0.2, 0.5, 0.8
//! inr_db = 1
//! sweep = snr_db
//! start = 0
//! stop = 40
//! step = 2
//! methods = exact, asymptotic, mc
//! ```
//!
//! Powers, thresholds and INRs are in dB; `kappa`, `mu`, `rho` and
//! `inr_ratio` are plain numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use relay_outage::outage::system::SeriesControl;
use relay_outage::{db_to_linear, ChannelPowers, CorrelationModel, Interference, Scenario, User};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    SnrDb,
    Kappa,
    Rho,
    GammaThDb,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::SnrDb => "snr_db",
            Variable::Kappa => "kappa",
            Variable::Rho => "rho",
            Variable::GammaThDb => "gamma_th_db",
        }
    }
}

impl FromStr for Variable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "snr_db" => Variable::SnrDb,
            "kappa" => Variable::Kappa,
            "rho" => Variable::Rho,
            "gamma_th_db" => Variable::GammaThDb,
            _ => return Err(format!("unknown sweep variable `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepMethod {
    Exact,
    Asymptotic,
    Mc,
    System,
}

impl FromStr for SweepMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "exact" => SweepMethod::Exact,
            "asymptotic" => SweepMethod::Asymptotic,
            "mc" => SweepMethod::Mc,
            "system" => SweepMethod::System,
            _ => return Err(format!("unknown method `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub methods: Vec<SweepMethod>,
}

impl SweepSpec {
    pub fn new(variable: Variable, start: f64, stop: f64, step: f64, mut methods: Vec<SweepMethod>) -> Result<Self, CliError> {
        if !(start < stop) {
            return Err(CliError::Config(format!("empty sweep range: start {start} is not below stop {stop}")));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(CliError::Config(format!("sweep step {step} must be positive")));
        }
        methods.sort();
        methods.dedup();
        if methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }
        Ok(SweepSpec {
            variable,
            start,
            stop,
            step,
            methods,
        })
    }

    /// start, start + step, … up to stop (inclusive, with a little slack for
    /// rounding).
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn has(&self, m: SweepMethod) -> bool {
        self.methods.contains(&m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterferenceSpec {
    None,
    Db(Vec<f64>),
    /// γ̄_ℓ = ν_ℓ γ̄
    Ratio(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub antennas: Vec<(usize, usize)>,
    pub rho: Vec<f64>,
    pub kappa: f64,
    pub mu: f64,
    pub omega0_db: f64,
    pub snr_db: f64,
    pub gamma_th_db: f64,
    pub interference: InterferenceSpec,
    pub users: Vec<User>,
    pub sweep: Option<SweepSpec>,
    pub trials: u64,
    pub seed: u64,
    pub series: SeriesControl,
    /// Validation skips points whose closed form is below this.
    pub validate_min_p: f64,
}

/// One (antennas, rho) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    pub n1: usize,
    pub n2: usize,
    pub rho: f64,
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}x{}", self.n1, self.n2)?;
        if !self.rho.is_nan() {
            write!(f, ";rho={}", self.rho)?;
        }
        Ok(())
    }
}

const KEYS: &[&str] = &[
    "antennas",
    "rho",
    "kappa",
    "mu",
    "omega0_db",
    "snr_db",
    "gamma_th_db",
    "inr_db",
    "inr_ratio",
    "users",
    "sweep",
    "start",
    "stop",
    "step",
    "methods",
    "trials",
    "seed",
    "max_series_terms",
    "series_tolerance",
    "validate_min_p",
];

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

struct Raw {
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Parse {
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            let k = k.trim().to_string();
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Parse {
                    line: i + 1,
                    reason: format!("unknown key `{k}`"),
                });
            }
            if entries.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(CliError::Parse {
                    line: i + 1,
                    reason: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(Raw { entries })
    }

    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn scalar<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|e| CliError::Parse {
                line: *line,
                reason: format!("`{key}`: {e}"),
            }),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        let Some((line, v)) = self.get(key) else {
            return Ok(None);
        };
        split_list(v)
            .map(|s| {
                s.parse().map_err(|e| CliError::Parse {
                    line: *line,
                    reason: format!("`{key}`: {e}"),
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }
}

fn parse_antennas(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("antenna pair `{s}` is not of the form N1xN2"))?;
    let a = a.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    Ok((a, b))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        text.parse()
    }

    pub fn curves(&self) -> Vec<Curve> {
        let rhos = match &self.sweep {
            Some(s) if s.variable == Variable::Rho => vec![f64::NAN],
            _ => self.rho.clone(),
        };
        let mut out = Vec::new();
        for &(n1, n2) in &self.antennas {
            for &rho in &rhos {
                out.push(Curve { n1, n2, rho });
            }
        }
        out
    }

    /// The scenario of `curve` with the swept variable (if any) set to `value`.
    pub fn scenario(&self, curve: Curve, value: Option<f64>) -> Scenario {
        let (mut snr_db, mut kappa, mut rho, mut gth_db) = (self.snr_db, self.kappa, curve.rho, self.gamma_th_db);
        if let (Some(s), Some(v)) = (&self.sweep, value) {
            match s.variable {
                Variable::SnrDb => snr_db = v,
                Variable::Kappa => kappa = v,
                Variable::Rho => rho = v,
                Variable::GammaThDb => gth_db = v,
            }
        }
        let snr = db_to_linear(snr_db);
        let model = |n: usize| {
            if rho == 0.0 {
                CorrelationModel::Identity { size: n }
            } else {
                CorrelationModel::Exponential { size: n, rho }
            }
        };
        Scenario {
            node1: model(curve.n1),
            node2: model(curve.n2),
            snr,
            gamma_th: db_to_linear(gth_db),
            powers: ChannelPowers::Geometry {
                omega0: db_to_linear(self.omega0_db),
                kappa,
                mu: self.mu,
            },
            interference: match &self.interference {
                InterferenceSpec::None => Interference::None,
                InterferenceSpec::Db(v) => Interference::Fixed(v.iter().map(|&d| db_to_linear(d)).collect()),
                InterferenceSpec::Ratio(v) => Interference::ProportionalToSnr(v.clone()),
            },
        }
    }
}

impl FromStr for Config {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let raw = Raw::parse(text)?;
        let antennas = match raw.get("antennas") {
            None => return Err(CliError::Config("`antennas` is required".into())),
            Some((line, v)) => split_list(v)
                .map(parse_antennas)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|reason| CliError::Parse { line: *line, reason })?,
        };
        if antennas.is_empty() || antennas.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(CliError::Config("antenna counts must be at least 1".into()));
        }
        let rho = raw.list::<f64>("rho")?.unwrap_or_else(|| vec![0.0]);
        if rho.is_empty() {
            return Err(CliError::Config("`rho` is empty".into()));
        }
        let interference = match (raw.list::<f64>("inr_db")?, raw.list::<f64>("inr_ratio")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("`inr_db` and `inr_ratio` are mutually exclusive".into()))
            }
            (Some(v), None) if !v.is_empty() => InterferenceSpec::Db(v),
            (None, Some(v)) if !v.is_empty() => InterferenceSpec::Ratio(v),
            _ => InterferenceSpec::None,
        };
        let users = raw
            .list::<u8>("users")?
            .unwrap_or_else(|| vec![1, 2])
            .into_iter()
            .map(|u| match u {
                1 => Ok(User::One),
                2 => Ok(User::Two),
                _ => Err(CliError::Config(format!("user {u} does not exist; use 1 or 2"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sweep = match raw.get("sweep") {
            None => None,
            Some((line, v)) => {
                let variable = v.parse().map_err(|reason| CliError::Parse { line: *line, reason })?;
                let need = |k: &str| -> Result<f64, CliError> {
                    if raw.get(k).is_none() {
                        return Err(CliError::Config(format!("a sweep needs `{k}`")));
                    }
                    raw.scalar(k, 0.0)
                };
                let methods = raw
                    .list::<String>("methods")?
                    .unwrap_or_default()
                    .iter()
                    .map(|m| m.parse().map_err(CliError::Config))
                    .collect::<Result<Vec<SweepMethod>, _>>()?;
                Some(SweepSpec::new(variable, need("start")?, need("stop")?, need("step")?, methods)?)
            }
        };
        let series = SeriesControl::new(raw.scalar("max_series_terms", 50)?, raw.scalar("series_tolerance", 1e-12)?)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Config {
            antennas,
            rho,
            kappa: raw.scalar("kappa", 0.5)?,
            mu: raw.scalar("mu", 4.0)?,
            omega0_db: raw.scalar("omega0_db", 0.0)?,
            snr_db: raw.scalar("snr_db", 20.0)?,
            gamma_th_db: raw.scalar("gamma_th_db", 5.0)?,
            interference,
            users,
            sweep,
            trials: raw.scalar("trials", 1_000_000)?,
            seed: raw.scalar("seed", 1)?,
            series,
            validate_min_p: raw.scalar("validate_min_p", 1e-4)?,
        })
    }
}

//! Experiment configuration: a flat `key = value` text format.
//!
//! Resolution order is experiment defaults, then the config file, then
//! `--key value` flags. The textual form written by [`ExperimentConfig::to_text`]
//! parses back to the identical config.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use serde::Serialize;

use pdmp_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig2,
    RateCoupling,
    W1True,
    OptimalP,
    TvHybrid,
    ConstantRate,
    Storage,
    InvariantCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig2,
        Experiment::RateCoupling,
        Experiment::W1True,
        Experiment::OptimalP,
        Experiment::TvHybrid,
        Experiment::ConstantRate,
        Experiment::Storage,
        Experiment::InvariantCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::RateCoupling => "rate-coupling",
            Experiment::W1True => "w1-true",
            Experiment::OptimalP => "optimal-p",
            Experiment::TvHybrid => "tv-hybrid",
            Experiment::ConstantRate => "constant-rate",
            Experiment::Storage => "storage",
            Experiment::InvariantCheck => "invariant-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment '{s}'")))
    }
}

/// Either `start:stop:step` or an explicit comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Grid {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| {
                        // keep printed values short: 0.6 rather than 0.6000000000000001
                        let v = start + step * i as f64;
                        (v * 1e12).round() / 1e12
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Usage(format!("{key}: '{s}' is not a number")))
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Usage(format!("grid '{s}' must be start:stop:step")));
            }
            let start = parse_f64("grid", parts[0])?;
            let stop = parse_f64("grid", parts[1])?;
            let step = parse_f64("grid", parts[2])?;
            if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
                return Err(Error::Usage(format!(
                    "grid '{s}' needs finite start <= stop and step > 0"
                )));
            }
            Ok(Grid::Range { start, stop, step })
        } else {
            let v = s
                .split(',')
                .map(|p| parse_f64("grid", p))
                .collect::<Result<Vec<f64>>>()?;
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Usage(format!("grid '{s}' must list finite numbers")));
            }
            Ok(Grid::List(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        }
    }

    pub fn csv(&self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(&self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(Error::Usage(format!("format must be csv, json or both, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Initial points.
    pub x: f64,
    pub y: f64,
    /// Jump rate of the constant-rate model.
    pub lambda: f64,
    /// Storage model: jump rate and decay rate.
    pub alpha: f64,
    pub beta: f64,
    /// Highest moment order (constant-rate).
    pub n: u32,
    /// Single horizon; `inf` selects stationary quantities where supported.
    pub t: f64,
    /// Time grid, or exponent grid for `optimal-p`.
    pub grid: Grid,
    /// Regression window.
    pub window: (f64, f64),
    /// Horizons over which the hybrid bound exponent is fitted.
    pub fit_times: Grid,
    pub replicas: usize,
    pub seed: u64,
    /// Gap level in the one-attempt coalescence bound.
    pub eps: f64,
    /// Anchor time of the hybrid schedule.
    pub t0: f64,
    /// Coalescence attempts of the hybrid coupling.
    pub rounds: u32,
    /// Directory receiving the artifacts.
    pub output: String,
    pub format: Format,
    pub svg: bool,
}

impl ExperimentConfig {
    /// Defaults reproducing each experiment's reference setting.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            x: 2.0,
            y: 10.0,
            lambda: 1.0,
            alpha: 1.0,
            beta: 2.0,
            n: 2,
            t: 4.0,
            grid: Grid::Range {
                start: 0.0,
                stop: 10.0,
                step: 0.25,
            },
            window: (2.0, 10.0),
            fit_times: Grid::List(vec![20.0, 40.0, 80.0]),
            replicas: 10_000,
            seed: 7,
            eps: 0.05,
            t0: 1.0,
            rounds: 1,
            output: "pdmp-out".to_string(),
            format: Format::Csv,
            svg: false,
        };
        match experiment {
            Experiment::Fig2 | Experiment::RateCoupling => {}
            Experiment::W1True => {
                c.x = 2.0;
                c.y = 0.5;
                c.grid = Grid::Range {
                    start: 0.2,
                    stop: 4.0,
                    step: 0.2,
                };
                c.window = (0.0, 4.0);
                c.replicas = 100_000;
            }
            Experiment::OptimalP => {
                c.grid = Grid::Range {
                    start: 0.05,
                    stop: 0.95,
                    step: 0.001,
                };
            }
            Experiment::TvHybrid => {
                c.grid = Grid::List(vec![10.0, 15.0, 20.0]);
            }
            Experiment::ConstantRate => {
                c.x = 0.0;
                c.y = 1.0;
                c.grid = Grid::List(vec![0.5, 1.0, 3.0]);
                c.replicas = 100_000;
            }
            Experiment::Storage => {
                c.x = 0.0;
                c.y = 1.0;
                c.grid = Grid::List(vec![0.5, 1.0, 3.0]);
                c.replicas = 100_000;
            }
            Experiment::InvariantCheck => {
                c.x = 1.0;
                c.t = 30.0;
                c.replicas = 100_000;
            }
        }
        c
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |k: &str| parse_f64(k, v);
        match key {
            "experiment" => self.experiment = v.parse()?,
            "x" => self.x = num(key)?,
            "y" => self.y = num(key)?,
            "lambda" => self.lambda = num(key)?,
            "alpha" => self.alpha = num(key)?,
            "beta" => self.beta = num(key)?,
            "n" => {
                self.n = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("n: '{v}' is not a positive integer")))?
            }
            "t" => self.t = num(key)?,
            "grid" => self.grid = v.parse()?,
            "window" => {
                let (a, b) = v
                    .split_once(':')
                    .ok_or_else(|| Error::Usage(format!("window '{v}' must be tmin:tmax")))?;
                self.window = (parse_f64(key, a)?, parse_f64(key, b)?);
            }
            "fit-times" => self.fit_times = v.parse()?,
            "replicas" => {
                self.replicas = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("replicas: '{v}' is not a count")))?
            }
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("seed: '{v}' is not an unsigned integer")))?
            }
            "eps" => self.eps = num(key)?,
            "t0" => self.t0 = num(key)?,
            "rounds" => {
                self.rounds = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("rounds: '{v}' is not a count")))?
            }
            "output" => self.output = v.to_string(),
            "format" => self.format = v.parse()?,
            "svg" => {
                self.svg = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("svg: '{v}' must be true or false")))?
            }
            // informational, written into every artifact
            "version" => {}
            _ => return Err(Error::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parses the text form on top of the defaults of the experiment named
    /// in it (or of `fallback` when it names none).
    pub fn from_text(text: &str, fallback: Experiment) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let experiment = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.parse()?,
            None => fallback,
        };
        let mut c = Self::defaults(experiment);
        for (k, v) in &pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// `(key, value)` pairs in fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("experiment", self.experiment.to_string()),
            ("x", self.x.to_string()),
            ("y", self.y.to_string()),
            ("lambda", self.lambda.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("n", self.n.to_string()),
            ("t", self.t.to_string()),
            ("grid", self.grid.to_string()),
            ("window", format!("{}:{}", self.window.0, self.window.1)),
            ("fit-times", self.fit_times.to_string()),
            ("replicas", self.replicas.to_string()),
            ("seed", self.seed.to_string()),
            ("eps", self.eps.to_string()),
            ("t0", self.t0.to_string()),
            ("rounds", self.rounds.to_string()),
            ("output", self.output.clone()),
            ("format", self.format.name().to_string()),
            ("svg", self.svg.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use pdmp_core::{Error, Result};
use pdmp_lab::config::{parse_pairs, Experiment, ExperimentConfig};
use pdmp_lab::{exit_code, run, EXIT_CHECK_FAILED, EXIT_USAGE};

/// Environment variable giving the default worker count.
const THREADS_ENV: &str = "PDMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pdmp-lab", version, about = "Couplings and convergence bounds for the TCP window-size process")]
#[command(allow_negative_numbers = true)]
struct Cli {
    experiment: Experiment,
    /// Flat `key = value` file applied on top of the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Compare the results with the acceptance thresholds; exit 3 on failure.
    #[arg(long)]
    check: bool,
    /// Worker threads (default: $PDMP_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Highest moment order.
    #[arg(long)]
    n: Option<String>,
    /// Horizon; `inf` for stationary quantities (constant-rate).
    #[arg(long)]
    t: Option<String>,
    /// `start:stop:step` or `a,b,c`.
    #[arg(long)]
    grid: Option<String>,
    /// Regression window `tmin:tmax`.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    fit_times: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    /// Output directory.
    #[arg(long)]
    output: Option<String>,
    /// csv, json or both.
    #[arg(long)]
    format: Option<String>,
    /// Also write an SVG plot of the main table.
    #[arg(long)]
    svg: bool,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("x", &self.x),
            ("y", &self.y),
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("n", &self.n),
            ("t", &self.t),
            ("grid", &self.grid),
            ("window", &self.window),
            ("fit-times", &self.fit_times),
            ("replicas", &self.replicas),
            ("seed", &self.seed),
            ("eps", &self.eps),
            ("t0", &self.t0),
            ("rounds", &self.rounds),
            ("output", &self.output),
            ("format", &self.format),
        ]
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::defaults(self.experiment);
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
            for (k, v) in parse_pairs(&text)? {
                if k == "experiment" && v != self.experiment.name() {
                    return Err(Error::Usage(format!(
                        "{} is a config for '{v}', not '{}'",
                        path.display(),
                        self.experiment
                    )));
                }
                config.set(&k, &v)?;
            }
        }
        for (k, v) in self.overrides() {
            if let Some(v) = v {
                config.set(k, v)?;
            }
        }
        if self.svg {
            config.svg = true;
        }
        Ok(config)
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                Error::Usage(format!("{THREADS_ENV}='{v}' is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Usage("thread count must be positive".to_string()));
    }
    Ok(n)
}

fn execute(cli: &Cli) -> Result<bool> {
    let config = cli.resolve()?;
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    }
    let report = run(&config)?;
    let written = report.write(Path::new(&config.output))?;
    for (name, value) in &report.scalars {
        println!("{name} = {value}");
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(!cli.check || report.all_passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(e) => {
            eprintln!("pdmp-lab: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

//! Command-line front end for the `random-gauge` library.
//!
//! [`run`] is the whole program; the `rgauge` binary only forwards process
//! arguments and exits with its status. Exit status 0 means success, 1 a
//! failed run (including a golden-list mismatch in `validate`), 2 a bad
//! configuration.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use config::{parse_count, CommandConfig, Format, RunConfig, DEFAULT_SEED, SEED_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "rgauge",
    version,
    about = "Random gauge analytics and Monte Carlo checks"
)]
pub struct Cli {
    /// Master seed [env: RGAUGE_SEED] [default: 271828]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON summary file for scenario commands
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config; its fields override flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Series cap
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    /// Series tail tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Angle law, e.g. `gaussian:sigma=1`, `cauchy:alpha=0.5`, `uniform`
    #[arg(long)]
    pub dist: Option<String>,
    /// `sin` or `cos`
    #[arg(long)]
    pub kind: Option<String>,
    /// Amplitude A
    #[arg(long, visible_alias = "A")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic function over a frequency grid, with Monte Carlo
    Cf {
        #[command(flatten)]
        t: TransformArgs,
        /// `start:stop:step` or a single value
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
    },
    /// Density table
    Pdf {
        #[command(flatten)]
        t: TransformArgs,
        /// Cosine-spaced nodes inside (-A, A)
        #[arg(long)]
        points: Option<usize>,
        /// Explicit `start:stop:step` grid
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
    },
    /// Moments by both analytic routes and Monte Carlo
    Moments {
        #[command(flatten)]
        t: TransformArgs,
        #[arg(long)]
        max_m: Option<u32>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
    },
    /// Flux phase noise: shift statistics and fringe visibility
    Ab {
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        flux: Option<f64>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Random phasor sum statistics
    Phasor {
        /// `AMPLITUDE@ANGLE`, repeatable, e.g. `det:1@uniform`
        #[arg(long = "term")]
        terms: Vec<String>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
    },
    /// Huygens propagation with a gain pattern
    Huygens {
        /// `const:C` or `poly:offset=..,a11=..`
        #[arg(long)]
        gain: Option<String>,
        /// `ones:N`, `sine:N` or `csv:PATH`
        #[arg(long)]
        wavefront: Option<String>,
        #[arg(long)]
        t2: Option<f64>,
        /// Gaussian noise on every coefficient; runs the ensemble
        #[arg(long)]
        coef_std: Option<f64>,
        #[arg(long, value_parser = parse_count)]
        draws: Option<u64>,
    },
    /// Metric invariance under random direction angles
    Metric {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
        /// Scale of the metric phase factor
        #[arg(long)]
        s: Option<f64>,
        /// Law of the metric phase
        #[arg(long)]
        noise: Option<String>,
    },
    /// Discrepancy report checked against the golden verdict list
    Validate {
        /// Report block, repeatable (gaussian, gaussian-cos, ...)
        #[arg(long)]
        only: Vec<String>,
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_parser = parse_count)]
        count: Option<u64>,
    },
}

fn put<T: serde::Serialize>(map: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        map.insert(
            key.to_string(),
            serde_json::to_value(v).expect("serializable"),
        );
    }
}

fn transform_flags(map: &mut Map<String, Value>, t: TransformArgs) {
    put(map, "dist", t.dist);
    put(map, "kind", t.kind);
    put(map, "amplitude", t.amplitude);
}

/// The subcommand name and its explicitly given flags.
fn command_flags(c: Command) -> (&'static str, Map<String, Value>) {
    let mut m = Map::new();
    let name = match c {
        Command::Cf { t, omega, count } => {
            transform_flags(&mut m, t);
            put(&mut m, "omega", omega);
            put(&mut m, "count", count);
            "cf"
        }
        Command::Pdf { t, points, y } => {
            transform_flags(&mut m, t);
            put(&mut m, "points", points);
            put(&mut m, "y", y);
            "pdf"
        }
        Command::Moments { t, max_m, count } => {
            transform_flags(&mut m, t);
            put(&mut m, "max_m", max_m);
            put(&mut m, "count", count);
            "moments"
        }
        Command::Ab {
            noise,
            coupling,
            flux,
            count,
            grid,
        } => {
            put(&mut m, "noise", noise);
            put(&mut m, "coupling", coupling);
            put(&mut m, "flux", flux);
            put(&mut m, "count", count);
            put(&mut m, "grid", grid);
            "ab"
        }
        Command::Phasor { terms, count } => {
            put(&mut m, "terms", (!terms.is_empty()).then_some(terms));
            put(&mut m, "count", count);
            "phasor"
        }
        Command::Huygens {
            gain,
            wavefront,
            t2,
            coef_std,
            draws,
        } => {
            put(&mut m, "gain", gain);
            put(&mut m, "wavefront", wavefront);
            put(&mut m, "t2", t2);
            put(&mut m, "coef_std", coef_std);
            put(&mut m, "draws", draws);
            "huygens"
        }
        Command::Metric { r, count, s, noise } => {
            put(&mut m, "r", r);
            put(&mut m, "count", count);
            put(&mut m, "s", s);
            put(&mut m, "noise", noise);
            "metric"
        }
        Command::Validate {
            only,
            golden,
            out_dir,
            count,
        } => {
            put(&mut m, "only", (!only.is_empty()).then_some(only));
            put(&mut m, "golden", golden);
            put(&mut m, "out_dir", out_dir);
            put(&mut m, "count", count);
            "validate"
        }
    };
    (name, m)
}

/// Layer defaults, flags and the config file into the effective config.
pub fn effective_config(cli: Cli) -> Result<RunConfig> {
    let file: Option<Value> = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config `{}`", path.display()))?;
            Some(
                serde_json::from_str(&text)
                    .with_context(|| format!("config `{}` is not valid JSON", path.display()))?,
            )
        }
        None => None,
    };

    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            config::parse_count(s.trim())
                .map_err(|e| anyhow::anyhow!("invalid `{SEED_ENV}`: {e}"))?,
        ),
        Err(_) => None,
    };

    let (name, flags) = match cli.command {
        Some(c) => {
            let (n, f) = command_flags(c);
            (Some(n), f)
        }
        None => (None, Map::new()),
    };
    let name = name
        .map(str::to_string)
        .or_else(|| {
            file.as_ref()?
                .get("command")?
                .as_object()?
                .keys()
                .next()
                .cloned()
        })
        .context("no command given (use a subcommand or a config file with `command`)")?;
    let default_cmd = CommandConfig::default_for(&name)
        .with_context(|| format!("invalid `command`: unknown command `{name}`"))?;

    let mut value = json!({
        "seed": env_seed.unwrap_or(DEFAULT_SEED),
        "format": Format::Csv,
        "command": default_cmd,
    });
    let mut top = Map::new();
    put(&mut top, "seed", cli.seed);
    put(&mut top, "threads", cli.threads);
    put(&mut top, "out", cli.out);
    put(&mut top, "summary", cli.summary);
    put(&mut top, "format", cli.format);
    let mut series = Map::new();
    put(&mut series, "max_order", cli.max_order);
    put(&mut series, "tail_tolerance", cli.tol);
    if !series.is_empty() {
        top.insert("series".into(), Value::Object(series));
    }
    top.insert("command".into(), json!({ name: flags }));
    config::overlay(&mut value, Value::Object(top));
    if let Some(file) = file {
        config::overlay(&mut value, file);
    }
    let cfg: RunConfig =
        serde_json::from_value(value).map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
    if cfg.threads == Some(0) {
        anyhow::bail!("invalid `threads`: must be at least 1");
    }
    Ok(cfg)
}

/// Run the program with `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match effective_config(cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            return 2;
        }
    };
    let _ = writeln!(
        stderr,
        "{}",
        serde_json::to_string(&cfg).expect("serializable")
    );

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker threads: {e}");
            return 1;
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = pool.install(|| commands::execute(&cfg, &mut out, &mut err));
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.downcast_ref::<commands::ConfigError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

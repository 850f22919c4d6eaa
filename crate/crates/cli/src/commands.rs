//! Command implementations.
//!
//! Each command first turns its config section into library values. Any
//! failure there is a [`ConfigError`] and nothing has been written yet. The
//! command then computes its whole table in memory and only writes once the
//! computation has succeeded, so a failed run never leaves a partial file.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use random_gauge::angles::AngleDistribution;
use random_gauge::gauge::{self, FluxPhenomenon};
use random_gauge::huygens;
use random_gauge::oracle::{self, build_report, format_real, GoldenList, ReportBlock, MIN_COUNT};
use random_gauge::phasors::{self, PhasorSum};
use random_gauge::sintrans::{self, PdfSeries, SeriesControl, MAX_MOMENT_ORDER};
use random_gauge::stream::MAX_SAMPLES;
use serde_json::{json, Map, Value};

use crate::config::{self, field, CommandConfig, Format, RunConfig};

/// A configuration problem found before any output was produced.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn prepare<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(ConfigError(e)))
}

fn check_count(name: &str, count: u64, min: u64) -> Result<()> {
    if count < min || count > MAX_SAMPLES {
        bail!("invalid `{name}`: {count} outside {min}..={MAX_SAMPLES}");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Rows of one output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_real(*x),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of row objects. Non-finite numbers become `null`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Num(x) => json!(x),
                            Cell::Text(s) => json!(s),
                        };
                        (k.to_string(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
        s.push('\n');
        s
    }
}

/// Result of a scenario: the table plus an optional JSON summary.
struct Output {
    table: Table,
    summary: Option<Value>,
}

pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let out = match &cfg.command {
        CommandConfig::Cf(c) => cmd_cf(cfg, c)?,
        CommandConfig::Pdf(c) => cmd_pdf(cfg, c)?,
        CommandConfig::Moments(c) => cmd_moments(cfg, c)?,
        CommandConfig::Ab(c) => cmd_ab(cfg, c)?,
        CommandConfig::Phasor(c) => cmd_phasor(cfg, c)?,
        CommandConfig::Huygens(c) => cmd_huygens(cfg, c)?,
        CommandConfig::Metric(c) => cmd_metric(cfg, c)?,
        CommandConfig::Validate(c) => return cmd_validate(cfg, c, stdout, stderr),
    };
    let body = match cfg.format {
        Format::Csv => out.table.to_csv(),
        Format::Json => out.table.to_json(),
    };
    match &cfg.out {
        Some(path) => write_file(path, &body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    if let Some(summary) = out.summary {
        let text = serde_json::to_string_pretty(&summary)? + "\n";
        match summary_path(cfg) {
            Some(path) => write_file(&path, &text)?,
            None => stderr.write_all(text.as_bytes())?,
        }
    }
    Ok(0)
}

/// `summary` if set, else `<out>.summary.json`, else none (stderr).
pub fn summary_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.summary
        .clone()
        .or_else(|| cfg.out.as_ref().map(|p| p.with_extension("summary.json")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn complex_json(z: random_gauge::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cmd_cf(cfg: &RunConfig, c: &config::CfConfig) -> Result<Output> {
    let (t, omegas, ctl) = prepare((|| {
        let t = c.transform()?;
        let omegas = config::parse_range("omega", &c.omega)?;
        check_count("count", c.count, MIN_COUNT)?;
        let ctl = cfg.series.apply(SeriesControl::default())?;
        Ok((t, omegas, ctl))
    })())?;
    let mut table = Table::new(&["omega", "re", "im", "mc_re", "mc_im", "std_err"]);
    for w in omegas {
        let m = sintrans::cf_series(&t, w, &ctl).with_context(|| format!("omega = {w}"))?;
        let e = oracle::estimate_cf(&t, w, cfg.seed, c.count)?;
        table.push(vec![
            w.into(),
            m.re.into(),
            m.im.into(),
            e.value.re.into(),
            e.value.im.into(),
            e.std_error.into(),
        ]);
    }
    Ok(Output {
        table,
        summary: None,
    })
}

/// `points` Chebyshev nodes `-A cos((2k+1) pi / (2N))`, ascending and
/// strictly inside the support.
pub fn cosine_nodes(amplitude: f64, points: usize) -> Vec<f64> {
    let n = points as f64;
    (0..points)
        .map(|k| -amplitude * ((2 * k + 1) as f64 * std::f64::consts::PI / (2.0 * n)).cos())
        .collect()
}

fn cmd_pdf(cfg: &RunConfig, c: &config::PdfConfig) -> Result<Output> {
    let (t, ys, ctl) = prepare((|| {
        let t = c.transform()?;
        let ys = match &c.y {
            Some(y) => config::parse_range("y", y)?,
            None => {
                if !(2..=10_000_000).contains(&c.points) {
                    bail!("invalid `points`: {} outside 2..=10000000", c.points);
                }
                cosine_nodes(t.amplitude, c.points)
            }
        };
        let ctl = cfg.series.apply(SeriesControl::for_pdf(&t.dist))?;
        Ok((t, ys, ctl))
    })())?;
    let series = PdfSeries::new(&t, &ctl)?;
    let mut table = Table::new(&["y", "pdf"]);
    for y in ys {
        table.push(vec![y.into(), series.eval(y).into()]);
    }
    Ok(Output {
        table,
        summary: None,
    })
}

fn cmd_moments(cfg: &RunConfig, c: &config::MomentsConfig) -> Result<Output> {
    let (t, ctl) = prepare((|| {
        let t = c.transform()?;
        if !(1..=MAX_MOMENT_ORDER).contains(&c.max_m) {
            bail!(
                "invalid `max_m`: {} outside 1..={MAX_MOMENT_ORDER}",
                c.max_m
            );
        }
        check_count("count", c.count, MIN_COUNT)?;
        let ctl = cfg.series.apply(SeriesControl::default())?;
        Ok((t, ctl))
    })())?;
    let mc = oracle::estimate_moments(&t, c.max_m, cfg.seed, c.count)?;
    let mut table = Table::new(&["m", "bessel", "chebyshev", "mc", "std_err"]);
    for m in 1..=c.max_m {
        let e = &mc[m as usize];
        table.push(vec![
            (m as f64).into(),
            sintrans::moment_bessel(&t, m)?.into(),
            sintrans::moment_chebyshev(&t, m, &ctl)?.into(),
            e.value.into(),
            e.std_error.into(),
        ]);
    }
    Ok(Output {
        table,
        summary: None,
    })
}

fn cmd_ab(cfg: &RunConfig, c: &config::AbConfig) -> Result<Output> {
    let p = prepare((|| {
        let noise: AngleDistribution = field("noise", c.noise.parse())?;
        let p = FluxPhenomenon::new(c.coupling, c.flux, noise).map_err(|e| {
            let name = match &e {
                random_gauge::Error::InvalidParameter {
                    name: "coupling", ..
                } => "coupling",
                random_gauge::Error::NonFinite { name: "flux", .. } => "flux",
                _ => "noise",
            };
            anyhow!("invalid `{name}`: {e}")
        })?;
        check_count("count", c.count, gauge::MIN_VISIBILITY_COUNT)?;
        if c.grid < gauge::MIN_VISIBILITY_GRID {
            bail!(
                "invalid `grid`: needs at least {} phases",
                gauge::MIN_VISIBILITY_GRID
            );
        }
        Ok(p)
    })())?;
    let vis = gauge::fringe_visibility(&p.noise, cfg.seed, c.count, c.grid)?;
    let est = gauge::estimate_shift(&p, cfg.seed, c.count)?;
    let var = gauge::random_shift_variance(&p);
    let mut table = Table::new(&["phi", "intensity"]);
    for (phi, i) in vis.phases.iter().zip(&vis.intensity) {
        table.push(vec![(*phi).into(), (*i).into()]);
    }
    let summary = json!({
        "phase_difference": gauge::phase_difference(&p),
        "visibility": {
            "analytic": vis.analytic,
            "empirical": vis.empirical,
            "std_error": vis.std_error,
            "grid_contrast": vis.grid_contrast,
        },
        "shift_mean": {
            "analytic": complex_json(gauge::random_shift_mean(&p)),
            "mc": complex_json(est.mean.value),
            "std_error": est.mean.std_error,
        },
        "shift_variance": {
            "paper_form": complex_json(var.paper_form),
            "exact_form": complex_json(var.exact_form),
            "mc": { "re": est.var_re.value, "im": est.var_im.value },
            "std_error": { "re": est.var_re.std_error, "im": est.var_im.std_error },
        },
        "count": c.count,
        "seed": cfg.seed,
    });
    Ok(Output {
        table,
        summary: Some(summary),
    })
}

fn cmd_phasor(cfg: &RunConfig, c: &config::PhasorConfig) -> Result<Output> {
    let s = prepare((|| {
        let terms = c.build()?;
        check_count("count", c.count, MIN_COUNT)?;
        field("terms", PhasorSum::new(terms))
    })())?;
    let est = phasors::estimate_sum(&s, cfg.seed, c.count)?;
    let mean = phasors::sum_mean(&s);
    let paper = phasors::sum_variance_paper(&s);
    let exact = phasors::sum_variance_exact(&s);
    let mut table = Table::new(&["quantity", "re", "im", "mc_re", "mc_im", "se_re", "se_im"]);
    let mc_var = (est.var_re.value, est.var_im.value);
    let se_var = (est.var_re.std_error, est.var_im.std_error);
    let se_mean = est.mean.std_error;
    for (name, z, mc, se) in [
        (
            "mean",
            mean,
            (est.mean.value.re, est.mean.value.im),
            (se_mean, se_mean),
        ),
        ("variance_paper", paper, mc_var, se_var),
        ("variance_exact", exact, mc_var, se_var),
    ] {
        table.push(vec![
            name.into(),
            z.re.into(),
            z.im.into(),
            mc.0.into(),
            mc.1.into(),
            se.0.into(),
            se.1.into(),
        ]);
    }
    let summary = json!({
        "terms": c.terms,
        "mean": complex_json(mean),
        "variance_paper": complex_json(paper),
        "variance_exact": complex_json(exact),
        "mc": {
            "mean": complex_json(est.mean.value),
            "mean_std_error": se_mean,
            "variance": { "re": mc_var.0, "im": mc_var.1 },
            "variance_std_error": { "re": se_var.0, "im": se_var.1 },
        },
        "count": c.count,
        "seed": cfg.seed,
    });
    Ok(Output {
        table,
        summary: Some(summary),
    })
}

fn cmd_huygens(cfg: &RunConfig, c: &config::HuygensConfig) -> Result<Output> {
    let (w, g) = prepare((|| {
        let (w, g) = c.build()?;
        if !(c.t2.is_finite() && c.t2 > w.time()) {
            bail!(
                "invalid `t2`: must be finite and later than the wavefront time {}",
                w.time()
            );
        }
        if g.is_random() {
            check_count("draws", c.draws, huygens::MIN_DRAWS)?;
        }
        Ok((w, g))
    })())?;
    if g.is_random() {
        let r = huygens::ensemble_propagate(&w, &g, c.t2, cfg.seed, c.draws)?;
        let mut table = Table::new(&["theta", "mean_intensity", "variance", "std_error"]);
        for k in 0..r.grid.len() {
            table.push(vec![
                r.grid[k].into(),
                r.mean_intensity[k].into(),
                r.variance[k].into(),
                r.std_error[k].into(),
            ]);
        }
        let max_var = r.variance.iter().cloned().fold(0.0, f64::max);
        let summary = json!({
            "nodes": r.grid.len(),
            "t2": c.t2,
            "draws": r.draws,
            "seed": r.seed,
            "max_variance": max_var,
            "mean_intensity_min": r.mean_intensity.iter().cloned().fold(f64::INFINITY, f64::min),
            "mean_intensity_max": r.mean_intensity.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
        return Ok(Output {
            table,
            summary: Some(summary),
        });
    }
    let out = huygens::propagate(&w, &g, c.t2)?;
    let mut table = Table::new(&["theta", "re", "im"]);
    for (theta, z) in out.grid().iter().zip(out.amplitudes()) {
        table.push(vec![(*theta).into(), z.re.into(), z.im.into()]);
    }
    let re = out.amplitudes().iter().map(|z| z.re);
    let summary = json!({
        "nodes": out.len(),
        "t2": c.t2,
        "re_min": re.clone().fold(f64::INFINITY, f64::min),
        "re_max": re.fold(f64::NEG_INFINITY, f64::max),
        "im_max_abs": out.amplitudes().iter().map(|z| z.im.abs()).fold(0.0, f64::max),
    });
    Ok(Output {
        table,
        summary: Some(summary),
    })
}

fn cmd_metric(cfg: &RunConfig, c: &config::MetricConfig) -> Result<Output> {
    let phase = prepare((|| {
        if !(c.r.is_finite() && c.r >= 0.0) {
            bail!("invalid `r`: must be finite and >= 0");
        }
        if c.count == 0 || c.count > gauge::MAX_METRIC_COUNT {
            bail!(
                "invalid `count`: {} outside 1..={}",
                c.count,
                gauge::MAX_METRIC_COUNT
            );
        }
        if c.s.is_none() && c.noise.is_none() {
            return Ok(None);
        }
        let s = c.s.unwrap_or(1.0);
        if !(s.is_finite() && s > 0.0) {
            bail!("invalid `s`: must be finite and > 0");
        }
        let noise: AngleDistribution = match &c.noise {
            Some(n) => field("noise", n.parse())?,
            None => AngleDistribution::Uniform,
        };
        if c.count < MIN_COUNT {
            bail!("invalid `count`: the metric phase needs at least {MIN_COUNT} draws");
        }
        Ok(Some((s, noise)))
    })())?;
    let dev = gauge::metric_invariance(c.r, cfg.seed, c.count)?;
    let bound = 8.0 * f64::EPSILON * c.r * c.r;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["max_deviation".into(), dev.into()]);
    table.push(vec!["bound".into(), bound.into()]);
    let mut summary = json!({
        "r": c.r,
        "count": c.count,
        "seed": cfg.seed,
        "max_deviation": dev,
        "bound": bound,
        "within_bound": dev <= bound,
    });
    if let Some((s, noise)) = phase {
        let mp = gauge::metric_phase(s, &noise, cfg.seed, c.count)?;
        let e = &mp.estimate;
        for (name, v) in [
            ("phase_mean_re", mp.mean.re),
            ("phase_mean_im", mp.mean.im),
            ("phase_mc_mean_re", e.mean.value.re),
            ("phase_mc_mean_im", e.mean.value.im),
            ("phase_variance_exact_re", mp.variance.exact_form.re),
            ("phase_variance_exact_im", mp.variance.exact_form.im),
            ("phase_variance_paper_re", mp.variance.paper_form.re),
            ("phase_variance_paper_im", mp.variance.paper_form.im),
            ("phase_mc_variance_re", e.var_re.value),
            ("phase_mc_variance_im", e.var_im.value),
        ] {
            table.push(vec![name.into(), v.into()]);
        }
        summary["metric_phase"] = json!({
            "s": s,
            "noise": noise.to_string(),
            "mean": complex_json(mp.mean),
            "variance_paper": complex_json(mp.variance.paper_form),
            "variance_exact": complex_json(mp.variance.exact_form),
            "mc_mean": complex_json(e.mean.value),
            "mc_mean_std_error": e.mean.std_error,
            "mc_variance": { "re": e.var_re.value, "im": e.var_im.value },
            "mc_variance_std_error": { "re": e.var_re.std_error, "im": e.var_im.std_error },
        });
    }
    Ok(Output {
        table,
        summary: Some(summary),
    })
}

pub fn parse_block(name: &str) -> Option<ReportBlock> {
    ReportBlock::ALL
        .iter()
        .copied()
        .find(|b| b.name().eq_ignore_ascii_case(name.trim()))
}

fn cmd_validate(
    cfg: &RunConfig,
    c: &config::ValidateConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (blocks, golden) = prepare((|| {
        let blocks: Vec<ReportBlock> = if c.only.is_empty() {
            ReportBlock::ALL.to_vec()
        } else {
            let mut picked = Vec::new();
            for name in &c.only {
                let b = parse_block(name).ok_or_else(|| {
                    let known: Vec<&str> = ReportBlock::ALL.iter().map(|b| b.name()).collect();
                    anyhow!(
                        "invalid `only`: unknown block `{name}` (known: {})",
                        known.join(", ")
                    )
                })?;
                if !picked.contains(&b) {
                    picked.push(b);
                }
            }
            picked
        };
        check_count("count", c.count, MIN_COUNT)?;
        let golden = match &c.golden {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| {
                    format!("invalid `golden`: cannot read `{}`", path.display())
                })?;
                field("golden", text.parse::<GoldenList>())?
            }
            None => GoldenList::default_list(),
        };
        Ok((blocks, golden))
    })())?;
    let report = build_report(&blocks, cfg.seed, c.count)?;
    fs::create_dir_all(&c.out_dir)
        .with_context(|| format!("cannot create `{}`", c.out_dir.display()))?;
    let text = report.to_text();
    write_file(&c.out_dir.join("report.csv"), &report.to_csv())?;
    write_file(&c.out_dir.join("report.txt"), &text)?;
    stdout.write_all(text.as_bytes())?;
    let mismatches = golden.check(&report);
    if mismatches.is_empty() {
        return Ok(0);
    }
    writeln!(
        stderr,
        "{} verdict(s) differ from the golden list:",
        mismatches.len()
    )?;
    for m in &mismatches {
        writeln!(stderr, "  {m}")?;
    }
    Ok(1)
}

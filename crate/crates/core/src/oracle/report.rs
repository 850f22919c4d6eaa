//! Discrepancy report: printed formula vs analytic route vs Monte Carlo.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::AngleDistribution;
use crate::error::{Error, Result};
use crate::gauge::{self, FluxPhenomenon};
use crate::phasors::{self, AmplitudeLaw, PhasorSum, PhasorTerm};
use crate::sintrans::{corollary_report, PdfSeries, SeriesControl, SinusoidalTransform};
use crate::stream::{self, ids};

/// Verdict threshold in standard errors.
pub const VERDICT_SIGMAS: f64 = 3.0;

/// Relative floor added to the threshold so rows whose Monte Carlo value is
/// exact (zero standard error) are not failed on rounding.
const ROUNDING_FLOOR: f64 = 1e-12;

/// Draws per Monte Carlo target in the default report.
pub const DEFAULT_REPORT_COUNT: u64 = 10_000_000;

/// Expected verdicts shipped with the crate.
pub const DEFAULT_GOLDEN: &str = include_str!("../../data/golden_verdicts.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Agree,
    Disagree,
    Untested,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Agree => "AGREE",
            Verdict::Disagree => "DISAGREE",
            Verdict::Untested => "UNTESTED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AGREE" => Ok(Verdict::Agree),
            "DISAGREE" => Ok(Verdict::Disagree),
            "UNTESTED" => Ok(Verdict::Untested),
            _ => Err(Error::parse(s, "expected AGREE, DISAGREE or UNTESTED")),
        }
    }
}

/// AGREE when the printed value is within threshold of Monte Carlo;
/// DISAGREE when it is not but the analytic value is; UNTESTED when nothing
/// is printed or neither value matches.
pub fn adjudicate(paper: Option<f64>, analytic: f64, mc: f64, std_error: f64) -> Verdict {
    let Some(paper) = paper else {
        return Verdict::Untested;
    };
    let thr = VERDICT_SIGMAS * std_error + ROUNDING_FLOOR * analytic.abs().max(1.0);
    if (paper - mc).abs() <= thr {
        Verdict::Agree
    } else if (analytic - mc).abs() <= thr {
        Verdict::Disagree
    } else {
        Verdict::Untested
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub block: String,
    pub id: String,
    pub paper: Option<f64>,
    pub analytic: f64,
    pub mc: f64,
    pub std_error: f64,
    pub verdict: Verdict,
}

impl ReportRow {
    pub fn new(
        id: impl Into<String>,
        paper: Option<f64>,
        analytic: f64,
        mc: f64,
        std_error: f64,
    ) -> Self {
        ReportRow {
            block: String::new(),
            id: id.into(),
            paper,
            analytic,
            mc,
            std_error,
            verdict: adjudicate(paper, analytic, mc, std_error),
        }
    }
}

/// Named groups of report rows; `--only` selects among these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportBlock {
    /// Zero-mean Gaussian corollary, sine kind.
    Gaussian,
    /// The same printed values against the cosine kind at small width.
    GaussianCos,
    /// Non-zero-mean Gaussian corollary and its CF prefactor.
    GaussianShifted,
    Laplace,
    Cauchy,
    /// Density prefactor.
    Pdf,
    Phasor,
    Gauge,
}

impl ReportBlock {
    pub const ALL: [ReportBlock; 8] = [
        ReportBlock::Gaussian,
        ReportBlock::GaussianCos,
        ReportBlock::GaussianShifted,
        ReportBlock::Laplace,
        ReportBlock::Cauchy,
        ReportBlock::Pdf,
        ReportBlock::Phasor,
        ReportBlock::Gauge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportBlock::Gaussian => "gaussian",
            ReportBlock::GaussianCos => "gaussian-cos",
            ReportBlock::GaussianShifted => "gaussian-shifted",
            ReportBlock::Laplace => "laplace",
            ReportBlock::Cauchy => "cauchy",
            ReportBlock::Pdf => "pdf",
            ReportBlock::Phasor => "phasor",
            ReportBlock::Gauge => "gauge",
        }
    }

    /// Seed of this block under `master`. Depends only on the block, so a
    /// restricted run reproduces the rows of the full run.
    pub fn seed(self, master: u64) -> u64 {
        let index = ReportBlock::ALL.iter().position(|&b| b == self).unwrap() as u64;
        stream::derive_seed(master, ids::REPORT_BASE + index)
    }

    fn rows(self, seed: u64, count: u64) -> Result<Vec<ReportRow>> {
        use std::f64::consts::PI;
        match self {
            ReportBlock::Gaussian => corollary_report(
                &SinusoidalTransform::sin(1.0, AngleDistribution::gaussian_zero_mean(1.0)?)?,
                seed,
                count,
            ),
            ReportBlock::GaussianCos => corollary_report(
                &SinusoidalTransform::cos(1.0, AngleDistribution::gaussian_zero_mean(0.1)?)?,
                seed,
                count,
            ),
            ReportBlock::GaussianShifted => {
                let (sigma, mean) = (0.5, PI / 4.0);
                let t = SinusoidalTransform::cos(1.0, AngleDistribution::gaussian(sigma, mean)?)?;
                let mut rows = corollary_report(&t, seed, count)?;
                // E[cos theta] against the printed CF prefactor.
                let m1 = rows[0].clone();
                let prefactor = (2.0 / (PI * PI * sigma * sigma)).sqrt();
                rows.push(ReportRow::new(
                    format!("{}.cf1.re", t.label()),
                    Some(prefactor * m1.analytic),
                    m1.analytic,
                    m1.mc,
                    m1.std_error,
                ));
                Ok(rows)
            }
            ReportBlock::Laplace => corollary_report(
                &SinusoidalTransform::sin(1.0, AngleDistribution::laplace(1.0)?)?,
                seed,
                count,
            ),
            ReportBlock::Cauchy => corollary_report(
                &SinusoidalTransform::sin(1.0, AngleDistribution::cauchy(1.0)?)?,
                seed,
                count,
            ),
            ReportBlock::Pdf => {
                let cases = [
                    SinusoidalTransform::sin(1.0, AngleDistribution::Uniform)?,
                    SinusoidalTransform::sin(2.0, AngleDistribution::cauchy(1.0)?)?,
                ];
                cases
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let series = PdfSeries::new(t, &SeriesControl::for_pdf(&t.dist))?;
                        let bracket = series.bracket(0.0);
                        let (mc, se) =
                            density_at_zero(t, stream::derive_seed(seed, k as u64), count)?;
                        Ok(ReportRow::new(
                            format!("pdf.{}.a{}.f0", t.label(), t.amplitude),
                            Some(2.0 / PI * bracket),
                            series.eval(0.0),
                            mc,
                            se,
                        ))
                    })
                    .collect()
            }
            ReportBlock::Phasor => {
                let det1 = AmplitudeLaw::deterministic(1.0)?;
                let det2 = AmplitudeLaw::deterministic(2.0)?;
                let normal = AmplitudeLaw::gaussian(0.0, 1.0)?;
                let uni = AngleDistribution::Uniform;
                let cases = [
                    ("det-uniform", vec![PhasorTerm::new(det1, uni); 2], true),
                    ("gauss-uniform", vec![PhasorTerm::new(normal, uni)], true),
                    (
                        "det-gaussian",
                        vec![PhasorTerm::new(
                            det2,
                            AngleDistribution::gaussian_zero_mean(1.0)?,
                        )],
                        false,
                    ),
                ];
                let mut rows = Vec::new();
                for (k, (name, terms, variance)) in cases.into_iter().enumerate() {
                    let s = PhasorSum::new(terms)?;
                    let e = phasors::estimate_sum(&s, stream::derive_seed(seed, k as u64), count)?;
                    if variance {
                        let paper = phasors::sum_variance_paper(&s);
                        let exact = phasors::sum_variance_exact(&s);
                        rows.extend(variance_rows(
                            &format!("phasor.{name}"),
                            paper,
                            exact,
                            &e.var_re,
                            &e.var_im,
                        ));
                    } else {
                        let mean = phasors::sum_mean(&s);
                        rows.extend(mean_rows(
                            &format!("phasor.{name}"),
                            mean,
                            &e.mean.value,
                            &e.var_re,
                            &e.var_im,
                            count,
                        ));
                    }
                }
                Ok(rows)
            }
            ReportBlock::Gauge => {
                let cases = [
                    (
                        "gaussian",
                        AngleDistribution::gaussian_zero_mean(1.0)?,
                        true,
                    ),
                    ("cauchy", AngleDistribution::cauchy(1.0)?, true),
                    (
                        "gaussian-shifted",
                        AngleDistribution::gaussian(0.5, PI / 4.0)?,
                        false,
                    ),
                ];
                let mut rows = Vec::new();
                for (k, (name, noise, variance)) in cases.into_iter().enumerate() {
                    let p = FluxPhenomenon::new(1.0, 1.0, noise)?;
                    let e = gauge::estimate_shift(&p, stream::derive_seed(seed, k as u64), count)?;
                    if variance {
                        let v = gauge::random_shift_variance(&p);
                        rows.extend(variance_rows(
                            &format!("gauge.{name}"),
                            v.paper_form,
                            v.exact_form,
                            &e.var_re,
                            &e.var_im,
                        ));
                    } else {
                        let mean = gauge::random_shift_mean(&p);
                        rows.extend(mean_rows(
                            &format!("gauge.{name}"),
                            mean,
                            &e.mean.value,
                            &e.var_re,
                            &e.var_im,
                            count,
                        ));
                    }
                }
                Ok(rows)
            }
        }
    }
}

fn variance_rows(
    prefix: &str,
    paper: Complex64,
    exact: Complex64,
    var_re: &super::McEstimate<f64>,
    var_im: &super::McEstimate<f64>,
) -> [ReportRow; 2] {
    [
        ReportRow::new(
            format!("{prefix}.var.re"),
            Some(paper.re),
            exact.re,
            var_re.value,
            var_re.std_error,
        ),
        ReportRow::new(
            format!("{prefix}.var.im"),
            Some(paper.im),
            exact.im,
            var_im.value,
            var_im.std_error,
        ),
    ]
}

/// The printed mean is the same `sum E[A] cf(1)` expression as the analytic
/// one, so paper and analytic columns coincide here.
fn mean_rows(
    prefix: &str,
    mean: Complex64,
    mc: &Complex64,
    var_re: &super::McEstimate<f64>,
    var_im: &super::McEstimate<f64>,
    count: u64,
) -> [ReportRow; 2] {
    let n = count as f64;
    [
        ReportRow::new(
            format!("{prefix}.mean.re"),
            Some(mean.re),
            mean.re,
            mc.re,
            (var_re.value / n).sqrt(),
        ),
        ReportRow::new(
            format!("{prefix}.mean.im"),
            Some(mean.im),
            mean.im,
            mc.im,
            (var_im.value / n).sqrt(),
        ),
    ]
}

/// Histogram estimate of the density at `y = 0` from the cell
/// `[-h, h]`, `h = A / 200`.
fn density_at_zero(t: &SinusoidalTransform, seed: u64, count: u64) -> Result<(f64, f64)> {
    super::check_estimate_count(count)?;
    let h = t.amplitude / 200.0;
    let hits: u64 = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        (0..len)
            .filter(|_| t.apply(t.dist.draw(&mut rng)).abs() <= h)
            .count() as u64
    })
    .into_iter()
    .sum();
    let n = count as f64;
    let p = hits as f64 / n;
    Ok((p / (2.0 * h), (p * (1.0 - p) / n).sqrt() / (2.0 * h)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub rows: Vec<ReportRow>,
}

/// Run the selected blocks (in canonical order, duplicates ignored) with
/// `count` draws per Monte Carlo target.
pub fn build_report(
    blocks: &[ReportBlock],
    master_seed: u64,
    count: u64,
) -> Result<DiscrepancyReport> {
    let mut rows = Vec::new();
    for block in ReportBlock::ALL.iter().filter(|b| blocks.contains(b)) {
        for mut row in block.rows(block.seed(master_seed), count)? {
            row.block = block.name().to_string();
            rows.push(row);
        }
    }
    Ok(DiscrepancyReport { rows })
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_real(x: f64) -> String {
    // + 0.0 folds -0 into 0
    format!("{:.16e}", x + 0.0)
}

impl DiscrepancyReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,id,paper,analytic,mc,std_error,verdict\n");
        for r in &self.rows {
            let paper = r.paper.map(format_real).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.block,
                r.id,
                paper,
                format_real(r.analytic),
                format_real(r.mc),
                format_real(r.std_error),
                r.verdict
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.id.len())
            .max()
            .unwrap_or(2)
            .max(2);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>13}  {:>13}  {:>13}  {:>10}  {:>8}  verdict",
            "id", "paper", "analytic", "mc", "std_error", "|p-mc|/se"
        );
        let mut block = "";
        for r in &self.rows {
            if r.block != block {
                block = &r.block;
                let _ = writeln!(out, "[{block}]");
            }
            let paper = r
                .paper
                .map(|p| format!("{p:13.6e}"))
                .unwrap_or_else(|| format!("{:>13}", "-"));
            let z = match r.paper {
                Some(p) if r.std_error > 0.0 => format!("{:8.1}", (p - r.mc).abs() / r.std_error),
                _ => format!("{:>8}", "-"),
            };
            let _ = writeln!(
                out,
                "{:<width$}  {paper}  {:13.6e}  {:13.6e}  {:10.3e}  {z}  {}",
                r.id,
                r.analytic + 0.0,
                r.mc,
                r.std_error,
                r.verdict
            );
        }
        let _ = writeln!(
            out,
            "\n{} rows: {} AGREE, {} DISAGREE, {} UNTESTED",
            self.rows.len(),
            self.count(Verdict::Agree),
            self.count(Verdict::Disagree),
            self.count(Verdict::Untested)
        );
        out
    }
}

/// Expected verdict per row id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldenList {
    pub verdicts: BTreeMap<String, Verdict>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenMismatch {
    pub id: String,
    pub expected: Option<Verdict>,
    pub actual: Verdict,
}

impl fmt::Display for GoldenMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected {
            Some(e) => write!(f, "{}: expected {e}, got {}", self.id, self.actual),
            None => write!(f, "{}: not in golden list, got {}", self.id, self.actual),
        }
    }
}

impl FromStr for GoldenList {
    type Err = Error;

    /// `id,verdict` lines; a leading `id,verdict` header, blank lines and
    /// `#` comments are skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut verdicts = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "id,verdict" {
                continue;
            }
            let (id, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(line, "expected `id,verdict`"))?;
            if verdicts.insert(id.trim().to_string(), v.parse()?).is_some() {
                return Err(Error::parse(line, "duplicate id"));
            }
        }
        Ok(GoldenList { verdicts })
    }
}

impl GoldenList {
    pub fn default_list() -> Self {
        DEFAULT_GOLDEN.parse().expect("shipped golden list parses")
    }

    /// Rows whose verdict differs from the list, including rows the list
    /// does not mention. List entries for rows not in the report are ignored
    /// so restricted runs can be checked.
    pub fn check(&self, report: &DiscrepancyReport) -> Vec<GoldenMismatch> {
        report
            .rows
            .iter()
            .filter_map(|r| {
                let expected = self.verdicts.get(&r.id).copied();
                (expected != Some(r.verdict)).then(|| GoldenMismatch {
                    id: r.id.clone(),
                    expected,
                    actual: r.verdict,
                })
            })
            .collect()
    }
}

//! Effective run configuration.
//!
//! Every run is described by one [`RunConfig`]. It is assembled from
//! built-in defaults, then command-line flags, then an optional JSON file
//! (`--config`), each layer overriding the previous one. The result is
//! echoed to stderr as a single JSON line; feeding that line back through
//! `--config` repeats the run exactly.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use random_gauge::angles::AngleDistribution;
use random_gauge::huygens::{GainPattern, Wavefront};
use random_gauge::phasors::PhasorTerm;
use random_gauge::sintrans::{SeriesControl, SinusoidalTransform, TrigKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable holding the default master seed.
pub const SEED_ENV: &str = "RGAUGE_SEED";
/// Seed used when neither `--seed` nor the environment sets one.
pub const DEFAULT_SEED: u64 = 271_828;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Overrides for the series truncation policy; unset fields fall back to
/// the per-command default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSettings {
    pub max_order: Option<usize>,
    pub tail_tolerance: Option<f64>,
}

impl SeriesSettings {
    pub fn apply(&self, base: SeriesControl) -> Result<SeriesControl> {
        let ctl = SeriesControl {
            max_order: self.max_order.unwrap_or(base.max_order),
            tail_tolerance: self.tail_tolerance.unwrap_or(base.tail_tolerance),
        };
        ctl.validate().context("invalid `series`")?;
        Ok(ctl)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Where scenario commands write their JSON summary. Defaults to
    /// `<out>.summary.json` next to `out`, or stderr without `out`.
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub series: SeriesSettings,
    pub command: CommandConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandConfig {
    Cf(CfConfig),
    Pdf(PdfConfig),
    Moments(MomentsConfig),
    Ab(AbConfig),
    Phasor(PhasorConfig),
    Huygens(HuygensConfig),
    Metric(MetricConfig),
    Validate(ValidateConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Cf(_) => "cf",
            CommandConfig::Pdf(_) => "pdf",
            CommandConfig::Moments(_) => "moments",
            CommandConfig::Ab(_) => "ab",
            CommandConfig::Phasor(_) => "phasor",
            CommandConfig::Huygens(_) => "huygens",
            CommandConfig::Metric(_) => "metric",
            CommandConfig::Validate(_) => "validate",
        }
    }

    pub fn default_for(name: &str) -> Option<CommandConfig> {
        Some(match name {
            "cf" => CommandConfig::Cf(CfConfig::default()),
            "pdf" => CommandConfig::Pdf(PdfConfig::default()),
            "moments" => CommandConfig::Moments(MomentsConfig::default()),
            "ab" => CommandConfig::Ab(AbConfig::default()),
            "phasor" => CommandConfig::Phasor(PhasorConfig::default()),
            "huygens" => CommandConfig::Huygens(HuygensConfig::default()),
            "metric" => CommandConfig::Metric(MetricConfig::default()),
            "validate" => CommandConfig::Validate(ValidateConfig::default()),
            _ => return None,
        })
    }
}

/// Build the transform named by the `dist`, `kind` and `amplitude` fields.
pub fn build_transform(dist: &str, kind: &str, amplitude: f64) -> Result<SinusoidalTransform> {
    let dist: AngleDistribution = field("dist", dist.parse())?;
    let kind: TrigKind = field("kind", kind.parse())?;
    field("amplitude", SinusoidalTransform::new(amplitude, kind, dist))
}

macro_rules! transform_accessor {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn transform(&self) -> Result<SinusoidalTransform> {
                build_transform(&self.dist, &self.kind, self.amplitude)
            }
        }
    )*};
}

transform_accessor!(CfConfig, PdfConfig, MomentsConfig);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfConfig {
    pub dist: String,
    pub kind: String,
    pub amplitude: f64,
    /// `start:stop:step` (inclusive) or a single value.
    pub omega: String,
    /// Monte Carlo draws per frequency.
    pub count: u64,
}

impl Default for CfConfig {
    fn default() -> Self {
        CfConfig {
            dist: "uniform".into(),
            kind: "sin".into(),
            amplitude: 1.0,
            omega: "0:10:0.5".into(),
            count: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdfConfig {
    pub dist: String,
    pub kind: String,
    pub amplitude: f64,
    /// Number of cosine-spaced nodes inside `(-A, A)`.
    pub points: usize,
    /// Explicit `start:stop:step` grid instead of the cosine nodes.
    pub y: Option<String>,
}

impl Default for PdfConfig {
    fn default() -> Self {
        PdfConfig {
            dist: "uniform".into(),
            kind: "sin".into(),
            amplitude: 1.0,
            points: 20_001,
            y: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub dist: String,
    pub kind: String,
    pub amplitude: f64,
    pub max_m: u32,
    pub count: u64,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            dist: "uniform".into(),
            kind: "sin".into(),
            amplitude: 1.0,
            max_m: 4,
            count: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbConfig {
    pub noise: String,
    pub coupling: f64,
    pub flux: f64,
    pub count: u64,
    pub grid: usize,
}

impl Default for AbConfig {
    fn default() -> Self {
        AbConfig {
            noise: "gaussian:sigma=1".into(),
            coupling: 1.0,
            flux: 1.0,
            count: 1_000_000,
            grid: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhasorConfig {
    /// `AMPLITUDE@ANGLE` per term.
    pub terms: Vec<String>,
    pub count: u64,
}

impl Default for PhasorConfig {
    fn default() -> Self {
        PhasorConfig {
            terms: vec!["det:1@uniform".into()],
            count: 1_000_000,
        }
    }
}

impl PhasorConfig {
    pub fn build(&self) -> Result<Vec<PhasorTerm>> {
        if self.terms.is_empty() {
            bail!("invalid `terms`: at least one term is required");
        }
        self.terms
            .iter()
            .map(|t| field("terms", t.parse()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HuygensConfig {
    /// `const:C` or `poly:offset=..,a11=..`.
    pub gain: String,
    /// `ones:N`, `sine:N` or `csv:PATH`.
    pub wavefront: String,
    pub t2: f64,
    /// Standard deviation of Gaussian noise on every coefficient; turns on
    /// the ensemble run.
    pub coef_std: Option<f64>,
    pub draws: u64,
}

impl Default for HuygensConfig {
    fn default() -> Self {
        HuygensConfig {
            gain: "const:0.5".into(),
            wavefront: "ones:256".into(),
            t2: 1.0,
            coef_std: None,
            draws: 1000,
        }
    }
}

impl HuygensConfig {
    pub fn build(&self) -> Result<(Wavefront, GainPattern)> {
        let mut gain: GainPattern = field("gain", self.gain.parse())?;
        if let Some(std) = self.coef_std {
            gain = field("coef_std", gain.with_gaussian_noise(std))?;
        }
        let (kind, arg) = self
            .wavefront
            .split_once(':')
            .ok_or_else(|| anyhow!("invalid `wavefront`: expected ones:N, sine:N or csv:PATH"))?;
        let nodes = || -> Result<usize> {
            arg.trim()
                .parse()
                .map_err(|e| anyhow!("invalid `wavefront`: bad node count `{arg}`: {e}"))
        };
        let w = match kind.trim().to_ascii_lowercase().as_str() {
            "ones" => field("wavefront", Wavefront::ones(nodes()?))?,
            "sine" => field("wavefront", Wavefront::sine(nodes()?))?,
            "csv" => {
                let text = std::fs::read_to_string(arg)
                    .with_context(|| format!("invalid `wavefront`: cannot read `{arg}`"))?;
                field("wavefront", Wavefront::from_csv(&text, 0.0))?
            }
            other => bail!("invalid `wavefront`: unknown kind `{other}`"),
        };
        Ok((w, gain))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub r: f64,
    pub count: u64,
    /// Optional metric-phase statistics of `s exp(i sigma)`.
    pub s: Option<f64>,
    pub noise: Option<String>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            r: 1.0,
            count: 100_000,
            s: None,
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Report blocks to run; empty means all.
    pub only: Vec<String>,
    /// Golden verdict list; the shipped list when unset.
    pub golden: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub count: u64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            only: Vec::new(),
            golden: None,
            out_dir: PathBuf::from("."),
            count: random_gauge::oracle::DEFAULT_REPORT_COUNT,
        }
    }
}

/// Attach the config field name to a library error.
pub fn field<T, E: std::fmt::Display>(name: &str, r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| anyhow!("invalid `{name}`: {e}"))
}

/// Recursively overlay `top` onto `base`. A differing single-key command
/// object replaces the base command instead of merging into it.
pub fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                let replace_command = k == "command"
                    && match (b.get(&k), &v) {
                        (Some(Value::Object(old)), Value::Object(new)) => {
                            old.keys().next() != new.keys().next()
                        }
                        _ => true,
                    };
                match b.get_mut(&k) {
                    Some(slot) if !replace_command => overlay(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// `start:stop:step` (inclusive, with a tolerance of 1e-9 steps) or a single
/// number.
pub fn parse_range(name: &str, text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|e| anyhow!("invalid `{name}`: bad number `{s}`: {e}"))?;
        if !v.is_finite() {
            bail!("invalid `{name}`: `{s}` is not finite");
        }
        Ok(v)
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if s <= 0.0 || b < a {
                bail!("invalid `{name}`: need start <= stop and step > 0");
            }
            let steps = ((b - a) / s + 1e-9).floor();
            if steps > 1e7 {
                bail!("invalid `{name}`: more than 1e7 grid points");
            }
            Ok((0..=steps as u64).map(|k| a + k as f64 * s).collect())
        }
        _ => bail!("invalid `{name}`: expected start:stop:step or a single number"),
    }
}

/// Counts written as integers or in exponent form (`1e6`).
pub fn parse_count(text: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| format!("`{text}` is not a count"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("`{text}` is not a non-negative integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("omega", "0:10:0.5").unwrap().len(), 21);
        assert_eq!(parse_range("omega", "0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_range("omega", "2.5").unwrap(), vec![2.5]);
        assert!(parse_range("omega", "1:0:0.1").is_err());
        assert!(parse_range("omega", "0:1:0").is_err());
        let e = parse_range("omega", "0:x:1").unwrap_err().to_string();
        assert!(e.contains("omega"));
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250000"), Ok(250_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn overlay_rules() {
        let mut base = json!({"seed": 1, "command": {"cf": {"count": 5, "omega": "1"}}});
        overlay(&mut base, json!({"command": {"cf": {"count": 7}}}));
        assert_eq!(
            base,
            json!({"seed": 1, "command": {"cf": {"count": 7, "omega": "1"}}})
        );
        overlay(
            &mut base,
            json!({"seed": 2, "command": {"pdf": {"points": 9}}}),
        );
        assert_eq!(base, json!({"seed": 2, "command": {"pdf": {"points": 9}}}));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = json!({"seed": 1, "command": {"cf": {"dist": "uniform", "sigmaa": 1}}});
        let e = serde_json::from_value::<RunConfig>(bad)
            .unwrap_err()
            .to_string();
        assert!(e.contains("sigmaa"), "{e}");
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig {
            seed: 9,
            threads: Some(2),
            out: Some("x.csv".into()),
            summary: None,
            format: Format::Json,
            series: SeriesSettings {
                max_order: Some(100),
                tail_tolerance: None,
            },
            command: CommandConfig::Cf(CfConfig::default()),
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn transform_errors_name_the_field() {
        let err = |d, k, a| build_transform(d, k, a).unwrap_err().to_string();
        assert!(err("weibull", "sin", 1.0).contains("`dist`"));
        assert!(err("uniform", "tan", 1.0).contains("`kind`"));
        assert!(err("uniform", "sin", -1.0).contains("`amplitude`"));
    }
}

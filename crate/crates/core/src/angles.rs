//! Catalog of random-angle laws.
//!
//! Each law exposes its characteristic function at integer arguments,
//! `cf(n) = E[exp(i n theta)]`, and a seeded sampler. Written with the
//! `exp(-i w theta)` Fourier convention instead, the same quantity is
//! `conj(cf(n))`; the two coincide for every symmetric law.
//!
//! Supports and parameters:
//!
//! | kind | density | `cf(n)` |
//! |------|---------|---------|
//! | uniform | `1/(2 pi)` on `(-pi, pi]` | `1` if `n = 0`, else `0` |
//! | gaussian-zero-mean | normal, mean 0, std `sigma` | `exp(-sigma^2 n^2 / 2)` |
//! | gaussian | normal, mean `mean`, std `sigma` | `exp(-sigma^2 n^2 / 2) exp(i n mean)` |
//! | laplace | `(alpha/2) exp(-alpha |x|)` | `alpha^2 / (alpha^2 + n^2)` |
//! | cauchy | `(alpha/pi) / (alpha^2 + x^2)` | `exp(-alpha |n|)` |
//! | triangular | `(a - |x|)/a^2` on `[-a, a]` | `4 sin^2(n a / 2) / (a^2 n^2)` |
//!
//! `sigma = 0` is accepted for both Gaussian kinds and means a point mass.
//! Laplace and Cauchy samples are returned unwrapped; only `sin`/`cos` of
//! them is ever used.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngleDistribution {
    Uniform,
    GaussianZeroMean { sigma: f64 },
    Gaussian { sigma: f64, mean: f64 },
    Laplace { alpha: f64 },
    Cauchy { alpha: f64 },
    Triangular { half_width: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

impl AngleDistribution {
    pub fn uniform() -> Self {
        AngleDistribution::Uniform
    }

    pub fn gaussian_zero_mean(sigma: f64) -> Result<Self> {
        non_negative("sigma", sigma)?;
        Ok(AngleDistribution::GaussianZeroMean { sigma })
    }

    pub fn gaussian(sigma: f64, mean: f64) -> Result<Self> {
        non_negative("sigma", sigma)?;
        if !mean.is_finite() {
            return Err(Error::NonFinite {
                name: "mean",
                value: mean,
            });
        }
        Ok(AngleDistribution::Gaussian { sigma, mean })
    }

    /// Point mass at `at`, expressed as a zero-width Gaussian.
    pub fn point_mass(at: f64) -> Result<Self> {
        if at == 0.0 {
            Self::gaussian_zero_mean(0.0)
        } else {
            Self::gaussian(0.0, at)
        }
    }

    pub fn laplace(alpha: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(AngleDistribution::Laplace { alpha })
    }

    pub fn cauchy(alpha: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(AngleDistribution::Cauchy { alpha })
    }

    pub fn triangular(half_width: f64) -> Result<Self> {
        positive("a", half_width)?;
        if half_width > PI {
            return Err(Error::InvalidParameter {
                name: "a",
                value: half_width,
                reason: "triangular half-width must not exceed pi",
            });
        }
        Ok(AngleDistribution::Triangular { half_width })
    }

    /// Re-check the parameter constraints, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        match *self {
            AngleDistribution::Uniform => Ok(()),
            AngleDistribution::GaussianZeroMean { sigma } => {
                Self::gaussian_zero_mean(sigma).map(drop)
            }
            AngleDistribution::Gaussian { sigma, mean } => Self::gaussian(sigma, mean).map(drop),
            AngleDistribution::Laplace { alpha } => Self::laplace(alpha).map(drop),
            AngleDistribution::Cauchy { alpha } => Self::cauchy(alpha).map(drop),
            AngleDistribution::Triangular { half_width } => Self::triangular(half_width).map(drop),
        }
    }

    /// One representative of every kind, used by the validation suites.
    pub fn catalog() -> Vec<AngleDistribution> {
        vec![
            AngleDistribution::Uniform,
            AngleDistribution::GaussianZeroMean { sigma: 1.0 },
            AngleDistribution::Gaussian {
                sigma: 0.5,
                mean: PI / 3.0,
            },
            AngleDistribution::Laplace { alpha: 2.0 },
            AngleDistribution::Cauchy { alpha: 1.0 },
            AngleDistribution::Triangular {
                half_width: PI / 2.0,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            AngleDistribution::Uniform => "uniform",
            AngleDistribution::GaussianZeroMean { .. } => "gaussian-zero-mean",
            AngleDistribution::Gaussian { .. } => "gaussian",
            AngleDistribution::Laplace { .. } => "laplace",
            AngleDistribution::Cauchy { .. } => "cauchy",
            AngleDistribution::Triangular { .. } => "triangular",
        }
    }

    /// `cf(n)` is real for every `n`.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            AngleDistribution::Gaussian { mean, .. } => whole_turns_of_pi(mean).is_some(),
            _ => true,
        }
    }

    /// `E[exp(i n theta)]`.
    pub fn cf(&self, n: i64) -> Complex64 {
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let nf = n as f64;
        match *self {
            AngleDistribution::Uniform => Complex64::new(0.0, 0.0),
            AngleDistribution::GaussianZeroMean { sigma } => {
                Complex64::new((-0.5 * sigma * sigma * nf * nf).exp(), 0.0)
            }
            AngleDistribution::Gaussian { sigma, mean } => {
                let envelope = (-0.5 * sigma * sigma * nf * nf).exp();
                match whole_turns_of_pi(mean) {
                    // exp(i n k pi) is exactly +-1
                    Some(k) if (n.rem_euclid(2) * k.rem_euclid(2)) == 1 => {
                        Complex64::new(-envelope, 0.0)
                    }
                    Some(_) => Complex64::new(envelope, 0.0),
                    None => Complex64::from_polar(envelope, nf * mean),
                }
            }
            AngleDistribution::Laplace { alpha } => {
                let a2 = alpha * alpha;
                Complex64::new(a2 / (a2 + nf * nf), 0.0)
            }
            AngleDistribution::Cauchy { alpha } => Complex64::new((-alpha * nf.abs()).exp(), 0.0),
            AngleDistribution::Triangular { half_width } => {
                let h = 0.5 * nf * half_width;
                let sinc = h.sin() / h;
                Complex64::new(sinc * sinc, 0.0)
            }
        }
    }

    /// Draw one angle.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AngleDistribution::Uniform => PI - 2.0 * PI * rng.random::<f64>(),
            AngleDistribution::GaussianZeroMean { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            AngleDistribution::Gaussian { sigma, mean } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sigma * z
            }
            AngleDistribution::Laplace { alpha } => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e / alpha
                } else {
                    -e / alpha
                }
            }
            AngleDistribution::Cauchy { alpha } => alpha * (PI * (rng.random::<f64>() - 0.5)).tan(),
            AngleDistribution::Triangular { half_width } => {
                half_width * (rng.random::<f64>() + rng.random::<f64>() - 1.0)
            }
        }
    }

    /// `count` angles drawn from the stream `(seed, ids::ANGLE)`.
    pub fn sample(&self, seed: u64, count: u64) -> Result<Vec<f64>> {
        self.sample_stream(seed, stream::ids::ANGLE, count)
    }

    pub(crate) fn sample_stream(&self, seed: u64, stream_id: u64, count: u64) -> Result<Vec<f64>> {
        stream::check_count(count)?;
        let chunks = stream::map_chunks(count, |chunk, len| {
            let mut rng = stream::chunk_rng(seed, stream_id, chunk);
            (0..len).map(|_| self.draw(&mut rng)).collect::<Vec<_>>()
        });
        Ok(chunks.concat())
    }
}

/// `Some(k)` when `x == k * pi` exactly in floating point.
fn whole_turns_of_pi(x: f64) -> Option<i64> {
    if x == 0.0 {
        return Some(0);
    }
    let k = (x / PI).round();
    (k * PI == x).then_some(k as i64)
}

/// `(1/N) sum_j exp(i n theta_j)`.
pub fn empirical_cf(samples: &[f64], n: i64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let nf = n as f64;
    let sum = samples.iter().fold(Complex64::new(0.0, 0.0), |acc, &t| {
        acc + Complex64::cis(nf * t)
    });
    Ok(sum / samples.len() as f64)
}

impl fmt::Display for AngleDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AngleDistribution::Uniform => write!(f, "uniform"),
            AngleDistribution::GaussianZeroMean { sigma } => write!(f, "gaussian:sigma={sigma}"),
            AngleDistribution::Gaussian { sigma, mean } => {
                write!(f, "gaussian:sigma={sigma},mean={mean}")
            }
            AngleDistribution::Laplace { alpha } => write!(f, "laplace:alpha={alpha}"),
            AngleDistribution::Cauchy { alpha } => write!(f, "cauchy:alpha={alpha}"),
            AngleDistribution::Triangular { half_width } => write!(f, "triangular:a={half_width}"),
        }
    }
}

/// Parse a number, also accepting multiples and fractions of `pi`
/// (`pi`, `pi/4`, `2pi`, `0.5*pi`, `-pi/3`).
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let Some(idx) = t.find("pi") else {
        return Err(Error::parse(text, "expected a number"));
    };
    let (head, tail) = (t[..idx].trim_end_matches('*'), &t[idx + 2..]);
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h
            .parse::<f64>()
            .map_err(|_| Error::parse(text, "bad multiplier of pi"))?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .ok_or_else(|| Error::parse(text, "bad divisor of pi"))?,
    };
    Ok(factor * PI / divisor)
}

/// Split `name:key=value,key=value` into a lower-cased name and its pairs.
pub fn parse_spec(text: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, r),
        None => (text, ""),
    };
    let name = name.trim().to_ascii_lowercase();
    if name.is_empty() {
        return Err(Error::parse(text, "missing name"));
    }
    let mut pairs = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(text, format!("expected key=value, got `{item}`")))?;
        pairs.push((k.trim().to_ascii_lowercase(), parse_real(v)?));
    }
    Ok((name, pairs))
}

impl FromStr for AngleDistribution {
    type Err = Error;

    /// Grammar: `name[:key=value(,key=value)*]`, case-insensitive.
    ///
    /// * `uniform`
    /// * `gaussian:sigma=S[,mean=M]` (alias `normal`; `std` for `sigma`,
    ///   `theta0` for `mean`; `alpha=A` sets `sigma^2 = 1/(2A)`)
    /// * `laplace:alpha=A`, `cauchy:alpha=A`
    /// * `triangular:a=A` (alias `half_width`)
    fn from_str(text: &str) -> Result<Self> {
        let (name, pairs) = parse_spec(text)?;
        let mut sigma = None;
        let mut mean = None;
        let mut alpha = None;
        let mut width = None;
        for (key, value) in &pairs {
            let slot = match key.as_str() {
                "sigma" | "std" => &mut sigma,
                "mean" | "theta0" => &mut mean,
                "alpha" => &mut alpha,
                "a" | "half_width" => &mut width,
                _ => return Err(Error::parse(text, format!("unknown parameter `{key}`"))),
            };
            *slot = Some(*value);
        }
        let require = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::parse(text, format!("missing parameter `{key}`")))
        };
        let reject = |v: Option<f64>, key: &str| match v {
            Some(_) => Err(Error::parse(
                text,
                format!("parameter `{key}` not valid for {name}"),
            )),
            None => Ok(()),
        };
        match name.as_str() {
            "uniform" => {
                for (v, k) in [
                    (sigma, "sigma"),
                    (mean, "mean"),
                    (alpha, "alpha"),
                    (width, "a"),
                ] {
                    reject(v, k)?;
                }
                Ok(AngleDistribution::Uniform)
            }
            "gaussian" | "normal" => {
                reject(width, "a")?;
                let sigma = match (sigma, alpha) {
                    (Some(_), Some(_)) => {
                        return Err(Error::parse(text, "give either sigma or alpha, not both"))
                    }
                    (Some(s), None) => s,
                    (None, Some(a)) => {
                        positive("alpha", a)?;
                        (0.5 / a).sqrt()
                    }
                    (None, None) => return Err(Error::parse(text, "missing parameter `sigma`")),
                };
                match mean {
                    None => Self::gaussian_zero_mean(sigma),
                    Some(m) => Self::gaussian(sigma, m),
                }
            }
            "laplace" => {
                for (v, k) in [(sigma, "sigma"), (mean, "mean"), (width, "a")] {
                    reject(v, k)?;
                }
                Self::laplace(require(alpha, "alpha")?)
            }
            "cauchy" => {
                for (v, k) in [(sigma, "sigma"), (mean, "mean"), (width, "a")] {
                    reject(v, k)?;
                }
                Self::cauchy(require(alpha, "alpha")?)
            }
            "triangular" | "triangle" => {
                for (v, k) in [(sigma, "sigma"), (mean, "mean"), (alpha, "alpha")] {
                    reject(v, k)?;
                }
                Self::triangular(require(width, "a")?)
            }
            _ => Err(Error::parse(text, format!("unknown distribution `{name}`"))),
        }
    }
}

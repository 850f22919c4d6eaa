//! Random phasor sums `z = sum_j A_j exp(i theta_j)` with independent terms.
//!
//! Two variance formulas are provided. [`sum_variance_paper`] multiplies
//! `Var(A)` by `Var(cos theta)` (and `Var(sin theta)`), which is the variance
//! of the product only when `E[A] = 0` and `E[cos theta] = 0`
//! (`E[sin theta] = 0`). [`sum_variance_exact`] is the independent-product
//! variance `E[A^2] E[cos^2] - E[A]^2 E[cos]^2` and is what downstream code
//! should use. "Complex variance" means the bookkeeping pair
//! `Var(Re z) + i Var(Im z)`, not a covariance.

use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::angles::{parse_spec, AngleDistribution};
use crate::error::{Error, Result};
use crate::oracle::{self, McEstimate, RunningStats, ShiftedMoments};
use crate::stream::{self, ids};

/// Law of a random amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AmplitudeLaw {
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl AmplitudeLaw {
    pub fn deterministic(value: f64) -> Result<Self> {
        let law = AmplitudeLaw::Deterministic { value };
        law.validate()?;
        Ok(law)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let law = AmplitudeLaw::Uniform { lo, hi };
        law.validate()?;
        Ok(law)
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        let law = AmplitudeLaw::Gaussian { mean, std };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFinite { name, value: v })
            }
        };
        match *self {
            AmplitudeLaw::Deterministic { value } => finite("value", value),
            AmplitudeLaw::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if hi < lo {
                    return Err(Error::InvalidParameter {
                        name: "hi",
                        value: hi,
                        reason: "must be >= lo",
                    });
                }
                Ok(())
            }
            AmplitudeLaw::Gaussian { mean, std } => {
                finite("mean", mean)?;
                if !(std.is_finite() && std >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "std",
                        value: std,
                        reason: "must be finite and >= 0",
                    });
                }
                Ok(())
            }
        }
    }

    /// `E[A]`.
    pub fn mean(&self) -> f64 {
        match *self {
            AmplitudeLaw::Deterministic { value } => value,
            AmplitudeLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            AmplitudeLaw::Gaussian { mean, .. } => mean,
        }
    }

    /// `E[A^2]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            AmplitudeLaw::Deterministic { value } => value * value,
            AmplitudeLaw::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            AmplitudeLaw::Gaussian { mean, std } => mean * mean + std * std,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            AmplitudeLaw::Deterministic { .. } => 0.0,
            AmplitudeLaw::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            AmplitudeLaw::Gaussian { std, .. } => std * std,
        }
    }

    /// Deterministic amplitudes consume no randomness.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AmplitudeLaw::Deterministic { value } => value,
            AmplitudeLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            AmplitudeLaw::Gaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
        }
    }
}

impl FromStr for AmplitudeLaw {
    type Err = Error;

    /// `det:V` / `deterministic:value=V`, `uniform:lo=L,hi=H`,
    /// `gaussian:mean=M,std=S` (alias `normal`).
    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let lname = name.trim().to_ascii_lowercase();
        if (lname == "det" || lname == "deterministic" || lname == "const") && !rest.contains('=') {
            let v = crate::angles::parse_real(rest)?;
            return Self::deterministic(v);
        }
        let (name, pairs) = parse_spec(text)?;
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
        for (k, _) in &pairs {
            let known: &[&str] = match name.as_str() {
                "det" | "deterministic" | "const" => &["value"],
                "uniform" => &["lo", "hi"],
                "gaussian" | "normal" => &["mean", "std", "sigma"],
                _ => &[],
            };
            if !known.contains(&k.as_str()) {
                return Err(Error::parse(text, format!("unknown parameter `{k}`")));
            }
        }
        let need = |key: &str| {
            get(key).ok_or_else(|| Error::parse(text, format!("missing parameter `{key}`")))
        };
        match name.as_str() {
            "det" | "deterministic" | "const" => Self::deterministic(need("value")?),
            "uniform" => Self::uniform(need("lo")?, need("hi")?),
            "gaussian" | "normal" => {
                let std = get("std").or(get("sigma")).unwrap_or(0.0);
                Self::gaussian(get("mean").unwrap_or(0.0), std)
            }
            _ => Err(Error::parse(
                text,
                format!("unknown amplitude law `{name}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasorTerm {
    pub amplitude: AmplitudeLaw,
    pub angle: AngleDistribution,
}

impl PhasorTerm {
    pub fn new(amplitude: AmplitudeLaw, angle: AngleDistribution) -> Self {
        PhasorTerm { amplitude, angle }
    }

    /// `Var(cos theta)` and `Var(sin theta)`.
    pub fn trig_variances(&self) -> (f64, f64) {
        let c1 = self.angle.cf(1);
        let c2 = self.angle.cf(2).re;
        (
            (1.0 + c2) / 2.0 - c1.re * c1.re,
            (1.0 - c2) / 2.0 - c1.im * c1.im,
        )
    }
}

impl FromStr for PhasorTerm {
    type Err = Error;

    /// `AMPLITUDE@ANGLE`, e.g. `det:1@uniform` or
    /// `gaussian:mean=0,std=1@cauchy:alpha=1`.
    fn from_str(text: &str) -> Result<Self> {
        let (amp, angle) = text
            .split_once('@')
            .ok_or_else(|| Error::parse(text, "expected AMPLITUDE@ANGLE"))?;
        Ok(PhasorTerm {
            amplitude: amp.parse()?,
            angle: angle.parse()?,
        })
    }
}

/// Non-empty sum of independent phasor terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PhasorTerm>", into = "Vec<PhasorTerm>")]
pub struct PhasorSum {
    terms: Vec<PhasorTerm>,
}

impl TryFrom<Vec<PhasorTerm>> for PhasorSum {
    type Error = Error;

    fn try_from(terms: Vec<PhasorTerm>) -> Result<Self> {
        PhasorSum::new(terms)
    }
}

impl From<PhasorSum> for Vec<PhasorTerm> {
    fn from(s: PhasorSum) -> Self {
        s.terms
    }
}

impl PhasorSum {
    pub fn new(terms: Vec<PhasorTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Empty("phasor terms"));
        }
        for t in &terms {
            t.amplitude.validate()?;
            t.angle.validate()?;
        }
        Ok(PhasorSum { terms })
    }

    pub fn terms(&self) -> &[PhasorTerm] {
        &self.terms
    }
}

/// `sum_j E[A_j] cf_j(1)`.
pub fn sum_mean(s: &PhasorSum) -> Complex64 {
    s.terms
        .iter()
        .map(|t| t.amplitude.mean() * t.angle.cf(1))
        .sum()
}

/// `sum_j Var(A_j) Var(cos theta_j) + i sum_j Var(A_j) Var(sin theta_j)`.
pub fn sum_variance_paper(s: &PhasorSum) -> Complex64 {
    s.terms
        .iter()
        .map(|t| {
            let (vc, vs) = t.trig_variances();
            let va = t.amplitude.variance();
            Complex64::new(va * vc, va * vs)
        })
        .sum()
}

/// `sum_j Var(A_j cos theta_j) + i sum_j Var(A_j sin theta_j)` for
/// independent `A_j`, `theta_j`.
pub fn sum_variance_exact(s: &PhasorSum) -> Complex64 {
    s.terms
        .iter()
        .map(|t| {
            let c1 = t.angle.cf(1);
            let c2 = t.angle.cf(2).re;
            let (ea, ea2) = (t.amplitude.mean(), t.amplitude.second_moment());
            let var_re = ea2 * (1.0 + c2) / 2.0 - ea * ea * c1.re * c1.re;
            let var_im = ea2 * (1.0 - c2) / 2.0 - ea * ea * c1.im * c1.im;
            Complex64::new(var_re, var_im)
        })
        .sum()
}

/// Run `visit` over every draw of the sum, chunk by chunk. Term `j` reads
/// its amplitude and angle from stream `PHASOR_TERM_BASE + j`.
fn fold_draws<S, F>(
    s: &PhasorSum,
    seed: u64,
    count: u64,
    init: impl Fn() -> S + Sync,
    visit: F,
) -> Vec<S>
where
    S: Send,
    F: Fn(&mut S, Complex64) + Sync,
{
    stream::map_chunks(count, |chunk, len| {
        let mut rngs: Vec<_> = (0..s.terms.len())
            .map(|j| stream::chunk_rng(seed, ids::PHASOR_TERM_BASE + j as u64, chunk))
            .collect();
        let mut state = init();
        for _ in 0..len {
            let z: Complex64 = s
                .terms
                .iter()
                .zip(rngs.iter_mut())
                .map(|(t, rng)| {
                    let a = t.amplitude.draw(rng);
                    a * Complex64::cis(t.angle.draw(rng))
                })
                .sum();
            visit(&mut state, z);
        }
        state
    })
}

/// `count` independent draws of the sum.
pub fn sample_sum(s: &PhasorSum, seed: u64, count: u64) -> Result<Vec<Complex64>> {
    stream::check_count(count)?;
    let parts = fold_draws(s, seed, count, Vec::new, |v: &mut Vec<Complex64>, z| {
        v.push(z)
    });
    Ok(parts.concat())
}

/// Draws of `G = sum_j r_j cos(theta_j)`; identical to the real part of
/// [`sample_sum`] with deterministic amplitudes `r_j`.
pub fn cos_sum_eval(
    amplitudes: &[f64],
    angles: &[AngleDistribution],
    seed: u64,
    count: u64,
) -> Result<Vec<f64>> {
    if amplitudes.len() != angles.len() {
        return Err(Error::LengthMismatch {
            left: amplitudes.len(),
            right: angles.len(),
        });
    }
    let terms = amplitudes
        .iter()
        .zip(angles)
        .map(|(&r, &a)| Ok(PhasorTerm::new(AmplitudeLaw::deterministic(r)?, a)))
        .collect::<Result<Vec<_>>>()?;
    let s = PhasorSum::new(terms)?;
    Ok(sample_sum(&s, seed, count)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

/// Monte Carlo mean and component variances of a phasor sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasorEstimate {
    pub mean: McEstimate<Complex64>,
    pub var_re: McEstimate<f64>,
    pub var_im: McEstimate<f64>,
}

pub fn estimate_sum(s: &PhasorSum, seed: u64, count: u64) -> Result<PhasorEstimate> {
    oracle::check_estimate_count(count)?;
    let centre = sum_mean(s);
    let parts = fold_draws(
        s,
        seed,
        count,
        || {
            (
                RunningStats::default(),
                RunningStats::default(),
                ShiftedMoments::new(centre.re),
                ShiftedMoments::new(centre.im),
            )
        },
        |(re, im, mre, mim), z| {
            re.push(z.re);
            im.push(z.im);
            mre.push(z.re);
            mim.push(z.im);
        },
    );
    let pairs: Vec<_> = parts.iter().map(|p| (p.0, p.1)).collect();
    let mean = oracle::complex_estimate(&pairs, count, seed);
    let mut mre = ShiftedMoments::new(centre.re);
    let mut mim = ShiftedMoments::new(centre.im);
    for p in &parts {
        mre.merge(&p.2);
        mim.merge(&p.3);
    }
    Ok(PhasorEstimate {
        mean,
        var_re: McEstimate::new(mre.variance(), mre.variance_std_error(), count, seed),
        var_im: McEstimate::new(mim.variance(), mim.variance_std_error(), count, seed),
    })
}

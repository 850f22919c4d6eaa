//! Statistics of `x = A sin(theta)` and `x = A cos(theta)`.
//!
//! Three routes to the same numbers:
//!
//! * the characteristic function as a Jacobi-Anger sum
//!   `M(w) = sum_n J_n(w A) cf(n)` ([`cf_series`]);
//! * the density as an arcsine-weighted Chebyshev series ([`PdfSeries`]);
//! * moments from derivatives of the Bessel sum at `w = 0`
//!   ([`moment_bessel`]) or from pairing `x^m` against the density series
//!   through Chebyshev orthogonality ([`moment_chebyshev`]).
//!
//! The cosine transform is handled as the sine transform of the shifted
//! angle `theta + pi/2`, whose characteristic function is `i^n cf(n)`
//! ([`SinusoidalTransform::sine_frame_cf`]). One series implementation
//! therefore serves both kinds.

mod printed;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::AngleDistribution;
use crate::error::{ensure_finite, Error, Result};
use crate::oracle::{self, ReportRow};
use crate::specfun::{
    bessel_j_derivative, bessel_j_sequence, chebyshev_norm, chebyshev_series, power_to_chebyshev,
};

pub use printed::printed_moment;

/// Largest moment order for [`moment_bessel`] and [`moment_chebyshev`].
pub const MAX_MOMENT_ORDER: u32 = 12;

/// Largest `|w A|` accepted by [`cf_series`].
pub const MAX_BESSEL_ARGUMENT: f64 = 500.0;

const MAX_SERIES_ORDER: usize = 1 << 16;

/// Consecutive sub-tolerance terms needed before a series is declared done.
const QUIET_TERMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            TrigKind::Sin => theta.sin(),
            TrigKind::Cos => theta.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrigKind::Sin => "sin",
            TrigKind::Cos => "cos",
        }
    }
}

impl fmt::Display for TrigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrigKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sin" | "sine" => Ok(TrigKind::Sin),
            "cos" | "cosine" => Ok(TrigKind::Cos),
            _ => Err(Error::parse(s, "expected `sin` or `cos`")),
        }
    }
}

/// The random variable `amplitude * trig(theta)`, supported on `[-A, A]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidalTransform {
    pub amplitude: f64,
    pub kind: TrigKind,
    pub dist: AngleDistribution,
}

impl SinusoidalTransform {
    pub fn new(amplitude: f64, kind: TrigKind, dist: AngleDistribution) -> Result<Self> {
        let t = SinusoidalTransform {
            amplitude,
            kind,
            dist,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn sin(amplitude: f64, dist: AngleDistribution) -> Result<Self> {
        Self::new(amplitude, TrigKind::Sin, dist)
    }

    pub fn cos(amplitude: f64, dist: AngleDistribution) -> Result<Self> {
        Self::new(amplitude, TrigKind::Cos, dist)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                value: self.amplitude,
                reason: "must be finite and > 0",
            });
        }
        self.dist.validate()
    }

    pub fn support(&self) -> (f64, f64) {
        (-self.amplitude, self.amplitude)
    }

    /// One draw of the transformed variable from an angle draw.
    pub fn apply(&self, theta: f64) -> f64 {
        self.amplitude * self.kind.apply(theta)
    }

    /// Characteristic function of the angle as seen by a sine transform:
    /// `cf(n)` for `Sin`, `i^n cf(n)` for `Cos` (`cos t = sin(t + pi/2)`).
    pub fn sine_frame_cf(&self, n: i64) -> Complex64 {
        let c = self.dist.cf(n);
        match self.kind {
            TrigKind::Sin => c,
            TrigKind::Cos => i_pow(n) * c,
        }
    }

    /// `E[T_n(x / A)]`, the Chebyshev coefficient of the density series.
    pub fn chebyshev_coefficient(&self, n: i64) -> f64 {
        (i_pow(-n) * self.sine_frame_cf(n)).re
    }

    pub fn label(&self) -> String {
        format!("{}.{}", self.kind, self.dist.name())
    }
}

/// `i^n`, exact.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Truncation policy for the infinite series.
///
/// A series stops once [`QUIET_TERMS`] consecutive terms fall below
/// `tail_tolerance`; reaching `max_order` first is an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_order: usize,
    pub tail_tolerance: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_order: 64,
            tail_tolerance: 1e-12,
        }
    }
}

impl SeriesControl {
    /// Density defaults per angle law. Laplace and triangular coefficients
    /// decay like `1/n^2`, so they get a long series and a per-term
    /// tolerance that such a series can actually reach.
    pub fn for_pdf(dist: &AngleDistribution) -> Self {
        match dist {
            AngleDistribution::Laplace { .. } | AngleDistribution::Triangular { .. } => {
                SeriesControl {
                    max_order: 4096,
                    tail_tolerance: 1e-6,
                }
            }
            _ => SeriesControl {
                max_order: 512,
                tail_tolerance: 1e-12,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 || self.max_order > MAX_SERIES_ORDER {
            return Err(Error::InvalidParameter {
                name: "max_order",
                value: self.max_order as f64,
                reason: "must be in 1..=65536",
            });
        }
        if !(self.tail_tolerance.is_finite() && self.tail_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tail_tolerance",
                value: self.tail_tolerance,
                reason: "must be finite and > 0",
            });
        }
        Ok(())
    }
}

/// `M(w) = E[exp(i w x)] = sum_n J_n(w A) cf_s(n)` with `cf_s` the
/// sine-frame characteristic function.
pub fn cf_series(t: &SinusoidalTransform, omega: f64, ctl: &SeriesControl) -> Result<Complex64> {
    ctl.validate()?;
    ensure_finite("omega", omega)?;
    let arg = omega * t.amplitude;
    if arg.abs() > MAX_BESSEL_ARGUMENT {
        return Err(Error::OrderBudgetExceeded {
            product: arg.abs(),
            max: MAX_BESSEL_ARGUMENT,
        });
    }
    let bessel = bessel_j_sequence(ctl.max_order, arg);
    let mut sum = Complex64::new(bessel[0], 0.0) * t.sine_frame_cf(0);
    let mut quiet = 0;
    let mut last = f64::NAN;
    for (n, &jn) in bessel.iter().enumerate().skip(1) {
        let c = t.sine_frame_cf(n as i64);
        // J_{-n} = (-1)^n J_n and cf_s(-n) = conj(cf_s(n))
        let paired = if n % 2 == 0 {
            c + c.conj()
        } else {
            c - c.conj()
        };
        sum += jn * paired;
        last = jn.abs() * c.norm();
        if last < ctl.tail_tolerance {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged {
        max_order: ctl.max_order,
        last_term: last,
    })
}

/// Density of the transform as a Chebyshev series,
///
/// `f(y) = [1 + 2 sum_{n>=1} c_n T_n(y/A)] / (pi A sqrt(1 - (y/A)^2))`,
///
/// with `c_n = E[T_n(x/A)] = Re((-i)^n cf_s(n))`. Coefficients are computed
/// once; [`PdfSeries::eval`] is then cheap.
#[derive(Debug, Clone)]
pub struct PdfSeries {
    amplitude: f64,
    /// Bracket coefficients: `1, 2 c_1, 2 c_2, ...`.
    bracket: Vec<f64>,
}

impl PdfSeries {
    pub fn new(t: &SinusoidalTransform, ctl: &SeriesControl) -> Result<Self> {
        t.validate()?;
        ctl.validate()?;
        let mut bracket = vec![1.0];
        let mut quiet = 0;
        let mut last = f64::NAN;
        for n in 1..=ctl.max_order {
            let c = t.chebyshev_coefficient(n as i64);
            bracket.push(2.0 * c);
            last = c.abs();
            if last < ctl.tail_tolerance {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    return Ok(PdfSeries {
                        amplitude: t.amplitude,
                        bracket,
                    });
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NotConverged {
            max_order: ctl.max_order,
            last_term: last,
        })
    }

    /// Number of Chebyshev terms kept (including `T_0`).
    pub fn terms(&self) -> usize {
        self.bracket.len()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `1 + 2 sum c_n T_n(u)` at `u = y / A`.
    pub fn bracket(&self, u: f64) -> f64 {
        chebyshev_series(&self.bracket, u)
    }

    /// Density at `y`; zero outside `[-A, A]`. At `y = +-A` the arcsine
    /// weight diverges and the result is `+inf` unless the bracket vanishes.
    /// Small negative values from truncation are clamped to zero.
    pub fn eval(&self, y: f64) -> f64 {
        let u = y / self.amplitude;
        if u.is_nan() || u.abs() > 1.0 {
            return 0.0;
        }
        let b = self.bracket(u);
        if b <= 0.0 {
            return 0.0;
        }
        let weight = ((1.0 - u) * (1.0 + u)).sqrt();
        if weight == 0.0 {
            return f64::INFINITY;
        }
        b / (PI * self.amplitude * weight)
    }
}

/// Density at a single point. Build a [`PdfSeries`] to evaluate many points.
pub fn pdf(t: &SinusoidalTransform, y: f64, ctl: &SeriesControl) -> Result<f64> {
    ensure_finite("y", y)?;
    if y.abs() > t.amplitude {
        return Ok(0.0);
    }
    Ok(PdfSeries::new(t, ctl)?.eval(y))
}

fn check_moment_order(m: u32) -> Result<()> {
    if m > MAX_MOMENT_ORDER {
        return Err(Error::MomentOrderOutOfRange {
            order: m,
            max: MAX_MOMENT_ORDER,
        });
    }
    Ok(())
}

/// `<x^m>` from `i^{-m} d^m M / dw^m` at `w = 0`, including the imaginary
/// rounding residue.
///
/// Differentiating the Bessel sum term by term with
/// `2^m J_n^(m)(x) = sum_k (-1)^k C(m,k) J_{n-m+2k}(x)` and using
/// `J_0(0) = 1`, `J_k(0) = 0` leaves only orders `|n| <= m`.
pub fn moment_bessel_complex(t: &SinusoidalTransform, m: u32) -> Result<Complex64> {
    check_moment_order(m)?;
    t.validate()?;
    let order = m as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -order..=order {
        let d = bessel_j_derivative(n, m, 0.0)?;
        if d != 0.0 {
            acc += d * t.sine_frame_cf(n);
        }
    }
    Ok(i_pow(-order) * acc * t.amplitude.powi(m as i32))
}

/// `<x^m>` through the Bessel-derivative route; see [`moment_bessel_complex`].
pub fn moment_bessel(t: &SinusoidalTransform, m: u32) -> Result<f64> {
    let v = moment_bessel_complex(t, m)?;
    debug_assert!(v.im.abs() <= 1e-12 * t.amplitude.powi(m as i32).max(1.0));
    Ok(v.re)
}

/// `<x^m>` by writing `(y/A)^m` in the Chebyshev basis and pairing it with
/// the density series through `int T_j T_n / sqrt(1-u^2) du`.
///
/// Orthogonality removes every density term above order `m`, so only the
/// first `m` coefficients are used and no convergence check is needed;
/// `ctl.max_order` must still cover `m`.
pub fn moment_chebyshev(t: &SinusoidalTransform, m: u32, ctl: &SeriesControl) -> Result<f64> {
    check_moment_order(m)?;
    t.validate()?;
    ctl.validate()?;
    if ctl.max_order < m as usize {
        return Err(Error::NotConverged {
            max_order: ctl.max_order,
            last_term: f64::NAN,
        });
    }
    let power = power_to_chebyshev(m)?;
    let bracket: Vec<f64> = (0..=m as i64)
        .map(|n| {
            if n == 0 {
                1.0
            } else {
                2.0 * t.chebyshev_coefficient(n)
            }
        })
        .collect();
    let mut acc = 0.0;
    for (j, pj) in power.terms() {
        let paired: f64 = bracket
            .iter()
            .enumerate()
            .map(|(n, b)| b * chebyshev_norm(n as u32, j))
            .sum();
        acc += pj * paired / PI;
    }
    Ok(acc * t.amplitude.powi(m as i32))
}

/// `sqrt(<x^2> - <x>^2)` from the Bessel route.
pub fn std_dev(t: &SinusoidalTransform) -> Result<f64> {
    let m1 = moment_bessel(t, 1)?;
    let m2 = moment_bessel(t, 2)?;
    let var = m2 - m1 * m1;
    if var < -1e-12 * t.amplitude.powi(2).max(1.0) {
        return Err(Error::NegativeVariance { value: var });
    }
    Ok(var.max(0.0).sqrt())
}

/// Printed corollary moments `m = 1..=4` against the Bessel route and a
/// Monte Carlo estimate from `count` draws.
pub fn corollary_report(t: &SinusoidalTransform, seed: u64, count: u64) -> Result<Vec<ReportRow>> {
    let mc = oracle::estimate_moments(t, 4, seed, count)?;
    let label = t.label();
    (1..=4u32)
        .map(|m| {
            let analytic = moment_bessel(t, m)?;
            let est = &mc[m as usize];
            Ok(ReportRow::new(
                format!("{label}.m{m}"),
                printed_moment(t, m),
                analytic,
                est.value,
                est.std_error,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests;

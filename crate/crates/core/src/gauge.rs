//! Phase-noise statistics for Aharonov-Bohm type interference.
//!
//! The flux phase `coupling * flux` (written `dS`) is treated as a single
//! dimensionless number; physical constants are folded into `coupling`. A
//! noisy flux turns the phase factor into `dS * exp(i theta)` for a random
//! `theta`, whose statistics all follow from the noise CF at orders 1 and 2.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angles::AngleDistribution;
use crate::error::{ensure_finite, Error, Result};
use crate::oracle::{self, McEstimate, RunningStats, ShiftedMoments};
use crate::stream::{self, ids};

/// Minimum draws for [`fringe_visibility`].
pub const MIN_VISIBILITY_COUNT: u64 = 10_000;
/// Minimum and default phase grid for [`fringe_visibility`].
pub const MIN_VISIBILITY_GRID: usize = 64;
/// Largest draw count for [`metric_invariance`].
pub const MAX_METRIC_COUNT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPhenomenon {
    pub coupling: f64,
    pub flux: f64,
    pub noise: AngleDistribution,
}

impl FluxPhenomenon {
    pub fn new(coupling: f64, flux: f64, noise: AngleDistribution) -> Result<Self> {
        let p = FluxPhenomenon {
            coupling,
            flux,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::InvalidParameter {
                name: "coupling",
                value: self.coupling,
                reason: "must be finite and > 0",
            });
        }
        ensure_finite("flux", self.flux)?;
        self.noise.validate()
    }
}

/// `coupling * flux`.
pub fn phase_difference(p: &FluxPhenomenon) -> f64 {
    p.coupling * p.flux
}

/// `dS * cf(1)`; zero exactly when the noise has `cf(1) = 0`.
pub fn random_shift_mean(p: &FluxPhenomenon) -> Complex64 {
    phase_difference(p) * p.noise.cf(1)
}

/// The two variance forms of a scaled random phasor `dS exp(i theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftVariance {
    /// `dS (1 - Re cf(2)) (1 + i)`: linear prefactor, sine bracket on both
    /// components.
    pub paper_form: Complex64,
    /// `dS^2 (Var cos theta + i Var sin theta)`.
    pub exact_form: Complex64,
}

fn shift_variance(scale: f64, noise: &AngleDistribution) -> ShiftVariance {
    let c1 = noise.cf(1);
    let c2 = noise.cf(2).re;
    let var_cos = (1.0 + c2) / 2.0 - c1.re * c1.re;
    let var_sin = (1.0 - c2) / 2.0 - c1.im * c1.im;
    ShiftVariance {
        paper_form: scale * (1.0 - c2) * Complex64::new(1.0, 1.0),
        exact_form: scale * scale * Complex64::new(var_cos, var_sin),
    }
}

pub fn random_shift_variance(p: &FluxPhenomenon) -> ShiftVariance {
    shift_variance(phase_difference(p), &p.noise)
}

/// Monte Carlo mean and component variances of `scale * exp(i theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    pub mean: McEstimate<Complex64>,
    pub var_re: McEstimate<f64>,
    pub var_im: McEstimate<f64>,
}

fn estimate_phase(
    scale: f64,
    noise: &AngleDistribution,
    seed: u64,
    count: u64,
) -> Result<PhaseEstimate> {
    oracle::check_estimate_count(count)?;
    noise.validate()?;
    let centre = scale * noise.cf(1);
    let parts = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut re = RunningStats::default();
        let mut im = RunningStats::default();
        let mut mre = ShiftedMoments::new(centre.re);
        let mut mim = ShiftedMoments::new(centre.im);
        for _ in 0..len {
            let z = scale * Complex64::cis(noise.draw(&mut rng));
            re.push(z.re);
            im.push(z.im);
            mre.push(z.re);
            mim.push(z.im);
        }
        (re, im, mre, mim)
    });
    let pairs: Vec<_> = parts.iter().map(|p| (p.0, p.1)).collect();
    let mut mre = ShiftedMoments::new(centre.re);
    let mut mim = ShiftedMoments::new(centre.im);
    for p in &parts {
        mre.merge(&p.2);
        mim.merge(&p.3);
    }
    Ok(PhaseEstimate {
        mean: oracle::complex_estimate(&pairs, count, seed),
        var_re: McEstimate::new(mre.variance(), mre.variance_std_error(), count, seed),
        var_im: McEstimate::new(mim.variance(), mim.variance_std_error(), count, seed),
    })
}

/// Monte Carlo check of [`random_shift_mean`] and [`random_shift_variance`].
pub fn estimate_shift(p: &FluxPhenomenon, seed: u64, count: u64) -> Result<PhaseEstimate> {
    p.validate()?;
    estimate_phase(phase_difference(p), &p.noise, seed, count)
}

/// Ensemble-averaged two-path intensity and its fringe contrast.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeVisibility {
    /// `|cf(1)|`.
    pub analytic: f64,
    /// Contrast of the first-harmonic fit to the averaged intensity grid.
    pub empirical: f64,
    pub std_error: f64,
    /// `(I_max - I_min) / (I_max + I_min)` taken directly over the grid
    /// nodes; biased low by at most `1 - cos(pi / grid)`.
    pub grid_contrast: f64,
    pub phases: Vec<f64>,
    pub intensity: Vec<f64>,
    pub count: u64,
    pub seed: u64,
}

/// Equal-amplitude two-path superposition with noise on one arm:
/// `I(phi) = <|exp(i(phi + theta)) + 1|^2> / 4 = (1 + Re(cf(1) e^{i phi})) / 2`.
///
/// The contrast of the averaged intensity is recovered from the first
/// Fourier harmonic of the grid values. Reading it off the grid extremes
/// instead would be biased by the grid spacing.
pub fn fringe_visibility(
    noise: &AngleDistribution,
    seed: u64,
    count: u64,
    grid: usize,
) -> Result<FringeVisibility> {
    noise.validate()?;
    if count < MIN_VISIBILITY_COUNT {
        return Err(Error::CountTooSmall {
            count,
            min: MIN_VISIBILITY_COUNT,
        });
    }
    stream::check_count(count)?;
    if grid < MIN_VISIBILITY_GRID {
        return Err(Error::InvalidGrid(
            "visibility grid needs at least 64 phases",
        ));
    }
    let phases: Vec<f64> = (0..grid)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / grid as f64)
        .collect();

    // Each draw adds (1 + cos(phi_k + theta)) / 2 to every grid node. The
    // per-chunk sums are kept per node so the grid is a true ensemble
    // average; cos(phi + theta) is expanded to avoid 64 cos calls per draw.
    let (cos_p, sin_p): (Vec<f64>, Vec<f64>) = phases.iter().map(|p| (p.cos(), p.sin())).unzip();
    let parts = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut sums = vec![0.0; grid];
        for _ in 0..len {
            let (s, c) = noise.draw(&mut rng).sin_cos();
            for ((acc, cp), sp) in sums.iter_mut().zip(&cos_p).zip(&sin_p) {
                *acc += 0.5 * (1.0 + cp * c - sp * s);
            }
        }
        sums
    });
    let mut intensity = vec![0.0; grid];
    for part in &parts {
        for (a, b) in intensity.iter_mut().zip(part) {
            *a += b;
        }
    }
    intensity.iter_mut().for_each(|v| *v /= count as f64);

    let n = grid as f64;
    let dc = intensity.iter().sum::<f64>() / n;
    let h1: Complex64 = intensity
        .iter()
        .zip(&phases)
        .map(|(&v, &p)| v * Complex64::cis(-p))
        .sum::<Complex64>()
        * (2.0 / n);
    let empirical = h1.norm() / dc;

    let i_max = intensity.iter().cloned().fold(f64::MIN, f64::max);
    let i_min = intensity.iter().cloned().fold(f64::MAX, f64::min);
    let grid_contrast = (i_max - i_min) / (i_max + i_min);

    // Standard error of |mean exp(i theta)| along the estimated direction.
    let dir = if h1.norm() > 0.0 {
        h1 / h1.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let proj = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut st = RunningStats::default();
        for _ in 0..len {
            st.push((Complex64::cis(noise.draw(&mut rng)) * dir.conj()).re);
        }
        st
    });
    let mut st = RunningStats::default();
    proj.iter().for_each(|p| st.merge(p));

    Ok(FringeVisibility {
        analytic: noise.cf(1).norm(),
        empirical,
        std_error: st.std_error(),
        grid_contrast,
        phases,
        intensity,
        count,
        seed,
    })
}

/// `I = I0 cos(omega0 t + n)` with phase noise `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyCurrent {
    pub i0: f64,
    pub omega0: f64,
    pub noise: AngleDistribution,
}

impl NoisyCurrent {
    pub fn new(i0: f64, omega0: f64, noise: AngleDistribution) -> Result<Self> {
        ensure_finite("i0", i0)?;
        ensure_finite("omega0", omega0)?;
        noise.validate()?;
        Ok(NoisyCurrent { i0, omega0, noise })
    }

    /// Phase noise carried over unchanged to the flux.
    pub fn flux_noise(&self) -> AngleDistribution {
        self.noise
    }

    /// `I0 Re(cf(1) exp(i omega0 t))`.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.i0 * (self.noise.cf(1) * Complex64::cis(self.omega0 * t)).re
    }

    fn value<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        self.i0 * (self.omega0 * t + self.noise.draw(rng)).cos()
    }
}

/// One draw of the noisy current at time `t`.
pub fn noisy_current(c: &NoisyCurrent, t: f64, seed: u64) -> Result<f64> {
    ensure_finite("t", t)?;
    let mut rng = stream::chunk_rng(seed, ids::ANGLE, 0);
    Ok(c.value(t, &mut rng))
}

/// Ensemble mean of the noisy current at time `t`.
pub fn estimate_current_mean(
    c: &NoisyCurrent,
    t: f64,
    seed: u64,
    count: u64,
) -> Result<McEstimate<f64>> {
    ensure_finite("t", t)?;
    oracle::check_estimate_count(count)?;
    let parts = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut st = RunningStats::default();
        for _ in 0..len {
            st.push(c.value(t, &mut rng));
        }
        st
    });
    let mut st = RunningStats::default();
    parts.iter().for_each(|p| st.merge(p));
    Ok(McEstimate::new(st.mean(), st.std_error(), count, seed))
}

/// Largest `|x^2 + y^2 + z^2 - r^2|` over `count` random direction pairs,
/// `theta` uniform on `(-pi, pi]`, `phi` uniform on `(0, pi)`.
pub fn metric_invariance(r: f64, seed: u64, count: u64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be finite and >= 0",
        });
    }
    if count > MAX_METRIC_COUNT {
        return Err(Error::CountTooLarge {
            count,
            max: MAX_METRIC_COUNT,
        });
    }
    let pi = std::f64::consts::PI;
    let parts = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::METRIC, chunk);
        let mut worst: f64 = 0.0;
        for _ in 0..len {
            let theta = pi - 2.0 * pi * rng.random::<f64>();
            let phi = loop {
                let p = pi * rng.random::<f64>();
                if p > 0.0 {
                    break p;
                }
            };
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let (x, y, z) = (r * sp * ct, r * sp * st, r * cp);
            worst = worst.max((x * x + y * y + z * z - r * r).abs());
        }
        worst
    });
    Ok(parts.into_iter().fold(0.0, f64::max))
}

/// Statistics of `s exp(i sigma)` for a random metric phase `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricPhase {
    pub mean: Complex64,
    pub variance: ShiftVariance,
    pub estimate: PhaseEstimate,
}

pub fn metric_phase(
    s: f64,
    noise: &AngleDistribution,
    seed: u64,
    count: u64,
) -> Result<MetricPhase> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "must be finite and > 0",
        });
    }
    noise.validate()?;
    Ok(MetricPhase {
        mean: s * noise.cf(1),
        variance: shift_variance(s, noise),
        estimate: estimate_phase(s, noise, seed, count)?,
    })
}

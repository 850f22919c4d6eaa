//! Seeded brute-force Monte Carlo and the discrepancy report.
//!
//! Estimates are reproducible bit for bit: the same `(seed, count, target)`
//! gives the same value for any rayon thread count (see [`crate::stream`]).

mod report;
mod stats;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::sintrans::SinusoidalTransform;
use crate::stream::{self, ids};

pub use report::{
    adjudicate, build_report, format_real, DiscrepancyReport, GoldenList, GoldenMismatch,
    ReportBlock, ReportRow, Verdict, DEFAULT_GOLDEN, DEFAULT_REPORT_COUNT, VERDICT_SIGMAS,
};
pub use stats::{McEstimate, RunningStats, ShiftedMoments};

/// Smallest sample count accepted by the estimators.
pub const MIN_COUNT: u64 = 1000;

pub(crate) fn check_estimate_count(count: u64) -> Result<()> {
    if count < MIN_COUNT {
        return Err(Error::CountTooSmall {
            count,
            min: MIN_COUNT,
        });
    }
    stream::check_count(count)
}

/// Sample moments `<x^0> .. <x^max_m>` from one run of `count` draws.
pub fn estimate_moments(
    t: &SinusoidalTransform,
    max_m: u32,
    seed: u64,
    count: u64,
) -> Result<Vec<McEstimate<f64>>> {
    check_estimate_count(count)?;
    t.validate()?;
    let width = max_m as usize + 1;
    let partials = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut acc = vec![RunningStats::default(); width];
        for _ in 0..len {
            let x = t.apply(t.dist.draw(&mut rng));
            let mut p = 1.0;
            for s in acc.iter_mut() {
                s.push(p);
                p *= x;
            }
        }
        acc
    });
    let mut total = vec![RunningStats::default(); width];
    for part in &partials {
        for (a, b) in total.iter_mut().zip(part) {
            a.merge(b);
        }
    }
    Ok(total
        .iter()
        .map(|s| McEstimate::new(s.mean(), s.std_error(), count, seed))
        .collect())
}

/// Sample mean of `x^m` with its standard error.
pub fn estimate_moment(
    t: &SinusoidalTransform,
    m: u32,
    seed: u64,
    count: u64,
) -> Result<McEstimate<f64>> {
    let mut all = estimate_moments(t, m, seed, count)?;
    Ok(all.swap_remove(m as usize))
}

/// Sample mean of `exp(i w x)`.
pub fn estimate_cf(
    t: &SinusoidalTransform,
    omega: f64,
    seed: u64,
    count: u64,
) -> Result<McEstimate<Complex64>> {
    check_estimate_count(count)?;
    t.validate()?;
    ensure_finite("omega", omega)?;
    let partials = stream::map_chunks(count, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::ANGLE, chunk);
        let mut re = RunningStats::default();
        let mut im = RunningStats::default();
        for _ in 0..len {
            let z = Complex64::cis(omega * t.apply(t.dist.draw(&mut rng)));
            re.push(z.re);
            im.push(z.im);
        }
        (re, im)
    });
    Ok(complex_estimate(&partials, count, seed))
}

pub(crate) fn complex_estimate(
    partials: &[(RunningStats, RunningStats)],
    count: u64,
    seed: u64,
) -> McEstimate<Complex64> {
    let mut re = RunningStats::default();
    let mut im = RunningStats::default();
    for (a, b) in partials {
        re.merge(a);
        im.merge(b);
    }
    let se = ((re.variance() + im.variance()) / count as f64).sqrt();
    McEstimate::new(Complex64::new(re.mean(), im.mean()), se, count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::AngleDistribution;
    use crate::sintrans::{cf_series, SeriesControl};
    use crate::specfun::bessel_j;

    #[test]
    fn uniform_second_moment() {
        let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
        let e = estimate_moment(&t, 2, 42, 1_000_000).unwrap();
        assert!(e.within(0.5, 3.0), "{e:?}");
        assert_eq!(e.count, 1_000_000);
        assert_eq!(e.seed, 42);
    }

    #[test]
    fn zeroth_moment_is_exact() {
        let t = SinusoidalTransform::sin(2.0, AngleDistribution::cauchy(1.0).unwrap()).unwrap();
        let e = estimate_moment(&t, 0, 1, 5000).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn point_mass_cos_fourth_moment_is_exact() {
        let t = SinusoidalTransform::cos(1.0, AngleDistribution::point_mass(0.0).unwrap()).unwrap();
        let e = estimate_moment(&t, 4, 1, 5000).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn cf_at_zero_is_exact() {
        let t = SinusoidalTransform::sin(1.0, AngleDistribution::laplace(1.0).unwrap()).unwrap();
        let e = estimate_cf(&t, 0.0, 9, 5000).unwrap();
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn uniform_cf_is_j0() {
        let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
        let e = estimate_cf(&t, 1.0, 3, 1_000_000).unwrap();
        let j0 = bessel_j(0, 1.0).unwrap();
        assert!((j0 - 0.7652).abs() < 1e-4);
        assert!(e.within(Complex64::new(j0, 0.0), 3.0), "{e:?}");
    }

    #[test]
    fn gaussian_cf_matches_series() {
        let t = SinusoidalTransform::sin(1.0, AngleDistribution::gaussian_zero_mean(1.0).unwrap())
            .unwrap();
        let e = estimate_cf(&t, 2.0, 4, 1_000_000).unwrap();
        let m = cf_series(&t, 2.0, &SeriesControl::default()).unwrap();
        assert!(e.within(m, 3.0), "{e:?} vs {m}");
    }

    #[test]
    fn moments_share_one_sample_stream() {
        let t = SinusoidalTransform::cos(1.5, AngleDistribution::Uniform).unwrap();
        let all = estimate_moments(&t, 4, 8, 20_000).unwrap();
        let direct = estimate_moment(&t, 3, 8, 20_000).unwrap();
        assert_eq!(all[3], direct);
        let draws = t.dist.sample(8, 20_000).unwrap();
        let mean_cube = draws.iter().map(|&th| t.apply(th).powi(3)).sum::<f64>() / 20_000.0;
        assert!((mean_cube - direct.value).abs() < 1e-12);
    }

    #[test]
    fn count_limits() {
        let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
        assert!(matches!(
            estimate_moment(&t, 2, 0, 999),
            Err(Error::CountTooSmall { .. })
        ));
        assert!(matches!(
            estimate_cf(&t, 1.0, 0, 10),
            Err(Error::CountTooSmall { .. })
        ));
    }
}

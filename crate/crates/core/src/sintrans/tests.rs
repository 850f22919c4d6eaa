use super::*;
use crate::oracle::{estimate_cf, estimate_moment, Verdict};
use crate::specfun::bessel_j;
use crate::stream;
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn gzm(sigma: f64) -> AngleDistribution {
    AngleDistribution::gaussian_zero_mean(sigma).unwrap()
}

fn all_transforms(a: f64) -> Vec<SinusoidalTransform> {
    AngleDistribution::catalog()
        .into_iter()
        .flat_map(|d| {
            [
                SinusoidalTransform::sin(a, d).unwrap(),
                SinusoidalTransform::cos(a, d).unwrap(),
            ]
        })
        .collect()
}

/// `int_{-A}^{A} g(y) f(y) dy` via `y = A cos(phi)` and the midpoint rule
/// on `[0, pi]`, which never touches the endpoint singularities.
fn integrate_density(series: &PdfSeries, nodes: usize, g: impl Fn(f64) -> Complex64) -> Complex64 {
    let a = series.amplitude();
    let h = PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let phi = (k as f64 + 0.5) * h;
            let y = a * phi.cos();
            g(y) * series.eval(y) * a * phi.sin() * h
        })
        .sum()
}

#[test]
fn trig_kind_text() {
    assert_eq!("sin".parse::<TrigKind>().unwrap(), TrigKind::Sin);
    assert_eq!("Cosine".parse::<TrigKind>().unwrap(), TrigKind::Cos);
    assert!("tan".parse::<TrigKind>().is_err());
    assert_eq!(TrigKind::Cos.to_string(), "cos");
}

#[test]
fn transform_validation() {
    assert!(SinusoidalTransform::sin(0.0, AngleDistribution::Uniform).is_err());
    assert!(SinusoidalTransform::sin(-1.0, AngleDistribution::Uniform).is_err());
    assert!(SinusoidalTransform::cos(f64::NAN, AngleDistribution::Uniform).is_err());
    let t = SinusoidalTransform::sin(2.5, AngleDistribution::Uniform).unwrap();
    assert_eq!(t.support(), (-2.5, 2.5));
}

#[test]
fn i_pow_cycle() {
    let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    for n in -8i64..=8 {
        let (re, im) = want[n.rem_euclid(4) as usize];
        assert_eq!(i_pow(n), Complex64::new(re, im));
    }
}

#[test]
fn uniform_cf_is_j0() {
    let ctl = SeriesControl::default();
    for a in [0.5, 1.0, 3.0] {
        let t = SinusoidalTransform::sin(a, AngleDistribution::Uniform).unwrap();
        for w in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let m = cf_series(&t, w, &ctl).unwrap();
            assert!((m - Complex64::new(bessel_j(0, w * a).unwrap(), 0.0)).norm() <= 1e-10);
        }
    }
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
    let e = estimate_cf(&t, 3.0, 1, 1_000_000).unwrap();
    assert!(e.within(cf_series(&t, 3.0, &ctl).unwrap(), 3.0));
}

#[test]
fn cf_at_zero_is_one() {
    for t in all_transforms(1.3) {
        let m = cf_series(&t, 0.0, &SeriesControl::default()).unwrap();
        assert!(
            (m - Complex64::new(1.0, 0.0)).norm() < 1e-15,
            "{}",
            t.label()
        );
    }
}

#[test]
fn gaussian_cf_matches_printed_series() {
    let t = SinusoidalTransform::sin(1.0, gzm(1.0)).unwrap();
    let w: f64 = 2.0;
    let printed = bessel_j(0, w).unwrap()
        + 2.0
            * (1..40)
                .map(|m| bessel_j(2 * m, w).unwrap() * (-2.0 * (m * m) as f64).exp())
                .sum::<f64>();
    let m = cf_series(&t, w, &SeriesControl::default()).unwrap();
    assert!((m - Complex64::new(printed, 0.0)).norm() < 1e-14);
}

#[test]
fn cf_errors() {
    let t = SinusoidalTransform::sin(10.0, AngleDistribution::Uniform).unwrap();
    assert!(matches!(
        cf_series(&t, 51.0, &SeriesControl::default()),
        Err(Error::OrderBudgetExceeded { .. })
    ));
    // J_n(300) is nowhere near its tail by order 64
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::cauchy(0.01).unwrap()).unwrap();
    assert!(matches!(
        cf_series(&t, 300.0, &SeriesControl::default()),
        Err(Error::NotConverged { .. })
    ));
    let ok = SeriesControl {
        max_order: 1024,
        tail_tolerance: 1e-12,
    };
    assert!(cf_series(&t, 300.0, &ok).is_ok());
    let bad = SeriesControl {
        max_order: 0,
        tail_tolerance: 1e-12,
    };
    assert!(cf_series(&t, 1.0, &bad).is_err());
}

#[test]
fn cf_fidelity_against_monte_carlo() {
    let ctl = SeriesControl {
        max_order: 256,
        tail_tolerance: 1e-12,
    };
    for (k, t) in all_transforms(1.0).iter().enumerate() {
        for w in [1.0, 5.0] {
            let m = cf_series(t, w, &ctl).unwrap();
            let e = estimate_cf(t, w, stream::derive_seed(3, k as u64), 200_000).unwrap();
            assert!(e.within(m, 4.0), "{} w={w}: {m} vs {:?}", t.label(), e);
        }
    }
}

#[test]
fn pdf_examples() {
    let ctl = SeriesControl::default();
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
    assert!((pdf(&t, 0.0, &ctl).unwrap() - 1.0 / PI).abs() < 1e-15);
    for t in all_transforms(1.5) {
        assert_eq!(pdf(&t, 3.0, &ctl).unwrap(), 0.0);
        assert_eq!(pdf(&t, -3.0, &ctl).unwrap(), 0.0);
    }
}

#[test]
fn cauchy_pdf_matches_histogram() {
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::cauchy(1.0).unwrap()).unwrap();
    let f = pdf(&t, 0.5, &SeriesControl::for_pdf(&t.dist)).unwrap();
    let (n, h) = (10_000_000u64, 0.005);
    let draws = t.dist.sample(8, n).unwrap();
    let hits = draws
        .iter()
        .filter(|&&th| (t.apply(th) - 0.5).abs() <= h)
        .count() as f64;
    let p = hits / n as f64;
    let est = p / (2.0 * h);
    let se = (p * (1.0 - p) / n as f64).sqrt() / (2.0 * h);
    assert!((est - f).abs() <= 3.0 * se, "{est} vs {f} (se {se})");
}

#[test]
fn uniform_pdf_is_arcsine() {
    for a in [0.5, 1.0, 3.0] {
        let t = SinusoidalTransform::sin(a, AngleDistribution::Uniform).unwrap();
        let s = PdfSeries::new(&t, &SeriesControl::for_pdf(&t.dist)).unwrap();
        let worst = (0..=1000)
            .map(|k| {
                let y = a * 0.99 * (2.0 * k as f64 / 1000.0 - 1.0);
                (s.eval(y) - 1.0 / (PI * a * (1.0 - (y / a).powi(2)).sqrt())).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "A={a}: {worst}");
    }
}

#[test]
fn pdf_normalization() {
    for t in all_transforms(2.0) {
        let s = PdfSeries::new(&t, &SeriesControl::for_pdf(&t.dist)).unwrap();
        let total = integrate_density(&s, 2 * s.terms() + 64, |_| Complex64::new(1.0, 0.0));
        assert!(
            (total.re - 1.0).abs() <= 1e-6,
            "{}: {}",
            t.label(),
            total.re
        );
    }
}

#[test]
fn pdf_not_converged_is_reported() {
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::laplace(1.0).unwrap()).unwrap();
    assert!(matches!(
        PdfSeries::new(&t, &SeriesControl::default()),
        Err(Error::NotConverged { .. })
    ));
}

#[test]
fn pdf_fourier_transform_matches_cf() {
    let ctl = SeriesControl::default();
    let dists = [
        gzm(0.7),
        AngleDistribution::gaussian(0.5, 1.0).unwrap(),
        AngleDistribution::laplace(2.0).unwrap(),
    ];
    for d in dists {
        for t in [
            SinusoidalTransform::sin(1.0, d).unwrap(),
            SinusoidalTransform::cos(1.0, d).unwrap(),
        ] {
            let s = PdfSeries::new(&t, &SeriesControl::for_pdf(&d)).unwrap();
            for w in [0.5, 1.0, 2.0, 5.0] {
                let ft = integrate_density(&s, 2 * s.terms() + 256, |y| Complex64::cis(w * y));
                let m = cf_series(&t, w, &ctl).unwrap();
                assert!((ft - m).norm() <= 1e-6, "{} w={w}: {ft} vs {m}", t.label());
            }
        }
    }
}

#[test]
fn moment_examples() {
    for sigma in [0.1, 0.5, 1.0, 2.0] {
        for a in [0.5, 1.0, 3.0] {
            let t = SinusoidalTransform::sin(a, gzm(sigma)).unwrap();
            let s2 = sigma * sigma;
            let m2 = a * a / 2.0 * (1.0 - (-2.0 * s2).exp());
            assert!((moment_bessel(&t, 2).unwrap() - m2).abs() <= 1e-14 * a * a);
        }
    }
    let t = SinusoidalTransform::sin(1.0, gzm(1.0)).unwrap();
    let m4 = (3.0 - 4.0 * (-2.0f64).exp() + (-8.0f64).exp()) / 8.0;
    assert!((moment_bessel(&t, 4).unwrap() - m4).abs() < 1e-15);
    assert!((m4 - 0.307374).abs() < 1e-6);

    let u = SinusoidalTransform::sin(3.0, AngleDistribution::Uniform).unwrap();
    assert!((moment_bessel(&u, 2).unwrap() - 4.5).abs() < 1e-14);
    assert_eq!(
        moment_chebyshev(&u, 1, &SeriesControl::default()).unwrap(),
        0.0
    );

    let (sigma, mean, a) = (0.6, 0.9, 2.0);
    let c = SinusoidalTransform::cos(a, AngleDistribution::gaussian(sigma, mean).unwrap()).unwrap();
    let want = a * (-sigma * sigma / 2.0f64).exp() * mean.cos();
    assert!((moment_bessel(&c, 1).unwrap() - want).abs() < 1e-14);
    let e = estimate_moment(&c, 1, 2, 1_000_000).unwrap();
    assert!(e.within(want, 3.0));

    let ctl = SeriesControl::default();
    let l = SinusoidalTransform::sin(1.0, AngleDistribution::laplace(2.0).unwrap()).unwrap();
    assert!((moment_chebyshev(&l, 2, &ctl).unwrap() - 0.25).abs() < 1e-15);
    let e = estimate_moment(&l, 2, 3, 1_000_000).unwrap();
    assert!(e.within(0.25, 3.0));

    let cy = SinusoidalTransform::sin(1.0, AngleDistribution::cauchy(1.0).unwrap()).unwrap();
    let want = 0.5 * (1.0 - (-2.0f64).exp());
    assert!((moment_chebyshev(&cy, 2, &ctl).unwrap() - want).abs() < 1e-15);
    assert!((want - 0.432332).abs() < 1e-6);
    let e = estimate_moment(&cy, 2, 4, 1_000_000).unwrap();
    assert!(e.within(want, 3.0));
}

#[test]
fn moment_limits() {
    let t = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
    assert!(matches!(
        moment_bessel(&t, 13),
        Err(Error::MomentOrderOutOfRange { .. })
    ));
    assert!(moment_chebyshev(&t, 13, &SeriesControl::default()).is_err());
    let short = SeriesControl {
        max_order: 3,
        tail_tolerance: 1e-12,
    };
    assert!(moment_chebyshev(&t, 4, &short).is_err());
    assert_eq!(moment_bessel(&t, 0).unwrap(), 1.0);
}

#[test]
fn moment_closed_forms() {
    // sin: (A/2)^m i^{-m} sum (-1)^k C(m,k) cf(m-2k); cos: (A/2)^m sum C(m,k) cf(m-2k)
    for t in all_transforms(1.7) {
        for m in 0..=8u32 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=m {
                let c = crate::specfun::binomial(m, k) as f64;
                let cf = t.dist.cf(m as i64 - 2 * k as i64);
                acc += match t.kind {
                    TrigKind::Sin => (if k % 2 == 0 { c } else { -c }) * cf,
                    TrigKind::Cos => c * cf,
                };
            }
            if t.kind == TrigKind::Sin {
                acc *= i_pow(-(m as i64));
            }
            let want = acc.re * (t.amplitude / 2.0).powi(m as i32);
            let got = moment_bessel(&t, m).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * t.amplitude.powi(m as i32),
                "{} m={m}",
                t.label()
            );
            assert!(acc.im.abs() <= 1e-12);
        }
    }
}

#[test]
fn route_agreement() {
    let ctl = SeriesControl::default();
    for a in [0.5, 1.0, 2.3] {
        for t in all_transforms(a) {
            for m in 0..=6u32 {
                let b = moment_bessel(&t, m).unwrap();
                let c = moment_chebyshev(&t, m, &ctl).unwrap();
                assert!(
                    (b - c).abs() <= 1e-9 * a.powi(m as i32),
                    "{} m={m}: {b} vs {c}",
                    t.label()
                );
            }
        }
    }
}

#[test]
fn moments_scale_with_amplitude() {
    for d in AngleDistribution::catalog() {
        let base = SinusoidalTransform::sin(1.0, d).unwrap();
        for a in [0.5, 3.0] {
            let t = SinusoidalTransform::sin(a, d).unwrap();
            for m in 1..=6u32 {
                let want = moment_bessel(&base, m).unwrap() * a.powi(m as i32);
                assert!((moment_bessel(&t, m).unwrap() - want).abs() <= 1e-14 * a.powi(m as i32));
            }
        }
    }
}

#[test]
fn cos_is_shifted_sin() {
    let ctl = SeriesControl::default();
    let pairs = [
        (
            gzm(0.8),
            AngleDistribution::gaussian(0.8, PI / 2.0).unwrap(),
        ),
        (
            AngleDistribution::gaussian(0.4, 0.3).unwrap(),
            AngleDistribution::gaussian(0.4, 0.3 + PI / 2.0).unwrap(),
        ),
    ];
    for (d, shifted) in pairs {
        let c = SinusoidalTransform::cos(1.5, d).unwrap();
        let s = SinusoidalTransform::sin(1.5, shifted).unwrap();
        for m in 1..=6 {
            assert!((moment_bessel(&c, m).unwrap() - moment_bessel(&s, m).unwrap()).abs() < 1e-12);
        }
        for w in [0.5, 2.0, 7.0] {
            assert!(
                (cf_series(&c, w, &ctl).unwrap() - cf_series(&s, w, &ctl).unwrap()).norm() < 1e-12
            );
        }
        for y in [-1.2, 0.0, 0.9] {
            let fc = pdf(&c, y, &SeriesControl::for_pdf(&d)).unwrap();
            let fs = pdf(&s, y, &SeriesControl::for_pdf(&shifted)).unwrap();
            assert!((fc - fs).abs() < 1e-10);
        }
    }
}

#[test]
fn std_dev_examples() {
    let u = SinusoidalTransform::sin(1.0, AngleDistribution::Uniform).unwrap();
    assert!((std_dev(&u).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
    let wide = SinusoidalTransform::sin(1.0, gzm(20.0)).unwrap();
    assert!((std_dev(&wide).unwrap() - FRAC_1_SQRT_2).abs() < 1e-6);
    let pm = SinusoidalTransform::sin(1.0, gzm(0.0)).unwrap();
    assert_eq!(std_dev(&pm).unwrap(), 0.0);
}

#[test]
fn corollary_report_examples() {
    let n = 1_000_000;
    let rows = corollary_report(&SinusoidalTransform::sin(1.0, gzm(1.0)).unwrap(), 1, n).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1].id, "sin.gaussian-zero-mean.m2");
    assert_eq!(rows[1].verdict, Verdict::Agree);

    let rows = corollary_report(&SinusoidalTransform::cos(1.0, gzm(1.0)).unwrap(), 2, n).unwrap();
    assert_eq!(rows[1].verdict, Verdict::Disagree);

    let cy = SinusoidalTransform::sin(1.0, AngleDistribution::cauchy(1.0).unwrap()).unwrap();
    let rows = corollary_report(&cy, 3, n).unwrap();
    let m4 = &rows[3];
    assert_eq!(m4.verdict, Verdict::Disagree);
    let want = (3.0 - 4.0 * (-2.0f64).exp() + (-4.0f64).exp()) / 8.0;
    assert!((m4.analytic - want).abs() < 1e-15);
    assert_eq!(rows[2].verdict, Verdict::Untested);
}

#[test]
fn printed_values_for_sine_gaussian_match_analytic() {
    for sigma in [0.1, 0.5, 1.0, 2.0] {
        let t = SinusoidalTransform::sin(1.0, gzm(sigma)).unwrap();
        for m in 1..=4 {
            let p = printed::printed_moment(&t, m).unwrap();
            assert!((p - moment_bessel(&t, m).unwrap()).abs() <= 1e-10);
        }
    }
}

fn any_dist() -> impl Strategy<Value = AngleDistribution> {
    prop_oneof![
        Just(AngleDistribution::Uniform),
        (0.0f64..3.0).prop_map(|s| AngleDistribution::GaussianZeroMean { sigma: s }),
        (0.0f64..3.0, -PI..PI).prop_map(|(s, m)| AngleDistribution::Gaussian { sigma: s, mean: m }),
        (0.1f64..4.0).prop_map(|a| AngleDistribution::Laplace { alpha: a }),
        (0.05f64..3.0).prop_map(|a| AngleDistribution::Cauchy { alpha: a }),
        (0.05f64..PI).prop_map(|a| AngleDistribution::Triangular { half_width: a }),
    ]
}

proptest! {
    #[test]
    fn cf_is_hermitian(d in any_dist(), a in 0.1f64..3.0, w in 0.0f64..20.0, cos in any::<bool>()) {
        let kind = if cos { TrigKind::Cos } else { TrigKind::Sin };
        let t = SinusoidalTransform::new(a, kind, d).unwrap();
        let ctl = SeriesControl { max_order: 1024, tail_tolerance: 1e-12 };
        let p = cf_series(&t, w, &ctl).unwrap();
        let m = cf_series(&t, -w, &ctl).unwrap();
        prop_assert!((p - m.conj()).norm() < 1e-12);
        prop_assert!(p.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn moments_are_bounded(d in any_dist(), a in 0.1f64..3.0, m in 1u32..=12, cos in any::<bool>()) {
        let kind = if cos { TrigKind::Cos } else { TrigKind::Sin };
        let t = SinusoidalTransform::new(a, kind, d).unwrap();
        let v = moment_bessel(&t, m).unwrap();
        prop_assert!(v.abs() <= a.powi(m as i32) * (1.0 + 1e-12));
        if m % 2 == 0 {
            prop_assert!(v >= -1e-12 * a.powi(m as i32));
        }
        prop_assert!(moment_bessel_complex(&t, m).unwrap().im.abs() <= 1e-12 * a.powi(m as i32).max(1.0));
    }

    #[test]
    fn variance_is_non_negative(d in any_dist(), a in 0.1f64..3.0) {
        let t = SinusoidalTransform::sin(a, d).unwrap();
        prop_assert!(std_dev(&t).unwrap() <= a);
    }
}

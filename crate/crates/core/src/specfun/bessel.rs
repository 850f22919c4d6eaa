//! Bessel functions of the first kind at integer order.
//!
//! Small arguments (`|x| <= 1`) use the ascending power series, which has no
//! cancellation there. Larger arguments use Miller's backward recurrence,
//! normalized with `J0 + 2 (J2 + J4 + ...) = 1`; the start index sits well past
//! the turning point `n ~ x`, so the discarded tail is below double precision.

use crate::error::{ensure_finite, Error, Result};

/// Largest |order| accepted by [`bessel_j`].
pub const MAX_BESSEL_ORDER: i64 = 200;

/// Largest derivative order accepted by [`bessel_j_derivative`].
pub const MAX_DERIVATIVE_ORDER: u32 = 12;

const SERIES_CUTOFF: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e200;

/// `J_n(x)` for integer `n`, `|n| <= 200`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    if n.abs() > MAX_BESSEL_ORDER {
        return Err(Error::BesselOrderOutOfRange {
            order: n,
            max: MAX_BESSEL_ORDER,
        });
    }
    ensure_finite("x", x)?;
    let order = n.unsigned_abs() as usize;
    let magnitude = *bessel_j_sequence(order, x.abs())
        .last()
        .expect("sequence has order + 1 entries");
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let flips = (n < 0) as u32 + (x < 0.0) as u32;
    if flips % 2 == 1 && order % 2 == 1 {
        Ok(-magnitude)
    } else {
        Ok(magnitude)
    }
}

/// `[J_0(x), J_1(x), ..., J_nmax(x)]` from a single recurrence sweep.
///
/// No order limit is enforced here; callers that sum long Bessel series use
/// this directly. `x` must be finite.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x.is_finite());
    let ax = x.abs();
    let mut out = if ax == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        v
    } else if ax <= SERIES_CUTOFF {
        (0..=nmax).map(|n| power_series(n, ax)).collect()
    } else {
        miller_sequence(nmax, ax)
    };
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

fn power_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!, built incrementally so large n underflows to zero gracefully
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= half / i as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let reach = (nmax as f64).max(x);
    let mut start = (reach + 20.0 + 12.0 * reach.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0; nmax + 1];
    let mut above = 0.0; // j_{k+1}
    let mut current = 1e-30; // j_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = current;
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// N-th derivative of `J_p` through the binomial identity
/// `2^N J_p^(N)(x) = sum_k (-1)^k C(N,k) J_{p-N+2k}(x)`.
pub fn bessel_j_derivative(p: i64, order: u32, x: f64) -> Result<f64> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrderOutOfRange {
            order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    ensure_finite("x", x)?;
    let n = order as i64;
    let mut acc = 0.0;
    for k in 0..=order {
        let c = super::binomial(order, k) as f64;
        let j = bessel_j(p - n + 2 * k as i64, x)?;
        if k % 2 == 0 {
            acc += c * j;
        } else {
            acc -= c * j;
        }
    }
    Ok(acc / f64::powi(2.0, order as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// J_n(x) = (1/pi) * int_0^pi cos(n t - x sin t) dt. The integrand extends
    /// to a smooth 2pi-periodic function, so the trapezoid rule converges
    /// geometrically; 4096 panels is far beyond what |x| <= 60 needs.
    fn quadrature_oracle(n: i64, x: f64) -> f64 {
        let panels = 4096;
        let h = PI / panels as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut sum = 0.5 * (f(0.0) + f(PI));
        for k in 1..panels {
            sum += f(k as f64 * h);
        }
        sum * h / PI
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_zero_of_j0() {
        let v = bessel_j(0, 2.404825557695773).unwrap();
        assert!(v.abs() < 1e-12, "J0 at first root = {v:e}");
    }

    #[test]
    fn matches_quadrature_oracle() {
        for &x in &[0.05, 0.5, 0.999, 1.001, 2.0, 7.5, 10.0, 25.0, 60.0] {
            for n in [0i64, 1, 2, 5, 10, 17, 30, 45, 80] {
                let got = bessel_j(n, x).unwrap();
                let want = quadrature_oracle(n, x);
                let tol = 1e-12 * want.abs() + 1e-14;
                assert!(
                    (got - want).abs() <= tol,
                    "J_{n}({x}) = {got:e}, oracle {want:e}"
                );
            }
        }
    }

    #[test]
    fn large_argument_normalization() {
        for &x in &[123.4, 499.9] {
            let seq = bessel_j_sequence(700, x);
            let norm: f64 = seq[0] + 2.0 * seq.iter().skip(2).step_by(2).sum::<f64>();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-13);
            let energy: f64 = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert_relative_eq!(energy, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            bessel_j(201, 1.0),
            Err(Error::BesselOrderOutOfRange { .. })
        ));
        assert!(matches!(
            bessel_j(2, f64::NAN),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            bessel_j_derivative(0, 13, 1.0),
            Err(Error::DerivativeOrderOutOfRange { .. })
        ));
    }

    #[test]
    fn derivative_identity_small_cases() {
        for &x in &[0.3, 2.0, 9.0] {
            assert_eq!(
                bessel_j_derivative(4, 0, x).unwrap(),
                bessel_j(4, x).unwrap()
            );
            assert_relative_eq!(
                bessel_j_derivative(0, 1, x).unwrap(),
                -bessel_j(1, x).unwrap(),
                epsilon = 1e-15
            );
        }
        // J0'' (0) = -1/2 : (J_{-2} - 2 J_0 + J_2)/4 at 0
        assert_eq!(bessel_j_derivative(0, 2, 0.0).unwrap(), -0.5);
    }

    #[test]
    fn second_derivative_at_origin_matches_finite_differences() {
        let h = 1e-3;
        let fd = (bessel_j(0, h).unwrap() - 2.0 * bessel_j(0, 0.0).unwrap()
            + bessel_j(0, -h).unwrap())
            / (h * h);
        assert!((fd + 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn parity_in_argument(n in -40i64..40, x in -80.0f64..80.0) {
            let a = bessel_j(n, x).unwrap();
            let b = bessel_j(n, -x).unwrap();
            if n % 2 == 0 { prop_assert_eq!(a, b) } else { prop_assert_eq!(a, -b) }
        }

        #[test]
        fn parity_in_order(n in 0i64..60, x in -30.0f64..30.0) {
            let a = bessel_j(n, x).unwrap();
            let b = bessel_j(-n, x).unwrap();
            if n % 2 == 0 { prop_assert_eq!(a, b) } else { prop_assert_eq!(a, -b) }
        }

        #[test]
        fn three_term_recurrence(n in 1i64..60, x in 0.5f64..100.0) {
            let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
            let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

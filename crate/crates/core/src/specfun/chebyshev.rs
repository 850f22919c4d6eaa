use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};

/// Largest degree accepted by [`chebyshev_t`].
pub const MAX_CHEBYSHEV_DEGREE: u32 = 512;

/// Largest power accepted by [`power_to_chebyshev`].
pub const MAX_POWER_DEGREE: u32 = 64;

/// `T_n(x)` by the three-term recurrence `T_{k+1} = 2x T_k - T_{k-1}`.
///
/// Arguments outside `[-1, 1]` are allowed; the recurrence is simply run there.
pub fn chebyshev_t(n: u32, x: f64) -> Result<f64> {
    if n > MAX_CHEBYSHEV_DEGREE {
        return Err(Error::ChebyshevDegreeOutOfRange {
            degree: n,
            max: MAX_CHEBYSHEV_DEGREE,
        });
    }
    ensure_finite("x", x)?;
    Ok(chebyshev_recurrence(n, x))
}

pub(crate) fn chebyshev_recurrence(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `sum_k coeffs[k] T_k(x)` by Clenshaw's backward recurrence.
pub fn chebyshev_series(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    let c0 = coeffs.first().copied().unwrap_or(0.0);
    x * b1 - b2 + c0
}

/// `int_{-1}^{1} T_m T_n / sqrt(1 - y^2) dy`.
pub fn chebyshev_norm(m: u32, n: u32) -> f64 {
    match (m, n) {
        (0, 0) => PI,
        (m, n) if m == n => PI / 2.0,
        _ => 0.0,
    }
}

/// `x^degree` written in the Chebyshev basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevExpansion {
    degree: u32,
    /// Dense, indexed by Chebyshev order `0..=degree`. Only orders with the
    /// parity of `degree` are non-zero.
    coefficients: Vec<f64>,
}

impl ChebyshevExpansion {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficient(&self, order: u32) -> f64 {
        self.coefficients
            .get(order as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Non-zero terms as `(order, coefficient)`, highest order first.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (0..=self.degree)
            .rev()
            .step_by(2)
            .map(move |k| (k, self.coefficients[k as usize]))
    }

    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_series(&self.coefficients, x)
    }
}

/// `x^n = 2^{1-n} [T_n + C(n,1) T_{n-2} + C(n,2) T_{n-4} + ...]`, ending with
/// `C(n,m) T_1` for `n = 2m+1` or `C(n,m)/2 T_0` for `n = 2m`.
pub fn power_to_chebyshev(n: u32) -> Result<ChebyshevExpansion> {
    if n > MAX_POWER_DEGREE {
        return Err(Error::ChebyshevDegreeOutOfRange {
            degree: n,
            max: MAX_POWER_DEGREE,
        });
    }
    let scale = f64::powi(2.0, 1 - n as i32);
    let mut coefficients = vec![0.0; n as usize + 1];
    for k in 0..=n / 2 {
        let order = (n - 2 * k) as usize;
        let mut c = scale * super::binomial(n, k) as f64;
        if order == 0 {
            c *= 0.5;
        }
        coefficients[order] = c;
    }
    Ok(ChebyshevExpansion {
        degree: n,
        coefficients,
    })
}

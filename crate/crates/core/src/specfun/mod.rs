//! Special-function kernel: integer-order Bessel functions of the first kind,
//! their derivatives, and Chebyshev polynomials of the first kind.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod chebyshev;

pub use bessel::{
    bessel_j, bessel_j_derivative, bessel_j_sequence, MAX_BESSEL_ORDER, MAX_DERIVATIVE_ORDER,
};
pub use chebyshev::{
    chebyshev_norm, chebyshev_series, chebyshev_t, power_to_chebyshev, ChebyshevExpansion,
    MAX_CHEBYSHEV_DEGREE, MAX_POWER_DEGREE,
};

/// Exact binomial coefficient `C(n, k)`; `0` when `k > n`. Exact for `n <= 64`.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc as u64
}

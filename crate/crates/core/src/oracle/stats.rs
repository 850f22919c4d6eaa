use serde::{Deserialize, Serialize};

/// Welford accumulator with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Power sums of `x - shift` up to fourth order. With `shift` near the mean
/// this gives the sample variance and the standard error of that variance
/// without cancellation trouble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedMoments {
    shift: f64,
    n: u64,
    s: [f64; 4],
}

impl ShiftedMoments {
    pub fn new(shift: f64) -> Self {
        ShiftedMoments {
            shift,
            n: 0,
            s: [0.0; 4],
        }
    }

    pub fn push(&mut self, x: f64) {
        let d = x - self.shift;
        let d2 = d * d;
        self.n += 1;
        self.s[0] += d;
        self.s[1] += d2;
        self.s[2] += d2 * d;
        self.s[3] += d2 * d2;
    }

    /// Both sides must share the same shift.
    pub fn merge(&mut self, other: &ShiftedMoments) {
        debug_assert_eq!(self.shift, other.shift);
        self.n += other.n;
        for (a, b) in self.s.iter_mut().zip(other.s) {
            *a += b;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.s[0] / self.n as f64
    }

    fn central(&self) -> (f64, f64) {
        let n = self.n as f64;
        let m1 = self.s[0] / n;
        let e2 = self.s[1] / n;
        let e3 = self.s[2] / n;
        let e4 = self.s[3] / n;
        let mu2 = e2 - m1 * m1;
        let mu4 = e4 - 4.0 * m1 * e3 + 6.0 * m1 * m1 * e2 - 3.0 * m1.powi(4);
        (mu2.max(0.0), mu4.max(0.0))
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        self.central().0 * n / (n - 1.0)
    }

    /// Large-sample standard error of [`Self::variance`]:
    /// `sqrt((mu4 - mu2^2) / n)`.
    pub fn variance_std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let (mu2, mu4) = self.central();
        ((mu4 - mu2 * mu2).max(0.0) / self.n as f64).sqrt()
    }
}

/// A Monte Carlo estimate with its standard error and provenance.
///
/// For complex values `std_error` is the root-mean-square error of the
/// complex mean, `sqrt((Var re + Var im) / count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T> {
    pub value: T,
    pub std_error: f64,
    pub count: u64,
    pub seed: u64,
}

impl<T> McEstimate<T> {
    pub fn new(value: T, std_error: f64, count: u64, seed: u64) -> Self {
        McEstimate {
            value,
            std_error,
            count,
            seed,
        }
    }
}

impl McEstimate<f64> {
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.std_error
    }
}

impl McEstimate<num_complex::Complex64> {
    pub fn within(&self, target: num_complex::Complex64, sigmas: f64) -> bool {
        (self.value - target).norm() <= sigmas * self.std_error
    }
}

//! Moment formulas exactly as the published corollaries print them.
//!
//! These are kept verbatim, including factors and constants that the
//! analytic route and Monte Carlo both contradict, so the discrepancy
//! report can adjudicate them. They do not distinguish `sin` from `cos`:
//! the source states each result "for either transformation".

use super::SinusoidalTransform;
use crate::angles::AngleDistribution;

/// Printed value of `<x^m>`, or `None` when nothing is printed for `m`.
pub fn printed_moment(t: &SinusoidalTransform, m: u32) -> Option<f64> {
    let r = t.amplitude;
    match t.dist {
        AngleDistribution::GaussianZeroMean { sigma } => {
            let s2 = sigma * sigma;
            match m {
                1 | 3 => Some(0.0),
                2 => Some(r * r / 2.0 * (1.0 - (-2.0 * s2).exp())),
                4 => Some(r.powi(4) / 8.0 * ((-8.0 * s2).exp() - 4.0 * (-2.0 * s2).exp() + 3.0)),
                _ => None,
            }
        }
        AngleDistribution::Gaussian { sigma, mean } => {
            let s2 = sigma * sigma;
            match m {
                1 => Some(2.0 * (-s2 / 2.0).exp() * mean.cos() * r),
                2 => Some(2.0 * (1.0 - (-2.0 * s2).exp() * (2.0 * mean).cos()) * r * r),
                4 => Some(
                    r.powi(4) / 8.0
                        * ((-8.0 * s2).exp() * (4.0 * mean).cos()
                            - 4.0 * (-2.0 * s2).exp() * (2.0 * mean).cos()
                            + 6.0),
                ),
                _ => None,
            }
        }
        AngleDistribution::Laplace { alpha } => {
            let a2 = alpha * alpha;
            match m {
                1 => Some(0.0),
                2 => Some(2.0 * r * r * (1.0 - a2 / (a2 + 4.0))),
                4 => Some(r.powi(4) / 8.0 * (a2 / (a2 + 16.0) - 4.0 * a2 / (a2 + 4.0) + 6.0)),
                _ => None,
            }
        }
        AngleDistribution::Cauchy { alpha } => match m {
            1 => Some(0.0),
            2 => Some(2.0 * r * r * (1.0 - (-2.0 * alpha).exp())),
            4 => Some(r.powi(4) / 8.0 * ((-4.0 * alpha).exp() - 4.0 * (-2.0 * alpha).exp() + 6.0)),
            _ => None,
        },
        // No corollary; only the general second-moment formula
        // <x^2> = (R^2/4) [2 F(0) - (F(2) + F(-2))] applies.
        AngleDistribution::Uniform | AngleDistribution::Triangular { .. } => match m {
            2 => {
                let f = |n| t.dist.cf(n).re;
                Some(r * r / 4.0 * (2.0 * f(0) - (f(2) + f(-2))))
            }
            _ => None,
        },
    }
}

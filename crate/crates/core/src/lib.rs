//! Exact series statistics for random angles pushed through `sin`/`cos`,
//! random phasor sums and phase noise in two-path interference.
//!
//! The analytic side lives in [`specfun`], [`angles`], [`sintrans`],
//! [`phasors`], [`gauge`] and [`huygens`]. Every analytic quantity has a
//! seeded Monte Carlo counterpart in [`oracle`]; sampling is chunked over
//! counter-addressed ChaCha streams (see [`stream`]) so results do not
//! depend on the rayon thread count.

pub mod angles;
pub mod error;
pub mod gauge;
pub mod huygens;
pub mod oracle;
pub mod phasors;
pub mod sintrans;
pub mod specfun;
pub mod stream;

pub use angles::AngleDistribution;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sintrans::{SeriesControl, SinusoidalTransform, TrigKind};

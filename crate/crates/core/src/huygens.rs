//! Discrete Huygens propagation on the circle with an antenna-gain kernel.
//!
//! `Psi'(phi_l, t2) = sum_k G(theta_k, phi_l) Psi(theta_k, t1) w_k` with
//! periodic trapezoid weights `w_k`. The gain is the trigonometric
//! polynomial `G(theta, phi) = c + sum_ij a_ij cos(i phi) sin(j theta)`.
//! In the random case the coefficient matrix is the random object; the two
//! angles stay deterministic.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::oracle::{format_real, RunningStats};
use crate::phasors::AmplitudeLaw;
use crate::stream::{self, ids};

pub const MIN_GRID: usize = 8;
pub const MIN_DRAWS: u64 = 100;

/// Nodes `theta_k = -pi + 2 pi (k + 1) / n`, `k = 0..n`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -PI + 2.0 * PI * (k + 1) as f64 / n as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefront {
    grid: Vec<f64>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl Wavefront {
    pub fn new(grid: Vec<f64>, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if grid.len() < MIN_GRID {
            return Err(Error::InvalidGrid("wavefront grid needs at least 8 nodes"));
        }
        if grid.len() != amplitudes.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: amplitudes.len(),
            });
        }
        if !grid.iter().all(|&t| t > -PI && t <= PI) {
            return Err(Error::InvalidGrid("wavefront nodes must lie in (-pi, pi]"));
        }
        if !grid.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::InvalidGrid(
                "wavefront nodes must be strictly increasing",
            ));
        }
        for a in &amplitudes {
            ensure_finite("amplitude", a.re)?;
            ensure_finite("amplitude", a.im)?;
        }
        ensure_finite("time", time)?;
        Ok(Wavefront {
            grid,
            amplitudes,
            time,
        })
    }

    /// Sample `f` on `grid`.
    pub fn from_fn(grid: Vec<f64>, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = grid.iter().map(|&t| f(t)).collect();
        Wavefront::new(grid, amplitudes, time)
    }

    /// `Psi = 1` on the uniform `n`-node grid at time 0.
    pub fn ones(n: usize) -> Result<Self> {
        Wavefront::from_fn(uniform_grid(n), 0.0, |_| Complex64::new(1.0, 0.0))
    }

    /// `Psi = sin(theta)` on the uniform `n`-node grid at time 0.
    pub fn sine(n: usize) -> Result<Self> {
        Wavefront::from_fn(uniform_grid(n), 0.0, |t| Complex64::new(t.sin(), 0.0))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Periodic trapezoid weights `(theta_{k+1} - theta_{k-1}) / 2`, with
    /// the neighbours of the end nodes wrapped by `2 pi`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .map(|k| {
                let next = if k + 1 == n {
                    self.grid[0] + 2.0 * PI
                } else {
                    self.grid[k + 1]
                };
                let prev = if k == 0 {
                    self.grid[n - 1] - 2.0 * PI
                } else {
                    self.grid[k - 1]
                };
                0.5 * (next - prev)
            })
            .collect()
    }

    /// Trapezoid approximation of the integral of `Psi` over the circle.
    pub fn integral(&self) -> Complex64 {
        self.weights()
            .iter()
            .zip(&self.amplitudes)
            .map(|(w, a)| w * a)
            .sum()
    }

    /// `theta,re,im` rows with a header; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im\n");
        for (t, a) in self.grid.iter().zip(&self.amplitudes) {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_real(*t),
                format_real(a.re),
                format_real(a.im)
            );
        }
        out
    }

    /// Inverse of [`Self::to_csv`]; the header row is optional.
    pub fn from_csv(text: &str, time: f64) -> Result<Self> {
        let mut grid = Vec::new();
        let mut amplitudes = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line.starts_with("theta") || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(line, format!("bad number `{s}`: {e}")))
            };
            match fields.as_slice() {
                [t, re] => {
                    grid.push(num(t)?);
                    amplitudes.push(Complex64::new(num(re)?, 0.0));
                }
                [t, re, im] => {
                    grid.push(num(t)?);
                    amplitudes.push(Complex64::new(num(re)?, num(im)?));
                }
                _ => return Err(Error::parse(line, "expected `theta,re[,im]`")),
            }
        }
        Wavefront::new(grid, amplitudes, time)
    }
}

/// `offset + sum_ij a_ij cos(i phi) sin(j theta)`, `i = 1..=m`, `j = 1..=n`.
///
/// An empty coefficient matrix gives the constant pattern. When `law` is
/// present, entry `(i, j)` of each random draw follows `law[i][j]` and
/// `coefficients` holds the entry means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainPattern {
    offset: f64,
    coefficients: Vec<Vec<f64>>,
    law: Option<Vec<Vec<AmplitudeLaw>>>,
}

fn check_rectangular<T>(rows: &[Vec<T>]) -> Result<()> {
    if let Some(first) = rows.first() {
        if first.is_empty() {
            return Err(Error::InvalidParameter {
                name: "coefficients",
                value: 0.0,
                reason: "rows must be non-empty",
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: bad.len(),
            });
        }
    }
    Ok(())
}

impl GainPattern {
    pub fn new(offset: f64, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        ensure_finite("offset", offset)?;
        check_rectangular(&coefficients)?;
        for &a in coefficients.iter().flatten() {
            ensure_finite("coefficient", a)?;
        }
        Ok(GainPattern {
            offset,
            coefficients,
            law: None,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        GainPattern::new(c, Vec::new())
    }

    /// Random pattern; the stored coefficients are the entry means.
    pub fn random(offset: f64, law: Vec<Vec<AmplitudeLaw>>) -> Result<Self> {
        ensure_finite("offset", offset)?;
        check_rectangular(&law)?;
        for l in law.iter().flatten() {
            l.validate()?;
        }
        let coefficients = law
            .iter()
            .map(|row| row.iter().map(AmplitudeLaw::mean).collect())
            .collect();
        Ok(GainPattern {
            offset,
            coefficients,
            law: Some(law),
        })
    }

    /// Every coefficient becomes Gaussian around its current value.
    pub fn with_gaussian_noise(&self, std: f64) -> Result<Self> {
        let law = self
            .coefficients
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&a| AmplitudeLaw::gaussian(a, std))
                    .collect()
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        GainPattern::random(self.offset, law)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn law(&self) -> Option<&[Vec<AmplitudeLaw>]> {
        self.law.as_deref()
    }

    pub fn is_random(&self) -> bool {
        self.law.is_some()
    }

    /// `(m, n)`: cosine order in `phi`, sine order in `theta`.
    pub fn orders(&self) -> (usize, usize) {
        (
            self.coefficients.len(),
            self.coefficients.first().map_or(0, Vec::len),
        )
    }

    /// One deterministic pattern drawn from the coefficient law, or a copy
    /// of `self` when there is no law.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> GainPattern {
        let Some(law) = &self.law else {
            return self.clone();
        };
        GainPattern {
            offset: self.offset,
            coefficients: law
                .iter()
                .map(|row| row.iter().map(|l| l.draw(rng)).collect())
                .collect(),
            law: None,
        }
    }
}

impl FromStr for GainPattern {
    type Err = Error;

    /// `const:C`, or `poly:offset=C,a11=..,a2_13=..` where `aIJ` (single
    /// digits) or `aI_J` sets the `cos(I phi) sin(J theta)` coefficient.
    /// Unset entries are zero.
    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        match name.trim().to_ascii_lowercase().as_str() {
            "const" | "constant" => GainPattern::constant(crate::angles::parse_real(rest)?),
            "poly" => {
                let mut offset = 0.0;
                let mut entries = Vec::new();
                for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (key, value) = item.split_once('=').ok_or_else(|| {
                        Error::parse(text, format!("expected key=value, got `{item}`"))
                    })?;
                    let value = crate::angles::parse_real(value)?;
                    let key = key.trim().to_ascii_lowercase();
                    if key == "offset" {
                        offset = value;
                        continue;
                    }
                    let idx = key
                        .strip_prefix('a')
                        .and_then(|s| match s.split_once('_') {
                            Some((i, j)) => Some((i.parse().ok()?, j.parse().ok()?)),
                            None if s.len() == 2 => {
                                Some((s[..1].parse().ok()?, s[1..].parse().ok()?))
                            }
                            None => None,
                        })
                        .filter(|&(i, j): &(usize, usize)| i >= 1 && j >= 1)
                        .ok_or_else(|| Error::parse(text, format!("unknown parameter `{key}`")))?;
                    entries.push((idx, value));
                }
                let m = entries.iter().map(|e| e.0 .0).max().unwrap_or(0);
                let n = entries.iter().map(|e| e.0 .1).max().unwrap_or(0);
                let mut a = vec![vec![0.0; n]; m];
                for ((i, j), v) in entries {
                    a[i - 1][j - 1] = v;
                }
                GainPattern::new(offset, a)
            }
            other => Err(Error::parse(
                text,
                format!("unknown gain pattern `{other}`"),
            )),
        }
    }
}

pub fn gain_eval(g: &GainPattern, theta: f64, phi: f64) -> f64 {
    g.offset
        + g.coefficients
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let c = ((i + 1) as f64 * phi).cos();
                row.iter()
                    .enumerate()
                    .map(|(j, a)| a * c * ((j + 1) as f64 * theta).sin())
                    .sum::<f64>()
            })
            .sum::<f64>()
}

fn check_times(w: &Wavefront, t2: f64) -> Result<()> {
    ensure_finite("t2", t2)?;
    if t2 <= w.time {
        return Err(Error::TimeOrdering {
            from: w.time,
            to: t2,
        });
    }
    Ok(())
}

/// Direct double sum over source and target nodes. The output grid is the
/// input grid and its time stamp is `t2`.
pub fn propagate(w: &Wavefront, g: &GainPattern, t2: f64) -> Result<Wavefront> {
    check_times(w, t2)?;
    let weights = w.weights();
    let sources: Vec<Complex64> = w
        .amplitudes
        .iter()
        .zip(&weights)
        .map(|(a, wk)| a * wk)
        .collect();
    let amplitudes = w
        .grid
        .iter()
        .map(|&phi| {
            w.grid
                .iter()
                .zip(&sources)
                .map(|(&theta, s)| gain_eval(g, theta, phi) * s)
                .sum()
        })
        .collect();
    Ok(Wavefront {
        grid: w.grid.clone(),
        amplitudes,
        time: t2,
    })
}

/// The kernel separates: `Psi'_l = offset S_0 + sum_i cos(i phi_l) sum_j
/// a_ij S_j` with `S_0 = sum_k w_k Psi_k`, `S_j = sum_k w_k sin(j theta_k)
/// Psi_k`. Building these once makes each random draw `O(nodes * m)`.
struct Separable {
    s0: Complex64,
    s: Vec<Complex64>,
    cos_table: Vec<Vec<f64>>,
}

impl Separable {
    fn new(w: &Wavefront, m: usize, n: usize) -> Self {
        let weights = w.weights();
        let src: Vec<Complex64> = w
            .amplitudes
            .iter()
            .zip(&weights)
            .map(|(a, wk)| a * wk)
            .collect();
        let s0 = src.iter().sum();
        let s = (1..=n)
            .map(|j| {
                w.grid
                    .iter()
                    .zip(&src)
                    .map(|(&t, x)| (j as f64 * t).sin() * x)
                    .sum()
            })
            .collect();
        let cos_table = (1..=m)
            .map(|i| w.grid.iter().map(|&p| (i as f64 * p).cos()).collect())
            .collect();
        Separable { s0, s, cos_table }
    }

    fn apply(&self, offset: f64, a: &[Vec<f64>], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = offset * self.s0);
        for (row, cos_i) in a.iter().zip(&self.cos_table) {
            let b: Complex64 = row.iter().zip(&self.s).map(|(aij, sj)| aij * sj).sum();
            for (o, c) in out.iter_mut().zip(cos_i) {
                *o += b * c;
            }
        }
    }
}

/// Per-node statistics of `|Psi'|^2` over random gain patterns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub grid: Vec<f64>,
    pub mean_intensity: Vec<f64>,
    /// Unbiased sample variance of the intensity.
    pub variance: Vec<f64>,
    /// Standard error of `mean_intensity`.
    pub std_error: Vec<f64>,
    pub draws: u64,
    pub seed: u64,
}

pub fn ensemble_propagate(
    w: &Wavefront,
    g: &GainPattern,
    t2: f64,
    seed: u64,
    draws: u64,
) -> Result<EnsembleResult> {
    check_times(w, t2)?;
    if draws < MIN_DRAWS {
        return Err(Error::CountTooSmall {
            count: draws,
            min: MIN_DRAWS,
        });
    }
    stream::check_count(draws)?;
    let (m, n) = g.orders();
    let sep = Separable::new(w, m, n);
    let nodes = w.len();
    let parts = stream::map_chunks(draws, |chunk, len| {
        let mut rng = stream::chunk_rng(seed, ids::HUYGENS_COEFFICIENTS, chunk);
        let mut stats = vec![RunningStats::default(); nodes];
        let mut out = vec![Complex64::new(0.0, 0.0); nodes];
        for _ in 0..len {
            let drawn = g.draw(&mut rng);
            sep.apply(drawn.offset, &drawn.coefficients, &mut out);
            for (st, o) in stats.iter_mut().zip(&out) {
                st.push(o.norm_sqr());
            }
        }
        stats
    });
    let mut total = vec![RunningStats::default(); nodes];
    for part in &parts {
        for (a, b) in total.iter_mut().zip(part) {
            a.merge(b);
        }
    }
    Ok(EnsembleResult {
        grid: w.grid.clone(),
        mean_intensity: total.iter().map(RunningStats::mean).collect(),
        variance: total.iter().map(RunningStats::variance).collect(),
        std_error: total.iter().map(RunningStats::std_error).collect(),
        draws,
        seed,
    })
}

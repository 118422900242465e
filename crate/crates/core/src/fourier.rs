//! Sine-series analysis on an edge.
//!
//! The basis on edge `j` is `sin[(n pi / l_j)(l_j - x)]`, so every basis
//! function vanishes at both ends of the edge. All series are truncated at a
//! common order `N`.

use crate::error::{Error, Result};
use crate::numeric::{resonance, simpson, simpson_weights, sin_pi_real, sine_overlap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_ORDER: usize = 16;
/// Samples per retained mode below which extraction is flagged as coarse.
pub const SAMPLES_PER_MODE: usize = 8;
/// Simpson intervals used for the integral side of the identity check.
pub const IDENTITY_QUADRATURE_INTERVALS: usize = 4096;

/// Complex sine coefficients `q_{j,n}` for every edge, truncated at order `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialCoeffs {
    lengths: Vec<f64>,
    coeffs: Vec<Vec<Complex64>>,
    order: usize,
}

impl PotentialCoeffs {
    pub fn zeros(lengths: Vec<f64>, order: usize) -> Self {
        let coeffs = vec![vec![Complex64::new(0.0, 0.0); order]; lengths.len()];
        Self {
            lengths,
            coeffs,
            order,
        }
    }

    /// Builds coefficients from per-edge rows; shorter rows are zero padded to `order`.
    pub fn new(lengths: Vec<f64>, rows: Vec<Vec<Complex64>>, order: usize) -> Result<Self> {
        if rows.len() != lengths.len() {
            return Err(Error::InvalidConfig(format!(
                "{} coefficient rows for {} edges",
                rows.len(),
                lengths.len()
            )));
        }
        if order == 0 {
            return Err(Error::InvalidConfig("truncation order must be positive".into()));
        }
        let mut coeffs = Vec::with_capacity(rows.len());
        for (j, mut row) in rows.into_iter().enumerate() {
            if row.len() > order {
                return Err(Error::InvalidConfig(format!(
                    "edge {j} has {} coefficients, more than the order {order}",
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidConfig(format!("edge {j} has a non-finite coefficient")));
            }
            row.resize(order, Complex64::new(0.0, 0.0));
            coeffs.push(row);
        }
        Ok(Self {
            lengths,
            coeffs,
            order,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn length(&self, edge: usize) -> f64 {
        self.lengths[edge]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Coefficients of one edge; entry `n - 1` holds `q_{j,n}`.
    pub fn edge(&self, edge: usize) -> &[Complex64] {
        &self.coeffs[edge]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn set(&mut self, edge: usize, n: usize, value: Complex64) {
        self.coeffs[edge][n - 1] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.norm() == 0.0)
    }

    /// Truncates or zero-pads every edge to a new order.
    pub fn with_order(&self, order: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.resize(order, Complex64::new(0.0, 0.0));
                r
            })
            .collect();
        Self {
            lengths: self.lengths.clone(),
            coeffs,
            order,
        }
    }
}

/// Uniform samples `f(x_i)`, `x_i = i l / M`, `i = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    length: f64,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(length: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidConfig(format!("sample length {length} is not positive")));
        }
        if values.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 samples (M >= 2), got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidConfig("samples must be finite".into()));
        }
        Ok(Self { length, values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(length: f64, intervals: usize, f: F) -> Result<Self> {
        let step = length / intervals as f64;
        Self::new(length, (0..=intervals).map(|i| f(i as f64 * step)).collect())
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridTooCoarse {
    pub intervals: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub coefficients: Vec<Complex64>,
    /// Set when the grid has fewer than `8 N` intervals; the values are still returned.
    pub warning: Option<GridTooCoarse>,
}

/// `q_n = (2/l) int_0^l f(x) sin[(n pi / l)(l - x)] dx` by composite Simpson, `n = 1..=order`.
pub fn sine_coefficients(f: &SampledFunction, order: usize) -> Extraction {
    let intervals = f.intervals();
    let required = SAMPLES_PER_MODE * order;
    let warning = (intervals < required).then(|| {
        log::warn!("sine extraction on {intervals} intervals for order {order}; want >= {required}");
        GridTooCoarse {
            intervals,
            required,
        }
    });
    let step = f.length / intervals as f64;
    let weights = simpson_weights(intervals, step);
    let coefficients = (1..=order)
        .map(|n| {
            let sum: Complex64 = f
                .values
                .iter()
                .zip(&weights)
                .enumerate()
                .map(|(i, (v, w))| {
                    let t = 1.0 - i as f64 / intervals as f64;
                    v * (w * sin_pi_real(n as f64 * t))
                })
                .sum();
            sum * (2.0 / f.length)
        })
        .collect();
    Extraction {
        coefficients,
        warning,
    }
}

fn partial_sum(row: &[Complex64], length: f64, x: f64) -> Complex64 {
    let t = 1.0 - x / length;
    row.iter()
        .enumerate()
        .map(|(i, q)| q * sin_pi_real((i + 1) as f64 * t))
        .sum()
}

/// Truncated series `q_j(x) = sum_n q_{j,n} sin[(n pi / l_j)(l_j - x)]`.
pub fn sine_synthesis(c: &PotentialCoeffs, edge: usize, x: f64) -> Result<Complex64> {
    let length = c.length(edge);
    if !(0.0..=length).contains(&x) {
        return Err(Error::OutOfDomain { x, length });
    }
    Ok(partial_sum(c.edge(edge), length, x))
}

/// Samples the truncated series on a uniform grid of `intervals` intervals.
pub fn sample_edge(c: &PotentialCoeffs, edge: usize, intervals: usize) -> Result<SampledFunction> {
    let length = c.length(edge);
    SampledFunction::from_fn(length, intervals, |x| partial_sum(c.edge(edge), length, x))
}

/// `F(q_j)(z) = (2/l_j) int_0^{l_j} q_j(x) sin[(z pi / l_j)(l_j - x)] dx`, integrated termwise.
pub fn sine_transform(c: &PotentialCoeffs, edge: usize, z: Complex64) -> Complex64 {
    c.edge(edge)
        .iter()
        .enumerate()
        .map(|(i, q)| q * sine_overlap(z, i + 1) * 2.0)
        .sum()
}

/// Partial-fraction side of the identity:
/// `sin(z l) sum_n (-1)^n (n pi / l) q_n / (z^2 - (n pi / l)^2)`.
pub fn ll33_lhs(c: &PotentialCoeffs, edge: usize, z: Complex64, pole_window: f64) -> Complex64 {
    let length = c.length(edge);
    c.edge(edge)
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let n = i + 1;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            q * resonance(length, n, z, pole_window) * (sign * n as f64 * PI / length)
        })
        .sum()
}

/// Integral side of the identity, by quadrature of the synthesized potential:
/// `(l/pi) int_0^pi q((l/pi)(pi - x)) sin(eta x) dx` with `eta = z l / pi`.
pub fn ll33_rhs(c: &PotentialCoeffs, edge: usize, z: Complex64) -> Complex64 {
    ll33_rhs_with(c, edge, z, IDENTITY_QUADRATURE_INTERVALS)
}

pub fn ll33_rhs_with(c: &PotentialCoeffs, edge: usize, z: Complex64, intervals: usize) -> Complex64 {
    let length = c.length(edge);
    let eta = z * (length / PI);
    let integrand = |x: f64| {
        let arg = (length / PI * (PI - x)).clamp(0.0, length);
        partial_sum(c.edge(edge), length, arg) * (eta * x).sin()
    };
    simpson(integrand, 0.0, PI, intervals) * (length / PI)
}

//! Special solutions on the star edges and on the chords, with their
//! derivatives, vertex sums and the ODE residual.
//!
//! On edge `j` with `t = 1 - x / l_j`,
//!
//! ```text
//! phi_j(x; z) = ( sin(z pi t) + sin(z l_j) sum_n q_{j,n} sin(n pi t) / (z^2 - k_n^2) ) P_j(z)
//! ```
//!
//! with `k_n = n pi / l_j` and `P_j(z) = prod_{k != j} sin(z l_k)`. On chord
//! `j` (arclength from tip `j` to tip `j + 1`) the solution is
//! `sin(z pi (1 - x / c_j)) P_j(z)`.

use crate::error::{Error, Result};
use crate::fourier::PotentialCoeffs;
use crate::geometry::{chords_from_angles, ExtendedGraphSpec, StarGraphSpec};
use crate::numeric::{cos_pi, resonance, sin_pi, sine_overlap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_POLE_WINDOW: f64 = 1e-6;
const NORMALIZED_LENGTH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every formula evaluated as printed, for arbitrary edge lengths.
    #[default]
    Verbatim,
    /// All edge lengths equal to pi.
    Normalized,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Verbatim => "verbatim",
            Mode::Normalized => "normalized",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verbatim" => Ok(Mode::Verbatim),
            "normalized" | "normalised" => Ok(Mode::Normalized),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

/// Edge data of the star: lengths, potentials, evaluation mode and pole window.
#[derive(Debug, Clone, PartialEq)]
pub struct StarModel {
    potentials: PotentialCoeffs,
    mode: Mode,
    pole_window: f64,
}

impl StarModel {
    pub fn new(potentials: PotentialCoeffs, mode: Mode, pole_window: f64) -> Result<Self> {
        let lengths = potentials.lengths();
        if lengths.len() < 2 {
            return Err(Error::InvalidConfig("a star needs at least two edges".into()));
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidConfig(format!("edge length {l} is not positive")));
        }
        if mode == Mode::Normalized
            && lengths
                .iter()
                .any(|l| (l - PI).abs() > NORMALIZED_LENGTH_TOLERANCE)
        {
            return Err(Error::InvalidConfig(
                "normalized mode requires every edge length to equal pi".into(),
            ));
        }
        let max_len = lengths.iter().cloned().fold(0.0, f64::max);
        let half_gap = 0.5 * PI / max_len;
        if !(pole_window > 0.0 && pole_window < half_gap) {
            return Err(Error::InvalidConfig(format!(
                "pole window {pole_window} must lie in (0, {half_gap})"
            )));
        }
        Ok(Self {
            potentials,
            mode,
            pole_window,
        })
    }

    /// Verbatim-mode model with the default pole window.
    pub fn verbatim(potentials: PotentialCoeffs) -> Result<Self> {
        Self::new(potentials, Mode::Verbatim, DEFAULT_POLE_WINDOW)
    }

    pub fn edge_count(&self) -> usize {
        self.potentials.edge_count()
    }

    pub fn lengths(&self) -> &[f64] {
        self.potentials.lengths()
    }

    pub fn length(&self, edge: usize) -> f64 {
        self.potentials.length(edge)
    }

    pub fn order(&self) -> usize {
        self.potentials.order()
    }

    pub fn potentials(&self) -> &PotentialCoeffs {
        &self.potentials
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pole_window(&self) -> f64 {
        self.pole_window
    }

    /// Same geometry and mode with different potentials.
    pub fn with_potentials(&self, potentials: PotentialCoeffs) -> Result<Self> {
        if potentials.lengths() != self.lengths() {
            return Err(Error::ConfigMismatch("potential lengths differ from the model".into()));
        }
        Ok(Self {
            potentials,
            ..self.clone()
        })
    }

    /// `P_j(z) = prod_{k != j} sin(z l_k)`.
    pub fn side_product(&self, edge: usize, z: Complex64) -> Complex64 {
        self.lengths()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != edge)
            .map(|(_, l)| (z * *l).sin())
            .product()
    }

    /// `sin(z l_j) / (z^2 - (n pi / l_j)^2)` for `n = 1..=N`, pole policy applied.
    pub fn resonances(&self, edge: usize, z: Complex64) -> Vec<Complex64> {
        let l = self.length(edge);
        (1..=self.order())
            .map(|n| resonance(l, n, z, self.pole_window))
            .collect()
    }

    fn check_x(&self, edge: usize, x: f64) -> Result<f64> {
        let length = self.length(edge);
        if !(0.0..=length).contains(&x) {
            return Err(Error::OutOfDomain { x, length });
        }
        Ok(1.0 - x / length)
    }

    /// Weighted series `sum_n w(n) q_{j,n} f(n t) g_n(z)`.
    fn series<F>(&self, edge: usize, z: Complex64, weight: F) -> Complex64
    where
        F: Fn(usize) -> Complex64,
    {
        self.potentials
            .edge(edge)
            .iter()
            .zip(self.resonances(edge, z))
            .enumerate()
            .map(|(i, (q, g))| q * g * weight(i + 1))
            .sum()
    }
}

impl AsRef<StarModel> for StarModel {
    fn as_ref(&self) -> &StarModel {
        self
    }
}

/// A star model together with the chord lengths of its closed extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    star: StarModel,
    extension: ExtendedGraphSpec,
}

impl ModelConfig {
    pub fn new(star: StarModel, extension: ExtendedGraphSpec) -> Result<Self> {
        if extension.chords().len() != star.edge_count() {
            return Err(Error::InvalidConfig(format!(
                "{} chords for {} edges",
                extension.chords().len(),
                star.edge_count()
            )));
        }
        Ok(Self { star, extension })
    }

    /// Chords realised from the planar star by the law of cosines.
    pub fn from_graph(
        graph: &StarGraphSpec,
        potentials: PotentialCoeffs,
        mode: Mode,
        pole_window: f64,
    ) -> Result<Self> {
        if potentials.lengths() != graph.lengths() {
            return Err(Error::ConfigMismatch("potential lengths differ from the graph".into()));
        }
        let star = StarModel::new(potentials, mode, pole_window)?;
        Self::new(star, chords_from_angles(graph)?)
    }

    pub fn star(&self) -> &StarModel {
        &self.star
    }

    pub fn extension(&self) -> &ExtendedGraphSpec {
        &self.extension
    }

    pub fn chords(&self) -> &[f64] {
        self.extension.chords()
    }

    pub fn with_chords(&self, chords: Vec<f64>) -> Result<Self> {
        Self::new(self.star.clone(), ExtendedGraphSpec::new(chords)?)
    }

    pub fn with_potentials(&self, potentials: PotentialCoeffs) -> Result<Self> {
        Self::new(self.star.with_potentials(potentials)?, self.extension.clone())
    }
}

impl AsRef<StarModel> for ModelConfig {
    fn as_ref(&self) -> &StarModel {
        &self.star
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn parity(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn phi_edge<M: AsRef<StarModel>>(model: &M, edge: usize, x: f64, z: Complex64) -> Result<Complex64> {
    let m = model.as_ref();
    let t = m.check_x(edge, x)?;
    let series = m.series(edge, z, |n| sin_pi(re(n as f64 * t)));
    Ok((sin_pi(z * t) + series) * m.side_product(edge, z))
}

pub fn phi_edge_derivative<M: AsRef<StarModel>>(
    model: &M,
    edge: usize,
    x: f64,
    z: Complex64,
) -> Result<Complex64> {
    let m = model.as_ref();
    let t = m.check_x(edge, x)?;
    let l = m.length(edge);
    let series = m.series(edge, z, |n| cos_pi(re(n as f64 * t)) * (n as f64 * PI / l));
    Ok((-(z * PI / l) * cos_pi(z * t) - series) * m.side_product(edge, z))
}

pub fn phi_edge_second_derivative<M: AsRef<StarModel>>(
    model: &M,
    edge: usize,
    x: f64,
    z: Complex64,
) -> Result<Complex64> {
    let m = model.as_ref();
    let t = m.check_x(edge, x)?;
    let l = m.length(edge);
    let series = m.series(edge, z, |n| {
        let k = n as f64 * PI / l;
        sin_pi(re(n as f64 * t)) * (k * k)
    });
    let w = z * PI / l;
    Ok((-(w * w) * sin_pi(z * t) - series) * m.side_product(edge, z))
}

fn chord_t(cfg: &ModelConfig, chord: usize, x: f64) -> Result<(f64, f64)> {
    let length = cfg.chords()[chord];
    if !(0.0..=length).contains(&x) {
        return Err(Error::OutOfDomain { x, length });
    }
    Ok((1.0 - x / length, length))
}

pub fn phi_chord(cfg: &ModelConfig, chord: usize, x: f64, z: Complex64) -> Result<Complex64> {
    let (t, _) = chord_t(cfg, chord, x)?;
    Ok(sin_pi(z * t) * cfg.star.side_product(chord, z))
}

pub fn phi_chord_derivative(cfg: &ModelConfig, chord: usize, x: f64, z: Complex64) -> Result<Complex64> {
    let (t, length) = chord_t(cfg, chord, x)?;
    Ok(-(z * PI / length) * cos_pi(z * t) * cfg.star.side_product(chord, z))
}

/// Sum of the outgoing edge derivatives at the centre, in closed form:
/// `-sum_j ((z pi / l_j) cos(z pi) + sin(z l_j) sum_n (-1)^n (n pi / l_j) q_{j,n} / (z^2 - k_n^2)) P_j(z)`.
pub fn kirchhoff_center_sum<M: AsRef<StarModel>>(model: &M, z: Complex64) -> Complex64 {
    -center_block(model.as_ref(), z)
}

pub(crate) fn center_block(m: &StarModel, z: Complex64) -> Complex64 {
    let cos_z = cos_pi(z);
    (0..m.edge_count())
        .map(|j| {
            let l = m.length(j);
            let series = m.series(j, z, |n| re(parity(n) * n as f64 * PI / l));
            (z * PI / l * cos_z + series) * m.side_product(j, z)
        })
        .sum()
}

/// Kirchhoff sum at tip `j`, with the previous chord of tip 0 being the last chord.
///
/// Every term carries `P_j(z)`, including the one from the incoming chord.
pub fn kirchhoff_outer_sum(cfg: &ModelConfig, tip: usize, z: Complex64) -> Complex64 {
    -outer_term(cfg, tip, z)
}

pub(crate) fn outer_term(cfg: &ModelConfig, tip: usize, z: Complex64) -> Complex64 {
    let m = &cfg.star;
    let chords = cfg.chords();
    let prev = cfg.extension.previous(tip);
    let l = m.length(tip);
    let zp = z * PI;
    let series = m.series(tip, z, |n| re(n as f64 * PI / l));
    (zp / l + zp / chords[prev] + zp / chords[tip] * cos_pi(z) + series) * m.side_product(tip, z)
}

/// `int_0^{l_j} sin(z pi (1 - x/l_j)) conj(q_j(x)) dx`, termwise.
pub(crate) fn boundary_overlap(m: &StarModel, edge: usize, z: Complex64) -> Complex64 {
    let l = m.length(edge);
    m.potentials()
        .edge(edge)
        .iter()
        .enumerate()
        .map(|(i, q)| q.conj() * sine_overlap(z, i + 1) * l)
        .sum()
}

/// `int_0^{l_j} phi_j(x; z) conj(q_j(x)) dx` in closed form on the truncated class.
pub fn nonlocal_integral<M: AsRef<StarModel>>(model: &M, edge: usize, z: Complex64) -> Complex64 {
    let m = model.as_ref();
    // Sine orthogonality turns the series part into sum_n |q_n|^2 (l/2) g_n.
    let half_l = 0.5 * m.length(edge);
    let quadratic: Complex64 = m
        .potentials()
        .edge(edge)
        .iter()
        .zip(m.resonances(edge, z))
        .map(|(q, g)| q * q.conj() * g * half_l)
        .sum();
    (boundary_overlap(m, edge, z) + quadratic) * m.side_product(edge, z)
}

/// `-phi_j'' + q_j(x) phi_j(0) - (z pi / l_j)^2 phi_j(x)`, with `phi''` analytic.
pub fn ode_residual<M: AsRef<StarModel>>(model: &M, edge: usize, x: f64, z: Complex64) -> Result<Complex64> {
    let m = model.as_ref();
    if m.mode() != Mode::Normalized {
        return Err(Error::ModeRequired);
    }
    ode_residual_any_mode(m, edge, x, z)
}

pub(crate) fn ode_residual_any_mode(m: &StarModel, edge: usize, x: f64, z: Complex64) -> Result<Complex64> {
    let second = phi_edge_second_derivative(m, edge, x, z)?;
    let value = phi_edge(m, edge, x, z)?;
    let at_vertex = phi_edge(m, edge, 0.0, z)?;
    let q = crate::fourier::sine_synthesis(m.potentials(), edge, x)?;
    let w = z * PI / m.length(edge);
    Ok(-second + q * at_vertex - w * w * value)
}

//! The characteristic function `Phi(z)` and its sampling.
//!
//! `Phi` is the sum of three blocks, each a sum over edges weighted by
//! `P_j(z) = prod_{k != j} sin(z l_k)`:
//!
//! 1. the non-local block `int sin(z pi (1 - x/l_j)) conj(q_j) dx + sin(z l_j) sum_n |q_{j,n}|^2 / (z^2 - k_n^2)`,
//! 2. the centre block `(z pi / l_j) cos(z pi) + sin(z l_j) sum_n (-1)^n (n pi / l_j) q_{j,n} / (z^2 - k_n^2)`,
//! 3. the tip block `z pi / l_j + z pi / c_{j-1} + (z pi / c_j) cos(z pi) + sin(z l_j) sum_n (n pi / l_j) q_{j,n} / (z^2 - k_n^2)`.
//!
//! The quadratic series of block 1 is taken exactly as `q conj(q)`, without
//! the `l_j / 2` that sine orthogonality produces in
//! [`nonlocal_integral`](crate::solution::nonlocal_integral).

use crate::error::{Error, Result};
use crate::numeric::{cos_pi, sine_overlap};
use crate::solution::{boundary_overlap, center_block, outer_term, Mode, ModelConfig, StarModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBlocks {
    pub nonlocal: Complex64,
    pub center: Complex64,
    pub outer: Complex64,
}

impl PhiBlocks {
    pub fn total(&self) -> Complex64 {
        self.nonlocal + self.center + self.outer
    }
}

pub fn phi(cfg: &ModelConfig, z: Complex64) -> Complex64 {
    phi_blocks(cfg, z).total()
}

pub fn phi_blocks(cfg: &ModelConfig, z: Complex64) -> PhiBlocks {
    let star = cfg.star();
    PhiBlocks {
        nonlocal: nonlocal_block(star, z),
        center: center_block(star, z),
        outer: (0..star.edge_count()).map(|j| outer_term(cfg, j, z)).sum(),
    }
}

/// Block 1 of `Phi`.
pub fn nonlocal_block(star: &StarModel, z: Complex64) -> Complex64 {
    (0..star.edge_count())
        .map(|j| {
            let quadratic: Complex64 = star
                .potentials()
                .edge(j)
                .iter()
                .zip(star.resonances(j, z))
                .map(|(q, g)| q * q.conj() * g)
                .sum();
            (boundary_overlap(star, j, z) + quadratic) * star.side_product(j, z)
        })
        .sum()
}

/// `Phi` with every chord term removed; only lengths and potentials enter.
pub fn phi_chord_free(star: &StarModel, z: Complex64) -> Complex64 {
    let tips: Complex64 = (0..star.edge_count())
        .map(|j| {
            let l = star.length(j);
            let series: Complex64 = star
                .potentials()
                .edge(j)
                .iter()
                .zip(star.resonances(j, z))
                .enumerate()
                .map(|(i, (q, g))| q * g * ((i + 1) as f64 * PI / l))
                .sum();
            (z * PI / l + series) * star.side_product(j, z)
        })
        .sum();
    nonlocal_block(star, z) + center_block(star, z) + tips
}

/// Gradient of `Phi` with respect to the reciprocal chords `u_i = 1 / c_i`.
///
/// Chord `i` enters at tip `i` (through `cos(z pi) P_i`) and at tip `i + 1`
/// (through `P_{i+1}`), so `Phi = phi_chord_free + sum_i u_i row_i`.
pub fn chord_design_row(star: &StarModel, z: Complex64) -> Vec<Complex64> {
    let m = star.edge_count();
    let products: Vec<Complex64> = (0..m).map(|j| star.side_product(j, z)).collect();
    let cos_z = cos_pi(z);
    (0..m)
        .map(|i| z * PI * (cos_z * products[i] + products[(i + 1) % m]))
        .collect()
}

/// Coefficients of one series index in `Phi`: the contribution of `q = q_{j,n}`
/// is `a q + b conj(q) + c |q|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialChannel {
    pub linear: Complex64,
    pub conjugate: Complex64,
    pub quadratic: Complex64,
}

/// Channels for every `(edge, n)`, edge-major, `n = 1..=order`.
pub fn potential_channels(star: &StarModel, order: usize, z: Complex64) -> Vec<PotentialChannel> {
    let mut out = Vec::with_capacity(star.edge_count() * order);
    for j in 0..star.edge_count() {
        let l = star.length(j);
        let p = star.side_product(j, z);
        for n in 1..=order {
            let g = crate::numeric::resonance(l, n, z, star.pole_window()) * p;
            let even = if n % 2 == 0 { 2.0 } else { 0.0 };
            out.push(PotentialChannel {
                linear: g * (even * n as f64 * PI / l),
                conjugate: sine_overlap(z, n) * l * p,
                quadratic: g,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleGridSpec {
    /// `z = start, start + 1, ..., end`.
    Integers { start: i64, end: i64 },
    /// `z = n pi / l_edge`, `n = 1..=count`.
    EdgeResonant { edge: usize, count: usize },
    /// Zeros of `sin(z pi) prod_{k != edge} sin(z l_k)` in `(lo, hi)`.
    ZeroSet { edge: usize, lo: f64, hi: f64 },
    /// `count` points spread over `(lo, hi)` at a golden-ratio offset, away from lattices.
    Generic { lo: f64, hi: f64, count: usize },
    Custom {
        points: Vec<Complex64>,
        allow_pole_windows: bool,
    },
}

const GOLDEN_OFFSET: f64 = 0.381_966_011_250_105_1;
const ZERO_DEDUP: f64 = 1e-12;

impl SampleGridSpec {
    pub fn points(&self, star: &StarModel) -> Result<Vec<Complex64>> {
        let pts: Vec<Complex64> = match self {
            SampleGridSpec::Integers { start, end } => {
                if end < start {
                    return Err(Error::InvalidConfig(format!("empty integer range {start}..{end}")));
                }
                (*start..=*end).map(|k| re(k as f64)).collect()
            }
            SampleGridSpec::EdgeResonant { edge, count } => {
                let l = edge_length(star, *edge)?;
                (1..=*count).map(|n| re(n as f64 * PI / l)).collect()
            }
            SampleGridSpec::ZeroSet { edge, lo, hi } => {
                edge_length(star, *edge)?;
                zero_set(star, *edge, *lo, *hi).into_iter().map(re).collect()
            }
            SampleGridSpec::Generic { lo, hi, count } => {
                if !(hi > lo) || *count == 0 {
                    return Err(Error::InvalidConfig("generic grid needs lo < hi and count > 0".into()));
                }
                let step = (hi - lo) / *count as f64;
                (0..*count)
                    .map(|i| re(lo + (i as f64 + GOLDEN_OFFSET) * step))
                    .collect()
            }
            SampleGridSpec::Custom {
                points,
                allow_pole_windows,
            } => {
                if !allow_pole_windows {
                    check_pole_windows(star, points)?;
                }
                points.clone()
            }
        };
        for (i, a) in pts.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::InvalidConfig(format!("grid point {i} is not finite")));
            }
        }
        let mut sorted: Vec<(f64, f64)> = pts.iter().map(|z| (z.re, z.im)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("grid points must be distinct".into()));
        }
        Ok(pts)
    }

    /// Canonical text form; parsing it gives back the same grid. Edges are 1-based.
    pub fn label(&self) -> String {
        match self {
            SampleGridSpec::Integers { start, end } => format!("integers:{start}:{end}"),
            SampleGridSpec::EdgeResonant { edge, count } => format!("resonant:{}:{count}", edge + 1),
            SampleGridSpec::ZeroSet { edge, lo, hi } => format!("zeroset:{}:{lo}:{hi}", edge + 1),
            SampleGridSpec::Generic { lo, hi, count } => format!("generic:{lo}:{hi}:{count}"),
            SampleGridSpec::Custom { points, .. } => {
                let body: Vec<String> = points
                    .iter()
                    .map(|z| {
                        if z.im == 0.0 {
                            format!("{}", z.re)
                        } else {
                            format!("{}{:+}i", z.re, z.im)
                        }
                    })
                    .collect();
                format!("list:{}", body.join(","))
            }
        }
    }
}

impl FromStr for SampleGridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("grid '{s}' has no kind prefix")))?;
        let fields: Vec<&str> = rest.split(':').collect();
        let bad = || Error::Parse(format!("malformed grid '{s}'"));
        let num = |f: &str| f.trim().parse::<f64>().map_err(|_| bad());
        let int = |f: &str| f.trim().parse::<i64>().map_err(|_| bad());
        let edge = |f: &str| -> Result<usize> {
            let e = int(f)?;
            if e < 1 {
                return Err(Error::Parse(format!("grid edges are 1-based, got {e}")));
            }
            Ok(e as usize - 1)
        };
        match (kind, fields.as_slice()) {
            ("integers", [a, b]) => Ok(SampleGridSpec::Integers {
                start: int(a)?,
                end: int(b)?,
            }),
            ("resonant", [e, c]) => Ok(SampleGridSpec::EdgeResonant {
                edge: edge(e)?,
                count: int(c)?.max(0) as usize,
            }),
            ("zeroset", [e, lo, hi]) => Ok(SampleGridSpec::ZeroSet {
                edge: edge(e)?,
                lo: num(lo)?,
                hi: num(hi)?,
            }),
            ("generic", [lo, hi, c]) => Ok(SampleGridSpec::Generic {
                lo: num(lo)?,
                hi: num(hi)?,
                count: int(c)?.max(0) as usize,
            }),
            ("linspace", [lo, hi, c]) => {
                let (lo, hi, c) = (num(lo)?, num(hi)?, int(c)?);
                if c < 2 {
                    return Err(bad());
                }
                let step = (hi - lo) / (c - 1) as f64;
                Ok(SampleGridSpec::Custom {
                    points: (0..c).map(|i| re(lo + i as f64 * step)).collect(),
                    allow_pole_windows: false,
                })
            }
            ("list", _) => {
                let points = rest
                    .split(',')
                    .map(|t| parse_complex(t.trim()).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SampleGridSpec::Custom {
                    points,
                    allow_pole_windows: false,
                })
            }
            _ => Err(bad()),
        }
    }
}

fn parse_complex(t: &str) -> Option<Complex64> {
    if let Ok(v) = t.parse::<f64>() {
        return Some(re(v));
    }
    let body = t.strip_suffix('i')?;
    let split = body
        .char_indices()
        .skip(1)
        .filter(|(i, c)| (*c == '+' || *c == '-') && !body[..*i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .last()?;
    Some(Complex64::new(
        body[..split].parse().ok()?,
        body[split..].parse().ok()?,
    ))
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn edge_length(star: &StarModel, edge: usize) -> Result<f64> {
    if edge >= star.edge_count() {
        return Err(Error::InvalidConfig(format!(
            "edge {} does not exist (m = {})",
            edge + 1,
            star.edge_count()
        )));
    }
    Ok(star.length(edge))
}

fn zero_set(star: &StarModel, edge: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut zeros: Vec<f64> = Vec::new();
    let mut lattice = |spacing: f64| {
        let first = (lo / spacing).floor() as i64;
        let last = (hi / spacing).ceil() as i64;
        for k in first..=last {
            let z = k as f64 * spacing;
            if z > lo && z < hi {
                zeros.push(z);
            }
        }
    };
    lattice(1.0);
    for (k, l) in star.lengths().iter().enumerate() {
        if k != edge {
            lattice(PI / l);
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).abs() < ZERO_DEDUP);
    zeros
}

fn check_pole_windows(star: &StarModel, points: &[Complex64]) -> Result<()> {
    let eps = star.pole_window();
    for z in points {
        for j in 0..star.edge_count() {
            let l = star.length(j);
            for n in 1..=star.order() {
                let k = n as f64 * PI / l;
                if (z - k).norm() < eps || (z + k).norm() < eps {
                    return Err(Error::PoleWindow {
                        z: format!("{z}"),
                        edge: j,
                        n,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Hashes of the configuration, in full and with the unknowns of each
/// recovery problem left out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub config: String,
    /// Mode, lengths and potentials: what chord recovery assumes known.
    pub lengths_potentials: String,
    /// Mode, lengths and chords: what potential recovery assumes known.
    pub lengths_chords: String,
}

impl Fingerprint {
    pub fn of(cfg: &ModelConfig) -> Self {
        let star = cfg.star();
        Self {
            config: digest(|h| {
                hash_star(h, star, true);
                hash_floats(h, cfg.chords());
            }),
            lengths_potentials: digest(|h| hash_star(h, star, true)),
            lengths_chords: digest(|h| {
                hash_star(h, star, false);
                hash_floats(h, cfg.chords());
            }),
        }
    }

    pub fn of_known_potentials(star: &StarModel) -> String {
        digest(|h| hash_star(h, star, true))
    }

    pub fn of_known_chords(star: &StarModel, chords: &[f64]) -> String {
        digest(|h| {
            hash_star(h, star, false);
            hash_floats(h, chords);
        })
    }
}

fn digest<F: FnOnce(&mut Sha256)>(f: F) -> String {
    let mut h = Sha256::new();
    h.update(b"starsl-config-v1");
    f(&mut h);
    h.finalize().iter().take(16).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn hash_floats(h: &mut Sha256, xs: &[f64]) {
    h.update((xs.len() as u64).to_le_bytes());
    for x in xs {
        h.update(x.to_bits().to_le_bytes());
    }
}

fn hash_star(h: &mut Sha256, star: &StarModel, with_potentials: bool) {
    h.update(star.mode().as_str().as_bytes());
    hash_floats(h, star.lengths());
    if with_potentials {
        h.update((star.order() as u64).to_le_bytes());
        for row in star.potentials().rows() {
            for q in row {
                hash_floats(h, &[q.re, q.im]);
            }
        }
        hash_floats(h, &[star.pole_window()]);
    }
}

/// Samples of `Phi` on a grid, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSampleSet {
    pub grid: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub mode: Mode,
    pub fingerprint: Option<Fingerprint>,
    pub grid_label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SampleFile {
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fingerprint: Option<Fingerprint>,
    samples: Vec<[f64; 4]>,
}

pub const CSV_HEADER: &str = "z_re,z_im,phi_re,phi_im";

/// 17 significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl PhiSampleSet {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (z, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&[z.re, z.im, v.re, v.im].map(fmt_float).join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, mode: Mode) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header '{CSV_HEADER}', found {other:?}"
                )))
            }
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
            if cols.len() != 4 {
                return Err(Error::Parse(format!("row {} has {} columns", i + 1, cols.len())));
            }
            grid.push(Complex64::new(cols[0], cols[1]));
            values.push(Complex64::new(cols[2], cols[3]));
        }
        Ok(Self {
            grid,
            values,
            mode,
            fingerprint: None,
            grid_label: None,
        })
    }

    pub fn to_json(&self) -> String {
        let file = SampleFile {
            mode: self.mode,
            grid: self.grid_label.clone(),
            fingerprint: self.fingerprint.clone(),
            samples: self
                .grid
                .iter()
                .zip(&self.values)
                .map(|(z, v)| [z.re, z.im, v.re, v.im])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("sample sets serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SampleFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            grid: file.samples.iter().map(|s| Complex64::new(s[0], s[1])).collect(),
            values: file.samples.iter().map(|s| Complex64::new(s[2], s[3])).collect(),
            mode: file.mode,
            fingerprint: file.fingerprint,
            grid_label: file.grid,
        })
    }

    /// Checks that this set was sampled on `points`.
    pub fn check_grid(&self, points: &[Complex64]) -> Result<()> {
        if self.grid.len() != points.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-point grid",
                self.grid.len(),
                points.len()
            )));
        }
        for (i, (a, b)) in self.grid.iter().zip(points).enumerate() {
            if (a - b).norm() > 1e-12 * b.norm().max(1.0) {
                return Err(Error::GridMismatch(format!("point {i}: {a} vs {b}")));
            }
        }
        Ok(())
    }
}

pub fn sample_phi(cfg: &ModelConfig, grid: &SampleGridSpec) -> Result<PhiSampleSet> {
    let points = grid.points(cfg.star())?;
    let values = points.iter().map(|z| phi(cfg, *z)).collect();
    Ok(PhiSampleSet {
        grid: points,
        values,
        mode: cfg.star().mode(),
        fingerprint: Some(Fingerprint::of(cfg)),
        grid_label: Some(grid.label()),
    })
}

pub fn sample_points(cfg: &ModelConfig, points: &[Complex64]) -> PhiSampleSet {
    PhiSampleSet {
        grid: points.to_vec(),
        values: points.iter().map(|z| phi(cfg, *z)).collect(),
        mode: cfg.star().mode(),
        fingerprint: Some(Fingerprint::of(cfg)),
        grid_label: None,
    }
}

pub fn phi_difference(a: &PhiSampleSet, b: &PhiSampleSet) -> Result<Vec<Complex64>> {
    if a.mode != b.mode {
        return Err(Error::GridMismatch(format!(
            "modes differ: {} vs {}",
            a.mode.as_str(),
            b.mode.as_str()
        )));
    }
    if a.grid != b.grid {
        return Err(Error::GridMismatch("sample grids differ".into()));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
}

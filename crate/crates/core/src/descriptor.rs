//! JSON configuration files.
//!
//! ```json
//! {
//!   "edges": [{"length": 1.0}, {"length": 1.3}, {"length": 0.9}],
//!   "angles": [2.0, 2.2, 2.0831853071795865],
//!   "potentials": [
//!     {"type": "coeffs", "values": [0.3, [0.1, -0.2]]},
//!     {"type": "samples", "values": [0.0, 0.2, 0.3, 0.2, 0.0]},
//!     {"type": "zero"}
//!   ],
//!   "mode": "verbatim",
//!   "truncation": 4
//! }
//! ```
//!
//! Either `angles` or `chords` fixes the extension. Complex numbers are
//! written as a bare real or as `[re, im]`. Sampled potentials are uniform
//! samples over `[0, l_j]`, endpoints included.

use crate::error::{Error, Result};
use crate::fourier::{sine_coefficients, PotentialCoeffs, SampledFunction, DEFAULT_ORDER};
use crate::geometry::{chords_from_angles, ExtendedGraphSpec, StarGraphSpec};
use crate::solution::{Mode, ModelConfig, StarModel, DEFAULT_POLE_WINDOW};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(v: Complex64) -> Self {
        if v.im == 0.0 {
            ComplexValue::Real(v.re)
        } else {
            ComplexValue::Pair([v.re, v.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDescriptor {
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialDescriptor {
    Zero,
    /// `q_{j,1}, q_{j,2}, ...`; missing trailing coefficients are zero.
    Coeffs { values: Vec<ComplexValue> },
    Samples { values: Vec<ComplexValue> },
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_window() -> f64 {
    DEFAULT_POLE_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDescriptor {
    /// Optional edge count, checked against `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub edges: Vec<EdgeDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<Vec<PotentialDescriptor>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_order")]
    pub truncation: usize,
    #[serde(default = "default_window")]
    pub pole_window: f64,
}

/// A validated configuration together with the planar star it came from, if any.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub graph: Option<StarGraphSpec>,
    pub config: ModelConfig,
    pub warnings: Vec<String>,
}

impl ConfigDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptors serialize")
    }

    /// Three unequal edges with small complex potentials.
    pub fn example() -> Self {
        let coeffs = |v: &[[f64; 2]]| PotentialDescriptor::Coeffs {
            values: v.iter().map(|p| ComplexValue::Pair(*p)).collect(),
        };
        Self {
            m: Some(3),
            edges: [1.0, 1.3, 0.9].map(|length| EdgeDescriptor { length }).to_vec(),
            angles: Some(vec![2.0, 2.2, std::f64::consts::TAU - 4.2]),
            chords: None,
            potentials: Some(vec![
                coeffs(&[[0.3, 0.0], [0.0, 0.15], [-0.1, 0.05]]),
                coeffs(&[[-0.2, 0.1], [0.25, 0.0]]),
                coeffs(&[[0.0, 0.0], [0.1, -0.2], [0.0, 0.0], [0.05, 0.0]]),
            ]),
            mode: Mode::Verbatim,
            truncation: 4,
            pole_window: DEFAULT_POLE_WINDOW,
        }
    }

    /// Descriptor reproducing `cfg` with explicit coefficients and chords.
    pub fn from_config(cfg: &ModelConfig) -> Self {
        let star = cfg.star();
        Self {
            m: Some(star.edge_count()),
            edges: star.lengths().iter().map(|&length| EdgeDescriptor { length }).collect(),
            angles: None,
            chords: Some(cfg.chords().to_vec()),
            potentials: Some(
                star.potentials()
                    .rows()
                    .iter()
                    .map(|row| PotentialDescriptor::Coeffs {
                        values: row.iter().map(|q| ComplexValue::from(*q)).collect(),
                    })
                    .collect(),
            ),
            mode: star.mode(),
            truncation: star.order(),
            pole_window: star.pole_window(),
        }
    }

    pub fn lengths(&self) -> Result<Vec<f64>> {
        if let Some(m) = self.m {
            if m != self.edges.len() {
                return Err(Error::InvalidConfig(format!(
                    "m = {m} but {} edges are listed",
                    self.edges.len()
                )));
            }
        }
        Ok(self.edges.iter().map(|e| e.length).collect())
    }

    /// Coefficients of every edge; sampled potentials are projected onto the sine basis.
    pub fn potential_coeffs(&self) -> Result<(PotentialCoeffs, Vec<String>)> {
        let lengths = self.lengths()?;
        let order = self.truncation;
        let mut warnings = Vec::new();
        let Some(list) = &self.potentials else {
            if order == 0 {
                return Err(Error::InvalidConfig("truncation order must be positive".into()));
            }
            return Ok((PotentialCoeffs::zeros(lengths, order), warnings));
        };
        if list.len() != lengths.len() {
            return Err(Error::InvalidConfig(format!(
                "{} potentials for {} edges",
                list.len(),
                lengths.len()
            )));
        }
        let mut rows = Vec::with_capacity(list.len());
        for (j, (p, &l)) in list.iter().zip(&lengths).enumerate() {
            rows.push(match p {
                PotentialDescriptor::Zero => Vec::new(),
                PotentialDescriptor::Coeffs { values } => values.iter().map(|v| v.value()).collect(),
                PotentialDescriptor::Samples { values } => {
                    let f = SampledFunction::new(l, values.iter().map(|v| v.value()).collect())?;
                    let ex = sine_coefficients(&f, order);
                    if let Some(w) = ex.warning {
                        warnings.push(format!(
                            "edge {}: {} sample intervals for order {order}, want at least {}",
                            j + 1,
                            w.intervals,
                            w.required
                        ));
                    }
                    ex.coefficients
                }
            });
        }
        Ok((PotentialCoeffs::new(lengths, rows, order)?, warnings))
    }

    /// Lengths, potentials and mode, without the extension.
    pub fn star(&self) -> Result<(StarModel, Vec<String>)> {
        let (q, warnings) = self.potential_coeffs()?;
        Ok((StarModel::new(q, self.mode, self.pole_window)?, warnings))
    }

    /// The planar star, when angles are given; the closure is checked here.
    pub fn graph(&self) -> Result<Option<StarGraphSpec>> {
        match &self.angles {
            Some(a) => Ok(Some(StarGraphSpec::new(self.lengths()?, a.clone())?)),
            None => Ok(None),
        }
    }

    pub fn build(&self) -> Result<LoadedConfig> {
        let (star, warnings) = self.star()?;
        let (graph, extension) = match (&self.angles, &self.chords) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig("give either angles or chords, not both".into()))
            }
            (None, None) => return Err(Error::InvalidConfig("angles or chords are required".into())),
            (Some(_), None) => {
                let graph = self.graph()?.expect("angles present");
                let ext = chords_from_angles(&graph)?;
                (Some(graph), ext)
            }
            (None, Some(c)) => (None, ExtendedGraphSpec::new(c.clone())?),
        };
        Ok(LoadedConfig {
            graph,
            config: ModelConfig::new(star, extension)?,
            warnings,
        })
    }
}

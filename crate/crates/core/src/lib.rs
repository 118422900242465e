//! Forward and inverse spectral analysis for Sturm–Liouville operators with
//! frozen-argument potentials on star graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: the star graph, its closed extension by chords between
//!   consecutive edge tips, and the angle/chord conversions.
//! - [`fourier`]: sine-series coefficients, synthesis, the sine transform and
//!   the partial-fraction/integral identity used by potential recovery.
//! - [`solution`]: the special solutions on edges and chords, their
//!   derivatives, Kirchhoff sums and the ODE residual.
//! - [`characteristic`]: the characteristic function, sample grids and sample
//!   sets.
//! - [`inverse`]: chord (topology) and potential recovery from samples.
//! - [`oracle`]: an independent finite-difference eigensolver.
//! - [`descriptor`] and [`verify`]: JSON ingestion and the property suite used
//!   by the command-line tool.
//!
//! Edge indices are zero-based throughout the API. Series indices `n` run
//! from 1 to the truncation order `N`, stored at position `n - 1`.

pub mod characteristic;
pub mod descriptor;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod inverse;
pub mod numeric;
pub mod oracle;
pub mod solution;
pub mod verify;

pub use num_complex::Complex64;


pub use characteristic::{phi, PhiSampleSet, SampleGridSpec};
pub use error::{Error, Result};
pub use fourier::PotentialCoeffs;
pub use geometry::{ExtendedGraphSpec, StarGraphSpec};
pub use solution::{Mode, ModelConfig, StarModel};

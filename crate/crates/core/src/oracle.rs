//! Finite-difference eigenvalue oracle for the frozen-argument problem
//!
//! ```text
//! -psi_j'' + q_j(x) psi(0) = lambda psi_j,   psi_j(l_j) = 0,   psi_j(0) shared,
//! sum_j { psi_j'(0) - int_0^{l_j} psi_j conj(q_j) dx } = 0.
//! ```
//!
//! Unknown layout: index 0 is the vertex value, followed by the interior mesh
//! values of each edge in edge order (`x_i = i h_j`, `i = 1..=M_j`). Interior
//! rows carry the `(1, -2, 1) / h^2` stencil and the frozen column `q_j(x_i)`;
//! the vertex row is the non-local condition with the one-sided difference
//! `(-3 psi_0 + 4 psi_1 - psi_2) / (2 h)` and trapezoidal quadrature. That row
//! has no `lambda`, so it is solved for `psi_0` and eliminated, leaving a
//! standard eigenproblem on the interior unknowns.

use crate::characteristic::phi;
use crate::error::{Error, Result};
use crate::fourier::sine_synthesis;
use crate::solution::{Mode, ModelConfig, StarModel};
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MIN_INTERIOR_POINTS: usize = 16;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct DiscretizedStar {
    steps: Vec<f64>,
    interior: Vec<usize>,
    offsets: Vec<usize>,
    requested_step: f64,
    /// Full operator, vertex row included.
    full: DMatrix<Complex64>,
    /// `q_j(x_i)` for each interior row (index 0 unused).
    frozen: DVector<Complex64>,
    /// `psi_0 = elimination . psi_interior`.
    elimination: DVector<Complex64>,
    reduced: DMatrix<Complex64>,
}

/// Builds the discretisation; each edge gets `ceil(l_j / h)` intervals.
pub fn assemble<M: AsRef<StarModel>>(model: &M, h: f64) -> Result<DiscretizedStar> {
    let star = model.as_ref();
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig(format!("mesh step must be positive, got {h}")));
    }
    let m = star.edge_count();
    let mut steps = Vec::with_capacity(m);
    let mut interior = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    let mut dim = 1;
    for j in 0..m {
        let l = star.length(j);
        let intervals = (l / h - 1e-9).ceil().max(1.0) as usize;
        let count = intervals - 1;
        if count < MIN_INTERIOR_POINTS {
            return Err(Error::MeshTooCoarse {
                edge: j,
                interior: count,
                required: MIN_INTERIOR_POINTS,
            });
        }
        steps.push(l / intervals as f64);
        interior.push(count);
        offsets.push(dim);
        dim += count;
    }

    let mut full = DMatrix::<Complex64>::zeros(dim, dim);
    let mut frozen = DVector::<Complex64>::zeros(dim);
    for j in 0..m {
        let (hj, mj, off) = (steps[j], interior[j], offsets[j]);
        let inv = 1.0 / (hj * hj);
        let q: Vec<Complex64> = (0..=mj)
            .map(|i| sine_synthesis(star.potentials(), j, i as f64 * hj))
            .collect::<Result<_>>()?;
        for i in 1..=mj {
            let row = off + i - 1;
            full[(row, row)] += 2.0 * inv;
            let left = if i == 1 { 0 } else { row - 1 };
            full[(row, left)] -= inv;
            if i < mj {
                full[(row, row + 1)] -= inv;
            }
            full[(row, 0)] += q[i];
            frozen[row] = q[i];
        }
        // Non-local vertex row: one-sided derivative minus trapezoid integral.
        full[(0, 0)] += -1.5 / hj - 0.5 * hj * q[0].conj();
        full[(0, off)] += 2.0 / hj;
        full[(0, off + 1)] += -0.5 / hj;
        for i in 1..=mj {
            full[(0, off + i - 1)] -= hj * q[i].conj();
        }
    }

    let pivot = full[(0, 0)];
    if pivot.norm() == 0.0 {
        return Err(Error::EigensolverFailure);
    }
    let n = dim - 1;
    let elimination = DVector::from_fn(n, |k, _| -full[(0, k + 1)] / pivot);
    let mut reduced = full.view((1, 1), (n, n)).into_owned();
    for r in 0..n {
        let coupling = full[(r + 1, 0)];
        if coupling != Complex64::new(0.0, 0.0) {
            for c in 0..n {
                reduced[(r, c)] += coupling * elimination[c];
            }
        }
    }

    Ok(DiscretizedStar {
        steps,
        interior,
        offsets,
        requested_step: h,
        full,
        frozen,
        elimination,
        reduced,
    })
}

impl DiscretizedStar {
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn interior_counts(&self) -> &[usize] {
        &self.interior
    }

    /// Row/column of the first interior unknown of `edge` in the full operator.
    pub fn offset(&self, edge: usize) -> usize {
        self.offsets[edge]
    }

    pub fn requested_step(&self) -> f64 {
        self.requested_step
    }

    pub fn full_operator(&self) -> &DMatrix<Complex64> {
        &self.full
    }

    /// The frozen-argument entries `q_j(x_i)` of the vertex column.
    pub fn frozen_column(&self) -> &DVector<Complex64> {
        &self.frozen
    }

    pub fn elimination(&self) -> &DVector<Complex64> {
        &self.elimination
    }

    /// Operator on the interior unknowns after eliminating the vertex value.
    pub fn operator(&self) -> &DMatrix<Complex64> {
        &self.reduced
    }

    /// Mass matrix of the full pencil: identity on interior rows, zero on the vertex row.
    pub fn mass(&self) -> DMatrix<Complex64> {
        let mut b = DMatrix::identity(self.full.nrows(), self.full.ncols());
        b[(0, 0)] = Complex64::new(0.0, 0.0);
        b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub h: f64,
    pub count: usize,
}

impl OracleSpectrum {
    fn from_all(mut all: Vec<Complex64>, h: f64, count: usize) -> Result<Self> {
        if all.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::EigensolverFailure);
        }
        all.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        all.truncate(count);
        all.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(Self {
            eigenvalues: all,
            h,
            count,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda_re,lambda_im\n");
        for (k, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", k + 1, v.re, v.im));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectra serialize")
    }
}

/// All eigenvalues of a dense matrix; the real Schur form is used when the
/// matrix is real, which is several times faster.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if a.iter().all(|v| v.im == 0.0) {
        let real = a.map(|v| v.re);
        let schur = Schur::try_new(real, SCHUR_EPS, SCHUR_MAX_ITERS).ok_or(Error::EigensolverFailure)?;
        Ok(schur.complex_eigenvalues().iter().cloned().collect())
    } else {
        let schur = Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITERS).ok_or(Error::EigensolverFailure)?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().cloned().collect())
    }
}

/// The `count` eigenvalues of smallest modulus, sorted by real then imaginary part.
pub fn spectrum(d: &DiscretizedStar, count: usize) -> Result<OracleSpectrum> {
    let n = d.reduced.nrows();
    if count > n {
        return Err(Error::InvalidConfig(format!("{count} eigenvalues requested from a {n}-dimensional operator")));
    }
    OracleSpectrum::from_all(eigenvalues(&d.reduced)?, d.requested_step, count)
}

/// Spectrum of the full pencil `(A, B)` without eliminating the vertex row,
/// through the shift-invert map `(A - shift B)^{-1} B`. The singular mass row
/// becomes a zero eigenvalue of that map and is discarded.
pub fn spectrum_uneliminated(d: &DiscretizedStar, count: usize, shift: f64) -> Result<OracleSpectrum> {
    let b = d.mass();
    let shifted = &d.full - &b * Complex64::new(shift, 0.0);
    let lu = shifted.lu();
    let map = lu.solve(&b).ok_or(Error::EigensolverFailure)?;
    let mu = eigenvalues(&map)?;
    let scale = mu.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let finite: Vec<Complex64> = mu
        .into_iter()
        .filter(|v| v.norm() > 1e-13 * scale)
        .map(|v| shift + 1.0 / v)
        .collect();
    if finite.len() < count {
        return Err(Error::EigensolverFailure);
    }
    OracleSpectrum::from_all(finite, d.requested_step, count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroComparison {
    pub z: f64,
    /// `(z pi / l)^2 = z^2` in normalized mode; other modes have no single spectral parameter.
    pub lambda: Option<f64>,
    pub nearest: Option<Complex64>,
    pub distance: Option<f64>,
}

const SCAN_PER_UNIT: f64 = 400.0;

/// Real zeros of `Phi` in `(lo, hi)`, found from sign changes of `Re Phi`
/// and from near-vanishing local minima of `|Phi|` (even-order zeros), each
/// matched against the nearest oracle eigenvalue. A report, not a test.
pub fn compare_phi_zeros(cfg: &ModelConfig, spectrum: &OracleSpectrum, lo: f64, hi: f64) -> Vec<ZeroComparison> {
    if !(hi > lo) {
        return Vec::new();
    }
    let f = |z: f64| phi(cfg, Complex64::new(z, 0.0));
    let n = ((hi - lo) * SCAN_PER_UNIT).ceil().max(16.0) as usize;
    let zs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<Complex64> = zs.iter().map(|z| f(*z)).collect();
    let scale = 1.0 + vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i].re, vals[i + 1].re);
        if a == 0.0 && vals[i].im.abs() <= 1e-12 * scale {
            roots.push(zs[i]);
        } else if a * b < 0.0 {
            let (mut x0, mut x1, mut f0) = (zs[i], zs[i + 1], a);
            for _ in 0..200 {
                let mid = 0.5 * (x0 + x1);
                let fm = f(mid).re;
                if fm == 0.0 || (x1 - x0) < 1e-15 * mid.abs().max(1.0) {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if (fm < 0.0) == (f0 < 0.0) {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
            }
            let z = 0.5 * (x0 + x1);
            if f(z).norm() <= 1e-8 * scale {
                roots.push(z);
            }
        }
    }
    for i in 1..n {
        let (a, b, c) = (vals[i - 1].norm(), vals[i].norm(), vals[i + 1].norm());
        if b <= a && b <= c {
            let z = golden_minimum(|x| f(x).norm(), zs[i - 1], zs[i + 1]);
            if f(z).norm() <= 1e-9 * scale {
                roots.push(z);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let normalized = cfg.star().mode() == Mode::Normalized;
    roots
        .into_iter()
        .map(|z| {
            let lambda = normalized.then_some(z * z);
            let nearest = lambda.and_then(|lam| {
                spectrum
                    .eigenvalues
                    .iter()
                    .min_by(|a, b| (*a - lam).norm().total_cmp(&(*b - lam).norm()))
                    .cloned()
            });
            let distance = lambda.zip(nearest).map(|(lam, e)| (e - lam).norm());
            ZeroComparison {
                z,
                lambda,
                nearest,
                distance,
            }
        })
        .collect()
}

fn golden_minimum<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * a.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn comparison_csv(rows: &[ZeroComparison]) -> String {
    let mut out = String::from("z,lambda,nearest_re,nearest_im,distance\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{},{},{},{}\n",
            r.z,
            opt(r.lambda),
            opt(r.nearest.map(|v| v.re)),
            opt(r.nearest.map(|v| v.im)),
            opt(r.distance)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::PotentialCoeffs;
    use crate::solution::DEFAULT_POLE_WINDOW;
    use std::f64::consts::PI;

    fn free_star(lengths: Vec<f64>) -> StarModel {
        StarModel::verbatim(PotentialCoeffs::zeros(lengths, 1)).unwrap()
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        let err = assemble(&free_star(vec![1.0, 2.0]), 0.1).unwrap_err();
        assert_eq!(
            err,
            Error::MeshTooCoarse {
                edge: 0,
                interior: 9,
                required: MIN_INTERIOR_POINTS
            }
        );
    }

    #[test]
    fn interior_rows_sum_to_zero_without_potential() {
        let d = assemble(&free_star(vec![1.0, 1.3, 0.8]), 0.02).unwrap();
        let a = d.full_operator();
        for j in 0..3 {
            let (off, mj) = (d.offset(j), d.interior_counts()[j]);
            // The last interior row touches the eliminated tip, so it is excluded.
            for r in off..off + mj - 1 {
                let sum: Complex64 = a.row(r).iter().sum();
                assert!(sum.norm() < 1e-9 * d.steps()[j].powi(-2), "row {r}");
            }
        }
    }

    #[test]
    fn frozen_column_follows_the_potential() {
        let mut q = PotentialCoeffs::zeros(vec![1.0, 1.2], 2);
        q.set(1, 2, Complex64::new(0.4, 0.1));
        let star = StarModel::verbatim(q.clone()).unwrap();
        let d = assemble(&star, 0.05).unwrap();
        let frozen = d.frozen_column();
        for r in d.offset(0)..d.offset(0) + d.interior_counts()[0] {
            assert_eq!(frozen[r], Complex64::new(0.0, 0.0));
        }
        let h = d.steps()[1];
        for i in 1..=d.interior_counts()[1] {
            let r = d.offset(1) + i - 1;
            let expected = sine_synthesis(&q, 1, i as f64 * h).unwrap();
            assert_eq!(frozen[r], expected);
            let stencil = if i == 1 { -1.0 / (h * h) } else { 0.0 };
            assert!((d.full_operator()[(r, 0)] - stencil - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn normalized_mode_is_accepted() {
        let q = PotentialCoeffs::zeros(vec![PI; 2], 1);
        let star = StarModel::new(q, Mode::Normalized, DEFAULT_POLE_WINDOW).unwrap();
        assert!(assemble(&star, PI / 40.0).is_ok());
    }
}

//! Recovery of chord lengths (hence vertex angles) and of potential
//! coefficients from samples of the characteristic function.
//!
//! `Phi` is affine in the reciprocal chords `u_i = 1 / c_i`, so chord recovery
//! is a linear least-squares problem. In the potential coefficients it is
//! affine in `(q, conj(q))` plus a `|q|^2` channel, which Gauss–Newton on the
//! real parametrisation `(Re q, Im q)` handles directly.

use crate::characteristic::{
    chord_design_row, phi, phi_chord_free, potential_channels, Fingerprint, PhiSampleSet,
    PotentialChannel,
};
use crate::error::{Error, Result};
use crate::fourier::PotentialCoeffs;
use crate::geometry::{angles_from_chords, closure_defect, ExtendedGraphSpec, RECOVERY_CLOSURE_TOLERANCE};
use crate::numeric::{condition_from_singular_values, cos_pi};
use crate::solution::{ModelConfig, StarModel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_CONDITION_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryStatus {
    Ok,
    /// Minimum-norm solution of a rank-deficient system; only returned when requested.
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub status: RecoveryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<Complex64>>>,
    /// `||Phi_observed - Phi(recovered)||_2`, recomputed from the recovered model.
    pub residual_norm: f64,
    /// Condition number of the column-scaled design (chords) or of the
    /// Gauss–Newton normal matrix (potentials).
    pub condition: f64,
    /// Bound on `||delta u|| / ||delta Phi||` for the chord system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_amplification: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_space_dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Residual norm at the start and after every accepted Gauss–Newton step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_history: Option<Vec<f64>>,
}

impl RecoveryReport {
    fn topology(chords: Vec<f64>, residual_norm: f64, condition: f64) -> Self {
        Self {
            status: RecoveryStatus::Ok,
            chords: Some(chords),
            angles: None,
            closure_defect: None,
            coefficients: None,
            residual_norm,
            condition,
            noise_amplification: None,
            null_space_dimension: None,
            iterations: None,
            residual_history: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyOptions {
    pub condition_limit: f64,
    /// Return the minimum-norm solution instead of failing when rank deficient.
    pub allow_rank_deficient: bool,
    pub closure_tolerance: f64,
}

impl Default for TopologyOptions {
    fn default() -> Self {
        Self {
            condition_limit: DEFAULT_CONDITION_LIMIT,
            allow_rank_deficient: false,
            closure_tolerance: RECOVERY_CLOSURE_TOLERANCE,
        }
    }
}

/// Known lengths and potentials, observed samples; the chords are unknown.
#[derive(Debug, Clone)]
pub struct TopologyRecoveryProblem {
    known: StarModel,
    observed: PhiSampleSet,
    pub options: TopologyOptions,
}

impl TopologyRecoveryProblem {
    pub fn new(known: StarModel, observed: PhiSampleSet) -> Result<Self> {
        if observed.mode != known.mode() {
            return Err(Error::ConfigMismatch("observed samples use a different mode".into()));
        }
        if observed.grid.len() != observed.values.len() {
            return Err(Error::GridMismatch("grid and values differ in length".into()));
        }
        if let Some(fp) = &observed.fingerprint {
            let expected = Fingerprint::of_known_potentials(&known);
            if fp.lengths_potentials != expected {
                return Err(Error::FingerprintMismatch {
                    expected,
                    found: fp.lengths_potentials.clone(),
                });
            }
        }
        Ok(Self {
            known,
            observed,
            options: TopologyOptions::default(),
        })
    }

    pub fn with_options(mut self, options: TopologyOptions) -> Self {
        self.options = options;
        self
    }

    pub fn known(&self) -> &StarModel {
        &self.known
    }

    pub fn observed(&self) -> &PhiSampleSet {
        &self.observed
    }
}

/// Stacks complex rows into a real system: real parts first, then imaginary.
fn stack_real(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> (DMatrix<f64>, DVector<f64>) {
    let k = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(2 * k, cols, |r, c| {
        if r < k {
            rows[r][c].re
        } else {
            rows[r - k][c].im
        }
    });
    let b = DVector::from_fn(2 * k, |r, _| if r < k { rhs[r].re } else { rhs[r - k].im });
    (a, b)
}

struct LeastSquares {
    solution: DVector<f64>,
    /// Condition of the column-scaled matrix.
    condition: f64,
    smallest_singular_value: f64,
    rank_deficiency: usize,
}

/// Column-scaled SVD least squares. Tiny singular values are truncated, which
/// yields the minimum-norm solution of the scaled system.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> LeastSquares {
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let svd = scaled.svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let cut = max * 1e-12;
    let rank_deficiency = sv.iter().filter(|s| **s <= cut).count();
    let y = svd.solve(b, cut).expect("SVD computed with both factors");
    let solution = DVector::from_fn(y.len(), |j, _| y[j] / scales[j]);
    let smallest_singular_value = a.clone().svd(false, false).singular_values.min();
    LeastSquares {
        solution,
        condition: condition_from_singular_values(&sv),
        smallest_singular_value,
        rank_deficiency,
    }
}

fn residual_norm(cfg: &ModelConfig, observed: &PhiSampleSet) -> f64 {
    observed
        .grid
        .iter()
        .zip(&observed.values)
        .map(|(z, v)| (v - phi(cfg, *z)).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn finish_chords(
    p: &TopologyRecoveryProblem,
    u: &[f64],
    condition: f64,
) -> Result<RecoveryReport> {
    if let Some((index, &value)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveReciprocal { index, value });
    }
    let chords: Vec<f64> = u.iter().map(|v| 1.0 / v).collect();
    let cfg = ModelConfig::new(p.known.clone(), ExtendedGraphSpec::new(chords.clone())?)?;
    Ok(RecoveryReport::topology(chords, residual_norm(&cfg, &p.observed), condition))
}

/// Least-squares chord recovery on an arbitrary grid.
pub fn recover_chords(p: &TopologyRecoveryProblem) -> Result<RecoveryReport> {
    let known = &p.known;
    let rows: Vec<Vec<Complex64>> = p.observed.grid.iter().map(|z| chord_design_row(known, *z)).collect();
    let rhs: Vec<Complex64> = p
        .observed
        .grid
        .iter()
        .zip(&p.observed.values)
        .map(|(z, v)| v - phi_chord_free(known, *z))
        .collect();
    if rows.len() < known.edge_count() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let (a, b) = stack_real(&rows, &rhs);
    let ls = least_squares(&a, &b);
    let rank_deficient = ls.condition > p.options.condition_limit;
    if rank_deficient && !p.options.allow_rank_deficient {
        return Err(Error::RankDeficient {
            condition: ls.condition,
        });
    }
    let u: Vec<f64> = ls.solution.iter().cloned().collect();
    let mut report = finish_chords(p, &u, ls.condition)?;
    report.noise_amplification = Some(1.0 / ls.smallest_singular_value);
    if rank_deficient {
        report.status = RecoveryStatus::RankDeficient;
        report.null_space_dimension = Some(ls.rank_deficiency.max(1));
    }
    Ok(report)
}

/// Closed-form chord recovery from points resonant with single edges.
///
/// At `z = n pi / l_j` every `P_i` with `i != j` vanishes, leaving
/// `Psi(z) = z pi P_j(z) (u_{j-1} + u_j cos(z pi))`: a two-unknown system per
/// tip. Each reciprocal chord is seen from its two end tips; the two
/// estimates are averaged.
pub fn recover_chords_resonant(p: &TopologyRecoveryProblem) -> Result<RecoveryReport> {
    let known = &p.known;
    let m = known.edge_count();
    let mut estimates: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut worst_condition: f64 = 1.0;
    for tip in 0..m {
        let l = known.length(tip);
        let prev = (tip + m - 1) % m;
        // Normal equations for (u_prev, u_tip).
        let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut used = 0;
        for (z, v) in p.observed.grid.iter().zip(&p.observed.values) {
            let p_tip = known.side_product(tip, *z);
            if (z * l).sin().norm() > 1e-8 || p_tip.norm() < 1e-8 {
                continue;
            }
            let alpha = z * PI * p_tip;
            let beta = alpha * cos_pi(*z);
            let psi = v - phi_chord_free(known, *z);
            s11 += alpha.norm_sqr();
            s12 += (alpha.conj() * beta).re;
            s22 += beta.norm_sqr();
            r1 += (alpha.conj() * psi).re;
            r2 += (beta.conj() * psi).re;
            used += 1;
        }
        let det = s11 * s22 - s12 * s12;
        let scale = s11 * s22;
        let condition = if det > 0.0 { scale / det } else { f64::INFINITY };
        worst_condition = worst_condition.max(condition);
        if used < 2 || condition > p.options.condition_limit {
            return Err(Error::RankDeficient { condition });
        }
        estimates[prev].push((r1 * s22 - r2 * s12) / det);
        estimates[tip].push((s11 * r2 - s12 * r1) / det);
    }
    let u: Vec<f64> = estimates
        .iter()
        .map(|e| e.iter().sum::<f64>() / e.len() as f64)
        .collect();
    finish_chords(p, &u, worst_condition)
}

/// Chord recovery followed by the inverse law of cosines and the closure check.
pub fn recover_angles(p: &TopologyRecoveryProblem) -> Result<RecoveryReport> {
    if p.known.edge_count() < 3 {
        return Err(Error::InvalidGeometry(
            "angle recovery needs at least three edges".into(),
        ));
    }
    let mut report = recover_chords(p)?;
    let chords = ExtendedGraphSpec::new(report.chords.clone().unwrap_or_default())?;
    let angles = angles_from_chords(p.known.lengths(), &chords, p.options.closure_tolerance)?;
    report.closure_defect = Some(closure_defect(&angles));
    report.angles = Some(angles);
    Ok(report)
}

fn max_gap(a: &ModelConfig, b: &ModelConfig, grid: &[Complex64]) -> f64 {
    grid.iter()
        .map(|z| (phi(a, *z) - phi(b, *z)).norm())
        .fold(0.0, f64::max)
}

/// `max |Phi_a - Phi_b|` over the grid for two stars sharing lengths and potentials.
pub fn uniqueness_gap_topology(a: &ModelConfig, b: &ModelConfig, grid: &[Complex64]) -> Result<f64> {
    let (sa, sb) = (a.star(), b.star());
    if sa.lengths() != sb.lengths() || sa.potentials() != sb.potentials() || sa.mode() != sb.mode() {
        return Err(Error::ConfigMismatch(
            "topology comparison needs identical lengths, potentials and mode".into(),
        ));
    }
    Ok(max_gap(a, b, grid))
}

/// `max |Phi_a - Phi_b|` over the grid for two stars sharing lengths and chords.
pub fn uniqueness_gap_potential(a: &ModelConfig, b: &ModelConfig, grid: &[Complex64]) -> Result<f64> {
    let (sa, sb) = (a.star(), b.star());
    if sa.lengths() != sb.lengths() || a.chords() != b.chords() || sa.mode() != sb.mode() {
        return Err(Error::ConfigMismatch(
            "potential comparison needs identical lengths, chords and mode".into(),
        ));
    }
    Ok(max_gap(a, b, grid))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOptions {
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub residual_tolerance: f64,
    pub condition_limit: f64,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self {
            max_iters: 50,
            step_tolerance: 1e-12,
            residual_tolerance: 1e-12,
            condition_limit: DEFAULT_CONDITION_LIMIT,
        }
    }
}

/// Known lengths and chords, observed samples; the coefficients are unknown.
#[derive(Debug, Clone)]
pub struct PotentialRecoveryProblem {
    base: ModelConfig,
    order: usize,
    observed: PhiSampleSet,
    pub options: PotentialOptions,
}

/// Threshold below which a side product counts as vanishing on a grid point.
const USABLE_PRODUCT: f64 = 1e-8;

impl PotentialRecoveryProblem {
    /// `known` supplies lengths, chords, mode and pole window; its potentials are ignored.
    pub fn new(known: &ModelConfig, order: usize, observed: PhiSampleSet) -> Result<Self> {
        let star = known.star();
        if observed.mode != star.mode() {
            return Err(Error::ConfigMismatch("observed samples use a different mode".into()));
        }
        if observed.grid.len() != observed.values.len() {
            return Err(Error::GridMismatch("grid and values differ in length".into()));
        }
        if let Some(fp) = &observed.fingerprint {
            let expected = Fingerprint::of_known_chords(star, known.chords());
            if fp.lengths_chords != expected {
                return Err(Error::FingerprintMismatch {
                    expected,
                    found: fp.lengths_chords.clone(),
                });
            }
        }
        let zero = PotentialCoeffs::zeros(star.lengths().to_vec(), order);
        let base = known.with_potentials(zero)?;
        for j in 0..star.edge_count() {
            let usable = observed
                .grid
                .iter()
                .filter(|z| star.side_product(j, **z).norm() > USABLE_PRODUCT)
                .count();
            if usable < 2 * order + 1 {
                return Err(Error::InvalidConfig(format!(
                    "edge {} has {usable} usable grid points, need {}",
                    j + 1,
                    2 * order + 1
                )));
            }
        }
        Ok(Self {
            base,
            order,
            observed,
            options: PotentialOptions::default(),
        })
    }

    pub fn with_options(mut self, options: PotentialOptions) -> Self {
        self.options = options;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Precomputed affine/quadratic model of `Phi` in the coefficients.
pub struct PotentialResidual {
    offset: Vec<Complex64>,
    channels: Vec<Vec<PotentialChannel>>,
}

impl PotentialResidual {
    pub fn new(p: &PotentialRecoveryProblem) -> Self {
        let star = p.base.star();
        let offset = p
            .observed
            .grid
            .iter()
            .zip(&p.observed.values)
            .map(|(z, v)| phi(&p.base, *z) - v)
            .collect();
        let channels = p
            .observed
            .grid
            .iter()
            .map(|z| potential_channels(star, p.order, *z))
            .collect();
        Self { offset, channels }
    }

    /// Unknown count in the real parametrisation.
    pub fn dimension(&self) -> usize {
        2 * self.channels.first().map_or(0, Vec::len)
    }

    fn coefficients(theta: &[f64]) -> impl Iterator<Item = Complex64> + '_ {
        theta.chunks(2).map(|c| Complex64::new(c[0], c[1]))
    }

    /// Complex residual `Phi(q) - Phi_observed` per grid point.
    pub fn evaluate(&self, theta: &[f64]) -> Vec<Complex64> {
        self.offset
            .iter()
            .zip(&self.channels)
            .map(|(r0, ch)| {
                r0 + ch
                    .iter()
                    .zip(Self::coefficients(theta))
                    .map(|(c, q)| c.linear * q + c.conjugate * q.conj() + c.quadratic * q.norm_sqr())
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Starting point from the lifted problem in which `w_k = |q_k|^2` is a
    /// free real unknown: the model is then linear in `(Re q, Im q, w)` and
    /// one least-squares solve gives `q` exactly on noiseless data. When the
    /// lifted system is rank deficient the minimum-norm solution is returned;
    /// it still fixes every direction the linear channels see.
    pub fn lifted_start(&self) -> Option<Vec<f64>> {
        let rows: Vec<Vec<Complex64>> = self
            .channels
            .iter()
            .map(|ch| {
                ch.iter()
                    .flat_map(|c| {
                        [
                            c.linear + c.conjugate,
                            (c.linear - c.conjugate) * Complex64::i(),
                            c.quadratic,
                        ]
                    })
                    .collect()
            })
            .collect();
        let rhs: Vec<Complex64> = self.offset.iter().map(|r| -r).collect();
        let (a, b) = stack_real(&rows, &rhs);
        if a.nrows() < a.ncols() {
            return None;
        }
        let ls = least_squares(&a, &b);
        Some(
            ls.solution
                .as_slice()
                .chunks(3)
                .flat_map(|c| [c[0], c[1]])
                .collect(),
        )
    }

    /// Complex Jacobian rows: derivatives in `Re q` and `Im q` for every coefficient.
    pub fn jacobian(&self, theta: &[f64]) -> Vec<Vec<Complex64>> {
        self.channels
            .iter()
            .map(|ch| {
                ch.iter()
                    .zip(Self::coefficients(theta))
                    .flat_map(|(c, q)| {
                        let d_re = c.linear + c.conjugate + c.quadratic * (2.0 * q.re);
                        let d_im = (c.linear - c.conjugate) * Complex64::i() + c.quadratic * (2.0 * q.im);
                        [d_re, d_im]
                    })
                    .collect()
            })
            .collect()
    }
}

fn norm(r: &[Complex64]) -> f64 {
    r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Gauss–Newton with step halving. The zero potential is tried first; when it
/// does not already fit, the iteration starts from the lifted linear solution
/// (see [`PotentialResidual::lifted_start`]).
pub fn recover_potentials(p: &PotentialRecoveryProblem) -> Result<RecoveryReport> {
    let model = PotentialResidual::new(p);
    let opts = p.options;
    let scale = 1.0 + norm(&p.observed.values);
    let mut theta = vec![0.0; model.dimension()];
    let mut r = model.evaluate(&theta);
    let mut r_norm = norm(&r);
    if r_norm > opts.residual_tolerance * scale {
        if let Some(start) = model.lifted_start() {
            let rs = model.evaluate(&start);
            let ns = norm(&rs);
            if ns < r_norm {
                theta = start;
                r = rs;
                r_norm = ns;
            }
        }
    }
    let mut iterations = 0;
    let mut condition = f64::NAN;
    let mut history = vec![r_norm];
    loop {
        if r_norm <= opts.residual_tolerance * scale {
            break;
        }
        if iterations >= opts.max_iters {
            return Err(Error::MaxItersExceeded {
                iterations,
                residual: r_norm,
            });
        }
        let (a, b) = stack_real(&model.jacobian(&theta), &r);
        let ls = least_squares(&a, &b);
        condition = ls.condition * ls.condition;
        if condition > opts.condition_limit {
            return Err(Error::AmbiguousSolution { condition });
        }
        let step: Vec<f64> = ls.solution.iter().map(|v| -v).collect();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + alpha * s).collect();
            let tr = model.evaluate(&trial);
            let tn = norm(&tr);
            if tn < r_norm {
                accepted = Some((trial, tr, tn));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        let step_norm = alpha * step.iter().map(|s| s * s).sum::<f64>().sqrt();
        let theta_norm = theta.iter().map(|s| s * s).sum::<f64>().sqrt();
        match accepted {
            Some((t, tr, tn)) => {
                theta = t;
                r = tr;
                r_norm = tn;
                history.push(tn);
            }
            // No decrease along the Gauss–Newton direction: the residual sits at
            // its rounding floor.
            None => break,
        }
        if step_norm <= opts.step_tolerance * (1.0 + theta_norm) {
            break;
        }
    }
    if condition.is_nan() {
        let (a, _) = stack_real(&model.jacobian(&theta), &r);
        let ls = least_squares(&a, &DVector::zeros(a.nrows()));
        condition = ls.condition * ls.condition;
    }
    let lengths = p.base.star().lengths().to_vec();
    let rows: Vec<Vec<Complex64>> = theta
        .chunks(2 * p.order)
        .map(|edge| edge.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
        .collect();
    let recovered = PotentialCoeffs::new(lengths, rows.clone(), p.order)?;
    let cfg = p.base.with_potentials(recovered)?;
    Ok(RecoveryReport {
        status: RecoveryStatus::Ok,
        chords: None,
        angles: None,
        closure_defect: None,
        coefficients: Some(rows),
        residual_norm: residual_norm(&cfg, &p.observed),
        condition,
        noise_amplification: None,
        null_space_dimension: None,
        iterations: Some(iterations),
        residual_history: Some(history),
    })
}

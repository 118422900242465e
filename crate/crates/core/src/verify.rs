//! Property checks run against a single configuration.
//!
//! Every property reports pass, fail or skip with a short detail line. The
//! geometry is checked from the raw descriptor, so a file whose angles do not
//! close still yields a report (with that property failing) instead of an error.

use crate::characteristic::{
    chord_design_row, nonlocal_block, phi, phi_blocks, sample_phi, SampleGridSpec,
};
use crate::descriptor::ConfigDescriptor;
use crate::error::Error;
use crate::fourier::{ll33_lhs, ll33_rhs};
use crate::geometry::{closure_defect, principal_angles, ExtendedGraphSpec, GRAPH_CLOSURE_TOLERANCE};
use crate::inverse::{
    recover_chords, recover_potentials, uniqueness_gap_potential, uniqueness_gap_topology,
    PotentialRecoveryProblem, TopologyRecoveryProblem,
};
use crate::oracle::{assemble, spectrum, spectrum_uneliminated};
use crate::solution::{
    nonlocal_integral, ode_residual, phi_edge, phi_edge_derivative, Mode, ModelConfig, StarModel,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: PropertyStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn result(name: &str, status: PropertyStatus, detail: impl Into<String>) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        status,
        detail: detail.into(),
    }
}

fn check(name: &str, ok: bool, detail: String) -> PropertyResult {
    result(name, if ok { PropertyStatus::Pass } else { PropertyStatus::Fail }, detail)
}

fn error(name: &str, e: Error) -> PropertyResult {
    result(name, PropertyStatus::Fail, e.to_string())
}

/// Complex probe points away from the real axis and from each other.
fn probes() -> Vec<Complex64> {
    [(0.37, 0.0), (1.7, 0.2), (2.9, -0.35), (4.45, 0.0), (6.1, 0.5), (7.83, 0.0)]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect()
}

fn generic_grid(count: usize) -> SampleGridSpec {
    SampleGridSpec::Generic {
        lo: 0.3,
        hi: 12.3,
        count,
    }
}

fn geometry(d: &ConfigDescriptor) -> PropertyResult {
    const NAME: &str = "geometry_closure";
    let lengths = match d.lengths() {
        Ok(l) => l,
        Err(e) => return error(NAME, e),
    };
    if let Some(angles) = &d.angles {
        let defect = closure_defect(angles);
        if angles.len() != lengths.len() {
            return check(NAME, false, format!("{} angles for {} edges", angles.len(), lengths.len()));
        }
        return check(
            NAME,
            defect <= GRAPH_CLOSURE_TOLERANCE && d.build().is_ok(),
            format!("|sum(theta) - 2pi| = {defect:.3e}"),
        );
    }
    match &d.chords {
        Some(c) if lengths.len() >= 3 => {
            let ext = match ExtendedGraphSpec::new(c.clone()) {
                Ok(e) => e,
                Err(e) => return error(NAME, e),
            };
            match principal_angles(&lengths, &ext) {
                Ok(a) => {
                    let defect = closure_defect(&a);
                    check(NAME, defect <= 1e-6, format!("chords close the fan to {defect:.3e}"))
                }
                Err(e) => error(NAME, e),
            }
        }
        Some(_) => result(NAME, PropertyStatus::Skip, "two edges: chords do not fix an angle"),
        None => check(NAME, false, "neither angles nor chords given".into()),
    }
}

fn max_over<F: Fn(usize, Complex64) -> crate::Result<f64>>(star: &StarModel, f: F) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..star.edge_count() {
        for z in probes() {
            worst = worst.max(f(j, z)?);
        }
    }
    Ok(worst)
}

fn boundary_values(star: &StarModel) -> PropertyResult {
    const NAME: &str = "boundary_values";
    let tips = max_over(star, |j, z| Ok(phi_edge(star, j, star.length(j), z)?.norm()));
    let vertex = (0..star.edge_count())
        .flat_map(|j| (1..=20).map(move |k| (j, k)))
        .map(|(j, k)| phi_edge(star, j, 0.0, Complex64::new(k as f64, 0.0)).map(|v| v.norm()))
        .try_fold(0.0_f64, |a, v| v.map(|v| a.max(v)));
    match (tips, vertex) {
        (Ok(t), Ok(v)) => check(
            NAME,
            t == 0.0 && v < 1e-12,
            format!("max |phi(l)| = {t:.1e}, max |phi(0; k)| = {v:.1e}"),
        ),
        (Err(e), _) | (_, Err(e)) => error(NAME, e),
    }
}

fn derivative(star: &StarModel) -> PropertyResult {
    const NAME: &str = "derivative_matches_differences";
    let worst = max_over(star, |j, z| {
        let l = star.length(j);
        let h = 1e-5 * l;
        let mut w: f64 = 0.0;
        for x in [0.21 * l, 0.5 * l, 0.77 * l] {
            let fd = (phi_edge(star, j, x + h, z)? - phi_edge(star, j, x - h, z)?) / (2.0 * h);
            let exact = phi_edge_derivative(star, j, x, z)?;
            w = w.max((fd - exact).norm() / exact.norm().max(1e-3));
        }
        Ok(w)
    });
    match worst {
        Ok(w) => check(NAME, w < 1e-6, format!("max relative error {w:.2e}")),
        Err(e) => error(NAME, e),
    }
}

fn pole_continuity(star: &StarModel) -> PropertyResult {
    const NAME: &str = "pole_continuity";
    let eps = star.pole_window();
    let mut worst: f64 = 0.0;
    for j in 0..star.edge_count() {
        let l = star.length(j);
        for n in 1..=star.order().min(4) {
            let pole = n as f64 * PI / l;
            let at = |dz: f64| phi_edge(star, j, 0.4 * l, Complex64::new(pole + dz, 0.0));
            let vals = [at(-2.0 * eps), at(-0.5 * eps), at(0.5 * eps), at(2.0 * eps)];
            let v: Vec<Complex64> = match vals.into_iter().collect() {
                Ok(v) => v,
                Err(e) => return error(NAME, e),
            };
            // Inner probes against linear interpolation of the outer ones.
            let slope = (v[3] - v[0]) / (4.0 * eps);
            let mid = (v[3] + v[0]) * 0.5;
            for (k, dz) in [(1, -0.5 * eps), (2, 0.5 * eps)] {
                worst = worst.max((v[k] - (mid + slope * dz)).norm());
            }
        }
    }
    check(NAME, worst < 1e-6, format!("max jump {worst:.2e}"))
}

fn ll33(star: &StarModel) -> PropertyResult {
    const NAME: &str = "sine_transform_identity";
    let q = star.potentials();
    let worst = max_over(star, |j, z| {
        Ok((ll33_lhs(q, j, z, star.pole_window()) - ll33_rhs(q, j, z)).norm())
    });
    match worst {
        Ok(w) => check(NAME, w < 1e-8, format!("max difference {w:.2e}")),
        Err(e) => error(NAME, e),
    }
}

fn normalized_residual(star: &StarModel) -> PropertyResult {
    const NAME: &str = "ode_residual";
    if star.mode() != Mode::Normalized {
        return result(NAME, PropertyStatus::Skip, "normalized mode only");
    }
    let mut worst: f64 = 0.0;
    for j in 0..star.edge_count() {
        for k in 1..=10 {
            for i in 0..=100 {
                let x = PI * i as f64 / 100.0;
                match ode_residual(star, j, x, Complex64::new(k as f64, 0.0)) {
                    Ok(r) => worst = worst.max(r.norm()),
                    Err(e) => return error(NAME, e),
                }
            }
        }
    }
    check(NAME, worst < 1e-8, format!("sup residual {worst:.2e}"))
}

fn normalized_integers(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "phi_vanishes_on_integers";
    if cfg.star().mode() != Mode::Normalized {
        return result(NAME, PropertyStatus::Skip, "normalized mode only");
    }
    let worst = (1..=20)
        .map(|k| phi(cfg, Complex64::new(k as f64, 0.0)).norm())
        .fold(0.0, f64::max);
    check(NAME, worst < 1e-10, format!("max |Phi(k)| = {worst:.2e}"))
}

fn block_consistency(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "nonlocal_block_consistency";
    let star = cfg.star();
    let mut worst: f64 = 0.0;
    for z in probes() {
        // The block keeps |q|^2 without the l/2 produced by orthogonality.
        let expected: Complex64 = (0..star.edge_count())
            .map(|j| {
                let l = star.length(j);
                let q2: Complex64 = star
                    .potentials()
                    .edge(j)
                    .iter()
                    .zip(star.resonances(j, z))
                    .map(|(q, g)| q.norm_sqr() * g)
                    .sum();
                nonlocal_integral(star, j, z) + q2 * (1.0 - 0.5 * l) * star.side_product(j, z)
            })
            .sum();
        let block = nonlocal_block(star, z);
        let blocks = phi_blocks(cfg, z);
        worst = worst
            .max((block - expected).norm() / expected.norm().max(1.0))
            .max((blocks.total() - phi(cfg, z)).norm());
    }
    check(NAME, worst < 1e-10, format!("max relative difference {worst:.2e}"))
}

fn chord_affinity(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "chord_affinity";
    let mut worst: f64 = 0.0;
    for z in probes() {
        let row = chord_design_row(cfg.star(), z);
        let u: Vec<f64> = cfg.chords().iter().map(|c| 1.0 / c).collect();
        for i in 0..u.len() {
            let step = 0.05 * u[i];
            let mut shifted = u.clone();
            shifted[i] += step;
            let moved = match cfg.with_chords(shifted.iter().map(|v| 1.0 / v).collect()) {
                Ok(m) => m,
                Err(e) => return error(NAME, e),
            };
            let diff = (phi(&moved, z) - phi(cfg, z)) / step;
            worst = worst.max((diff - row[i]).norm() / row[i].norm().max(1.0));
        }
    }
    check(NAME, worst < 1e-8, format!("max deviation from linearity {worst:.2e}"))
}

fn conjugate_symmetry(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "conjugate_symmetry";
    let real = cfg.star().potentials().rows().iter().flatten().all(|q| q.im == 0.0);
    if !real {
        return result(NAME, PropertyStatus::Skip, "complex potentials");
    }
    let worst = probes()
        .into_iter()
        .map(|z| {
            let v = phi(cfg, z);
            (phi(cfg, z.conj()) - v.conj()).norm() / v.norm().max(1.0)
        })
        .fold(0.0, f64::max);
    check(NAME, worst < 1e-12, format!("max asymmetry {worst:.2e}"))
}

fn distinct_lengths(star: &StarModel) -> bool {
    let l = star.lengths();
    l.iter()
        .enumerate()
        .all(|(i, a)| l[..i].iter().all(|b| (a - b).abs() > 1e-9 * a.max(*b)))
}

fn topology_round_trip(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "topology_round_trip";
    if !distinct_lengths(cfg.star()) {
        return result(NAME, PropertyStatus::Skip, "equal lengths: only combinations of chords are identifiable");
    }
    let run = || -> crate::Result<f64> {
        let observed = sample_phi(cfg, &generic_grid(40))?;
        let report = recover_chords(&TopologyRecoveryProblem::new(cfg.star().clone(), observed)?)?;
        Ok(report
            .chords
            .unwrap_or_default()
            .iter()
            .zip(cfg.chords())
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(e) => check(NAME, e < 1e-6, format!("max relative chord error {e:.2e}")),
        Err(e) => error(NAME, e),
    }
}

fn potential_round_trip(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "potential_round_trip";
    if !distinct_lengths(cfg.star()) {
        return result(NAME, PropertyStatus::Skip, "equal lengths: coefficients can be exchanged between edges");
    }
    let order = cfg.star().order();
    if order > 8 {
        return result(NAME, PropertyStatus::Skip, "truncation above 8");
    }
    let run = || -> crate::Result<(f64, usize)> {
        let count = (cfg.star().edge_count() * (2 * order + 1) + 10).max(40);
        let observed = sample_phi(cfg, &generic_grid(count))?;
        let report = recover_potentials(&PotentialRecoveryProblem::new(cfg, order, observed)?)?;
        let err = report
            .coefficients
            .unwrap_or_default()
            .iter()
            .flatten()
            .zip(cfg.star().potentials().rows().iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok((err, report.iterations.unwrap_or(0)))
    };
    match run() {
        Ok((e, it)) => check(NAME, e < 1e-6, format!("max coefficient error {e:.2e} after {it} iterations")),
        Err(e) => error(NAME, e),
    }
}

fn uniqueness(cfg: &ModelConfig) -> PropertyResult {
    const NAME: &str = "uniqueness_witnesses";
    let run = || -> crate::Result<(f64, f64)> {
        let grid = generic_grid(40).points(cfg.star())?;
        let mut chords = cfg.chords().to_vec();
        chords[0] *= 1.001;
        let topo = uniqueness_gap_topology(cfg, &cfg.with_chords(chords)?, &grid)?;
        let mut q = cfg.star().potentials().clone();
        let current = q.edge(0)[0];
        q.set(0, 1, current + Complex64::new(1e-3, 1e-3));
        let pot = uniqueness_gap_potential(cfg, &cfg.with_potentials(q)?, &grid)?;
        Ok((topo, pot))
    };
    match run() {
        Ok((t, p)) => check(NAME, t > 1e-8 && p > 1e-8, format!("chord gap {t:.2e}, potential gap {p:.2e}")),
        Err(e) => error(NAME, e),
    }
}

fn oracle_pencils(star: &StarModel) -> PropertyResult {
    const NAME: &str = "oracle_elimination";
    let h = star.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 24.0;
    let run = || -> crate::Result<f64> {
        let d = assemble(star, h)?;
        let a = spectrum(&d, 5)?;
        let b = spectrum_uneliminated(&d, 5, -0.731)?;
        Ok(a.eigenvalues
            .iter()
            .zip(&b.eigenvalues)
            .map(|(x, y)| (x - y).norm() / x.norm().max(1.0))
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(w) => check(NAME, w < 1e-10, format!("max relative difference {w:.2e}")),
        Err(e) => error(NAME, e),
    }
}

pub fn verify(descriptor: &ConfigDescriptor) -> VerifyReport {
    let mut properties = vec![geometry(descriptor)];
    match descriptor.star() {
        Ok((star, _)) => {
            properties.extend([
                boundary_values(&star),
                derivative(&star),
                pole_continuity(&star),
                ll33(&star),
                normalized_residual(&star),
                oracle_pencils(&star),
            ]);
            let chord_names = [
                "phi_vanishes_on_integers",
                "nonlocal_block_consistency",
                "chord_affinity",
                "conjugate_symmetry",
                "topology_round_trip",
                "potential_round_trip",
                "uniqueness_witnesses",
            ];
            match descriptor.build() {
                Ok(loaded) => {
                    let cfg = &loaded.config;
                    properties.extend([
                        normalized_integers(cfg),
                        block_consistency(cfg),
                        chord_affinity(cfg),
                        conjugate_symmetry(cfg),
                        topology_round_trip(cfg),
                        potential_round_trip(cfg),
                        uniqueness(cfg),
                    ]);
                }
                Err(e) => properties.extend(
                    chord_names
                        .iter()
                        .map(|n| result(n, PropertyStatus::Skip, format!("no extension: {e}"))),
                ),
            }
        }
        Err(e) => properties.push(error("configuration", e)),
    }
    let count = |s| properties.iter().filter(|p| p.status == s).count();
    VerifyReport {
        passed: count(PropertyStatus::Pass),
        failed: count(PropertyStatus::Fail),
        skipped: count(PropertyStatus::Skip),
        properties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(r: &VerifyReport, name: &str) -> PropertyStatus {
        r.properties.iter().find(|p| p.name == name).unwrap().status
    }

    #[test]
    fn example_passes() {
        let r = verify(&ConfigDescriptor::example());
        assert!(r.all_passed(), "{}", r.to_json());
        assert_eq!(status(&r, "ode_residual"), PropertyStatus::Skip);
        assert_eq!(status(&r, "topology_round_trip"), PropertyStatus::Pass);
    }

    #[test]
    fn open_fan_fails_geometry() {
        let mut d = ConfigDescriptor::example();
        d.angles = Some(vec![2.0, 2.0, 2.0]);
        let r = verify(&d);
        assert!(!r.all_passed());
        assert_eq!(status(&r, "geometry_closure"), PropertyStatus::Fail);
        assert_eq!(status(&r, "boundary_values"), PropertyStatus::Pass);
    }

    #[test]
    fn normalized_properties_run_in_normalized_mode() {
        let mut d = ConfigDescriptor::example();
        d.mode = Mode::Normalized;
        for e in d.edges.iter_mut() {
            e.length = PI;
        }
        d.angles = Some(vec![2.0 * PI / 3.0; 3]);
        let r = verify(&d);
        assert_eq!(status(&r, "ode_residual"), PropertyStatus::Pass);
        assert_eq!(status(&r, "phi_vanishes_on_integers"), PropertyStatus::Pass);
        assert_eq!(status(&r, "topology_round_trip"), PropertyStatus::Skip);
        assert!(r.all_passed(), "{}", r.to_json());
    }
}

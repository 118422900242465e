mod common;

use common::*;
use num_complex::Complex64;
use starsl_core::characteristic::phi;
use starsl_core::oracle::*;
use starsl_core::solution::DEFAULT_POLE_WINDOW;
use starsl_core::{Mode, ModelConfig, PotentialCoeffs, StarModel};
use std::f64::consts::PI;

fn free(lengths: Vec<f64>) -> StarModel {
    StarModel::verbatim(PotentialCoeffs::zeros(lengths, 1)).unwrap()
}

fn max_rel_err(s: &OracleSpectrum, exact: &[f64]) -> f64 {
    s.eigenvalues
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).norm() / b)
        .fold(0.0, f64::max)
}

#[test]
fn two_edges_reproduce_the_doubled_interval() {
    let star = free(vec![PI, PI]);
    let exact = [0.25, 1.0, 2.25];
    let coarse = spectrum(&assemble(&star, PI / 200.0).unwrap(), 3).unwrap();
    let fine = spectrum(&assemble(&star, PI / 400.0).unwrap(), 3).unwrap();
    assert!(max_rel_err(&fine, &exact) < 1e-3);
    for k in 0..3 {
        let ratio = (coarse.eigenvalues[k].re - exact[k]).abs() / (fine.eigenvalues[k].re - exact[k]).abs();
        assert!((3.6..=4.4).contains(&ratio), "k={k} ratio {ratio}");
        assert!(fine.eigenvalues[k].im.abs() < 1e-9);
    }
}

#[test]
fn antisymmetric_modes_match_the_discrete_dirichlet_laplacian() {
    // Modes odd about the vertex have psi(0) = 0, where the one-sided vertex
    // row and the centred interval stencil agree exactly.
    let intervals = 40;
    let l = 1.3;
    let h = l / intervals as f64;
    let d = assemble(&free(vec![l, l]), h).unwrap();
    let all = eigenvalues(d.operator()).unwrap();
    let total = 2 * intervals;
    for k in (2..=10).step_by(2) {
        let exact = 4.0 / (h * h) * (k as f64 * PI / (2.0 * total as f64)).sin().powi(2);
        let best = all.iter().map(|v| (v - exact).norm()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-9 * exact, "k={k}");
    }
}

#[test]
fn three_equal_edges_split_into_sine_and_cosine_branches() {
    let d = assemble(&free(vec![PI; 3]), PI / 100.0).unwrap();
    let s = spectrum(&d, 6).unwrap();
    let lam: Vec<f64> = s.eigenvalues.iter().map(|v| v.re).collect();
    // cos(sqrt(l) pi) = 0 gives 1/4, 9/4; sin(sqrt(l) pi) = 0 gives 1, 4 twice each.
    let expected = [0.25, 1.0, 1.0, 2.25, 4.0, 4.0];
    for (a, b) in lam.iter().zip(expected) {
        assert!((a - b).abs() < 1e-3 * b, "{lam:?}");
    }
    assert!((lam[1] - lam[2]).abs() < 1e-10);
    assert!((lam[4] - lam[5]).abs() < 1e-10);
}

#[test]
fn eliminated_and_full_pencils_agree() {
    let mut r = rng(31);
    let rows = coefficients(&mut r, 3, 3, 0.5);
    let q = PotentialCoeffs::new(vec![1.0, 1.3, 0.9], rows, 3).unwrap();
    let star = StarModel::verbatim(q).unwrap();
    let d = assemble(&star, 0.05).unwrap();
    let a = spectrum(&d, 8).unwrap();
    let b = spectrum_uneliminated(&d, 8, -0.731).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).norm() < 1e-10 * x.norm().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn real_potentials_give_conjugate_pairs() {
    let mut r = rng(32);
    let rows: Vec<Vec<Complex64>> = coefficients(&mut r, 3, 4, 3.0)
        .into_iter()
        .map(|row| row.into_iter().map(|v| c(v.re)).collect())
        .collect();
    let q = PotentialCoeffs::new(vec![1.0, 1.2, 0.8], rows, 4).unwrap();
    let d = assemble(&StarModel::verbatim(q).unwrap(), 0.04).unwrap();
    let all = eigenvalues(d.operator()).unwrap();
    for v in &all {
        let partner = all.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min);
        assert!(partner < 1e-8 * v.norm().max(1.0));
    }
}

#[test]
fn spectrum_serializes() {
    let d = assemble(&free(vec![1.0, 1.1]), 0.05).unwrap();
    let s = spectrum(&d, 4).unwrap();
    assert_eq!(s.eigenvalues.len(), 4);
    assert!(s.eigenvalues.windows(2).all(|w| w[0].re <= w[1].re));
    let back: OracleSpectrum = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert_eq!(s.to_csv().lines().count(), 5);
    assert!(spectrum(&d, 10_000).is_err());
}

fn normalized_free(m: usize) -> ModelConfig {
    let q = PotentialCoeffs::zeros(vec![PI; m], 2);
    let star = StarModel::new(q, Mode::Normalized, DEFAULT_POLE_WINDOW).unwrap();
    ModelConfig::new(star, starsl_core::ExtendedGraphSpec::new(vec![2.0 * PI * (PI / m as f64).sin(); m]).unwrap())
        .unwrap()
}

#[test]
fn integers_appear_among_phi_zeros() {
    for m in [2, 3] {
        let cfg = normalized_free(m);
        let s = spectrum(&assemble(cfg.star(), PI / 60.0).unwrap(), 5).unwrap();
        let table = compare_phi_zeros(&cfg, &s, 0.5, 4.5);
        for k in 1..=4 {
            assert!(
                table.iter().any(|row| (row.z - k as f64).abs() < 1e-6),
                "m={m} missing {k}: {table:?}"
            );
        }
        assert!(table.iter().all(|row| row.lambda.is_some() && row.distance.is_some()));
        assert!(table.iter().all(|row| phi(&cfg, c(row.z)).norm() < 1e-6));
    }
}

#[test]
fn comparison_table_with_small_potential() {
    let mut r = rng(33);
    let cfg = normalized_config(&mut r, 3, 3, 0.2);
    let s = spectrum(&assemble(cfg.star(), PI / 60.0).unwrap(), 6).unwrap();
    let table = compare_phi_zeros(&cfg, &s, 0.2, 3.3);
    assert!(!table.is_empty());
    assert!(table.iter().all(|row| row.distance.unwrap().is_finite()));
    assert_eq!(comparison_csv(&table).lines().count(), table.len() + 1);
}

#[test]
fn empty_range_gives_empty_table() {
    let cfg = normalized_free(2);
    let s = spectrum(&assemble(cfg.star(), PI / 40.0).unwrap(), 2).unwrap();
    assert!(compare_phi_zeros(&cfg, &s, 2.0, 2.0).is_empty());
    assert!(compare_phi_zeros(&cfg, &s, 3.0, 1.0).is_empty());
}

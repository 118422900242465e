#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starsl_core::geometry::{chords_from_angles, StarGraphSpec};
use starsl_core::solution::DEFAULT_POLE_WINDOW;
use starsl_core::{ExtendedGraphSpec, Mode, ModelConfig, PotentialCoeffs, StarModel};
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Distinct lengths in `[0.7, 1.8)`.
pub fn lengths(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let l: Vec<f64> = (0..m).map(|_| rng.gen_range(0.7..1.8)).collect();
        let distinct = l
            .iter()
            .enumerate()
            .all(|(i, a)| l[..i].iter().all(|b| (a - b).abs() > 0.05));
        if distinct {
            return l;
        }
    }
}

/// Angles summing to `2 pi`, each strictly below `pi`.
pub fn angles(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..1.8)).collect();
    let total: f64 = w.iter().sum();
    let mut a: Vec<f64> = w.iter().map(|v| 2.0 * PI * v / total).collect();
    let head: f64 = a[..m - 1].iter().sum();
    a[m - 1] = 2.0 * PI - head;
    a
}

pub fn coefficients(rng: &mut ChaCha8Rng, m: usize, order: usize, magnitude: f64) -> Vec<Vec<Complex64>> {
    (0..m)
        .map(|_| {
            (0..order)
                .map(|_| {
                    let r = if magnitude > 0.0 { rng.gen_range(0.0..magnitude) } else { 0.0 };
                    Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
                })
                .collect()
        })
        .collect()
}

pub fn random_graph(rng: &mut ChaCha8Rng, m: usize) -> StarGraphSpec {
    let l = lengths(rng, m);
    let a = angles(rng, m);
    StarGraphSpec::new(l, a).unwrap()
}

/// Verbatim-mode configuration realised from a random planar star.
pub fn random_config(rng: &mut ChaCha8Rng, m: usize, order: usize, magnitude: f64) -> (StarGraphSpec, ModelConfig) {
    let graph = random_graph(rng, m);
    let rows = coefficients(rng, m, order, magnitude);
    let q = PotentialCoeffs::new(graph.lengths().to_vec(), rows, order).unwrap();
    let cfg = ModelConfig::from_graph(&graph, q, Mode::Verbatim, DEFAULT_POLE_WINDOW).unwrap();
    (graph, cfg)
}

/// Random lengths, potentials and chords without a planar realisation.
pub fn loose_config(rng: &mut ChaCha8Rng, m: usize, order: usize, magnitude: f64) -> ModelConfig {
    let l = lengths(rng, m);
    let rows = coefficients(rng, m, order, magnitude);
    let chords: Vec<f64> = (0..m).map(|_| rng.gen_range(0.8..2.0)).collect();
    let q = PotentialCoeffs::new(l, rows, order).unwrap();
    ModelConfig::new(StarModel::verbatim(q).unwrap(), ExtendedGraphSpec::new(chords).unwrap()).unwrap()
}

pub fn normalized_config(rng: &mut ChaCha8Rng, m: usize, order: usize, magnitude: f64) -> ModelConfig {
    let rows = coefficients(rng, m, order, magnitude);
    let q = PotentialCoeffs::new(vec![PI; m], rows, order).unwrap();
    let graph = StarGraphSpec::new(vec![PI; m], angles(rng, m)).unwrap();
    ModelConfig::new(
        StarModel::new(q, Mode::Normalized, DEFAULT_POLE_WINDOW).unwrap(),
        chords_from_angles(&graph).unwrap(),
    )
    .unwrap()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// From-scratch evaluation: Simpson quadrature for the overlap integral,
/// plain summation everywhere else, no shared helpers.
pub fn phi_reference(cfg: &ModelConfig, z: Complex64) -> Complex64 {
    let star = cfg.star();
    let m = star.edge_count();
    let ls = star.lengths();
    let chords = cfg.chords();
    let zpi = z * PI;
    let product = |j: usize| -> Complex64 {
        (0..m).filter(|k| *k != j).map(|k| (z * ls[k]).sin()).product()
    };
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let l = ls[j];
        let q = star.potentials().edge(j);
        let s = (z * l).sin();
        let denom = |n: usize| z * z - (n as f64 * PI / l).powi(2);
        let potential = |x: f64| -> Complex64 {
            q.iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * PI / l * (l - x)).sin())
                .sum()
        };
        let intervals = 20_000;
        let h = l / intervals as f64;
        let mut integral = Complex64::new(0.0, 0.0);
        for i in 0..=intervals {
            let x = i as f64 * h;
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            integral += (zpi * (1.0 - x / l)).sin() * potential(x).conj() * w;
        }
        integral *= h / 3.0;
        let mut quad = Complex64::new(0.0, 0.0);
        let mut alt = Complex64::new(0.0, 0.0);
        let mut plain = Complex64::new(0.0, 0.0);
        for (i, c) in q.iter().enumerate() {
            let n = i + 1;
            let k = n as f64 * PI / l;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            quad += c.norm_sqr() / denom(n);
            alt += c * sign * k / denom(n);
            plain += c * k / denom(n);
        }
        let p = product(j);
        let prev = (j + m - 1) % m;
        total += (integral + s * quad) * p;
        total += (zpi / l * zpi.cos() + s * alt) * p;
        total += (zpi / l + zpi / chords[prev] + zpi / chords[j] * zpi.cos() + s * plain) * p;
    }
    total
}

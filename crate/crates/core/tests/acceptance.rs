//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use starsl_core::characteristic::{phi, sample_phi, SampleGridSpec};
use starsl_core::fourier::{ll33_lhs, ll33_rhs};
use starsl_core::inverse::*;
use starsl_core::oracle::{assemble, spectrum};
use starsl_core::solution::{ode_residual, phi_edge, phi_edge_derivative};
use starsl_core::{PotentialCoeffs, StarModel};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn generic(count: usize) -> SampleGridSpec {
    SampleGridSpec::Generic {
        lo: 0.3,
        hi: 12.3,
        count,
    }
}

fn boundary_structure() -> Outcome {
    let mut r = rng(101);
    let (mut tip, mut vertex): (f64, f64) = (0.0, 0.0);
    for m in [2, 3, 4, 5] {
        for _ in 0..3 {
            let cfg = loose_config(&mut r, m, 8, 0.5);
            for j in 0..m {
                let l = cfg.star().length(j);
                for k in 1..=20 {
                    let z = c(k as f64);
                    tip = tip.max(phi_edge(&cfg, j, l, z).unwrap().norm());
                    vertex = vertex.max(phi_edge(&cfg, j, 0.0, z).unwrap().norm());
                }
            }
        }
    }
    outcome(
        tip == 0.0 && vertex < 1e-12,
        format!("max |phi(l)| = {tip:.1e}, max |phi(0)| = {vertex:.1e}"),
    )
}

fn ode_residual_normalized() -> Outcome {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for m in [2, 3, 4] {
        let cfg = normalized_config(&mut r, m, 8, 0.5);
        for j in 0..m {
            for k in 1..=10 {
                for i in 0..=100 {
                    let x = PI * i as f64 / 100.0;
                    worst = worst.max(ode_residual(cfg.star(), j, x, c(k as f64)).unwrap().norm());
                }
            }
        }
    }
    outcome(worst < 1e-8, format!("sup residual {worst:.2e}"))
}

fn away_from_poles(r: &mut impl Rng, star: &StarModel) -> Complex64 {
    loop {
        let z = Complex64::new(r.gen_range(0.1..10.0), r.gen_range(-0.5..0.5));
        let clear = (0..star.edge_count()).all(|j| {
            (1..=star.order()).all(|n| (z - n as f64 * PI / star.length(j)).norm() > 1e-3)
        });
        if clear {
            return z;
        }
    }
}

fn sine_transform_identity() -> Outcome {
    let mut r = rng(103);
    let cfg = loose_config(&mut r, 3, 6, 0.5);
    let star = cfg.star();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let z = away_from_poles(&mut r, star);
        let j = i % 3;
        let diff = ll33_lhs(star.potentials(), j, z, star.pole_window()) - ll33_rhs(star.potentials(), j, z);
        worst = worst.max(diff.norm());
    }
    outcome(worst < 1e-8, format!("max difference {worst:.2e} over 100 points"))
}

fn derivative() -> Outcome {
    let mut r = rng(104);
    let mut worst: f64 = 0.0;
    let configs: Vec<_> = (0..4).map(|i| loose_config(&mut r, 2 + i, 8, 0.5)).collect();
    for i in 0..200 {
        let cfg = &configs[i % 4];
        let j = r.gen_range(0..cfg.star().edge_count());
        let l = cfg.star().length(j);
        let x = r.gen_range(0.05..0.95) * l;
        let z = away_from_poles(&mut r, cfg.star());
        let h = 1e-5 * l;
        let fd = (phi_edge(cfg, j, x + h, z).unwrap() - phi_edge(cfg, j, x - h, z).unwrap()) / (2.0 * h);
        let exact = phi_edge_derivative(cfg, j, x, z).unwrap();
        worst = worst.max((fd - exact).norm() / exact.norm());
    }
    outcome(worst < 1e-6, format!("max relative error {worst:.2e} at 200 points"))
}

fn pole_policy() -> Outcome {
    let mut r = rng(105);
    let mut worst: f64 = 0.0;
    for m in [2, 3] {
        let cfg = loose_config(&mut r, m, 8, 0.5);
        let star = cfg.star();
        let eps = star.pole_window();
        for j in 0..m {
            let l = star.length(j);
            for n in 1..=8 {
                let pole = n as f64 * PI / l;
                for x in [0.0, 0.3 * l, 0.8 * l] {
                    let at = |dz: f64| phi_edge(&cfg, j, x, c(pole + dz)).unwrap();
                    let (a, b) = (at(-2.0 * eps), at(2.0 * eps));
                    for dz in [-0.5 * eps, 0.5 * eps] {
                        let interp = a + (b - a) * ((dz + 2.0 * eps) / (4.0 * eps));
                        worst = worst.max((at(dz) - interp).norm());
                    }
                }
            }
        }
    }
    outcome(worst < 1e-6, format!("max jump {worst:.2e}"))
}

fn phi_cross_check() -> Outcome {
    let mut r = rng(106);
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let cfg = loose_config(&mut r, 2 + i % 3, 6, 0.5);
        for _ in 0..50 {
            let z = away_from_poles(&mut r, cfg.star());
            worst = worst.max(rel_err(phi(&cfg, z), phi_reference(&cfg, z)));
        }
    }
    outcome(worst < 1e-8, format!("max relative error {worst:.2e} over 250 points"))
}

fn topology_round_trip() -> Outcome {
    let mut r = rng(107);
    let (mut chord, mut angle, mut closure): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut failures = 0;
    for i in 0..20 {
        let (graph, cfg) = random_config(&mut r, 3 + i % 3, 4, 0.5);
        let observed = sample_phi(&cfg, &generic(40)).unwrap();
        let problem = TopologyRecoveryProblem::new(cfg.star().clone(), observed).unwrap();
        match recover_angles(&problem) {
            Ok(report) => {
                for (a, b) in report.chords.unwrap().iter().zip(cfg.chords()) {
                    chord = chord.max((a - b).abs() / b);
                }
                for (a, b) in report.angles.unwrap().iter().zip(graph.angles()) {
                    angle = angle.max((a - b).abs());
                }
                closure = closure.max(report.closure_defect.unwrap());
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && chord < 1e-6 && angle < 1e-6 && closure < 1e-6,
        format!("chord {chord:.1e}, angle {angle:.1e}, closure {closure:.1e}, solver failures {failures}"),
    )
}

fn potential_round_trip() -> Outcome {
    let mut r = rng(108);
    let (mut err, mut iters): (f64, usize) = (0.0, 0);
    let mut failures = 0;
    for i in 0..20 {
        let cfg = loose_config(&mut r, 2 + i % 3, 4, 0.5);
        let observed = sample_phi(&cfg, &generic(60)).unwrap();
        let problem = PotentialRecoveryProblem::new(&cfg, 4, observed).unwrap();
        match recover_potentials(&problem) {
            Ok(report) => {
                iters = iters.max(report.iterations.unwrap());
                let truth = cfg.star().potentials().rows().iter().flatten();
                for (a, b) in report.coefficients.unwrap().iter().flatten().zip(truth) {
                    err = err.max((a - b).norm());
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && err < 1e-6 && iters <= 20,
        format!("max coefficient error {err:.1e}, max iterations {iters}, solver failures {failures}"),
    )
}

fn uniqueness_witnesses() -> Outcome {
    let mut r = rng(109);
    let (mut topo, mut pot) = (f64::INFINITY, f64::INFINITY);
    for i in 0..20 {
        let cfg = loose_config(&mut r, 2 + i % 4, 4, 0.5);
        let grid = generic(40).points(cfg.star()).unwrap();
        let mut chords = cfg.chords().to_vec();
        let k = r.gen_range(0..chords.len());
        chords[k] *= 1.0 + r.gen_range(1e-4..1e-2);
        topo = topo.min(uniqueness_gap_topology(&cfg, &cfg.with_chords(chords).unwrap(), &grid).unwrap());
        let mut q = cfg.star().potentials().clone();
        let (j, n) = (r.gen_range(0..q.edge_count()), r.gen_range(1..=4));
        let current = q.edge(j)[n - 1];
        q.set(j, n, current + Complex64::from_polar(1e-3, r.gen_range(0.0..2.0 * PI)));
        pot = pot.min(uniqueness_gap_potential(&cfg, &cfg.with_potentials(q).unwrap(), &grid).unwrap());
    }
    outcome(
        topo > 1e-8 && pot > 1e-8,
        format!("smallest gaps: chords {topo:.2e}, potentials {pot:.2e}"),
    )
}

fn oracle_validity() -> Outcome {
    let star = StarModel::verbatim(PotentialCoeffs::zeros(vec![PI, PI], 1)).unwrap();
    let exact = [0.25, 1.0, 2.25];
    let fine = spectrum(&assemble(&star, PI / 400.0).unwrap(), 3).unwrap();
    let coarse = spectrum(&assemble(&star, PI / 200.0).unwrap(), 3).unwrap();
    let mut rel: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for k in 0..3 {
        let ef = (fine.eigenvalues[k] - exact[k]).norm();
        let ec = (coarse.eigenvalues[k] - exact[k]).norm();
        rel = rel.max(ef / exact[k]);
        lo = lo.min(ec / ef);
        hi = hi.max(ec / ef);
    }
    outcome(
        rel < 1e-3 && lo >= 3.6 && hi <= 4.4,
        format!("max relative error {rel:.2e} at h = pi/400, halving ratios in [{lo:.3}, {hi:.3}]"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("boundary structure", boundary_structure, Duration::from_secs(1)),
        ("ode residual", ode_residual_normalized, Duration::from_secs(5)),
        ("sine transform identity", sine_transform_identity, Duration::from_secs(5)),
        ("derivative", derivative, Duration::from_secs(1)),
        ("pole policy", pole_policy, Duration::from_secs(1)),
        ("phi cross-check", phi_cross_check, Duration::from_secs(10)),
        ("topology round trip", topology_round_trip, Duration::from_secs(30)),
        ("potential round trip", potential_round_trip, Duration::from_secs(60)),
        ("uniqueness witnesses", uniqueness_witnesses, Duration::from_secs(10)),
        ("oracle validity", oracle_validity, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let ok = o.ok && elapsed < *limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  {} ({:.2} s, limit {} s)",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

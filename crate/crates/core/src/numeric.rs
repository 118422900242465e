//! Small numerical kernels shared by the analytic evaluators.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `sin(pi * t)` with exact zeros at integer `t` when `t` is real.
pub fn sin_pi(t: Complex64) -> Complex64 {
    if t.im == 0.0 {
        Complex64::new(sin_pi_real(t.re), 0.0)
    } else {
        (t * PI).sin()
    }
}

/// `cos(pi * t)` with exact values at integers and half-integers for real `t`.
pub fn cos_pi(t: Complex64) -> Complex64 {
    if t.im == 0.0 {
        Complex64::new(cos_pi_real(t.re), 0.0)
    } else {
        (t * PI).cos()
    }
}

pub fn sin_pi_real(t: f64) -> f64 {
    if t.fract() == 0.0 {
        return 0.0;
    }
    // Reduce to [-1, 1] so that the argument passed to sin is small.
    let r = t - 2.0 * (t / 2.0).round();
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

pub fn cos_pi_real(t: f64) -> f64 {
    if t.fract() == 0.0 {
        return if (t / 2.0).fract() == 0.0 { 1.0 } else { -1.0 };
    }
    let r = t - 2.0 * (t / 2.0).round();
    if r.abs() == 0.5 {
        return 0.0;
    }
    (PI * r).cos()
}

/// `sin(w) / w`, continued analytically to 1 at the origin.
pub fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        // Taylor series; the next term is w^6 / 5040 < 1e-27.
        Complex64::new(1.0, 0.0) - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// `(1/2) [sinc((z - n) pi) - sinc((z + n) pi)]`, the integral of
/// `sin(z pi t) sin(n pi t)` over `t in [0, 1]`.
pub fn sine_overlap(z: Complex64, n: usize) -> Complex64 {
    let n = n as f64;
    0.5 * (sinc((z - n) * PI) - sinc((z + n) * PI))
}

/// `sin(z l) / (z^2 - (n pi / l)^2)` with the removable singularities at
/// `z = +-n pi / l` evaluated through the limit form inside a window of radius
/// `window`.
///
/// Near `z = k = n pi / l`, `sin(z l) = (-1)^n sin(l (z - k))`, so the ratio is
/// `(-1)^n l sinc(l (z - k)) / (z + k)`, which is exact and free of cancellation.
pub fn resonance(length: f64, n: usize, z: Complex64, window: f64) -> Complex64 {
    let k = n as f64 * PI / length;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let above = z - k;
    let below = z + k;
    if above.norm() < window {
        sign * length * sinc(above * length) / below
    } else if below.norm() < window {
        sign * length * sinc(below * length) / above
    } else {
        (z * length).sin() / (above * below)
    }
}

/// Composite Simpson weights for `intervals` equal sub-intervals of width `step`.
///
/// An odd interval count closes with Simpson's 3/8 rule on the last three
/// intervals. Requires `intervals >= 2`.
pub fn simpson_weights(intervals: usize, step: f64) -> Vec<f64> {
    assert!(intervals >= 2, "Simpson's rule needs at least two intervals");
    let mut w = vec![0.0; intervals + 1];
    let (even_part, tail) = if intervals % 2 == 0 {
        (intervals, 0)
    } else if intervals == 3 {
        (0, 3)
    } else {
        (intervals - 3, 3)
    };
    for k in (0..even_part).step_by(2) {
        w[k] += step / 3.0;
        w[k + 1] += 4.0 * step / 3.0;
        w[k + 2] += step / 3.0;
    }
    if tail == 3 {
        let s = even_part;
        let c = 3.0 * step / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

/// Integrates `f` over `[a, b]` with composite Simpson on `intervals` sub-intervals.
pub fn simpson<F>(f: F, a: f64, b: f64, intervals: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let step = (b - a) / intervals as f64;
    simpson_weights(intervals, step)
        .iter()
        .enumerate()
        .map(|(k, w)| f(a + k as f64 * step) * *w)
        .sum()
}

/// Ratio of largest to smallest singular value; infinite when singular.
pub fn condition_from_singular_values(sv: &[f64]) -> f64 {
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

//! The star graph, its chord extension and the angle/chord conversions.
//!
//! Tips `v_j` sit at distance `l_j` from the centre. The angle `theta_j` is
//! measured from edge `j` to edge `j + 1` (cyclically), and chord `j` joins
//! `v_j` to `v_{j+1}`, so its length follows from the planar law of cosines.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Default tolerance on `|sum(theta) - 2 pi|` for a star graph.
pub const GRAPH_CLOSURE_TOLERANCE: f64 = 1e-9;
/// Default tolerance on the closure defect of recovered angles.
pub const RECOVERY_CLOSURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarGraphSpec {
    lengths: Vec<f64>,
    angles: Vec<f64>,
}

impl StarGraphSpec {
    pub fn new(lengths: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(lengths, angles, GRAPH_CLOSURE_TOLERANCE)
    }

    pub fn with_tolerance(lengths: Vec<f64>, angles: Vec<f64>, tolerance: f64) -> Result<Self> {
        validate_lengths(&lengths)?;
        if angles.len() != lengths.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} angles for {} edges",
                angles.len(),
                lengths.len()
            )));
        }
        for (j, &t) in angles.iter().enumerate() {
            if !(t > 0.0 && t < TAU) {
                return Err(Error::InvalidGeometry(format!(
                    "angle {j} = {t} is outside (0, 2pi)"
                )));
            }
        }
        let defect = closure_defect(&angles);
        if defect > tolerance {
            return Err(Error::InvalidGeometry(format!(
                "angles sum to 2pi {:+e}",
                angles.iter().sum::<f64>() - TAU
            )));
        }
        Ok(Self { lengths, angles })
    }

    pub fn edge_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedGraphSpec {
    chords: Vec<f64>,
}

impl ExtendedGraphSpec {
    pub fn new(chords: Vec<f64>) -> Result<Self> {
        if chords.len() < 2 {
            return Err(Error::InvalidGeometry("need at least two chords".into()));
        }
        for (j, &c) in chords.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidGeometry(format!("chord {j} = {c} is not positive")));
            }
        }
        Ok(Self { chords })
    }

    pub fn chords(&self) -> &[f64] {
        &self.chords
    }

    /// Index of the chord ending at tip `j`, i.e. chord `j - 1` cyclically.
    pub fn previous(&self, j: usize) -> usize {
        (j + self.chords.len() - 1) % self.chords.len()
    }

    /// Checks `|l_j - l_{j+1}| <= chord_j <= l_j + l_{j+1}` against the given star.
    pub fn check_triangles(&self, lengths: &[f64]) -> Result<()> {
        if lengths.len() != self.chords.len() {
            return Err(Error::InvalidGeometry("chord and edge counts differ".into()));
        }
        for j in 0..lengths.len() {
            let cosine = law_of_cosines_argument(lengths, &self.chords, j);
            if !(-1.0..=1.0).contains(&cosine) {
                return Err(Error::TriangleViolation { index: j, cosine });
            }
        }
        Ok(())
    }
}

fn validate_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.len() < 2 {
        return Err(Error::InvalidGeometry(format!(
            "a star needs m >= 2 edges, got {}",
            lengths.len()
        )));
    }
    for (j, &l) in lengths.iter().enumerate() {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidGeometry(format!("edge {j} has length {l}")));
        }
    }
    Ok(())
}

pub fn closure_defect(angles: &[f64]) -> f64 {
    (angles.iter().sum::<f64>() - TAU).abs()
}

/// Law-of-cosines chord lengths without any closure check.
pub fn chords_from_parts(lengths: &[f64], angles: &[f64]) -> Vec<f64> {
    let m = lengths.len();
    (0..m)
        .map(|j| {
            let (a, b) = (lengths[j], lengths[(j + 1) % m]);
            (a * a + b * b - 2.0 * a * b * angles[j].cos()).max(0.0).sqrt()
        })
        .collect()
}

pub fn chords_from_angles(graph: &StarGraphSpec) -> Result<ExtendedGraphSpec> {
    ExtendedGraphSpec::new(chords_from_parts(&graph.lengths, &graph.angles))
}

fn law_of_cosines_argument(lengths: &[f64], chords: &[f64], j: usize) -> f64 {
    let m = lengths.len();
    let (a, b, c) = (lengths[j], lengths[(j + 1) % m], chords[j]);
    (a * a + b * b - c * c) / (2.0 * a * b)
}

/// Principal-branch angles in `[0, pi]`; only the triangle inequality is checked.
pub fn principal_angles(lengths: &[f64], chords: &ExtendedGraphSpec) -> Result<Vec<f64>> {
    validate_lengths(lengths)?;
    if lengths.len() < 3 {
        return Err(Error::InvalidGeometry(
            "angles are not determined by chords when m = 2".into(),
        ));
    }
    chords.check_triangles(lengths)?;
    Ok((0..lengths.len())
        .map(|j| law_of_cosines_argument(lengths, chords.chords(), j).acos())
        .collect())
}

/// Inverse law of cosines followed by the closure check.
///
/// Reflex angles cannot be represented on the principal branch; such inputs
/// surface as a [`Error::ClosureViolation`] carrying the principal angles.
pub fn angles_from_chords(
    lengths: &[f64],
    chords: &ExtendedGraphSpec,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let angles = principal_angles(lengths, chords)?;
    let defect = closure_defect(&angles);
    if defect > tolerance {
        return Err(Error::ClosureViolation {
            angles,
            defect,
            tolerance,
        });
    }
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn m4() -> StarGraphSpec {
        StarGraphSpec::new(vec![1.0, 1.3, 0.9, 1.1], vec![1.9, 1.4, 1.5, TAU - 4.8]).unwrap()
    }

    /// Tip positions in the plane, edge 0 along the x axis.
    fn tips(g: &StarGraphSpec) -> Vec<(f64, f64)> {
        let mut phase = 0.0_f64;
        g.lengths()
            .iter()
            .zip(g.angles())
            .map(|(&l, &t)| {
                let p = (l * phase.cos(), l * phase.sin());
                phase += t;
                p
            })
            .collect()
    }

    #[test]
    fn equilateral_chords() {
        let g = StarGraphSpec::new(vec![1.0; 3], vec![TAU / 3.0; 3]).unwrap();
        let c = chords_from_angles(&g).unwrap();
        for &v in c.chords() {
            assert!((v - 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn pythagorean_chord() {
        let g = StarGraphSpec::new(vec![3.0, 4.0, 2.0], vec![FRAC_PI_2, PI, FRAC_PI_2]).unwrap();
        let c = chords_from_angles(&g).unwrap();
        assert!((c.chords()[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn chords_match_planar_coordinates() {
        let g = m4();
        let p = tips(&g);
        let c = chords_from_angles(&g).unwrap();
        for j in 0..4 {
            let (a, b) = (p[j], p[(j + 1) % 4]);
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            assert!((d - c.chords()[j]).abs() < 1e-13, "chord {j}: {d} vs {}", c.chords()[j]);
        }
    }

    #[test]
    fn m4_round_trip() {
        let g = m4();
        let c = chords_from_angles(&g).unwrap();
        let back = angles_from_chords(g.lengths(), &c, RECOVERY_CLOSURE_TOLERANCE).unwrap();
        for (a, b) in back.iter().zip(g.angles()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_edge_inverse_of_equilateral_case() {
        // With m = 2 the angle is not chord-determined; the triangle formula
        // itself still inverts the equilateral chord.
        assert!(principal_angles(&[1.0, 1.0], &ExtendedGraphSpec::new(vec![3f64.sqrt(); 2]).unwrap()).is_err());
        let lengths = [1.0, 1.0, 1.0];
        let c = ExtendedGraphSpec::new(vec![3f64.sqrt(); 3]).unwrap();
        let a = principal_angles(&lengths, &c).unwrap();
        assert!((a[0] - TAU / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_chord_is_a_triangle_violation() {
        let c = ExtendedGraphSpec::new(vec![2.1, 1.5, 1.5]).unwrap();
        let err = angles_from_chords(&[1.0, 1.0, 1.0], &c, 1e-6).unwrap_err();
        assert!(matches!(err, Error::TriangleViolation { index: 0, .. }));
    }

    #[test]
    fn reflex_angle_reports_closure_violation() {
        let g = StarGraphSpec::new(vec![1.0, 1.2, 0.8], vec![4.0, 1.2, TAU - 5.2]).unwrap();
        let c = chords_from_angles(&g).unwrap();
        match angles_from_chords(g.lengths(), &c, 1e-6) {
            Err(Error::ClosureViolation { angles, defect, .. }) => {
                assert!((angles[0] - (TAU - 4.0)).abs() < 1e-12);
                assert!(defect > 1.0);
            }
            other => panic!("expected closure violation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_stars() {
        assert!(StarGraphSpec::new(vec![1.0], vec![TAU]).is_err());
        assert!(StarGraphSpec::new(vec![1.0, -1.0], vec![PI, PI]).is_err());
        assert!(StarGraphSpec::new(vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]).is_err());
        assert!(StarGraphSpec::new(vec![1.0, 1.0], vec![0.0, TAU]).is_err());
    }

    #[test]
    fn cyclic_relabelling_rotates_chords() {
        let g = m4();
        let c = chords_from_angles(&g).unwrap();
        let mut l = g.lengths().to_vec();
        let mut t = g.angles().to_vec();
        l.rotate_left(1);
        t.rotate_left(1);
        let c2 = chords_from_angles(&StarGraphSpec::new(l, t).unwrap()).unwrap();
        let mut expected = c.chords().to_vec();
        expected.rotate_left(1);
        assert_eq!(c2.chords(), &expected[..]);
    }
}

//! Circle rotations, orbit density and the Denjoy blow-up.

mod denjoy;

pub use denjoy::{denjoy_build, DenjoyPoint, DenjoySystem, GapSchedule, Side, DEFAULT_DEPTH};

use serde::Serialize;

use crate::dynamics::Map;
use crate::{Error, Result, POINT_TOL};

/// Largest denominator accepted when deciding that a rotation number is rational.
pub const RATIONAL_MAX_DENOMINATOR: u64 = 1_000_000;

/// The golden rotation number `(sqrt 5 - 1) / 2`.
pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Reduce a real number to `[0, 1)`.
pub fn reduce(a: f64) -> f64 {
    let r = a.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed representative of `a - b` in `[-1/2, 1/2)`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    reduce(a - b + 0.5) - 0.5
}

/// Arc-length distance on `R/Z`, in `[0, 1/2]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// A point of the circle `R/Z`.
///
/// Equality is approximate: two points are equal when their circle distance
/// is at most [`POINT_TOL`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(angle: f64) -> Self {
        debug_assert!(angle.is_finite(), "non-finite angle {angle}");
        CirclePoint(reduce(angle))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn distance(self, other: CirclePoint) -> f64 {
        circle_distance(self.0, other.0)
    }

    pub fn shift(self, by: f64) -> Self {
        CirclePoint::new(self.0 + by)
    }
}

impl PartialEq for CirclePoint {
    fn eq(&self, other: &Self) -> bool {
        self.distance(*other) <= POINT_TOL
    }
}

impl From<f64> for CirclePoint {
    fn from(a: f64) -> Self {
        CirclePoint::new(a)
    }
}

/// Rotation `x -> x + alpha (mod 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationSystem {
    alpha: f64,
    rational: Option<(u64, u64)>,
}

impl RotationSystem {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::RotationRange { alpha });
        }
        Ok(RotationSystem {
            alpha,
            rational: rational_approximation(alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Some((p, q))` when `alpha` was detected as the rational `p/q`.
    pub fn rational(&self) -> Option<(u64, u64)> {
        self.rational
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }
}

impl Map for RotationSystem {
    type Point = CirclePoint;

    fn step(&self, p: &CirclePoint) -> Result<CirclePoint> {
        Ok(rotate(*p, self))
    }
}

pub fn rotate(x: CirclePoint, sys: &RotationSystem) -> CirclePoint {
    x.shift(sys.alpha)
}

/// Decide whether `alpha` is a rational with denominator at most
/// [`RATIONAL_MAX_DENOMINATOR`].
///
/// A convergent `p/q` is accepted when `|alpha - p/q|` is below both
/// [`POINT_TOL`] and `1e-3 / q^2`. Closeness alone is not enough: every
/// irrational has convergents with `|alpha - p/q| < 1/q^2`, which drops under
/// the tolerance well before `q` reaches the cap. The second bound only admits
/// convergents whose remaining error is rounding noise (or an irrational whose
/// next partial quotient exceeds a thousand).
pub fn rational_approximation(alpha: f64) -> Option<(u64, u64)> {
    let (mut h_prev, mut h) = (0.0f64, 1.0f64);
    let (mut k_prev, mut k) = (1.0f64, 0.0f64);
    let mut x = alpha;
    loop {
        let a = x.floor();
        let frac = x - a;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > RATIONAL_MAX_DENOMINATOR as f64 {
            return None;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if k > 0.0 {
            let err = (alpha - h / k).abs();
            if err <= POINT_TOL.min(1e-3 / (k * k)) {
                return Some((h as u64, k as u64));
            }
        }
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
}

/// Denominators of the continued-fraction convergents of `alpha`, up to `max`.
pub fn convergent_denominators(alpha: f64, max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut x = alpha;
    loop {
        let a = x.floor();
        let frac = x - a;
        let Some(k_next) = (a as u64).checked_mul(k).and_then(|v| v.checked_add(k_prev)) else {
            break;
        };
        if k_next > max {
            break;
        }
        if k_next > 0 && out.last() != Some(&k_next) {
            out.push(k_next);
        }
        (k_prev, k) = (k, k_next);
        if frac < POINT_TOL {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// Largest circular gap of a finite point set. The set is `eps`-dense iff the
/// result is below `eps`.
pub fn eps_density(points: &[CirclePoint]) -> Result<f64> {
    let gaps = circular_gaps(points)?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Consecutive circular gaps of the sorted point set, the wrap-around gap last.
pub fn circular_gaps(points: &[CirclePoint]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyRequest("density of an empty point set"));
    }
    let mut angles: Vec<f64> = points.iter().map(|p| p.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = angles.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(1.0 - angles[angles.len() - 1] + angles[0]);
    Ok(gaps)
}

/// Distinct gap lengths (merged within `tol`), ascending.
pub fn gap_spectrum(points: &[CirclePoint], tol: f64) -> Result<Vec<f64>> {
    let mut gaps = circular_gaps(points)?;
    gaps.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for g in gaps {
        match distinct.last() {
            Some(&last) if g - last <= tol => {}
            _ => distinct.push(g),
        }
    }
    Ok(distinct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbit;

    #[test]
    fn rotate_examples() {
        let half = RotationSystem::new(0.5).unwrap();
        assert!((rotate(CirclePoint::new(0.25), &half).angle() - 0.75).abs() < 1e-15);
        let fifth = RotationSystem::new(0.2).unwrap();
        assert!((rotate(CirclePoint::new(0.9), &fifth).angle() - 0.1).abs() < 1e-15);
        let g = RotationSystem::new(golden()).unwrap();
        assert!((rotate(CirclePoint::new(0.0), &g).angle() - 0.618_033_988_749_894_8).abs() < 1e-15);
    }

    #[test]
    fn reduce_stays_half_open() {
        assert_eq!(reduce(-1e-18), 0.0);
        assert_eq!(reduce(1.0), 0.0);
        assert!((reduce(-0.25) - 0.75).abs() < 1e-15);
        assert!((signed_diff(0.95, 0.05) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational_approximation(0.5), Some((1, 2)));
        assert_eq!(rational_approximation(1.0 / 3.0), Some((1, 3)));
        assert_eq!(rational_approximation(0.2), Some((1, 5)));
        assert_eq!(rational_approximation(355.0 / 1000.0), Some((71, 200)));
        assert_eq!(rational_approximation(golden()), None);
        assert_eq!(rational_approximation(2f64.sqrt() - 1.0), None);
        assert_eq!(rational_approximation(1.0 / 1_000_003.0), None);
        assert_eq!(
            rational_approximation(999_983.0 / 1_000_000.0),
            Some((999_983, 1_000_000))
        );
        assert_eq!(rational_approximation(514_229.0 / 832_040.0), Some((514_229, 832_040)));
        assert!(RotationSystem::new(0.5).unwrap().is_rational());
        assert!(!RotationSystem::new(golden()).unwrap().is_rational());
    }

    #[test]
    fn rotation_range() {
        assert!(matches!(RotationSystem::new(0.0), Err(Error::RotationRange { .. })));
        assert!(matches!(RotationSystem::new(1.0), Err(Error::RotationRange { .. })));
        assert!(RotationSystem::new(f64::NAN).is_err());
    }

    #[test]
    fn orbit_examples() {
        let half = RotationSystem::new(0.5).unwrap();
        let o = orbit(&half, CirclePoint::new(0.0), 4).unwrap();
        let angles: Vec<f64> = o.iter().map(|p| p.angle()).collect();
        assert_eq!(angles, vec![0.0, 0.5, 0.0, 0.5]);

        let third = RotationSystem::new(1.0 / 3.0).unwrap();
        let o = orbit(&third, CirclePoint::new(0.0), 3).unwrap();
        assert_eq!(o, vec![0.0.into(), (1.0 / 3.0).into(), (2.0 / 3.0).into()]);

        assert!(matches!(
            orbit(&half, CirclePoint::new(0.0), 0),
            Err(Error::EmptyRequest(_))
        ));
    }

    #[test]
    fn density_examples() {
        let pts: Vec<CirclePoint> = [0.0, 1.0 / 3.0, 2.0 / 3.0].map(CirclePoint::new).to_vec();
        assert!((eps_density(&pts).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(eps_density(&[CirclePoint::new(0.4)]).unwrap(), 1.0);
        assert!(eps_density(&[]).is_err());
    }

    #[test]
    fn rational_density_is_one_over_q() {
        for q in [2u32, 3, 5, 7, 12] {
            let sys = RotationSystem::new(1.0 / q as f64).unwrap();
            for n in [q as usize, 2 * q as usize + 1, 10 * q as usize] {
                let pts = orbit(&sys, CirclePoint::new(0.3), n).unwrap();
                let d = eps_density(&pts).unwrap();
                assert!((d - 1.0 / q as f64).abs() < 1e-12, "q={q} n={n} d={d}");
            }
        }
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let d = convergent_denominators(golden(), 10_000);
        assert_eq!(
            d,
            vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765]
        );
    }

    #[test]
    fn golden_density_decreases_along_convergents() {
        let sys = RotationSystem::new(golden()).unwrap();
        let pts = orbit(&sys, CirclePoint::new(0.0), 10_000).unwrap();
        let mut prev = f64::INFINITY;
        for q in convergent_denominators(golden(), 10_000) {
            let d = eps_density(&pts[..q as usize]).unwrap();
            assert!(d < prev, "q={q}: {d} !< {prev}");
            prev = d;
        }
    }
}

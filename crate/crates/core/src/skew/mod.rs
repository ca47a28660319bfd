//! Skew products `F(x, y) = (x + alpha, y + r(x))` on the torus.

mod klein;

pub use klein::{klein_distance, klein_induced, klein_project, KleinPoint, KleinSystem, SYMMETRY_SAMPLES};

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, TAU};

use rand::Rng;
use serde::Serialize;

use crate::circle::{circle_distance, reduce, signed_diff};
use crate::dynamics::Map;
use crate::{Error, Result, POINT_TOL};

/// A point of `T^2 = R^2 / Z^2`. Equality is approximate, like
/// [`CirclePoint`](crate::circle::CirclePoint).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint {
            x: reduce(x),
            y: reduce(y),
        }
    }

    /// Euclidean distance of the shortest lift.
    pub fn distance(self, other: TorusPoint) -> f64 {
        circle_distance(self.x, other.x).hypot(circle_distance(self.y, other.y))
    }

    /// Shortest lift of `self - other`.
    pub fn displacement_from(self, other: TorusPoint) -> (f64, f64) {
        (signed_diff(self.x, other.x), signed_diff(self.y, other.y))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        TorusPoint::new(rng.gen(), rng.gen())
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        circle_distance(self.x, other.x) <= POINT_TOL && circle_distance(self.y, other.y) <= POINT_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonic {
    pub frequency: u32,
    pub amplitude: f64,
}

/// A finite sine series `r(x) = sum a_k sin(2 pi m_k x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoofFunction {
    harmonics: Vec<Harmonic>,
    derivative_bound: f64,
}

impl RoofFunction {
    /// A roof built only from odd frequencies, so that `r(x + 1/2) = -r(x)`.
    pub fn odd(harmonics: &[(u32, f64)]) -> Result<Self> {
        if let Some(&(m, _)) = harmonics.iter().find(|(m, _)| m % 2 == 0) {
            return Err(Error::Precondition(format!(
                "frequency {m} is even; odd-symmetric roofs take odd frequencies only"
            )));
        }
        Self::general(harmonics)
    }

    /// Any finite sine series with distinct positive frequencies.
    pub fn general(harmonics: &[(u32, f64)]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(m, a) in harmonics {
            if m == 0 {
                return Err(Error::Precondition("frequency 0 has no sine term".into()));
            }
            if !seen.insert(m) {
                return Err(Error::Precondition(format!("frequency {m} repeated")));
            }
            if !a.is_finite() {
                return Err(Error::Precondition(format!("amplitude {a} is not finite")));
            }
        }
        let harmonics: Vec<Harmonic> = harmonics
            .iter()
            .map(|&(frequency, amplitude)| Harmonic { frequency, amplitude })
            .collect();
        let derivative_bound = harmonics
            .iter()
            .map(|h| h.amplitude.abs() * TAU * h.frequency as f64)
            .sum();
        Ok(RoofFunction {
            harmonics,
            derivative_bound,
        })
    }

    pub fn zero() -> Self {
        RoofFunction {
            harmonics: Vec::new(),
            derivative_bound: 0.0,
        }
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// `sum |a_k| 2 pi m_k`, an upper bound for `|r'|`.
    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    pub fn has_odd_frequencies(&self) -> bool {
        self.harmonics.iter().all(|h| h.frequency % 2 == 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.amplitude * (TAU * h.frequency as f64 * x).sin())
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let w = TAU * h.frequency as f64;
                h.amplitude * w * (w * x).cos()
            })
            .sum()
    }

    /// Largest `|r(x + 1/2) + r(x)|` over `samples` equally spaced points, with
    /// the point where it is attained.
    pub fn symmetry_residual(&self, samples: usize) -> (f64, f64) {
        (0..samples)
            .map(|i| {
                let x = i as f64 / samples as f64;
                ((self.eval(x + 0.5) + self.eval(x)).abs(), x)
            })
            .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewSystem {
    alpha: f64,
    roof: RoofFunction,
}

impl SkewSystem {
    pub fn new(alpha: f64, roof: RoofFunction) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::RotationRange { alpha });
        }
        Ok(SkewSystem { alpha, roof })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn roof(&self) -> &RoofFunction {
        &self.roof
    }

    pub fn apply(&self, p: TorusPoint) -> TorusPoint {
        TorusPoint::new(p.x + self.alpha, p.y + self.roof.eval(p.x))
    }

    pub fn apply_inverse(&self, p: TorusPoint) -> TorusPoint {
        let x = p.x - self.alpha;
        TorusPoint::new(x, p.y - self.roof.eval(x))
    }

    /// New direction of a line through a point with first coordinate `x`
    /// after one application of the map.
    pub fn slope_transport(&self, x: f64, d: Direction) -> Direction {
        match d.slope() {
            None => d,
            Some(beta) => Direction::from_slope(beta + self.roof.derivative(x)),
        }
    }

    /// Slope of the chord between the images of `p -/+ radius * (1, beta)`.
    ///
    /// As the radius shrinks this converges to `beta + r'(p.x)`.
    pub fn radial_secant_slope(&self, p: TorusPoint, beta: f64, radius: f64) -> f64 {
        let lo = self.apply(TorusPoint::new(p.x - radius, p.y - beta * radius));
        let hi = self.apply(TorusPoint::new(p.x + radius, p.y + beta * radius));
        let (dx, dy) = hi.displacement_from(lo);
        dy / dx
    }
}

impl Map for SkewSystem {
    type Point = TorusPoint;

    fn step(&self, p: &TorusPoint) -> Result<TorusPoint> {
        Ok(self.apply(*p))
    }
}

/// A line through the origin, recorded by the arc coordinate
/// `u = (2/pi) atan(slope)`. The two ends `u = -1` and `u = +1` both stand
/// for the vertical line but are distinct points of the arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction(f64);

impl Direction {
    pub fn new(u: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&u) {
            return Err(Error::Precondition(format!("arc coordinate {u} outside [-1, 1]")));
        }
        Ok(Direction(u))
    }

    pub fn from_slope(beta: f64) -> Self {
        Direction(FRAC_2_PI * beta.atan())
    }

    pub fn vertical() -> Self {
        Direction(1.0)
    }

    /// Direction of the line through the origin and `(dx, dy)`.
    pub fn of_displacement(dx: f64, dy: f64) -> Self {
        if dx == 0.0 {
            Direction::vertical()
        } else {
            Direction::from_slope(dy / dx)
        }
    }

    pub fn u(self) -> f64 {
        self.0
    }

    pub fn is_vertical(self) -> bool {
        self.0.abs() == 1.0
    }

    pub fn slope(self) -> Option<f64> {
        (!self.is_vertical()).then(|| (FRAC_PI_2 * self.0).tan())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(a: f64) -> RoofFunction {
        RoofFunction::odd(&[(1, a)]).unwrap()
    }

    #[test]
    fn roof_eval_examples() {
        assert!((sine(0.05).eval(0.25) - 0.05).abs() < 1e-17);
        let r = RoofFunction::odd(&[(1, 0.05), (3, 0.01)]).unwrap();
        let direct = 0.05 * (0.2 * PI).sin() + 0.01 * (0.6 * PI).sin();
        assert!((r.eval(0.1) - direct).abs() < 1e-16);
        assert!((r.eval(0.6) + r.eval(0.1)).abs() < 1e-15);
    }

    #[test]
    fn roof_derivative_examples() {
        let r = sine(0.05);
        assert!((r.derivative(0.0) - 0.1 * PI).abs() < 1e-15);
        assert!(r.derivative(0.25).abs() < 1e-16);
        let h = 1e-6;
        let fd = (r.eval(h) - r.eval(-h)) / (2.0 * h);
        assert!((fd - r.derivative(0.0)).abs() < 1e-8);
        let z = RoofFunction::zero();
        assert_eq!(z.eval(0.3), 0.0);
        assert_eq!(z.derivative(0.3), 0.0);
    }

    #[test]
    fn roof_constructor_rules() {
        assert!(RoofFunction::odd(&[(2, 0.1)]).is_err());
        assert!(RoofFunction::general(&[(2, 0.1)]).is_ok());
        assert!(RoofFunction::general(&[(1, 0.1), (1, 0.2)]).is_err());
        assert!(RoofFunction::general(&[(0, 0.1)]).is_err());
        let r = RoofFunction::odd(&[(1, 0.05), (3, -0.01)]).unwrap();
        assert!((r.derivative_bound() - (0.05 * TAU + 0.01 * TAU * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn skew_apply_examples() {
        let f = SkewSystem::new(0.3, RoofFunction::zero()).unwrap();
        assert_eq!(f.apply(TorusPoint::new(0.2, 0.7)), TorusPoint::new(0.5, 0.7));
        let f = SkewSystem::new(0.3, sine(0.05)).unwrap();
        assert_eq!(f.apply(TorusPoint::new(0.0, 0.0)), TorusPoint::new(0.3, 0.0));
        assert_eq!(f.apply(TorusPoint::new(0.25, 0.0)), TorusPoint::new(0.55, 0.05));
    }

    #[test]
    fn slope_transport_examples() {
        let f = SkewSystem::new(0.3, sine(0.05)).unwrap();
        assert_eq!(f.slope_transport(0.37, Direction::vertical()), Direction::vertical());
        let flat = f.slope_transport(0.25, Direction::from_slope(0.0));
        assert!(flat.u().abs() < 1e-16);
        let d = f.slope_transport(0.0, Direction::from_slope(0.0));
        assert!((d.slope().unwrap() - 0.1 * PI).abs() < 1e-14);
        assert!((d.u() - FRAC_2_PI * (0.1 * PI).atan()).abs() < 1e-16);
    }

    #[test]
    fn direction_arc() {
        assert!(Direction::new(1.5).is_err());
        assert_eq!(Direction::of_displacement(0.0, -2.0), Direction::vertical());
        assert!((Direction::of_displacement(1.0, 1.0).u() - 0.5).abs() < 1e-16);
        assert!((Direction::of_displacement(-1.0, -1.0).u() - 0.5).abs() < 1e-16);
        assert!(Direction::new(-1.0).unwrap().slope().is_none());
        assert!((Direction::from_slope(3.0).slope().unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn secant_converges() {
        let f = SkewSystem::new(0.3, sine(0.05)).unwrap();
        let p = TorusPoint::new(0.0, 0.4);
        let target = 0.1 * PI;
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&r| (f.radial_secant_slope(p, 0.0, r) - target).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-4);
    }
}

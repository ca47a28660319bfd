use std::fmt::Debug;

use rand::RngCore;
use serde::Serialize;

use crate::skew::{Direction, SkewSystem, TorusPoint};
use crate::suspension::{SuspensionPoint, SuspensionSystem, TimeTMap};
use crate::Result;

/// A base homeomorphism together with the local chart data the blow-up needs.
pub trait BaseSystem: Clone + Debug {
    type Point: Copy + PartialEq + Debug + Serialize;

    /// Whether pseudo-arc tower fibers make sense over this base.
    const SUPPORTS_TOWERS: bool;

    fn apply(&self, p: &Self::Point) -> Result<Self::Point>;

    fn apply_inverse(&self, p: &Self::Point) -> Result<Self::Point>;

    fn validate(&self, p: &Self::Point) -> Result<()>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Unclamped direction coordinate in `[-1, 1]` of `q` seen from `center`.
    fn direction(&self, center: &Self::Point, q: &Self::Point) -> f64;

    /// Image of the fiber coordinate `u` at the blown point `z` under one step.
    fn transport(&self, z: &Self::Point, u: f64) -> f64;

    fn random_point(&self, rng: &mut dyn RngCore) -> Self::Point;
}

/// `y_1 / |y|`, the cone coordinate of a chart displacement.
pub fn cone_coordinate(y: &[f64]) -> f64 {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        (y[0] / norm).clamp(-1.0, 1.0)
    }
}

/// The time-`t` map of a suspension flow. Charts are flow boxes whose first
/// coordinate is flow time, so fibers are carried along unchanged.
#[derive(Debug, Clone)]
pub struct SuspensionBase {
    map: TimeTMap,
}

impl SuspensionBase {
    pub fn new(sys: &SuspensionSystem, t: f64) -> Result<Self> {
        Ok(SuspensionBase {
            map: sys.time_t_map(t)?,
        })
    }

    pub fn map(&self) -> &TimeTMap {
        &self.map
    }
}

impl BaseSystem for SuspensionBase {
    type Point = SuspensionPoint;

    const SUPPORTS_TOWERS: bool = true;

    fn apply(&self, p: &SuspensionPoint) -> Result<SuspensionPoint> {
        self.map.apply(p)
    }

    fn apply_inverse(&self, p: &SuspensionPoint) -> Result<SuspensionPoint> {
        self.map.apply_inverse(p)
    }

    fn validate(&self, p: &SuspensionPoint) -> Result<()> {
        self.map.system().validate(p)
    }

    fn distance(&self, a: &SuspensionPoint, b: &SuspensionPoint) -> f64 {
        self.map.system().distance(a, b)
    }

    fn direction(&self, center: &SuspensionPoint, q: &SuspensionPoint) -> f64 {
        match self.map.system().chart(center, q) {
            Some((tau, v)) => cone_coordinate(&[tau, v]),
            None => 0.0,
        }
    }

    fn transport(&self, _z: &SuspensionPoint, u: f64) -> f64 {
        u
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> SuspensionPoint {
        self.map.system().random_point(rng)
    }
}

/// A torus skew product. The fiber over a blown point is the arc of line
/// directions, moved by the derivative of the map.
#[derive(Debug, Clone)]
pub struct SkewBase {
    system: SkewSystem,
}

impl SkewBase {
    pub fn new(system: SkewSystem) -> Self {
        SkewBase { system }
    }

    pub fn system(&self) -> &SkewSystem {
        &self.system
    }
}

impl BaseSystem for SkewBase {
    type Point = TorusPoint;

    const SUPPORTS_TOWERS: bool = false;

    fn apply(&self, p: &TorusPoint) -> Result<TorusPoint> {
        Ok(self.system.apply(*p))
    }

    fn apply_inverse(&self, p: &TorusPoint) -> Result<TorusPoint> {
        Ok(self.system.apply_inverse(*p))
    }

    fn validate(&self, p: &TorusPoint) -> Result<()> {
        if (0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y) {
            Ok(())
        } else {
            Err(crate::Error::InvalidPoint(format!("({}, {}) is not reduced", p.x, p.y)))
        }
    }

    fn distance(&self, a: &TorusPoint, b: &TorusPoint) -> f64 {
        a.distance(*b)
    }

    fn direction(&self, center: &TorusPoint, q: &TorusPoint) -> f64 {
        let (dx, dy) = q.displacement_from(*center);
        Direction::of_displacement(dx, dy).u()
    }

    fn transport(&self, z: &TorusPoint, u: f64) -> f64 {
        let d = Direction::new(u.clamp(-1.0, 1.0)).expect("clamped");
        self.system.slope_transport(z.x, d).u()
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> TorusPoint {
        TorusPoint::random(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_examples() {
        assert_eq!(cone_coordinate(&[0.3, 0.0]), 1.0);
        assert_eq!(cone_coordinate(&[-0.3, 0.0]), -1.0);
        assert_eq!(cone_coordinate(&[0.0, 0.2]), 0.0);
        assert!((cone_coordinate(&[3.0, 4.0]) - 0.6).abs() < 1e-15);
    }
}

//! The Klein bottle `T^2 / (x, y) ~ (x + 1/2, 1 - y)` and the map induced by
//! an odd-symmetric skew product.

use serde::Serialize;

use super::{SkewSystem, TorusPoint};
use crate::circle::reduce;
use crate::{Error, Result, POINT_TOL};

/// Number of equally spaced points where roof symmetry is checked.
pub const SYMMETRY_SAMPLES: usize = 128;

/// A point of the Klein bottle, stored by its representative with `x` in `[0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KleinPoint(TorusPoint);

impl KleinPoint {
    pub fn representative(self) -> TorusPoint {
        self.0
    }

    /// The other representative `(x + 1/2, 1 - y)`.
    pub fn twin(self) -> TorusPoint {
        flip(self.0)
    }
}

fn flip(p: TorusPoint) -> TorusPoint {
    TorusPoint::new(p.x + 0.5, 1.0 - p.y)
}

/// Canonical representative of the class of `p`.
pub fn klein_project(p: TorusPoint) -> KleinPoint {
    let mut x = p.x;
    let mut y = p.y;
    if 1.0 - x <= POINT_TOL {
        x = 0.0;
    }
    if x >= 0.5 - POINT_TOL {
        x = (x - 0.5).max(0.0);
        y = reduce(1.0 - y);
    }
    KleinPoint(TorusPoint { x, y })
}

/// Distance between classes: the smaller torus distance over both
/// representatives.
pub fn klein_distance(a: KleinPoint, b: KleinPoint) -> f64 {
    a.0.distance(b.0).min(a.0.distance(b.twin()))
}

/// A skew product whose roof was checked to satisfy `r(x + 1/2) = -r(x)`,
/// so that it descends to the Klein bottle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KleinSystem {
    skew: SkewSystem,
}

impl KleinSystem {
    pub fn new(skew: SkewSystem) -> Result<Self> {
        let (residual, at) = skew.roof().symmetry_residual(SYMMETRY_SAMPLES);
        if residual > POINT_TOL {
            return Err(Error::Equivariance { residual, at });
        }
        Ok(KleinSystem { skew })
    }

    pub fn skew(&self) -> &SkewSystem {
        &self.skew
    }

    /// The induced map `G` with `p o F = G o p`.
    pub fn induced(&self, q: KleinPoint) -> KleinPoint {
        klein_project(self.skew.apply(q.0))
    }
}

impl crate::dynamics::Map for KleinSystem {
    type Point = KleinPoint;

    fn step(&self, q: &KleinPoint) -> Result<KleinPoint> {
        Ok(self.induced(*q))
    }
}

/// One-shot form of [`KleinSystem::induced`]; fails when the roof is not
/// odd-symmetric.
pub fn klein_induced(f: &SkewSystem, q: KleinPoint) -> Result<KleinPoint> {
    Ok(KleinSystem::new(f.clone())?.induced(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skew::RoofFunction;

    #[test]
    fn project_examples() {
        let k = klein_project(TorusPoint::new(0.7, 0.3));
        assert_eq!(k.representative(), TorusPoint::new(0.2, 0.7));
        let k = klein_project(TorusPoint::new(0.2, 0.7));
        assert_eq!(k.representative(), TorusPoint::new(0.2, 0.7));
        let p = TorusPoint::new(0.31, 0.83);
        assert_eq!(flip(flip(p)), p);
        assert_eq!(klein_project(flip(p)), klein_project(p));
    }

    #[test]
    fn project_boundary() {
        let k = klein_project(TorusPoint::new(0.5 - 1e-14, 0.2));
        assert_eq!(k.representative().x, 0.0);
        let k = klein_project(TorusPoint::new(1.0 - 1e-14, 0.2));
        assert_eq!(k.representative(), TorusPoint::new(0.0, 0.2));
        assert!(k.representative().x < 0.5);
    }

    #[test]
    fn both_representatives_agree() {
        let f = SkewSystem::new(0.3, RoofFunction::odd(&[(1, 0.05)]).unwrap()).unwrap();
        let a = klein_project(f.apply(TorusPoint::new(0.2, 0.7)));
        let b = klein_project(f.apply(TorusPoint::new(0.7, 0.3)));
        assert!(klein_distance(a, b) < 1e-12);
        assert!(a.representative().distance(b.representative()) < 1e-12);
    }

    #[test]
    fn zero_roof_translates() {
        let f = SkewSystem::new(0.3, RoofFunction::zero()).unwrap();
        let g = KleinSystem::new(f).unwrap();
        let q = klein_project(TorusPoint::new(0.4, 0.1));
        let image = g.induced(q);
        // 0.4 + 0.3 = 0.7 lands in the other half, so y flips
        assert_eq!(image.representative(), TorusPoint::new(0.2, 0.9));
    }

    #[test]
    fn even_harmonic_rejected() {
        let roof = RoofFunction::general(&[(1, 0.05), (2, 0.01)]).unwrap();
        let f = SkewSystem::new(0.3, roof).unwrap();
        match KleinSystem::new(f.clone()) {
            Err(Error::Equivariance { residual, at }) => {
                assert!((residual - 0.02).abs() < 1e-15);
                assert_eq!(at, 0.125);
            }
            r => panic!("unexpected {r:?}"),
        }
        assert!(klein_induced(&f, klein_project(TorusPoint::new(0.1, 0.1))).is_err());
    }
}

//! Finite-stage blow-ups: orbit points of a seed replaced by fibers.
//!
//! A stage space keeps the base map away from the blown orbit `z_i = F^i(z)`
//! and replaces each `z_i` with a fiber, either the arc `[-1, 1]` of
//! directions or a pseudo-arc tower. Fiber `i` contributes to the metric with
//! weight `w_i`, a null sequence, so fibers shrink along the orbit.

mod base;
mod report;

pub use base::{cone_coordinate, BaseSystem, SkewBase, SuspensionBase};
pub use report::{almost_one_to_one_report, AlmostOneToOneReport, ThresholdCount};

use serde::Serialize;

use crate::pseudoarc::{tower_check, tower_metric, BondingMap, Tower};
use crate::{Error, Result, POINT_TOL};

/// Inside this base distance the direction coordinate is used unscaled.
pub const CHART_RADIUS: f64 = 0.05;

/// Minimum separation of blown orbit points.
pub const APERIODICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlownIndexSet {
    /// `{-n, ..., n}`: the stage map is invertible.
    TwoSided(u32),
    /// `{-n, ..., -1}`: fiber `-1` collapses onto the seed.
    BackwardOnly(u32),
}

impl BlownIndexSet {
    pub fn depth(self) -> u32 {
        match self {
            BlownIndexSet::TwoSided(n) | BlownIndexSet::BackwardOnly(n) => n,
        }
    }

    pub fn contains(self, i: i64) -> bool {
        let n = self.depth() as i64;
        match self {
            BlownIndexSet::TwoSided(_) => (-n..=n).contains(&i),
            BlownIndexSet::BackwardOnly(_) => (-n..=-1).contains(&i),
        }
    }

    pub fn indices(self) -> Vec<i64> {
        let n = self.depth() as i64;
        match self {
            BlownIndexSet::TwoSided(_) => (-n..=n).collect(),
            BlownIndexSet::BackwardOnly(_) => (-n..=-1).collect(),
        }
    }

    pub fn len(self) -> usize {
        self.indices().len()
    }

    pub fn is_empty(self) -> bool {
        self.depth() == 0
    }

    /// The same mode one level shallower.
    pub fn coarser(self) -> Option<Self> {
        match self {
            BlownIndexSet::TwoSided(n) if n > 1 => Some(BlownIndexSet::TwoSided(n - 1)),
            BlownIndexSet::BackwardOnly(n) if n > 1 => Some(BlownIndexSet::BackwardOnly(n - 1)),
            _ => None,
        }
    }

    fn orbit_range(self) -> (i64, i64) {
        let n = self.depth() as i64;
        (-n - 1, n + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FiberKind {
    Interval,
    /// Towers of a fixed depth over one bonding map.
    Tower {
        bonding: BondingMap,
        depth: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FiberCoord {
    Interval(f64),
    Tower(Tower),
}

impl FiberCoord {
    /// The scalar entering the metric: `u` itself, or `2 x_0 - 1` for a tower.
    pub fn scalar(&self) -> f64 {
        match self {
            FiberCoord::Interval(u) => *u,
            FiberCoord::Tower(t) => 2.0 * t.head() - 1.0,
        }
    }
}

/// Weights `w_i = ratio^|i|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    ratio: f64,
}

impl Weights {
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Precondition(format!("weight ratio {ratio} outside (0, 1)")));
        }
        Ok(Weights { ratio })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn weight(&self, i: i64) -> f64 {
        self.ratio.powi(i.unsigned_abs().min(i32::MAX as u64) as i32)
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights { ratio: 0.5 }
    }
}

pub type PointPair<P> = (StagePoint<P>, StagePoint<P>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StagePoint<P> {
    Regular(P),
    Fiber { index: i64, coord: FiberCoord },
}

impl<P> StagePoint<P> {
    pub fn interval(index: i64, u: f64) -> Self {
        StagePoint::Fiber {
            index,
            coord: FiberCoord::Interval(u),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageSpace<B: BaseSystem> {
    base: B,
    seed: B::Point,
    indices: BlownIndexSet,
    fiber: FiberKind,
    weights: Weights,
    /// `z_i` for `i` in `-n-1 ..= n+1`.
    orbit: Vec<B::Point>,
}

pub fn build_stage<B: BaseSystem>(
    base: B,
    seed: B::Point,
    indices: BlownIndexSet,
    fiber: FiberKind,
    weights: Weights,
) -> Result<StageSpace<B>> {
    if indices.is_empty() {
        return Err(Error::Precondition("a blown index set needs n >= 1".into()));
    }
    if let FiberKind::Tower { depth, .. } = &fiber {
        if !B::SUPPORTS_TOWERS {
            return Err(Error::Precondition("tower fibers need a suspension base".into()));
        }
        if *depth == 0 {
            return Err(Error::Precondition("tower depth must be at least 1".into()));
        }
    }
    base.validate(&seed)?;
    let (lo, hi) = indices.orbit_range();
    let mut backward = vec![seed];
    for _ in lo..0 {
        let prev = base.apply_inverse(backward.last().expect("nonempty"))?;
        backward.push(prev);
    }
    backward.reverse();
    let mut orbit = backward;
    for _ in 0..hi {
        let next = base.apply(orbit.last().expect("nonempty"))?;
        orbit.push(next);
    }
    for a in 0..orbit.len() {
        for b in a + 1..orbit.len() {
            let distance = base.distance(&orbit[a], &orbit[b]);
            if !(distance > APERIODICITY_TOL) {
                return Err(Error::Aperiodic {
                    i: a as i64 + lo,
                    j: b as i64 + lo,
                    distance,
                });
            }
        }
    }
    Ok(StageSpace {
        base,
        seed,
        indices,
        fiber,
        weights,
        orbit,
    })
}

impl<B: BaseSystem> StageSpace<B> {
    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn seed(&self) -> &B::Point {
        &self.seed
    }

    pub fn indices(&self) -> BlownIndexSet {
        self.indices
    }

    pub fn fiber_kind(&self) -> &FiberKind {
        &self.fiber
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn fiber_count(&self) -> usize {
        self.indices.len()
    }

    /// `z_i` for `|i| <= n + 1`.
    pub fn orbit_point(&self, i: i64) -> Option<&B::Point> {
        let (lo, hi) = self.indices.orbit_range();
        (lo..=hi).contains(&i).then(|| &self.orbit[(i - lo) as usize])
    }

    fn z(&self, i: i64) -> &B::Point {
        self.orbit_point(i).expect("index within the cached orbit")
    }

    /// First blown index whose orbit point is within tolerance of `q`.
    fn blown_at(&self, q: &B::Point) -> Option<i64> {
        self.indices
            .indices()
            .into_iter()
            .find(|&i| self.base.distance(q, self.z(i)) <= POINT_TOL)
    }

    pub fn validate(&self, p: &StagePoint<B::Point>) -> Result<()> {
        match p {
            StagePoint::Regular(q) => {
                self.base.validate(q)?;
                match self.blown_at(q) {
                    Some(index) => Err(Error::ChartSingularity { index }),
                    None => Ok(()),
                }
            }
            StagePoint::Fiber { index, coord } => {
                if !self.indices.contains(*index) {
                    return Err(Error::InvalidPoint(format!("fiber index {index} is not blown")));
                }
                match (coord, &self.fiber) {
                    (FiberCoord::Interval(u), FiberKind::Interval) if (-1.0..=1.0).contains(u) => Ok(()),
                    (FiberCoord::Tower(t), FiberKind::Tower { bonding, depth })
                        if t.depth() == *depth && tower_check(bonding, t) =>
                    {
                        Ok(())
                    }
                    _ => Err(Error::InvalidPoint(format!("bad fiber coordinate on fiber {index}"))),
                }
            }
        }
    }

    /// One step of the stage map.
    pub fn stage_map(&self, p: &StagePoint<B::Point>) -> Result<StagePoint<B::Point>> {
        self.validate(p)?;
        match p {
            StagePoint::Regular(q) => {
                let image = self.base.apply(q)?;
                match self.blown_at(&image) {
                    Some(index) => Err(Error::FiberEntry { index }),
                    None => Ok(StagePoint::Regular(image)),
                }
            }
            StagePoint::Fiber { index, coord } => {
                let next = index + 1;
                if !self.indices.contains(next) {
                    return Ok(StagePoint::Regular(*self.z(next)));
                }
                let coord = match coord {
                    FiberCoord::Interval(u) => FiberCoord::Interval(self.base.transport(self.z(*index), *u)),
                    FiberCoord::Tower(t) => FiberCoord::Tower(t.clone()),
                };
                Ok(StagePoint::Fiber { index: next, coord })
            }
        }
    }

    /// `stage_map` applied `k` times.
    pub fn stage_iterate(&self, p: &StagePoint<B::Point>, k: usize) -> Result<StagePoint<B::Point>> {
        let mut p = p.clone();
        for _ in 0..k {
            p = self.stage_map(&p)?;
        }
        Ok(p)
    }

    /// Collapse each fiber to its orbit point.
    pub fn stage_project(&self, p: &StagePoint<B::Point>) -> B::Point {
        match p {
            StagePoint::Regular(q) => *q,
            StagePoint::Fiber { index, .. } => *self.z(*index),
        }
    }

    /// The direction coordinate of `q` around `z_i`, scaled to fade out
    /// linearly between one and two chart radii.
    pub fn direction_coordinate(&self, i: i64, q: &B::Point) -> Result<f64> {
        if !self.indices.contains(i) {
            return Err(Error::InvalidPoint(format!("fiber index {i} is not blown")));
        }
        let z = self.z(i);
        let r = self.base.distance(q, z);
        if r <= POINT_TOL {
            return Err(Error::UndefinedDirection { index: i });
        }
        let scale = if r <= CHART_RADIUS {
            1.0
        } else if r >= 2.0 * CHART_RADIUS {
            return Ok(0.0);
        } else {
            (2.0 * CHART_RADIUS - r) / CHART_RADIUS
        };
        Ok(scale * self.base.direction(z, q))
    }

    fn chi(&self, i: i64, p: &StagePoint<B::Point>) -> f64 {
        match p {
            StagePoint::Fiber { index, coord } if *index == i => coord.scalar(),
            _ => self.direction_coordinate(i, &self.stage_project(p)).unwrap_or(0.0),
        }
    }

    /// Base distance plus the weighted differences of every fiber coordinate.
    pub fn stage_metric(&self, a: &StagePoint<B::Point>, b: &StagePoint<B::Point>) -> f64 {
        let mut d = self.base.distance(&self.stage_project(a), &self.stage_project(b));
        for i in self.indices.indices() {
            let delta = match (a, b) {
                (
                    StagePoint::Fiber {
                        index: ia,
                        coord: FiberCoord::Tower(ta),
                    },
                    StagePoint::Fiber {
                        index: ib,
                        coord: FiberCoord::Tower(tb),
                    },
                ) if *ia == i && *ib == i => tower_metric(ta, tb).unwrap_or(2.0),
                _ => (self.chi(i, a) - self.chi(i, b)).abs(),
            };
            d += self.weights.weight(i) * delta;
        }
        d
    }

    /// The two extreme points of fiber `i`.
    pub fn fiber_extremes(&self, i: i64) -> Result<PointPair<B::Point>> {
        if !self.indices.contains(i) {
            return Err(Error::InvalidPoint(format!("fiber index {i} is not blown")));
        }
        Ok(match &self.fiber {
            FiberKind::Interval => (StagePoint::interval(i, -1.0), StagePoint::interval(i, 1.0)),
            FiberKind::Tower { depth, .. } => (
                StagePoint::Fiber {
                    index: i,
                    coord: FiberCoord::Tower(Tower::constant(0.0, *depth)?),
                },
                StagePoint::Fiber {
                    index: i,
                    coord: FiberCoord::Tower(Tower::constant(1.0, *depth)?),
                },
            ),
        })
    }

    pub fn fiber_diameter(&self, i: i64) -> Result<f64> {
        let (a, b) = self.fiber_extremes(i)?;
        Ok(self.stage_metric(&a, &b))
    }

    /// Diameter of the image of fiber `i` after `k` stage-map steps.
    pub fn fiber_diameter_after(&self, i: i64, k: usize) -> Result<f64> {
        let (a, b) = self.fiber_extremes(i)?;
        Ok(self.stage_metric(&self.stage_iterate(&a, k)?, &self.stage_iterate(&b, k)?))
    }

    /// Closed form `2 w_i`.
    pub fn fiber_diameter_formula(&self, i: i64) -> f64 {
        2.0 * self.weights.weight(i)
    }

    /// The next shallower stage, with the same base, seed and fibers.
    pub fn coarser(&self) -> Result<StageSpace<B>> {
        let indices = self
            .indices
            .coarser()
            .ok_or_else(|| Error::Precondition("stage 1 has no coarser stage".into()))?;
        let (lo, hi) = indices.orbit_range();
        let (old_lo, _) = self.indices.orbit_range();
        Ok(StageSpace {
            base: self.base.clone(),
            seed: self.seed,
            indices,
            fiber: self.fiber.clone(),
            weights: self.weights,
            orbit: self.orbit[(lo - old_lo) as usize..=(hi - old_lo) as usize].to_vec(),
        })
    }

    /// The bonding projection onto the next shallower stage: outermost
    /// fibers collapse to their orbit points, everything else is kept.
    pub fn stage_refine(&self, p: &StagePoint<B::Point>) -> Result<StagePoint<B::Point>> {
        let coarse = self
            .indices
            .coarser()
            .ok_or_else(|| Error::Precondition("stage 1 has no coarser stage".into()))?;
        Ok(match p {
            StagePoint::Fiber { index, .. } if !coarse.contains(*index) => StagePoint::Regular(*self.z(*index)),
            _ => p.clone(),
        })
    }

    /// Two points of fiber `-1` that share their image.
    pub fn noninvertibility_witness(&self) -> Result<Witness<B::Point>> {
        if !matches!(self.indices, BlownIndexSet::BackwardOnly(_)) {
            return Err(Error::Mode(
                "the two-sided stage map is invertible; a witness needs backward-only blow-up".into(),
            ));
        }
        let (a, b) = match &self.fiber {
            FiberKind::Interval => (StagePoint::interval(-1, -0.5), StagePoint::interval(-1, 0.5)),
            FiberKind::Tower { .. } => {
                let (lo, hi) = self.fiber_extremes(-1)?;
                (lo, hi)
            }
        };
        let (image_a, image_b) = (self.stage_map(&a)?, self.stage_map(&b)?);
        Ok(Witness {
            separation: self.stage_metric(&a, &b),
            image_distance: self.stage_metric(&image_a, &image_b),
            images_equal: image_a == image_b,
            a,
            b,
            image: image_a,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness<P> {
    pub a: StagePoint<P>,
    pub b: StagePoint<P>,
    pub image: StagePoint<P>,
    pub separation: f64,
    pub image_distance: f64,
    pub images_equal: bool,
}

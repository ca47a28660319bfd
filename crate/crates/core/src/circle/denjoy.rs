use rand::Rng;
use serde::Serialize;

use super::{reduce, CirclePoint, RotationSystem};
use crate::dynamics::Map;
use crate::{Error, Result, POINT_TOL};

/// Default orbit depth `K`: gaps are stored for orbit indices `|k| <= K`.
pub const DEFAULT_DEPTH: i64 = 64;

/// Tolerance used when checking that two seeds lie on different orbits.
const SEED_TOL: f64 = 1e-9;

/// Tail mass allowed beyond the truncation, relative to the stored total.
const TAIL_RELATIVE: f64 = 1e-9;

/// Geometric gap lengths `scale * ratio^|k|`, stored for `|k| <= depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSchedule {
    pub scale: f64,
    pub ratio: f64,
    pub depth: i64,
}

impl GapSchedule {
    pub fn geometric(scale: f64, ratio: f64, depth: i64) -> Self {
        GapSchedule { scale, ratio, depth }
    }

    /// Ratio 1/2 with the scale chosen so that all gaps of `seeds` orbits add
    /// up to 1/2.
    pub fn half_circle(seeds: usize) -> Self {
        let per_seed = (1.0 + 0.5) / (1.0 - 0.5);
        GapSchedule {
            scale: 0.5 / (seeds.max(1) as f64 * per_seed),
            ratio: 0.5,
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn length(&self, k: i64) -> f64 {
        self.scale * self.ratio.powi(k.unsigned_abs().min(i32::MAX as u64) as i32)
    }

    /// Gap mass of one seed orbit beyond `|k| > depth`.
    pub fn tail_per_seed(&self) -> f64 {
        2.0 * self.scale * self.ratio.powi(self.depth as i32 + 1) / (1.0 - self.ratio)
    }

    /// Full (untruncated) gap mass of one seed orbit.
    pub fn total_per_seed(&self) -> f64 {
        self.scale * (1.0 + self.ratio) / (1.0 - self.ratio)
    }
}

/// Which endpoint of a gap a Cantor point names when its base lies on a blown
/// orbit point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DenjoyPoint {
    /// A point of the invariant Cantor set, named by its rotation angle.
    Cantor { base: CirclePoint, side: Option<Side> },
    /// The point at relative position `s` inside the gap blown up at
    /// `seed_j + k * alpha`.
    Gap { seed: usize, k: i64, s: f64 },
}

impl DenjoyPoint {
    pub fn cantor(base: f64) -> Self {
        DenjoyPoint::Cantor {
            base: CirclePoint::new(base),
            side: None,
        }
    }

    pub fn gap(seed: usize, k: i64, s: f64) -> Self {
        DenjoyPoint::Gap { seed, k, s }
    }

    /// Whether the point belongs to the invariant Cantor set.
    pub fn in_cantor_set(&self) -> bool {
        match self {
            DenjoyPoint::Cantor { .. } => true,
            DenjoyPoint::Gap { s, .. } => *s == 0.0 || *s == 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct GapEntry {
    /// Angle of the blown orbit point measured from seed 0.
    offset: f64,
    length: f64,
    /// Gap mass strictly before this gap in the cyclic order starting at seed 0.
    before: f64,
    seed: usize,
    k: i64,
}

/// A Denjoy circle map: an irrational rotation whose orbits through `seeds`
/// are blown up into gaps.
#[derive(Debug, Clone, Serialize)]
pub struct DenjoySystem {
    rotation: RotationSystem,
    seeds: Vec<CirclePoint>,
    schedule: GapSchedule,
    total_gap: f64,
    tail_bound: f64,
    #[serde(skip)]
    table: Vec<GapEntry>,
}

pub fn denjoy_build(alpha: f64, seeds: &[f64], schedule: GapSchedule) -> Result<DenjoySystem> {
    DenjoySystem::new(alpha, seeds, schedule)
}

impl DenjoySystem {
    pub fn new(alpha: f64, seeds: &[f64], schedule: GapSchedule) -> Result<Self> {
        let rotation = RotationSystem::new(alpha)?;
        if let Some((p, q)) = rotation.rational() {
            return Err(Error::RationalRotation { alpha, p, q });
        }
        if seeds.is_empty() {
            return Err(Error::EmptyRequest("a Denjoy system needs at least one seed"));
        }
        let GapSchedule { scale, ratio, depth } = schedule;
        if !(scale > 0.0) || !(ratio > 0.0 && ratio < 1.0) || depth < 1 {
            return Err(Error::GapSchedule(format!(
                "need scale > 0, 0 < ratio < 1 and depth >= 1 (got {scale}, {ratio}, {depth})"
            )));
        }
        let full = seeds.len() as f64 * schedule.total_per_seed();
        if full >= 1.0 {
            return Err(Error::GapSchedule(format!("total gap length {full} must be < 1")));
        }
        let seeds: Vec<CirclePoint> = seeds.iter().map(|&s| CirclePoint::new(s)).collect();
        for a in 0..seeds.len() {
            for b in a + 1..seeds.len() {
                for offset in -2 * depth..=2 * depth {
                    let shifted = seeds[a].shift(offset as f64 * alpha);
                    if shifted.distance(seeds[b]) <= SEED_TOL {
                        return Err(Error::SeedOrbit {
                            first: a,
                            second: b,
                            offset,
                        });
                    }
                }
            }
        }

        let origin = seeds[0].angle();
        let mut table = Vec::with_capacity(seeds.len() * (2 * depth as usize + 1));
        for (j, seed) in seeds.iter().enumerate() {
            for k in -depth..=depth {
                table.push(GapEntry {
                    offset: reduce(seed.angle() + k as f64 * alpha - origin),
                    length: schedule.length(k),
                    before: 0.0,
                    seed: j,
                    k,
                });
            }
        }
        table.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        let mut acc = 0.0;
        for e in &mut table {
            e.before = acc;
            acc += e.length;
        }
        let tail_bound = seeds.len() as f64 * schedule.tail_per_seed();
        if tail_bound >= TAIL_RELATIVE * acc {
            return Err(Error::GapSchedule(format!(
                "tail beyond depth {depth} is {tail_bound:e}, not below {TAIL_RELATIVE:e} of the stored total {acc}"
            )));
        }

        Ok(DenjoySystem {
            rotation,
            seeds,
            schedule,
            total_gap: acc,
            tail_bound,
            table,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.rotation.alpha()
    }

    pub fn rotation(&self) -> &RotationSystem {
        &self.rotation
    }

    pub fn seeds(&self) -> &[CirclePoint] {
        &self.seeds
    }

    pub fn schedule(&self) -> &GapSchedule {
        &self.schedule
    }

    pub fn depth(&self) -> i64 {
        self.schedule.depth
    }

    /// Sum of all stored gap lengths.
    pub fn total_gap(&self) -> f64 {
        self.total_gap
    }

    /// Upper bound on the gap mass beyond the stored depth.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn gap_length(&self, k: i64) -> f64 {
        self.schedule.length(k)
    }

    /// Rotation-orbit point `seed_j + k * alpha` that the gap `(j, k)` collapses to.
    pub fn orbit_point(&self, seed: usize, k: i64) -> CirclePoint {
        self.seeds[seed].shift(k as f64 * self.alpha())
    }

    fn truncation(&self, index: i64) -> Error {
        Error::Truncation {
            index,
            depth: self.depth(),
            tail_bound: self.tail_bound,
        }
    }

    /// The stored gap whose orbit point lies at `base`, if any.
    pub fn locate(&self, base: CirclePoint) -> Option<(usize, i64)> {
        let offset = reduce(base.angle() - self.seeds[0].angle());
        let i = self.table.partition_point(|e| e.offset < offset);
        let n = self.table.len();
        [i % n, (i + n - 1) % n]
            .into_iter()
            .map(|idx| &self.table[idx])
            .find(|e| super::circle_distance(e.offset, offset) <= POINT_TOL)
            .map(|e| (e.seed, e.k))
    }

    fn entry(&self, seed: usize, k: i64) -> &GapEntry {
        let offset = reduce(self.orbit_point(seed, k).angle() - self.seeds[0].angle());
        let i = self.table.partition_point(|e| e.offset < offset - POINT_TOL);
        let n = self.table.len();
        (0..3)
            .map(|d| &self.table[(i + n - 1 + d) % n])
            .find(|e| e.seed == seed && e.k == k)
            .expect("gap table holds every stored orbit index")
    }

    pub fn validate(&self, p: &DenjoyPoint) -> Result<()> {
        match *p {
            DenjoyPoint::Gap { seed, k, s } => {
                if seed >= self.seeds.len() {
                    return Err(Error::InvalidPoint(format!("seed index {seed} out of range")));
                }
                if k.abs() > self.depth() {
                    return Err(self.truncation(k));
                }
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::InvalidPoint(format!("gap coordinate {s} outside [0, 1]")));
                }
                Ok(())
            }
            DenjoyPoint::Cantor { base, side } => match (self.locate(base), side) {
                (Some((j, k)), None) => Err(Error::InvalidPoint(format!(
                    "Cantor point {} lies on the blown orbit point ({j}, {k}); a side is required",
                    base.angle()
                ))),
                (None, Some(_)) => Err(Error::InvalidPoint(format!(
                    "side marker given for {}, which is not a blown orbit point",
                    base.angle()
                ))),
                _ => Ok(()),
            },
        }
    }

    fn shift(&self, p: &DenjoyPoint, n: i64) -> Result<DenjoyPoint> {
        self.validate(p)?;
        match *p {
            DenjoyPoint::Gap { seed, k, s } => {
                let k = k + n;
                if k.abs() > self.depth() {
                    return Err(self.truncation(k));
                }
                Ok(DenjoyPoint::Gap { seed, k, s })
            }
            DenjoyPoint::Cantor { base, side: Some(side) } => {
                let (_, k) = self.locate(base).expect("validated");
                if (k + n).abs() > self.depth() {
                    return Err(self.truncation(k + n));
                }
                Ok(DenjoyPoint::Cantor {
                    base: base.shift(n as f64 * self.alpha()),
                    side: Some(side),
                })
            }
            DenjoyPoint::Cantor { base, side: None } => {
                let image = base.shift(n as f64 * self.alpha());
                if let Some((_, k)) = self.locate(image) {
                    // the start was an unstored tail orbit point
                    return Err(self.truncation(k - n));
                }
                Ok(DenjoyPoint::Cantor {
                    base: image,
                    side: None,
                })
            }
        }
    }

    /// One step of the Denjoy map.
    pub fn map(&self, p: &DenjoyPoint) -> Result<DenjoyPoint> {
        self.shift(p, 1)
    }

    pub fn map_inverse(&self, p: &DenjoyPoint) -> Result<DenjoyPoint> {
        self.shift(p, -1)
    }

    /// `h^n(p)` for any integer `n`.
    pub fn iterate(&self, p: &DenjoyPoint, n: i64) -> Result<DenjoyPoint> {
        self.shift(p, n)
    }

    /// Position on the blown circle of circumference 1, with the left end of
    /// the gap at seed 0 as origin. Strictly increasing in the cyclic order.
    pub fn embed(&self, p: &DenjoyPoint) -> CirclePoint {
        let position = match *p {
            DenjoyPoint::Gap { seed, k, s } => {
                let e = self.entry(seed, k);
                (1.0 - self.total_gap) * e.offset + e.before + s * e.length
            }
            DenjoyPoint::Cantor { base, side: Some(side) } => {
                let (seed, k) = self.locate(base).expect("side marker on a blown point");
                let e = self.entry(seed, k);
                let s = match side {
                    Side::Left => 0.0,
                    Side::Right => e.length,
                };
                (1.0 - self.total_gap) * e.offset + e.before + s
            }
            DenjoyPoint::Cantor { base, side: None } => {
                let offset = reduce(base.angle() - self.seeds[0].angle());
                let i = self.table.partition_point(|e| e.offset < offset);
                let before = self.table.get(i).map_or(self.total_gap, |e| e.before);
                (1.0 - self.total_gap) * offset + before
            }
        };
        CirclePoint::new(position)
    }

    /// Collapse every gap to its rotation-orbit point.
    pub fn semiconjugacy(&self, p: &DenjoyPoint) -> CirclePoint {
        match *p {
            DenjoyPoint::Gap { seed, k, .. } => self.orbit_point(seed, k),
            DenjoyPoint::Cantor { base, .. } => base,
        }
    }

    /// A random valid point: half the time inside a stored gap, otherwise a
    /// generic Cantor point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DenjoyPoint {
        if rng.gen_bool(0.5) {
            DenjoyPoint::Gap {
                seed: rng.gen_range(0..self.seeds.len()),
                k: rng.gen_range(-self.depth()..=self.depth()),
                s: rng.gen_range(0.0..=1.0),
            }
        } else {
            loop {
                let base = CirclePoint::new(rng.gen::<f64>());
                if self.locate(base).is_none() {
                    return DenjoyPoint::Cantor { base, side: None };
                }
            }
        }
    }

    /// A random point of the Cantor set (generic points and gap endpoints).
    pub fn random_cantor_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DenjoyPoint {
        match self.random_point(rng) {
            DenjoyPoint::Gap { seed, k, s } => DenjoyPoint::Gap {
                seed,
                k,
                s: if s < 0.5 { 0.0 } else { 1.0 },
            },
            p => p,
        }
    }
}

impl Map for DenjoySystem {
    type Point = DenjoyPoint;

    fn step(&self, p: &DenjoyPoint) -> Result<DenjoyPoint> {
        self.map(p)
    }
}

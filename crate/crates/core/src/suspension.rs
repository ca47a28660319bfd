//! Suspension flows with unit roof over Cantor minimal systems.

use rand::Rng;
use serde::Serialize;

use crate::circle::{circle_distance, signed_diff, DenjoyPoint, DenjoySystem};
use crate::dynamics::Map;
use crate::{Error, Result};

/// Largest supported odometer depth (words are stored in a `u64`).
pub const MAX_ODOMETER_DEPTH: u32 = 62;

/// Cap on the number of grid cells a density certificate may allocate.
const MAX_CELLS: usize = 1 << 26;

/// The dyadic adding machine truncated to its first `depth` symbols.
///
/// Truncation is exact as a factor: the first `depth` symbols of `x + 1`
/// only depend on the first `depth` symbols of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Odometer {
    depth: u32,
}

impl Odometer {
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_ODOMETER_DEPTH {
            return Err(Error::Precondition(format!(
                "odometer depth {depth} outside 1..={MAX_ODOMETER_DEPTH}"
            )));
        }
        Ok(Odometer { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn mask(&self) -> u64 {
        (1u64 << self.depth) - 1
    }

    /// Add `n` with carry, symbol 0 first.
    pub fn add(&self, word: u64, n: i64) -> u64 {
        (word as i128 + n as i128).rem_euclid(1i128 << self.depth) as u64
    }

    /// Largest flow time representable without overrunning the carry headroom.
    pub fn headroom(&self) -> f64 {
        2f64.powi(self.depth as i32 - 2)
    }

    /// Symbol `k` of `word`.
    pub fn symbol(word: u64, k: u32) -> u8 {
        ((word >> k) & 1) as u8
    }

    /// `2^-(i+1)` where `i` is the first symbol where the words disagree.
    pub fn distance(&self, a: u64, b: u64) -> f64 {
        let diff = (a ^ b) & self.mask();
        if diff == 0 {
            0.0
        } else {
            0.5f64.powi(diff.trailing_zeros() as i32 + 1)
        }
    }

    /// Middle-thirds embedding `sum_k 2 b_k 3^-(k+1)` into `[0, 1]`.
    pub fn embed(&self, word: u64) -> f64 {
        let mut scale = 1.0 / 3.0;
        let mut acc = 0.0;
        for k in 0..self.depth {
            acc += 2.0 * Self::symbol(word, k) as f64 * scale;
            scale /= 3.0;
        }
        acc
    }

    /// How often the orbit of the zero word visits each length-`depth`
    /// cylinder during one full period. Every count is 1 for a minimal odometer.
    pub fn cylinder_visit_counts(&self) -> Result<Vec<u32>> {
        if self.depth > 24 {
            return Err(Error::Resource(format!(
                "cylinder census at depth {} needs 2^{} counters",
                self.depth, self.depth
            )));
        }
        let period = 1usize << self.depth;
        let mut counts = vec![0u32; period];
        let mut word = 0u64;
        for _ in 0..period {
            counts[word as usize] += 1;
            word = self.add(word, 1);
        }
        Ok(counts)
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum CantorSystem {
    Odometer(Odometer),
    /// A Denjoy map restricted to its invariant Cantor set.
    Denjoy(DenjoySystem),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CantorPoint {
    Word(u64),
    Denjoy(DenjoyPoint),
}

impl CantorSystem {
    pub fn validate(&self, p: &CantorPoint) -> Result<()> {
        match (self, p) {
            (CantorSystem::Odometer(o), CantorPoint::Word(w)) => {
                if w & !o.mask() != 0 {
                    return Err(Error::InvalidPoint(format!(
                        "word {w:#x} has symbols beyond depth {}",
                        o.depth
                    )));
                }
                Ok(())
            }
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(q)) => {
                d.validate(q)?;
                if !q.in_cantor_set() {
                    return Err(Error::InvalidPoint(
                        "gap interior points are not in the Denjoy Cantor set".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(Error::InvalidPoint(
                "point kind does not match the Cantor system".into(),
            )),
        }
    }

    /// `h^n(p)`.
    pub fn iterate(&self, p: &CantorPoint, n: i64) -> Result<CantorPoint> {
        match (self, p) {
            (CantorSystem::Odometer(o), CantorPoint::Word(w)) => Ok(CantorPoint::Word(o.add(*w, n))),
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(q)) => Ok(CantorPoint::Denjoy(d.iterate(q, n)?)),
            _ => Err(Error::InvalidPoint(
                "point kind does not match the Cantor system".into(),
            )),
        }
    }

    pub fn distance(&self, a: &CantorPoint, b: &CantorPoint) -> f64 {
        match (self, a, b) {
            (CantorSystem::Odometer(o), CantorPoint::Word(x), CantorPoint::Word(y)) => o.distance(*x, *y),
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(x), CantorPoint::Denjoy(y)) => {
                d.embed(x).distance(d.embed(y))
            }
            _ => f64::INFINITY,
        }
    }

    /// Signed transversal displacement of `a` from `b` in the real embedding
    /// of the Cantor set.
    pub fn transversal(&self, a: &CantorPoint, b: &CantorPoint) -> f64 {
        match (self, a, b) {
            (CantorSystem::Odometer(o), CantorPoint::Word(x), CantorPoint::Word(y)) => o.embed(*x) - o.embed(*y),
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(x), CantorPoint::Denjoy(y)) => {
                signed_diff(d.embed(x).angle(), d.embed(y).angle())
            }
            _ => f64::NAN,
        }
    }

    /// Vector embedding of the base: digit `k` scaled by `2^-(k+1)` under the
    /// sup norm for the odometer (an isometry), the chord picture of the
    /// embedded circle for a Denjoy set.
    fn embed_vec(&self, p: &CantorPoint) -> Vec<f64> {
        match (self, p) {
            (CantorSystem::Odometer(o), CantorPoint::Word(w)) => (0..o.depth)
                .map(|k| Odometer::symbol(*w, k) as f64 * 0.5f64.powi(k as i32 + 1))
                .collect(),
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(q)) => circle_vec(d.embed(q).angle()),
            _ => Vec::new(),
        }
    }

    /// `embed_vec(h(p))`, also for gap endpoints at the truncation depth,
    /// whose image is the (unstored) orbit point one step further.
    fn image_vec(&self, p: &CantorPoint) -> Vec<f64> {
        if let Ok(q) = self.iterate(p, 1) {
            return self.embed_vec(&q);
        }
        match (self, p) {
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(DenjoyPoint::Gap { seed, k, .. })) => {
                let next = DenjoyPoint::Cantor {
                    base: d.orbit_point(*seed, k + 1),
                    side: None,
                };
                circle_vec(d.embed(&next).angle())
            }
            _ => self.embed_vec(p),
        }
    }

    fn norm(&self, v: &[f64]) -> f64 {
        match self {
            CantorSystem::Odometer(_) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            CantorSystem::Denjoy(_) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    fn headroom(&self) -> Option<(f64, u32)> {
        match self {
            CantorSystem::Odometer(o) => Some((o.headroom(), o.depth)),
            CantorSystem::Denjoy(_) => None,
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> CantorPoint {
        match self {
            CantorSystem::Odometer(o) => CantorPoint::Word(rng.gen::<u64>() & o.mask()),
            CantorSystem::Denjoy(d) => CantorPoint::Denjoy(d.random_cantor_point(rng)),
        }
    }

    /// Number of base cells used by density certificates at resolution `bins`.
    fn cell_count(&self, bins: usize) -> usize {
        match self {
            CantorSystem::Odometer(o) => 1usize.checked_shl(o.depth).unwrap_or(usize::MAX),
            CantorSystem::Denjoy(_) => bins,
        }
    }

    /// Base cell: the full cylinder for the odometer, the bin of the rotation
    /// angle for a Denjoy set.
    fn cell(&self, p: &CantorPoint, bins: usize) -> usize {
        match (self, p) {
            (CantorSystem::Odometer(_), CantorPoint::Word(w)) => *w as usize,
            (CantorSystem::Denjoy(d), CantorPoint::Denjoy(q)) => {
                ((d.semiconjugacy(q).angle() * bins as f64) as usize).min(bins - 1)
            }
            _ => 0,
        }
    }
}

/// Point of the circle of circumference 1 in the plane.
fn circle_vec(angle: f64) -> Vec<f64> {
    let t = std::f64::consts::TAU * angle;
    vec![t.cos() / std::f64::consts::TAU, t.sin() / std::f64::consts::TAU]
}

/// A point `(x, s)` of the mapping torus, `0 <= s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuspensionPoint {
    pub base: CantorPoint,
    pub s: f64,
}

/// The suspension flow of a Cantor system with unit roof.
#[derive(Debug, Clone, Serialize)]
pub struct SuspensionSystem {
    base: CantorSystem,
}

pub fn suspend(h: CantorSystem) -> Result<SuspensionSystem> {
    if let CantorSystem::Odometer(o) = &h {
        Odometer::new(o.depth)?;
    }
    Ok(SuspensionSystem { base: h })
}

impl SuspensionSystem {
    pub fn base(&self) -> &CantorSystem {
        &self.base
    }

    /// The point `(x, s)` with the identification applied, so any real `s` is
    /// accepted.
    pub fn point(&self, base: CantorPoint, s: f64) -> Result<SuspensionPoint> {
        self.base.validate(&base)?;
        self.flow_unchecked(&SuspensionPoint { base, s: 0.0 }, s)
    }

    pub fn validate(&self, p: &SuspensionPoint) -> Result<()> {
        self.base.validate(&p.base)?;
        if !(0.0..1.0).contains(&p.s) {
            return Err(Error::InvalidPoint(format!("height {} outside [0, 1)", p.s)));
        }
        Ok(())
    }

    /// `phi_t(x, s) = (x, s + t)` reduced by `(x, 1) ~ (h(x), 0)`.
    pub fn flow(&self, p: &SuspensionPoint, t: f64) -> Result<SuspensionPoint> {
        if let Some((headroom, depth)) = self.base.headroom() {
            if t.abs() > headroom {
                return Err(Error::Depth {
                    time: t,
                    headroom,
                    depth,
                });
            }
        }
        self.flow_unchecked(p, t)
    }

    fn flow_unchecked(&self, p: &SuspensionPoint, t: f64) -> Result<SuspensionPoint> {
        // integer part kept apart so unit times leave the height untouched
        let whole = t.trunc();
        let total = p.s + (t - whole);
        let mut wraps = total.floor();
        let mut s = total - wraps;
        wraps += whole;
        if s >= 1.0 {
            s -= 1.0;
            wraps += 1.0;
        }
        let base = if wraps == 0.0 {
            p.base
        } else {
            self.base.iterate(&p.base, wraps as i64)?
        };
        Ok(SuspensionPoint { base, s })
    }

    /// Metric pulled back from an injective embedding of the mapping torus:
    /// the circle distance of heights plus the norms of the differences of
    /// `(1 - s) e(x) + s e(h x)` and `sin(pi s) e(x)`, where `e` embeds the
    /// base isometrically for the odometer and as a circle chord for a Denjoy
    /// set. Both terms are continuous across `(x, 1) ~ (h(x), 0)` and the
    /// second one separates base points at every height.
    pub fn distance(&self, a: &SuspensionPoint, b: &SuspensionPoint) -> f64 {
        let (ea, eb) = (self.base.embed_vec(&a.base), self.base.embed_vec(&b.base));
        let (ha, hb) = (self.base.image_vec(&a.base), self.base.image_vec(&b.base));
        let (sa, sb) = (a.s, b.s);
        let (wa, wb) = ((std::f64::consts::PI * sa).sin(), (std::f64::consts::PI * sb).sin());
        let slide: Vec<f64> = (0..ea.len())
            .map(|k| ((1.0 - sa) * ea[k] + sa * ha[k]) - ((1.0 - sb) * eb[k] + sb * hb[k]))
            .collect();
        let lift: Vec<f64> = (0..ea.len()).map(|k| wa * ea[k] - wb * eb[k]).collect();
        circle_distance(sa, sb) + self.base.norm(&slide) + self.base.norm(&lift)
    }

    /// Flow-box coordinates of `q` around `center`: (flow time, transversal
    /// displacement), taking the representative of `q` nearest in time.
    pub fn chart(&self, center: &SuspensionPoint, q: &SuspensionPoint) -> Option<(f64, f64)> {
        let m = (q.s - center.s).round() as i64;
        let w = self.base.iterate(&q.base, -m).ok()?;
        let tau = q.s + m as f64 - center.s;
        Some((tau, self.base.transversal(&w, &center.base)))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SuspensionPoint {
        SuspensionPoint {
            base: self.base.random_point(rng),
            s: rng.gen(),
        }
    }

    pub fn time_t_map(&self, t: f64) -> Result<TimeTMap> {
        time_t_map(self, t)
    }
}

/// The time-`t` map `F_t = phi(t, .)` of a suspension flow.
#[derive(Debug, Clone, Serialize)]
pub struct TimeTMap {
    system: SuspensionSystem,
    t: f64,
}

pub fn time_t_map(sys: &SuspensionSystem, t: f64) -> Result<TimeTMap> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("time {t} must be positive")));
    }
    Ok(TimeTMap { system: sys.clone(), t })
}

impl TimeTMap {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn system(&self) -> &SuspensionSystem {
        &self.system
    }

    pub fn apply(&self, p: &SuspensionPoint) -> Result<SuspensionPoint> {
        self.system.flow(p, self.t)
    }

    pub fn apply_inverse(&self, p: &SuspensionPoint) -> Result<SuspensionPoint> {
        self.system.flow(p, -self.t)
    }
}

impl Map for TimeTMap {
    type Point = SuspensionPoint;

    fn step(&self, p: &SuspensionPoint) -> Result<SuspensionPoint> {
        self.apply(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "ε-dense")]
    Dense,
    #[serde(rename = "not ε-dense at N")]
    NotDense,
}

/// Empirical density certificate for a time-`t` map. It never claims
/// minimality, only that `N` steps visited every cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityReport {
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Largest gap between visited heights inside any base cell (1 when a
    /// base cell is never visited).
    pub covering_radius: f64,
    pub verdict: Verdict,
    pub cells_missed: usize,
}

/// Run `n` steps of `F_t` from `start` and record which cells of the
/// (base cell) x (height bin of width `eps`) grid are visited.
pub fn certify_minimal_time(
    sys: &SuspensionSystem,
    t: f64,
    eps: f64,
    n: usize,
    start: &SuspensionPoint,
) -> Result<DensityReport> {
    if !(eps > 0.0) || n == 0 {
        return Err(Error::Precondition(format!("need eps > 0 and N >= 1 (got {eps}, {n})")));
    }
    let map = time_t_map(sys, t)?;
    sys.validate(start)?;
    let bins = (1.0 / eps).ceil() as usize;
    let base_cells = sys.base.cell_count(bins);
    let total = base_cells
        .checked_mul(bins)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::Resource(format!("{base_cells} x {bins} grid exceeds {MAX_CELLS} cells")))?;

    let mut visited = vec![false; total];
    let mut heights: Vec<Vec<f64>> = vec![Vec::new(); base_cells];
    let mut p = *start;
    for step in 0..n {
        if step > 0 {
            p = map.apply(&p)?;
        }
        let cell = sys.base.cell(&p.base, bins);
        let bin = ((p.s * bins as f64) as usize).min(bins - 1);
        visited[cell * bins + bin] = true;
        heights[cell].push(p.s);
    }

    let cells_missed = visited.iter().filter(|v| !**v).count();
    let covering_radius = heights
        .iter_mut()
        .map(|hs| {
            if hs.is_empty() {
                return 1.0;
            }
            hs.sort_by(f64::total_cmp);
            let inner = hs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            inner.max(hs[0]).max(1.0 - hs[hs.len() - 1])
        })
        .fold(0.0, f64::max);

    Ok(DensityReport {
        t,
        eps,
        n,
        covering_radius,
        verdict: if cells_missed == 0 {
            Verdict::Dense
        } else {
            Verdict::NotDense
        },
        cells_missed,
    })
}

/// Height difference on the circle of heights, used by callers comparing
/// flowed points.
pub fn height_distance(a: &SuspensionPoint, b: &SuspensionPoint) -> f64 {
    circle_distance(a.s, b.s)
}

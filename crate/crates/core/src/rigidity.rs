//! Lattice model of the composant tiling and the rotation factor of products.
//!
//! Cells of `Z^2` carry a type from the parities of their indices: even is a
//! pseudo-arc (`p`), odd an arc (`a`). Automorphisms of the tiling are
//! modelled as adjacency- and type-preserving injections of a finite window.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::circle::{circle_distance, reduce};
use crate::skew::TorusPoint;
use crate::{Error, Result};

/// Largest window radius accepted by the exhaustive enumeration.
pub const MAX_WINDOW_RADIUS: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    P,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TileType(pub Phase, pub Phase);

fn phase(i: i64) -> Phase {
    if i.rem_euclid(2) == 0 {
        Phase::P
    } else {
        Phase::A
    }
}

pub fn tile_type(cell: (i64, i64)) -> TileType {
    TileType(phase(cell.0), phase(cell.1))
}

impl TileType {
    fn mixed(self) -> bool {
        self.0 != self.1
    }

    /// Whether a cell of this type may be sent to a cell of type `to`.
    /// Mixed squares `(ap)` and `(pa)` are homeomorphic, so swapping them is
    /// allowed when `allow_swap` is set.
    pub fn admits(self, to: TileType, allow_swap: bool) -> bool {
        self == to || (allow_swap && self.mixed() && to.mixed())
    }
}

/// The cells `{-R, ..., R}^2` with edge adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TilingWindow {
    radius: i64,
}

impl TilingWindow {
    pub fn new(radius: i64) -> Result<Self> {
        if radius < 0 {
            return Err(Error::Precondition(format!("window radius {radius} is negative")));
        }
        Ok(TilingWindow { radius })
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn contains(&self, c: (i64, i64)) -> bool {
        c.0.abs() <= self.radius && c.1.abs() <= self.radius
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> {
        let r = self.radius;
        (-r..=r).flat_map(move |i| (-r..=r).map(move |j| (i, j)))
    }

    fn index(&self, c: (i64, i64)) -> usize {
        let side = 2 * self.radius + 1;
        ((c.0 + self.radius) * side + c.1 + self.radius) as usize
    }

    fn neighbours(&self, c: (i64, i64)) -> impl Iterator<Item = (i64, i64)> + '_ {
        STEPS
            .iter()
            .map(move |s| (c.0 + s.0, c.1 + s.1))
            .filter(|n| self.contains(*n))
    }
}

const STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// An injection of a window into `Z^2`, stored by window cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeMap {
    window: TilingWindow,
    images: Vec<(i64, i64)>,
}

impl LatticeMap {
    pub fn window(&self) -> TilingWindow {
        self.window
    }

    pub fn image(&self, c: (i64, i64)) -> Option<(i64, i64)> {
        self.window.contains(c).then(|| self.images[self.window.index(c)])
    }

    /// `Some((a, b))` when the map is `(i, j) -> (i + a, j + b)` with `a, b` even.
    pub fn as_translation(&self) -> Option<(i64, i64)> {
        let t = self.image((0, 0))?;
        let ok = t.0 % 2 == 0
            && t.1 % 2 == 0
            && self
                .window
                .cells()
                .all(|c| self.image(c) == Some((c.0 + t.0, c.1 + t.1)));
        ok.then_some(t)
    }

    /// `Some((a, b))` when the map is `(i, j) -> (j + a, i + b)` with `a, b` even.
    pub fn as_swap_translation(&self) -> Option<(i64, i64)> {
        let t = self.image((0, 0))?;
        let ok = t.0 % 2 == 0
            && t.1 % 2 == 0
            && self
                .window
                .cells()
                .all(|c| self.image(c) == Some((c.1 + t.0, c.0 + t.1)));
        ok.then_some(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnumerationFlags {
    pub allow_swap: bool,
    /// Each `+i` or `+j` step goes to a `+x` or `+y` step.
    pub monotone: bool,
}

/// Every adjacency- and type-preserving injection of the window whose origin
/// image lies in `[-2R, 2R]^2`, found by backtracking from the origin.
pub fn enumerate_automorphisms(w: &TilingWindow, flags: EnumerationFlags) -> Result<Vec<LatticeMap>> {
    if w.radius > MAX_WINDOW_RADIUS {
        return Err(Error::Resource(format!(
            "window radius {} exceeds the enumeration cap {MAX_WINDOW_RADIUS}",
            w.radius
        )));
    }
    // breadth-first order from the origin; each later cell has an earlier neighbour
    let mut order = vec![(0, 0)];
    let mut seen = vec![false; w.cells().count()];
    seen[w.index((0, 0))] = true;
    let mut queue = VecDeque::from([(0i64, 0i64)]);
    while let Some(c) = queue.pop_front() {
        for n in w.neighbours(c) {
            if !seen[w.index(n)] {
                seen[w.index(n)] = true;
                order.push(n);
                queue.push_back(n);
            }
        }
    }

    let mut search = Search {
        w,
        flags,
        order: &order,
        images: vec![None; seen.len()],
        used: HashMap::new(),
        found: Vec::new(),
    };
    let r = 2 * w.radius;
    for x in -r..=r {
        for y in -r..=r {
            search.try_assign(0, (x, y));
        }
    }
    Ok(search.found)
}

struct Search<'a> {
    w: &'a TilingWindow,
    flags: EnumerationFlags,
    order: &'a [(i64, i64)],
    images: Vec<Option<(i64, i64)>>,
    used: HashMap<(i64, i64), usize>,
    found: Vec<LatticeMap>,
}

impl Search<'_> {
    fn admissible(&self, cell: (i64, i64), img: (i64, i64)) -> bool {
        if self.used.contains_key(&img) || !tile_type(cell).admits(tile_type(img), self.flags.allow_swap) {
            return false;
        }
        self.w.neighbours(cell).all(|n| match self.images[self.w.index(n)] {
            None => true,
            Some(nimg) => {
                let step = (img.0 - nimg.0, img.1 - nimg.1);
                if step.0.abs() + step.1.abs() != 1 {
                    return false;
                }
                if !self.flags.monotone {
                    return true;
                }
                // oriented from the smaller cell to the larger one
                let forward = cell.0 + cell.1 > n.0 + n.1;
                let (dx, dy) = if forward { step } else { (-step.0, -step.1) };
                dx >= 0 && dy >= 0
            }
        })
    }

    fn try_assign(&mut self, depth: usize, img: (i64, i64)) {
        let cell = self.order[depth];
        if !self.admissible(cell, img) {
            return;
        }
        let idx = self.w.index(cell);
        self.images[idx] = Some(img);
        self.used.insert(img, idx);
        if depth + 1 == self.order.len() {
            self.found.push(LatticeMap {
                window: *self.w,
                images: self.images.iter().map(|i| i.expect("all cells assigned")).collect(),
            });
        } else {
            let next = self.order[depth + 1];
            let anchor = self
                .w
                .neighbours(next)
                .find_map(|n| self.images[self.w.index(n)])
                .expect("breadth-first order has an assigned neighbour");
            for s in STEPS {
                self.try_assign(depth + 1, (anchor.0 + s.0, anchor.1 + s.1));
            }
        }
        self.used.remove(&img);
        self.images[idx] = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Z_x_Z2")]
    ZxZ2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RigidityVerdict {
    pub window_radius: i64,
    pub flags: EnumerationFlags,
    pub automorphism_count: usize,
    /// `"all"`, or `"k of n"` when some map is not of product form.
    pub decomposable: String,
    pub group: GroupKind,
    pub translation_count: usize,
    pub swap_count: usize,
    /// Rank of the lattice spanned by the translation vectors.
    pub translation_rank: usize,
    /// Every swap element squares to a translation.
    pub swap_squares_translate: bool,
}

impl RigidityVerdict {
    pub fn all_decomposable(&self) -> bool {
        self.decomposable == "all"
    }
}

/// Decompose each map as an even translation or a swap composed with one,
/// and name the group they generate.
pub fn classify_product_structure(maps: &[LatticeMap], flags: EnumerationFlags) -> Result<RigidityVerdict> {
    let first = maps.first().ok_or(Error::EmptyRequest("no lattice maps to classify"))?;
    let mut translations = Vec::new();
    let mut swaps = Vec::new();
    for m in maps {
        if let Some(t) = m.as_translation() {
            translations.push(t);
        } else if let Some(t) = m.as_swap_translation() {
            swaps.push(t);
        }
    }
    let good = translations.len() + swaps.len();
    // (i, j) -> (j + a, i + b) applied twice is (i, j) -> (i + a + b, j + a + b)
    let swap_squares_translate = swaps.iter().all(|&(a, b)| (a + b) % 2 == 0);
    Ok(RigidityVerdict {
        window_radius: first.window.radius,
        flags,
        automorphism_count: maps.len(),
        decomposable: if good == maps.len() {
            "all".to_string()
        } else {
            format!("{good} of {}", maps.len())
        },
        group: if swaps.is_empty() {
            GroupKind::Z
        } else {
            GroupKind::ZxZ2
        },
        translation_count: translations.len(),
        swap_count: swaps.len(),
        translation_rank: lattice_rank(&translations),
        swap_squares_translate,
    })
}

fn lattice_rank(vectors: &[(i64, i64)]) -> usize {
    let nonzero: Vec<_> = vectors.iter().filter(|v| **v != (0, 0)).collect();
    match nonzero.first() {
        None => 0,
        Some(&&(a, b)) => {
            if nonzero.iter().any(|&&(c, d)| a * d - b * c != 0) {
                2
            } else {
                1
            }
        }
    }
}

/// `I(x, y) = k2 x - k1 y (mod 1)`, constant along orbits of
/// `(x, y) -> (x + k1 alpha, y + k2 alpha)`.
pub fn rotation_invariant(k1: i64, k2: i64, p: TorusPoint) -> f64 {
    reduce(k2 as f64 * p.x - k1 as f64 * p.y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InvariantReport {
    pub invariant: f64,
    pub steps: usize,
    pub max_drift: f64,
}

/// Evaluate the invariant at `p0` and track its drift along `steps` iterates.
pub fn product_rotation_invariant(
    k1: i64,
    k2: i64,
    alpha: f64,
    p0: TorusPoint,
    steps: usize,
) -> Result<InvariantReport> {
    if k1 == 0 && k2 == 0 {
        return Err(Error::Precondition("(k1, k2) must not both vanish".into()));
    }
    let invariant = rotation_invariant(k1, k2, p0);
    let (dx, dy) = (reduce(k1 as f64 * alpha), reduce(k2 as f64 * alpha));
    let mut p = p0;
    let mut max_drift: f64 = 0.0;
    for _ in 0..steps {
        p = TorusPoint::new(p.x + dx, p.y + dy);
        max_drift = max_drift.max(circle_distance(rotation_invariant(k1, k2, p), invariant));
    }
    Ok(InvariantReport {
        invariant,
        steps,
        max_drift,
    })
}

/// Exact version over a rational rotation number `num / den` and a start
/// point `(x_num / den, y_num / den)`. Returns the invariant numerator and
/// the largest drift numerator, both over `den`.
pub fn product_rotation_invariant_exact(
    k1: i64,
    k2: i64,
    (num, den): (i64, i64),
    (x_num, y_num): (i64, i64),
    steps: usize,
) -> Result<(i64, i64)> {
    if k1 == 0 && k2 == 0 {
        return Err(Error::Precondition("(k1, k2) must not both vanish".into()));
    }
    if den <= 0 {
        return Err(Error::Precondition("denominator must be positive".into()));
    }
    let d = den as i128;
    let inv = |x: i128, y: i128| (k2 as i128 * x - k1 as i128 * y).rem_euclid(d);
    let (mut x, mut y) = ((x_num as i128).rem_euclid(d), (y_num as i128).rem_euclid(d));
    let start = inv(x, y);
    let mut drift = 0i128;
    for _ in 0..steps {
        x = (x + k1 as i128 * num as i128).rem_euclid(d);
        y = (y + k2 as i128 * num as i128).rem_euclid(d);
        let diff = (inv(x, y) - start).rem_euclid(d);
        drift = drift.max(diff.min(d - diff));
    }
    Ok((start as i64, drift as i64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MarginReport {
    pub delta_invariant: f64,
    pub bound: f64,
    pub min_distance: f64,
    pub steps: usize,
    /// Running minimum at each requested checkpoint.
    pub checkpoints: Vec<(usize, f64)>,
}

impl MarginReport {
    pub fn respects_bound(&self, tol: f64) -> bool {
        self.min_distance >= self.bound - tol
    }
}

/// Orbit distance from `target` against the analytic bound
/// `dI / sqrt(k1^2 + k2^2)`: the orbit stays on the subtorus `I = I(p0)`.
pub fn product_nonminimality_report(
    k1: i64,
    k2: i64,
    alpha: f64,
    p0: TorusPoint,
    target: TorusPoint,
    steps: usize,
    checkpoints: &[usize],
) -> Result<MarginReport> {
    if k1 == 0 && k2 == 0 {
        return Err(Error::Precondition("(k1, k2) must not both vanish".into()));
    }
    let delta_invariant = circle_distance(rotation_invariant(k1, k2, target), rotation_invariant(k1, k2, p0));
    if delta_invariant < 1e-12 {
        return Err(Error::DegenerateTarget {
            invariant: rotation_invariant(k1, k2, target),
        });
    }
    let bound = delta_invariant / ((k1 * k1 + k2 * k2) as f64).sqrt();
    let (dx, dy) = (reduce(k1 as f64 * alpha), reduce(k2 as f64 * alpha));
    let (min_distance, checkpoints) = scan_minimum(p0, target, (dx, dy), steps, checkpoints);
    Ok(MarginReport {
        delta_invariant,
        bound,
        min_distance,
        steps,
        checkpoints,
    })
}

/// Running minima of the distance from `target` along the orbit of the
/// translation by `(alpha, beta)`, reported at each checkpoint.
pub fn contrast_minima(
    alpha: f64,
    beta: f64,
    p0: TorusPoint,
    target: TorusPoint,
    checkpoints: &[usize],
) -> Vec<(usize, f64)> {
    let steps = checkpoints.iter().copied().max().unwrap_or(0);
    scan_minimum(p0, target, (alpha, beta), steps, checkpoints).1
}

fn scan_minimum(
    p0: TorusPoint,
    target: TorusPoint,
    (dx, dy): (f64, f64),
    steps: usize,
    checkpoints: &[usize],
) -> (f64, Vec<(usize, f64)>) {
    let mut marks: Vec<usize> = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= steps).collect();
    marks.sort_unstable();
    marks.dedup();
    let mut out = Vec::with_capacity(marks.len());
    let mut next = marks.iter().peekable();
    let mut p = p0;
    let mut min = f64::INFINITY;
    for n in 1..=steps {
        min = min.min(p.distance(target));
        while next.peek() == Some(&&n) {
            out.push((n, min));
            next.next();
        }
        p = TorusPoint::new(p.x + dx, p.y + dy);
    }
    (min, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::golden;

    const MONO: EnumerationFlags = EnumerationFlags {
        allow_swap: false,
        monotone: true,
    };
    const MONO_SWAP: EnumerationFlags = EnumerationFlags {
        allow_swap: true,
        monotone: true,
    };

    fn translation_vectors(maps: &[LatticeMap]) -> Vec<(i64, i64)> {
        maps.iter().filter_map(LatticeMap::as_translation).collect()
    }

    #[test]
    fn tile_types() {
        assert_eq!(tile_type((0, 0)), TileType(Phase::P, Phase::P));
        assert_eq!(tile_type((-1, 2)), TileType(Phase::A, Phase::P));
        assert!(tile_type((0, 1)).admits(tile_type((1, 0)), true));
        assert!(!tile_type((0, 1)).admits(tile_type((1, 0)), false));
        assert!(!tile_type((0, 0)).admits(tile_type((1, 1)), true));
    }

    #[test]
    fn radius_two_translations() {
        let w = TilingWindow::new(2).unwrap();
        let maps = enumerate_automorphisms(&w, MONO).unwrap();
        assert_eq!(maps.len(), 25);
        let t = translation_vectors(&maps);
        assert_eq!(t.len(), 25);
        assert!(t.contains(&(0, 0)));
        assert!(t.contains(&(2, 0)));
        assert!(!t.iter().any(|v| v.0 % 2 != 0 || v.1 % 2 != 0));
        let v = classify_product_structure(&maps, MONO).unwrap();
        assert!(v.all_decomposable());
        assert_eq!(v.group, GroupKind::Z);
        assert_eq!(v.translation_rank, 2);
    }

    #[test]
    fn radius_two_with_swap() {
        let w = TilingWindow::new(2).unwrap();
        let maps = enumerate_automorphisms(&w, MONO_SWAP).unwrap();
        assert_eq!(maps.len(), 50);
        let v = classify_product_structure(&maps, MONO_SWAP).unwrap();
        assert!(v.all_decomposable());
        assert_eq!(v.group, GroupKind::ZxZ2);
        assert_eq!(v.swap_count, 25);
        assert!(v.swap_squares_translate);
    }

    #[test]
    fn without_monotone_reflections_appear() {
        let w = TilingWindow::new(1).unwrap();
        let flags = EnumerationFlags {
            allow_swap: true,
            monotone: false,
        };
        let maps = enumerate_automorphisms(&w, flags).unwrap();
        // the dihedral group of the square times the even translations
        assert_eq!(maps.len(), 8 * 9);
        let v = classify_product_structure(&maps, flags).unwrap();
        assert_eq!(v.decomposable, "18 of 72");
    }

    #[test]
    fn identity_only() {
        let w = TilingWindow::new(0).unwrap();
        let maps = enumerate_automorphisms(&w, MONO).unwrap();
        let id: Vec<LatticeMap> = maps
            .into_iter()
            .filter(|m| m.as_translation() == Some((0, 0)))
            .collect();
        assert_eq!(id.len(), 1);
        let v = classify_product_structure(&id, MONO).unwrap();
        assert_eq!(v.group, GroupKind::Z);
        assert_eq!(v.translation_rank, 0);
    }

    #[test]
    fn radius_cap() {
        let w = TilingWindow::new(5).unwrap();
        assert!(matches!(enumerate_automorphisms(&w, MONO), Err(Error::Resource(_))));
        assert!(classify_product_structure(&[], MONO).is_err());
    }

    #[test]
    fn invariant_examples() {
        let r = product_rotation_invariant(1, 2, golden(), TorusPoint::new(0.0, 0.0), 1000).unwrap();
        assert_eq!(r.invariant, 0.0);
        assert!(r.max_drift < 1e-12);
        let r = product_rotation_invariant(1, 2, golden(), TorusPoint::new(0.1, 0.3), 1000).unwrap();
        assert!((r.invariant - 0.9).abs() < 1e-15);
        assert!(product_rotation_invariant(0, 0, golden(), TorusPoint::new(0.0, 0.0), 10).is_err());
    }

    #[test]
    fn exact_invariant_has_no_drift() {
        let (inv, drift) = product_rotation_invariant_exact(1, 2, (13, 21), (2, 7), 10_000).unwrap();
        assert_eq!(inv, (2 * 2 - 7i64).rem_euclid(21));
        assert_eq!(drift, 0);
    }

    #[test]
    fn margin_examples() {
        let target = TorusPoint::new(0.0, 0.25);
        let r =
            product_nonminimality_report(1, 2, golden(), TorusPoint::new(0.0, 0.0), target, 10_000, &[100]).unwrap();
        assert!((r.delta_invariant - 0.25).abs() < 1e-15);
        assert!((r.bound - 0.25 / 5f64.sqrt()).abs() < 1e-15);
        assert!(r.respects_bound(1e-12));
        assert_eq!(r.checkpoints.len(), 1);
        let on_orbit = TorusPoint::new(golden(), reduce(2.0 * golden()));
        assert!(matches!(
            product_nonminimality_report(1, 2, golden(), TorusPoint::new(0.0, 0.0), on_orbit, 10, &[]),
            Err(Error::DegenerateTarget { .. })
        ));
    }

    #[test]
    fn contrast_minima_decrease() {
        let m = contrast_minima(
            golden(),
            2f64.sqrt() - 1.0,
            TorusPoint::new(0.0, 0.0),
            TorusPoint::new(0.0, 0.25),
            &[100, 1000, 10_000],
        );
        assert_eq!(m.len(), 3);
        assert!((m[0].1 - 0.0846).abs() < 1e-4);
        assert!(m.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(m[2].1 < 0.012);
    }
}

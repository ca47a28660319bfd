//! Crooked piecewise-linear bonding maps and finite inverse-limit towers.
//!
//! The maps built here fix `0` and `1` and zig-zag back on themselves at every
//! scale, so their inverse limits approximate the pseudo-arc.

use serde::Serialize;

use crate::{Error, Result};

/// Consistency tolerance for towers.
pub const TOWER_TOL: f64 = 1e-9;

const CMP_TOL: f64 = 1e-12;

/// A continuous piecewise-linear map of `[0, 1]` given by its breakpoints.
///
/// In extended form the map is also defined on `[-1, 2]`, as the identity
/// outside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BondingMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
    extended: bool,
}

impl BondingMap {
    /// Breakpoints must start at `x = 0`, end at `x = 1`, be strictly increasing
    /// in `x` and take values in `[0, 1]`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Precondition(
                "a bonding map needs at least two breakpoints".into(),
            ));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if xs[0] != 0.0 || xs[xs.len() - 1] != 1.0 {
            return Err(Error::Precondition("breakpoints must span [0, 1]".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(
                "breakpoint abscissae must increase strictly".into(),
            ));
        }
        if ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::Precondition("breakpoint values must lie in [0, 1]".into()));
        }
        Ok(BondingMap {
            xs,
            ys,
            extended: false,
        })
    }

    pub fn identity() -> Self {
        BondingMap {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            extended: false,
        }
    }

    /// The same map on `[-1, 2]`, equal to the identity off `(0, 1)`.
    /// Requires `g(0) = 0` and `g(1) = 1` so the extension is continuous.
    pub fn extended(&self) -> Result<Self> {
        if self.ys[0] != 0.0 || self.ys[self.ys.len() - 1] != 1.0 {
            return Err(Error::Precondition(
                "only endpoint-fixing maps extend by the identity".into(),
            ));
        }
        Ok(BondingMap {
            extended: true,
            ..self.clone()
        })
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn breakpoint_count(&self) -> usize {
        self.xs.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        if self.extended {
            (-1.0, 2.0)
        } else {
            (0.0, 1.0)
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain { x, lo, hi });
        }
        if !(0.0..=1.0).contains(&x) {
            return Ok(x);
        }
        Ok(self.eval_unit(x))
    }

    fn eval_unit(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&b| b <= x);
        if k == 0 {
            return self.ys[0];
        }
        if k >= self.xs.len() {
            return self.ys[self.ys.len() - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        if x == x0 {
            return y0;
        }
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    }

    fn value_range(&self) -> (f64, f64) {
        let min = self.ys.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }

    fn require_surjective(&self) -> Result<()> {
        let (min, max) = self.value_range();
        if min > CMP_TOL || max < 1.0 - CMP_TOL {
            return Err(Error::NotSurjective { min, max });
        }
        Ok(())
    }

    /// `self ∘ inner` on `[0, 1]`, with breakpoints at those of `inner` and at
    /// the `inner`-preimages of the breakpoints of `self`.
    pub fn compose(&self, inner: &BondingMap) -> BondingMap {
        let mut xs = inner.xs.clone();
        for k in 0..inner.xs.len() - 1 {
            let (y0, y1) = (inner.ys[k], inner.ys[k + 1]);
            if y0 == y1 {
                continue;
            }
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            for &v in &self.xs {
                if v > lo && v < hi {
                    xs.push(inner.xs[k] + (v - y0) / (y1 - y0) * (inner.xs[k + 1] - inner.xs[k]));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= CMP_TOL);
        let ys = xs
            .iter()
            .map(|&x| self.eval_unit(inner.eval_unit(x)).clamp(0.0, 1.0))
            .collect();
        BondingMap {
            xs,
            ys,
            extended: false,
        }
    }

    /// `g^m`.
    pub fn power(&self, m: u32) -> Result<BondingMap> {
        if m == 0 {
            return Err(Error::Precondition("power must be at least 1".into()));
        }
        let mut out = self.clone();
        out.extended = false;
        for _ in 1..m {
            out = self.compose(&out);
        }
        Ok(out)
    }

    /// All `x` in `[0, 1]` with `g(x) = y`, left to right.
    pub fn preimages(&self, y: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for k in 0..self.xs.len() - 1 {
            let (y0, y1) = (self.ys[k], self.ys[k + 1]);
            let x = if (y0 - y).abs() <= CMP_TOL {
                self.xs[k]
            } else if (y1 - y).abs() <= CMP_TOL {
                self.xs[k + 1]
            } else if (y0 - y) * (y1 - y) < 0.0 {
                self.xs[k] + (y - y0) / (y1 - y0) * (self.xs[k + 1] - self.xs[k])
            } else {
                continue;
            };
            if out.last().is_none_or(|&last| x - last > CMP_TOL) {
                out.push(x);
            }
        }
        out
    }
}

pub fn bonding_eval(g: &BondingMap, x: f64) -> Result<f64> {
    g.eval(x)
}

/// Vertex sequence of a crooked path from `a` to `b` on the integer lattice:
/// go most of the way, turn back almost to the start, then finish.
fn crooked_path(a: i64, b: i64, out: &mut Vec<i64>) {
    let step = if b > a { 1 } else { -1 };
    if (b - a).abs() <= 2 {
        let mut v = a;
        while v != b {
            v += step;
            out.push(v);
        }
        return;
    }
    crooked_path(a, b - step, out);
    crooked_path(b - step, a + step, out);
    crooked_path(a + step, b, out);
}

/// A `(1/level)`-crooked map fixing both endpoints.
///
/// Values live on the grid `j / (2 level)` and the breakpoints are equally
/// spaced. Level 1 is the identity.
pub fn crooked_map(level: u32) -> Result<BondingMap> {
    if level == 0 {
        return Err(Error::Precondition("crooked map level must be at least 1".into()));
    }
    let n = 2 * level as i64;
    let mut path = vec![0];
    crooked_path(0, n, &mut path);
    let segments = (path.len() - 1) as f64;
    let points: Vec<(f64, f64)> = path
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 / segments, v as f64 / n as f64))
        .collect();
    BondingMap::new(&points)
}

/// Heuristic level schedule for successive stages: the level doubles each
/// stage starting from `start`.
pub fn level_schedule(start: u32, stages: usize) -> Vec<u32> {
    (0..stages).map(|k| start.saturating_mul(1 << k.min(31))).collect()
}

/// Exact check of `delta`-crookedness: for all `a < b` there are `a < c < d < b`
/// with `|f(c) - f(b)| <= delta` and `|f(d) - f(a)| <= delta`.
///
/// Failing pairs can be pushed to breakpoints, so scanning breakpoint pairs
/// decides the property.
pub fn is_delta_crooked(f: &BondingMap, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0, 1]")));
    }
    f.require_surjective()?;
    let negated: Vec<f64> = f.ys.iter().map(|y| -y).collect();
    Ok(crooked_upward(&f.ys, delta) && crooked_upward(&negated, delta))
}

/// Pairs with `f(b) - f(a) > delta`: after first climbing to `f(b) - delta`,
/// the path has to dip back to `f(a) + delta` before `b`.
fn crooked_upward(ys: &[f64], delta: f64) -> bool {
    for i in 0..ys.len() {
        let a = ys[i];
        let mut running_max = f64::NEG_INFINITY;
        // running max of ys over (i, last dip], if any dip was seen
        let mut max_at_dip = f64::NEG_INFINITY;
        for &b in &ys[i + 1..] {
            running_max = running_max.max(b);
            if b <= a + delta + CMP_TOL {
                max_at_dip = running_max;
            }
            if b - a > delta + CMP_TOL && max_at_dip < b - delta - CMP_TOL {
                return false;
            }
        }
    }
    true
}

/// Smallest `delta` (to within `tol`) for which `f` is `delta`-crooked.
pub fn crookedness(f: &BondingMap, tol: f64) -> Result<f64> {
    f.require_surjective()?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_delta_crooked(f, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Finite inverse-limit coordinates `(x_0, x_1, ..., x_m)` with `x_k = g(x_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tower {
    coords: Vec<f64>,
}

impl Tower {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyRequest("tower without coordinates"));
        }
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Precondition("tower coordinates must lie in [0, 1]".into()));
        }
        Ok(Tower { coords })
    }

    pub fn constant(value: f64, depth: usize) -> Result<Self> {
        Tower::new(vec![value; depth.max(1)])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn depth(&self) -> usize {
        self.coords.len()
    }

    pub fn head(&self) -> f64 {
        self.coords[0]
    }

    pub fn last(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// Append the `branch`-th preimage (left to right) of the last coordinate.
pub fn tower_extend(g: &BondingMap, t: &Tower, branch: usize) -> Result<Tower> {
    g.require_surjective()?;
    let pre = g.preimages(t.last());
    let x = *pre.get(branch).ok_or(Error::Branch {
        branch,
        count: pre.len(),
    })?;
    let mut coords = t.coords.clone();
    coords.push(x.clamp(0.0, 1.0));
    Ok(Tower { coords })
}

pub fn tower_check(g: &BondingMap, t: &Tower) -> bool {
    t.coords
        .windows(2)
        .all(|w| (0.0..=1.0).contains(&w[1]) && (g.eval_unit(w[1]) - w[0]).abs() <= TOWER_TOL)
}

/// Weighted `l1` distance with weights `2^-k`, scaled so the diameter is 2.
pub fn tower_metric(a: &Tower, b: &Tower) -> Result<f64> {
    if a.depth() != b.depth() {
        return Err(Error::TowerDepth {
            left: a.depth(),
            right: b.depth(),
        });
    }
    let mut weight = 1.0;
    let mut norm = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.coords.iter().zip(&b.coords) {
        sum += weight * (x - y).abs();
        norm += weight;
        weight *= 0.5;
    }
    Ok(2.0 * sum / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_two_shape() {
        let g = crooked_map(2).unwrap();
        let values: Vec<f64> = g.breakpoints().map(|(_, y)| y * 4.0).collect();
        assert_eq!(values, [0., 1., 2., 1., 2., 3., 2., 1., 2., 3., 2., 3., 4.]);
        assert_eq!(crooked_map(1).unwrap().breakpoints().count(), 3);
        assert!(crooked_map(0).is_err());
    }

    #[test]
    fn breakpoints_grow() {
        let counts: Vec<usize> = (1..=6).map(|l| crooked_map(l).unwrap().breakpoint_count()).collect();
        assert_eq!(counts, [3, 13, 71, 409, 2379, 13861]);
    }

    #[test]
    fn eval_examples() {
        let g = crooked_map(3).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        let e = g.extended().unwrap();
        assert_eq!(e.eval(-0.5).unwrap(), -0.5);
        assert_eq!(e.eval(1.7).unwrap(), 1.7);
        assert!(matches!(e.eval(2.5), Err(Error::Domain { .. })));
        assert!(matches!(g.eval(-0.5), Err(Error::Domain { .. })));
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert_eq!(e.eval(x).unwrap(), g.eval(x).unwrap());
        }
        let seg = BondingMap::new(&[(0.0, 0.0), (0.2, 0.4), (0.4, 0.1), (1.0, 1.0)]).unwrap();
        assert!((seg.eval(0.3).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(seg.eval(0.2).unwrap(), 0.4);
    }

    #[test]
    fn invalid_maps() {
        assert!(BondingMap::new(&[(0.0, 0.0)]).is_err());
        assert!(BondingMap::new(&[(0.0, 0.0), (0.5, 0.3), (0.5, 0.4), (1.0, 1.0)]).is_err());
        assert!(BondingMap::new(&[(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(BondingMap::new(&[(0.0, 0.0), (1.0, 1.5)]).is_err());
        let partial = BondingMap::new(&[(0.0, 0.0), (1.0, 0.5)]).unwrap();
        assert!(partial.extended().is_err());
        assert!(matches!(
            is_delta_crooked(&partial, 0.5),
            Err(Error::NotSurjective { .. })
        ));
    }

    #[test]
    fn identity_is_not_crooked() {
        let id = BondingMap::identity();
        assert!(!is_delta_crooked(&id, 0.1).unwrap());
        assert!(!is_delta_crooked(&id, 0.999).unwrap());
        assert!(is_delta_crooked(&id, 1.0).unwrap());
        assert!(is_delta_crooked(&crooked_map(1).unwrap(), 1.0).unwrap());
        assert!(is_delta_crooked(&id, 0.0).is_err());
    }

    #[test]
    fn crooked_levels() {
        for level in 2..=5 {
            let g = crooked_map(level).unwrap();
            assert!(is_delta_crooked(&g, 1.0 / level as f64).unwrap(), "level {level}");
        }
        let g = crooked_map(3).unwrap();
        assert!(is_delta_crooked(&g, 1.0 / 6.0).unwrap());
        assert!(!is_delta_crooked(&g, 1.0 / 6.0 - 1e-3).unwrap());
    }

    #[test]
    fn exact_crookedness() {
        let g = crooked_map(2).unwrap();
        assert!((crookedness(&g, 1e-9).unwrap() - 0.25).abs() < 1e-8);
        assert!((crookedness(&BondingMap::identity(), 1e-9).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn composition_keeps_crookedness() {
        let g = crooked_map(2).unwrap();
        let mut prev = crookedness(&g, 1e-6).unwrap();
        for m in 2..=3 {
            let gm = g.power(m).unwrap();
            assert_eq!(gm.eval(0.0).unwrap(), 0.0);
            assert_eq!(gm.eval(1.0).unwrap(), 1.0);
            let d = crookedness(&gm, 1e-6).unwrap();
            assert!(d <= prev + 1e-6, "m={m}: {d} > {prev}");
            prev = d;
        }
        assert_eq!(g.power(2).unwrap().breakpoint_count(), 37);
    }

    #[test]
    fn composition_matches_pointwise() {
        let g = crooked_map(2).unwrap();
        let h = crooked_map(3).unwrap();
        let gh = g.compose(&h);
        for k in 0..=997 {
            let x = k as f64 / 997.0;
            let direct = g.eval(h.eval(x).unwrap()).unwrap();
            assert!((gh.eval(x).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn towers() {
        let g = crooked_map(2).unwrap();
        let zero = Tower::new(vec![0.0]).unwrap();
        assert_eq!(tower_extend(&g, &zero, 0).unwrap().coords(), [0.0, 0.0]);
        assert!(matches!(
            tower_extend(&g, &zero, 1),
            Err(Error::Branch { branch: 1, count: 1 })
        ));
        let one = Tower::new(vec![1.0]).unwrap();
        assert_eq!(tower_extend(&g, &one, 0).unwrap().coords(), [1.0, 1.0]);

        let pre = g.preimages(0.5);
        let expected = [2.0, 4.0, 6.0, 8.0, 10.0].map(|v| v / 12.0);
        assert_eq!(pre.len(), expected.len());
        for (p, e) in pre.iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
        let half = Tower::new(vec![0.5]).unwrap();
        for branch in 0..pre.len() {
            let t = tower_extend(&g, &half, branch).unwrap();
            assert!(tower_check(&g, &t));
        }
    }

    #[test]
    fn tower_check_examples() {
        let g = BondingMap::new(&[(0.0, 0.0), (0.1, 0.3), (1.0, 1.0)]).unwrap();
        assert!(tower_check(&g, &Tower::constant(0.0, 3).unwrap()));
        assert!(!tower_check(&g, &Tower::new(vec![0.5, 0.1]).unwrap()));
        assert!(tower_check(&g, &Tower::new(vec![0.37]).unwrap()));
    }

    #[test]
    fn tower_metric_examples() {
        let a = Tower::constant(0.0, 3).unwrap();
        let b = Tower::constant(1.0, 3).unwrap();
        assert_eq!(tower_metric(&a, &a).unwrap(), 0.0);
        assert_eq!(tower_metric(&a, &b).unwrap(), 2.0);
        assert_eq!(tower_metric(&a, &b).unwrap(), tower_metric(&b, &a).unwrap());
        let c = Tower::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert!((tower_metric(&a, &c).unwrap() - 2.0 * 0.5 / 1.75).abs() < 1e-15);
        assert!(matches!(
            tower_metric(&a, &Tower::constant(0.0, 2).unwrap()),
            Err(Error::TowerDepth { left: 3, right: 2 })
        ));
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(level_schedule(2, 4), [2, 4, 8, 16]);
    }
}

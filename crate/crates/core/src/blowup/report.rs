use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BaseSystem, StageSpace};
use crate::{Error, Result, POINT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdCount {
    pub n: u32,
    /// Fibers whose measured diameter is below `1/n`.
    pub measured: usize,
    /// `|{i : 2 w_i < 1/n}|` from the weight formula.
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlmostOneToOneReport {
    pub samples: usize,
    /// Sampled base points off the blown orbit, whose fiber is a singleton.
    pub singletons: usize,
    pub singleton_fraction: f64,
    pub fiber_diameters: Vec<(i64, f64)>,
    pub thresholds: Vec<ThresholdCount>,
}

impl AlmostOneToOneReport {
    pub fn thresholds_match(&self) -> bool {
        self.thresholds.iter().all(|t| t.measured == t.expected)
    }
}

/// Sample base points with a seeded generator and tabulate fiber sizes.
pub fn almost_one_to_one_report<B: BaseSystem>(
    x: &StageSpace<B>,
    sample_count: usize,
    thresholds: &[u32],
    seed: u64,
) -> Result<AlmostOneToOneReport> {
    if sample_count == 0 {
        return Err(Error::EmptyRequest("almost 1-1 report without samples"));
    }
    if thresholds.contains(&0) {
        return Err(Error::Precondition("thresholds are 1/n for n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = x.indices().indices();
    let mut singletons = 0;
    for _ in 0..sample_count {
        let q = x.base().random_point(&mut rng);
        if indices.iter().all(|&i| x.base().distance(&q, x.z(i)) > POINT_TOL) {
            singletons += 1;
        }
    }
    let fiber_diameters = indices
        .iter()
        .map(|&i| Ok((i, x.fiber_diameter(i)?)))
        .collect::<Result<Vec<_>>>()?;
    let thresholds = thresholds
        .iter()
        .map(|&n| {
            let bound = 1.0 / n as f64;
            ThresholdCount {
                n,
                measured: fiber_diameters.iter().filter(|(_, d)| *d < bound).count(),
                expected: indices
                    .iter()
                    .filter(|&&i| 2.0 * x.weights().ratio().powi(i.unsigned_abs() as i32) < bound)
                    .count(),
            }
        })
        .collect();
    Ok(AlmostOneToOneReport {
        samples: sample_count,
        singletons,
        singleton_fraction: singletons as f64 / sample_count as f64,
        fiber_diameters,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{build_stage, BlownIndexSet, FiberKind, SkewBase, Weights};
    use crate::circle::golden;
    use crate::skew::{RoofFunction, SkewSystem, TorusPoint};

    #[test]
    fn random_samples_are_singletons() {
        let sys = SkewSystem::new(golden(), RoofFunction::odd(&[(1, 0.05)]).unwrap()).unwrap();
        let x = build_stage(
            SkewBase::new(sys),
            TorusPoint::new(0.0, 0.0),
            BlownIndexSet::TwoSided(8),
            FiberKind::Interval,
            Weights::default(),
        )
        .unwrap();
        let n: Vec<u32> = (1..=10).collect();
        let r = almost_one_to_one_report(&x, 10_000, &n, 7).unwrap();
        assert_eq!(r.singleton_fraction, 1.0);
        assert!(r.thresholds_match());
        // 2 * 2^-|i| < 1 iff |i| >= 2
        assert_eq!(r.thresholds[0].expected, 14);
        assert_eq!(r, almost_one_to_one_report(&x, 10_000, &n, 7).unwrap());
        assert!(almost_one_to_one_report(&x, 0, &n, 7).is_err());
    }
}

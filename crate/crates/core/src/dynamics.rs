//! The common interface for discrete dynamical systems.

use crate::{Error, Result};

/// A (possibly partial) self-map of a phase space.
///
/// `step` is fallible because several systems are finite representations of
/// infinite objects and can run off the end of what they store.
pub trait Map {
    type Point: Clone;

    fn step(&self, p: &Self::Point) -> Result<Self::Point>;
}

/// Forward orbit `[x, f(x), ..., f^{n-1}(x)]`.
pub fn orbit<M: Map>(map: &M, x: M::Point, n: usize) -> Result<Vec<M::Point>> {
    if n == 0 {
        return Err(Error::EmptyRequest("orbit length must be at least 1"));
    }
    let mut out = Vec::with_capacity(n);
    out.push(x);
    for _ in 1..n {
        let next = map.step(out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

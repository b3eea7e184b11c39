//! The pairing (configuration) model: vertex `v` owns points `Δv .. Δv+Δ−1`, and a
//! uniformly random perfect matching of the points gives the multigraph.

use rand::seq::SliceRandom;

use super::RegularGraph;
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Largest point count `Δn` accepted by [`enumerate_pairings`].
pub const ENUMERATION_POINT_LIMIT: usize = 16;

fn check(n: usize, delta: usize) -> Result<()> {
    if n == 0 || delta == 0 {
        return invalid("n and delta must be positive");
    }
    if (n * delta) % 2 == 1 {
        return invalid(format!("Δn must be even, got {}", n * delta));
    }
    Ok(())
}

/// Graph induced by a perfect matching of the `Δn` points.
pub fn pairing_to_graph(n: usize, delta: usize, pairs: &[(usize, usize)]) -> RegularGraph {
    let edges = pairs
        .iter()
        .map(|&(a, b)| {
            let (u, v) = (a / delta, b / delta);
            (u.min(v), u.max(v))
        })
        .collect();
    RegularGraph { n, delta, edges, roles: None, seed: None }
}

pub fn pairing_sample(n: usize, delta: usize, seed: u64) -> Result<RegularGraph> {
    check(n, delta)?;
    let mut points: Vec<usize> = (0..n * delta).collect();
    points.shuffle(&mut rng::from_seed(seed));
    let pairs: Vec<(usize, usize)> = points.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let mut g = pairing_to_graph(n, delta, &pairs);
    g.seed = Some(seed);
    Ok(g)
}

/// `(2m−1)!! = 1·3·…·(2m−1)`, the number of perfect matchings of `2m` points.
pub fn double_factorial(points: usize) -> u128 {
    (1..points as u128).step_by(2).product()
}

/// Iterator over all perfect matchings of `Δn` points. Each matching is produced as a
/// mixed-radix counter: at step `k` the smallest unmatched point is paired with the
/// `digit[k]`-th remaining point.
#[derive(Clone, Debug)]
pub struct PairingIter {
    points: usize,
    digits: Vec<usize>,
    done: bool,
}

impl PairingIter {
    fn decode(&self) -> Vec<(usize, usize)> {
        let mut free: Vec<usize> = (0..self.points).collect();
        let mut pairs = Vec::with_capacity(self.points / 2);
        for &d in &self.digits {
            let a = free.remove(0);
            let b = free.remove(d);
            pairs.push((a, b));
        }
        pairs
    }
}

impl Iterator for PairingIter {
    type Item = Vec<(usize, usize)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.decode();
        let m = self.digits.len();
        let mut k = m;
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            let radix = self.points - 2 * k - 1;
            if self.digits[k] + 1 < radix {
                self.digits[k] += 1;
                break;
            }
            self.digits[k] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_pairings(n: usize, delta: usize) -> Result<PairingIter> {
    check(n, delta)?;
    let points = n * delta;
    if points > ENUMERATION_POINT_LIMIT {
        return Err(Error::Guard(format!("{points} points exceed the enumeration limit {ENUMERATION_POINT_LIMIT}")));
    }
    Ok(PairingIter { points, digits: vec![0; points / 2], done: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_pairings(2, 3).unwrap().count(), 15);
        assert_eq!(enumerate_pairings(2, 2).unwrap().count(), 3);
        assert_eq!(enumerate_pairings(4, 3).unwrap().count(), 10395);
        assert_eq!(double_factorial(12), 10395);
    }

    #[test]
    fn no_duplicates_and_perfect() {
        let all: Vec<_> = enumerate_pairings(4, 2).unwrap().collect();
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for p in &all {
            let mut seen: Vec<usize> = p.iter().flat_map(|&(a, b)| [a, b]).collect();
            seen.sort();
            assert_eq!(seen, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(enumerate_pairings(6, 3), Err(Error::Guard(_))));
        assert!(pairing_sample(3, 3, 1).is_err());
    }

    #[test]
    fn forced_self_loop() {
        let g = pairing_sample(1, 2, 9).unwrap();
        assert_eq!(g.edges, vec![(0, 0)]);
    }

    #[test]
    fn sample_is_regular_and_deterministic() {
        let a = pairing_sample(50, 3, 42).unwrap();
        assert!(a.is_regular());
        assert_eq!(a, pairing_sample(50, 3, 42).unwrap());
        assert_ne!(a.edges, pairing_sample(50, 3, 43).unwrap().edges);
    }
}

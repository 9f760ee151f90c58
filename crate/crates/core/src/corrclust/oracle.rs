use alloc::vec;
use alloc::vec::Vec;

use crate::density::{Sign, SignedWeightedGraph};
use crate::{validate_partition, Error, Partition, Result};

/// Largest node count the exhaustive search accepts (Bell(12) = 4,213,597).
pub const ORACLE_MAX_NODES: usize = 12;

struct Search<'a> {
    n: usize,
    /// `w[i][j]` for `j < i`: positive = cost when separated, negative = cost when joined.
    w: &'a [Vec<f64>],
    block: Vec<usize>,
    best: Vec<usize>,
    best_cost: f64,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, blocks: usize, cost: f64) {
        if cost >= self.best_cost {
            return;
        }
        if i == self.n {
            self.best_cost = cost;
            self.best.copy_from_slice(&self.block);
            return;
        }
        for b in 0..=blocks {
            let mut add = 0.0;
            for j in 0..i {
                let wij = self.w[i][j];
                let same = self.block[j] == b;
                if wij > 0.0 && !same {
                    add += wij;
                } else if wij < 0.0 && same {
                    add -= wij;
                }
            }
            self.block[i] = b;
            self.descend(i + 1, blocks.max(b + 1), cost + add);
        }
    }
}

/// Exact minimum disagreement by enumerating set partitions as restricted
/// growth strings. Ties keep the first partition in enumeration order.
pub fn brute_force_optimum(g: &SignedWeightedGraph) -> Result<(Partition, f64)> {
    let n = g.n();
    if n > ORACLE_MAX_NODES {
        return Err(Error::TooLarge { n, limit: ORACLE_MAX_NODES });
    }
    if n == 0 {
        return Err(Error::Empty("graph"));
    }
    let mut w = vec![vec![0.0; n]; n];
    for e in g.edges() {
        let (i, j) = (e.pair.j, e.pair.i);
        w[i][j] = match e.sign {
            Sign::Plus => e.cost,
            Sign::Minus => -e.cost,
        };
    }
    let mut s = Search { n, w: &w, block: vec![0; n], best: vec![0; n], best_cost: f64::INFINITY };
    s.descend(0, 0, 0.0);
    let labels: Vec<usize> = s.best.iter().map(|b| b + 1).collect();
    Ok((validate_partition(&labels)?, s.best_cost))
}

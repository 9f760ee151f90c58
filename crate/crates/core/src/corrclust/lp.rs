use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::simplex::DualSimplex;
use crate::density::{Sign, SignedWeightedGraph};
use crate::{Error, Matrix, Result};

/// Violation above which a triangle row is added to the LP.
pub const CUT_TOLERANCE: f64 = 1e-6;
/// Most-violated triangles added per separation round.
pub const CUTS_PER_ROUND: usize = 1000;

/// Optimal solution of the triangle-constrained LP relaxation, a
/// pseudometric on the nodes that carry at least one kept edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalMetric {
    /// Graph node ids, ascending; row/column `a` of `x` is node `nodes[a]`.
    pub nodes: Vec<usize>,
    pub x: Matrix,
    pub objective: f64,
    /// Largest triangle violation over all triples of `nodes`.
    pub max_violation: f64,
    pub cut_rounds: usize,
    pub cuts: usize,
}

impl FractionalMetric {
    /// Local index of graph node `v`, if it is in the metric.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    /// Distance between two graph nodes in the metric.
    pub fn distance(&self, u: usize, v: usize) -> Option<f64> {
        Some(self.x[(self.position(u)?, self.position(v)?)])
    }
}

#[inline]
fn var(a: usize, b: usize, m: usize) -> usize {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Largest violation of `x_ab <= x_ac + x_cb` over all ordered triples.
pub fn max_triangle_violation(x: &Matrix) -> f64 {
    let m = x.rows();
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (ab, ac, bc) = (x[(a, b)], x[(a, c)], x[(b, c)]);
                worst = worst.max(ab - ac - bc).max(ac - ab - bc).max(bc - ab - ac);
            }
        }
    }
    worst
}

/// Solves `min sum_+ C x + sum_- C (1 - x)` over `x in [0,1]` with triangle
/// inequalities, generating violated triangles lazily.
pub fn lp_relax(g: &SignedWeightedGraph) -> Result<FractionalMetric> {
    if g.edges().is_empty() {
        return Err(Error::Empty("kept edges"));
    }
    let nodes = g.active_nodes();
    let m = nodes.len();
    let mut local = vec![usize::MAX; g.n()];
    for (a, &v) in nodes.iter().enumerate() {
        local[v] = a;
    }
    let nvars = m * (m - 1) / 2;
    let mut cost = vec![0.0; nvars];
    let mut constant = 0.0;
    for e in g.edges() {
        let k = var(local[e.pair.i], local[e.pair.j], m);
        match e.sign {
            Sign::Plus => cost[k] = e.cost,
            Sign::Minus => {
                cost[k] = -e.cost;
                constant += e.cost;
            }
        }
    }
    let mut lp = DualSimplex::new(cost, vec![0.0; nvars], vec![1.0; nvars])?;
    lp.solve()?;

    let mut rounds = 0;
    let mut cuts = 0;
    let mut violated: Vec<(f64, usize, usize, usize)> = Vec::new();
    loop {
        violated.clear();
        let x = lp.values();
        for a in 0..m {
            for b in a + 1..m {
                let ab = x[var(a, b, m)];
                for c in b + 1..m {
                    let ac = x[var(a, c, m)];
                    let bc = x[var(b, c, m)];
                    // (long side, first short side, second short side) as local ids
                    for (v, long, s1, s2) in [
                        (ab - ac - bc, (a, b), (a, c), (b, c)),
                        (ac - ab - bc, (a, c), (a, b), (b, c)),
                        (bc - ab - ac, (b, c), (a, b), (a, c)),
                    ] {
                        if v > CUT_TOLERANCE {
                            violated.push((v, var(long.0, long.1, m), var(s1.0, s1.1, m), var(s2.0, s2.1, m)));
                        }
                    }
                }
            }
        }
        if violated.is_empty() {
            break;
        }
        violated.sort_by(|p, q| q.0.total_cmp(&p.0).then((p.1, p.2, p.3).cmp(&(q.1, q.2, q.3))));
        for &(_, long, s1, s2) in violated.iter().take(CUTS_PER_ROUND) {
            lp.add_row(vec![(long, 1.0), (s1, -1.0), (s2, -1.0)], 0.0)?;
            cuts += 1;
        }
        rounds += 1;
        lp.solve()?;
    }

    let mut xm = Matrix::zeros(m, m);
    let values = lp.values();
    for a in 0..m {
        for b in a + 1..m {
            let v = values[var(a, b, m)].clamp(0.0, 1.0);
            xm[(a, b)] = v;
            xm[(b, a)] = v;
        }
    }
    let objective = (lp.objective() + constant).max(0.0);
    let max_violation = max_triangle_violation(&xm);
    Ok(FractionalMetric { nodes, x: xm, objective, max_violation, cut_rounds: rounds, cuts })
}

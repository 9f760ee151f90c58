use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::lp::FractionalMetric;
use crate::density::{Sign, SignedWeightedGraph};
use crate::{validate_partition, Error, Partition, Result};

/// Distances closer than this are treated as equal radii.
const RADIUS_EPS: f64 = 1e-9;

/// `c1 = 2 + 1/ln(n+1)`.
pub fn c1(n: usize) -> f64 {
    2.0 + 1.0 / ((n as f64) + 1.0).ln()
}

/// Region growing on the LP metric. Grows a ball around the lowest-indexed
/// unassigned node and cuts it at the first radius below 1/2 whose positive
/// cut weight is at most `c1 ln(n+1)` times the ball's volume. Nodes outside
/// the metric become singletons.
pub fn round_regions(m: &FractionalMetric, g: &SignedWeightedGraph) -> Result<Partition> {
    let n = g.n();
    let size = m.nodes.len();
    if m.x.rows() != size || m.x.cols() != size {
        return Err(Error::DimensionMismatch { expected: size, found: m.x.rows() });
    }
    if let Some(&v) = m.nodes.last() {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
    }
    // positive adjacency in local ids
    let mut plus: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    for e in g.edges().iter().filter(|e| e.sign == Sign::Plus) {
        let (Some(a), Some(b)) = (m.position(e.pair.i), m.position(e.pair.j)) else {
            return Err(Error::InvalidParameter("metric does not cover every kept edge".into()));
        };
        plus[a].push((b, e.cost));
        plus[b].push((a, e.cost));
    }

    let factor = c1(n) * ((n as f64) + 1.0).ln();
    let seed_volume = m.objective / n.max(1) as f64;
    let mut label = vec![0usize; n];
    let mut next = 1;
    let mut assigned = vec![false; size];
    let mut in_ball = vec![false; size];

    for u in 0..size {
        if assigned[u] {
            continue;
        }
        let d = |v: usize| m.x[(u, v)];
        let mut order: Vec<usize> = (0..size).filter(|&v| !assigned[v] && d(v) < 0.5).collect();
        order.sort_by(|&a, &b| d(a).total_cmp(&d(b)).then(a.cmp(&b)));
        // u itself is at distance 0, so it leads the order
        let mut radii: Vec<f64> = Vec::new();
        for &v in &order {
            let r = d(v);
            if radii.last().is_none_or(|&last| r > last + RADIUS_EPS) {
                radii.push(r);
            }
        }

        let mut chosen = 0;
        let mut idx = 0;
        let mut found = false;
        for (k, &r) in radii.iter().enumerate() {
            while idx < order.len() && d(order[idx]) <= r + RADIUS_EPS {
                in_ball[order[idx]] = true;
                idx += 1;
            }
            let right = radii.get(k + 1).copied().unwrap_or(0.5);
            let mut cut = 0.0;
            let mut vol = seed_volume;
            for &v in &order[..idx] {
                for &(w, c) in &plus[v] {
                    if assigned[w] {
                        continue;
                    }
                    if in_ball[w] {
                        // each internal edge is seen from both ends
                        vol += 0.5 * c * m.x[(v, w)];
                    } else {
                        cut += c;
                        vol += c * (right - d(v)).max(0.0);
                    }
                }
            }
            if cut <= factor * vol {
                chosen = idx;
                found = true;
                break;
            }
        }
        if !found {
            chosen = order.iter().take_while(|&&v| d(v) <= RADIUS_EPS).count().max(1);
        }
        for &v in &order[..idx.max(chosen)] {
            in_ball[v] = false;
        }
        for &v in &order[..chosen] {
            assigned[v] = true;
            label[m.nodes[v]] = next;
        }
        next += 1;
    }
    for l in label.iter_mut().filter(|l| **l == 0) {
        *l = next;
        next += 1;
    }
    validate_partition(&label)
}

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::density::{Sign, SignedWeightedGraph};
use crate::{validate_partition, Partition};

/// KwikCluster: a uniformly random unassigned pivot takes every unassigned
/// node joined to it by a positive kept edge.
pub fn kwik_cluster<R: Rng + ?Sized>(g: &SignedWeightedGraph, rng: &mut R) -> Partition {
    let n = g.n();
    let mut plus: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges().iter().filter(|e| e.sign == Sign::Plus) {
        plus[e.pair.i].push(e.pair.j);
        plus[e.pair.j].push(e.pair.i);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut label = vec![0usize; n];
    let mut next = 1;
    for &p in &order {
        if label[p] != 0 {
            continue;
        }
        label[p] = next;
        for &v in &plus[p] {
            if label[v] == 0 {
                label[v] = next;
            }
        }
        next += 1;
    }
    validate_partition(&label).expect("every node is labeled")
}

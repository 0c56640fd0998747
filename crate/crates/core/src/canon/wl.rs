//! k-dimensional Weisfeiler–Leman refinement on vertex tuples.
//!
//! A tuple's new color is its old color together with the multiset, over
//! all vertices `x`, of the colors of the `k` tuples obtained by replacing
//! one coordinate with `x`. For `k = 1` this is ordinary color refinement.

use super::refine::{color_partition, color_refine};
use super::Partition;
use crate::budget::SolveBudget;
use crate::cfi::Graph;

/// Tuple count allowed when the budget has no step limit.
pub const DEFAULT_TUPLE_LIMIT: u64 = 4_000_000;
pub const MAX_WL_DIMENSION: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WlError {
    #[error("dimension must be between 1 and {MAX_WL_DIMENSION}, got {0}")]
    Dimension(usize),
    #[error("{tuples} tuples exceed the limit of {limit}")]
    TooLarge { tuples: u128, limit: u64 },
    #[error("time budget exhausted after {rounds} rounds")]
    BudgetExhausted { rounds: usize },
}

/// Stable coloring of all `k`-tuples. Color values are only comparable
/// within one graph.
#[derive(Debug, Clone)]
pub struct TupleColoring {
    n: u32,
    k: usize,
    colors: Vec<u32>,
    num_colors: usize,
    rounds: usize,
}

impl TupleColoring {
    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn index(&self, tuple: &[u32]) -> usize {
        assert_eq!(tuple.len(), self.k);
        tuple.iter().fold(0usize, |acc, &v| {
            assert!(v < self.n);
            acc * self.n as usize + v as usize
        })
    }

    pub fn color(&self, tuple: &[u32]) -> u32 {
        self.colors[self.index(tuple)]
    }

    /// Partition of vertices by the color of their constant tuple.
    pub fn vertex_partition(&self) -> Partition {
        let labels: Vec<u32> = (0..self.n).map(|v| self.color(&vec![v; self.k])).collect();
        Partition::from_labels(&labels)
    }
}

fn sorted_ids<T: Ord>(keys: &[T]) -> (Vec<u32>, usize) {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ids = vec![0u32; keys.len()];
    let mut next = 0u32;
    for (i, &t) in order.iter().enumerate() {
        if i > 0 && keys[order[i - 1]] != keys[t] {
            next += 1;
        }
        ids[t] = next;
    }
    let count = if keys.is_empty() { 0 } else { next as usize + 1 };
    (ids, count)
}

pub fn wl_k(g: &Graph, k: usize, budget: SolveBudget) -> Result<TupleColoring, WlError> {
    if k == 0 || k > MAX_WL_DIMENSION {
        return Err(WlError::Dimension(k));
    }
    let n = g.vertex_count();
    let tuples = (n as u128).pow(k as u32);
    let limit = budget.max_steps.unwrap_or(DEFAULT_TUPLE_LIMIT);
    if tuples > limit as u128 {
        return Err(WlError::TooLarge { tuples, limit });
    }
    if k == 1 {
        let p = color_refine(g, &color_partition(g));
        return Ok(TupleColoring {
            n,
            k,
            colors: (0..n).map(|v| p.cell_of(v)).collect(),
            num_colors: p.num_cells(),
            rounds: 0,
        });
    }
    let clock = budget.start();
    let t = tuples as usize;
    let nu = n as usize;
    let weights: Vec<usize> = (0..k).map(|i| nu.pow((k - 1 - i) as u32)).collect();
    let digits = |idx: usize| -> Vec<u32> { weights.iter().map(|&w| ((idx / w) % nu) as u32).collect() };

    let atomic: Vec<Vec<u32>> = (0..t)
        .map(|idx| {
            let d = digits(idx);
            let mut key: Vec<u32> = d.iter().map(|&v| g.color(v)).collect();
            for i in 0..k {
                for j in i + 1..k {
                    key.push(if d[i] == d[j] {
                        2
                    } else {
                        g.has_edge(d[i], d[j]) as u32
                    });
                }
            }
            key
        })
        .collect();
    let (mut colors, mut num_colors) = sorted_ids(&atomic);
    drop(atomic);

    let mut rounds = 0;
    let mut multiset: Vec<u128> = vec![0; t * nu];
    loop {
        if clock.time_exceeded() {
            return Err(WlError::BudgetExhausted { rounds });
        }
        for idx in 0..t {
            let d = digits(idx);
            let row = &mut multiset[idx * nu..(idx + 1) * nu];
            for (x, slot) in row.iter_mut().enumerate() {
                let mut packed = 0u128;
                for i in 0..k {
                    let sub = idx - d[i] as usize * weights[i] + x * weights[i];
                    packed = (packed << 32) | colors[sub] as u128;
                }
                *slot = packed;
            }
            row.sort_unstable();
        }
        let keys: Vec<(u32, &[u128])> = (0..t)
            .map(|idx| (colors[idx], &multiset[idx * nu..(idx + 1) * nu]))
            .collect();
        let (next, count) = sorted_ids(&keys);
        rounds += 1;
        if count == num_colors {
            break;
        }
        colors = next;
        num_colors = count;
    }
    Ok(TupleColoring {
        n,
        k,
        colors,
        num_colors,
        rounds,
    })
}

/// Whether `k`-WL gives `u` and `v` the same color.
pub fn wl_indistinguishable(g: &Graph, u: u32, v: u32, k: usize) -> Result<bool, WlError> {
    if k == 1 {
        return Ok(color_refine(g, &color_partition(g)).same_cell(u, v));
    }
    let c = wl_k(g, k, SolveBudget::unlimited())?;
    Ok(c.color(&vec![u; k]) == c.color(&vec![v; k]))
}

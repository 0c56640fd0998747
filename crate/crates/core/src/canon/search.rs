//! Individualization-refinement automorphism search.
//!
//! The first path individualizes the smallest vertex of the target cell at
//! every level until the partition is discrete. Then, level by level from the
//! bottom, every vertex of the level's target cell that is not yet known to
//! lie in the orbit of the first-path choice gets its subtree searched for a
//! leaf matching the first leaf. Nodes whose refinement invariant differs
//! from the first path at the same depth are pruned. Orbit sizes multiply to
//! the group order.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::refine::{OrderedPartition, RefineScratch};
use super::Partition;
use crate::budget::{BudgetClock, SolveBudget};
use crate::cfi::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetCell {
    /// First non-singleton cell of minimum size.
    #[default]
    FirstSmallest,
    /// First non-singleton cell of maximum size.
    FirstLargest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SearchStatus {
    Complete,
    Timeout,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Complete => "COMPLETE",
            SearchStatus::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    pub target: TargetCell,
    /// Steps count search-tree nodes.
    pub budget: SolveBudget,
}

#[derive(Debug, Clone)]
pub struct AutReport {
    /// Each generator maps vertex `v` to `g[v]`.
    pub generators: Vec<Vec<u32>>,
    /// Exact on `Complete`; on `Timeout` the order of the subgroup found so far.
    pub group_size: BigUint,
    pub orbit_partition: Partition,
    pub search_nodes: u64,
    pub status: SearchStatus,
}

struct Level {
    node: OrderedPartition,
    target: usize,
    chosen: u32,
}

struct Search<'a> {
    g: &'a Graph,
    target: TargetCell,
    clock: BudgetClock,
    nodes: u64,
    scratch: RefineScratch,
    levels: Vec<Level>,
    /// Invariant of the refinement that produced each first-path node.
    traces: Vec<u64>,
    first_leaf: Vec<u32>,
}

struct Timeout;

fn select_target(p: &OrderedPartition, how: TargetCell) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (start, len) in p.cells() {
        if len < 2 {
            continue;
        }
        let better = match (best, how) {
            (None, _) => true,
            (Some((_, bl)), TargetCell::FirstSmallest) => len < bl,
            (Some((_, bl)), TargetCell::FirstLargest) => len > bl,
        };
        if better {
            best = Some((start, len));
        }
    }
    best.map(|(s, _)| s)
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }

    fn class_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

impl<'a> Search<'a> {
    fn count_node(&mut self) -> Result<(), Timeout> {
        self.nodes += 1;
        if self.clock.tick() {
            Ok(())
        } else {
            Err(Timeout)
        }
    }

    fn child(&mut self, parent: &OrderedPartition, target: usize, v: u32) -> Result<(OrderedPartition, u64), Timeout> {
        let mut node = parent.clone();
        node.individualize(v);
        let trace = node.refine(self.g, &[target as u32], &mut self.scratch);
        self.count_node()?;
        Ok((node, trace))
    }

    fn first_path(&mut self) -> Result<(), Timeout> {
        let colors: Vec<u32> = match self.g.colors() {
            Some(c) => c.to_vec(),
            None => vec![0; self.g.vertex_count() as usize],
        };
        let mut node = OrderedPartition::from_colors(&colors);
        let trace = node.refine_all(self.g, &mut self.scratch);
        self.traces.push(trace);
        self.count_node()?;
        while let Some(target) = select_target(&node, self.target) {
            let chosen = *node.cell_members(target).iter().min().unwrap();
            let (next, trace) = self.child(&node, target, chosen)?;
            self.levels.push(Level { node, target, chosen });
            self.traces.push(trace);
            node = next;
        }
        self.first_leaf = node.elements().to_vec();
        Ok(())
    }

    fn leaf_map(&self, leaf: &OrderedPartition) -> Vec<u32> {
        let mut perm = vec![0; self.first_leaf.len()];
        for (&a, &b) in self.first_leaf.iter().zip(leaf.elements()) {
            perm[a as usize] = b;
        }
        perm
    }

    /// Looks below `node` (at first-path depth `depth`) for a leaf that maps
    /// from the first leaf by an automorphism.
    fn find_match(&mut self, node: &OrderedPartition, depth: usize) -> Result<Option<Vec<u32>>, Timeout> {
        if node.is_discrete() {
            let perm = self.leaf_map(node);
            return Ok(self.g.is_automorphism(&perm).then_some(perm));
        }
        if depth >= self.levels.len() {
            return Ok(None);
        }
        let target = self.levels[depth].target;
        if select_target(node, self.target) != Some(target) {
            return Ok(None);
        }
        let mut members = node.cell_members(target).to_vec();
        members.sort_unstable();
        for u in members {
            let (next, trace) = self.child(node, target, u)?;
            if trace != self.traces[depth + 1] {
                continue;
            }
            if let Some(perm) = self.find_match(&next, depth + 1)? {
                return Ok(Some(perm));
            }
        }
        Ok(None)
    }
}

/// Generators, order and orbits of the automorphism group of `g`
/// (respecting vertex colors).
pub fn ir_automorphisms(g: &Graph, opts: &SearchOptions) -> AutReport {
    let n = g.vertex_count() as usize;
    let mut s = Search {
        g,
        target: opts.target,
        clock: opts.budget.start(),
        nodes: 0,
        scratch: RefineScratch::default(),
        levels: Vec::new(),
        traces: Vec::new(),
        first_leaf: Vec::new(),
    };
    let mut generators = Vec::new();
    let mut orbits = UnionFind::new(n);
    let mut group_size = BigUint::from(1u32);

    let mut status = SearchStatus::Complete;
    if s.first_path().is_err() {
        status = SearchStatus::Timeout;
    } else {
        'levels: for depth in (0..s.levels.len()).rev() {
            let node = s.levels[depth].node.clone();
            let target = s.levels[depth].target;
            let chosen = s.levels[depth].chosen;
            let mut members = node.cell_members(target).to_vec();
            members.sort_unstable();
            let mut failed: Vec<u32> = Vec::new();
            for w in members {
                if w == chosen || orbits.find(w) == orbits.find(chosen) {
                    continue;
                }
                if failed.iter().any(|&f| orbits.find(f) == orbits.find(w)) {
                    continue;
                }
                let found = s.child(&node, target, w).and_then(|(next, trace)| {
                    if trace != s.traces[depth + 1] {
                        Ok(None)
                    } else {
                        s.find_match(&next, depth + 1)
                    }
                });
                match found {
                    Err(Timeout) => {
                        status = SearchStatus::Timeout;
                        break 'levels;
                    }
                    Ok(Some(perm)) => {
                        for (v, &image) in perm.iter().enumerate() {
                            orbits.union(v as u32, image);
                        }
                        generators.push(perm);
                    }
                    Ok(None) => failed.push(w),
                }
            }
            group_size *= orbits.class_size(chosen);
        }
    }

    let labels: Vec<u32> = (0..n as u32).map(|v| orbits.find(v)).collect();
    AutReport {
        generators,
        group_size,
        orbit_partition: Partition::from_labels(&labels),
        search_nodes: s.nodes,
        status,
    }
}

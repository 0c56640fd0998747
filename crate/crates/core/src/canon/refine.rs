//! Equitable refinement of ordered partitions.
//!
//! The partition is an array of vertices cut into contiguous cells. A
//! splitter cell `W` splits every cell whose members disagree on their number
//! of neighbours in `W`; the fragments replace the cell in place, ordered by
//! that count. Splitters are taken from a FIFO of cell start positions and
//! touched cells are handled in position order, so the cell sequence (not
//! the order inside a cell) is preserved by relabelling the graph. That is
//! what lets the automorphism search compare leaves position by position.

use std::collections::VecDeque;

use super::Partition;
use crate::cfi::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPartition {
    elements: Vec<u32>,
    pos: Vec<u32>,
    /// Start position of the cell holding each vertex.
    cell_start: Vec<u32>,
    /// Length of the cell starting at a position, 0 elsewhere.
    cell_len: Vec<u32>,
    num_cells: usize,
}

/// Scratch space reused across refinements of the same graph.
#[derive(Debug, Default)]
pub struct RefineScratch {
    count: Vec<u32>,
    touched: Vec<u32>,
    touched_cells: Vec<u32>,
    in_queue: Vec<bool>,
    buf: Vec<(u32, u32)>,
}

/// Mixes a value into a running invariant.
#[inline]
fn mix(h: u64, x: u64) -> u64 {
    let z = (h ^ x).wrapping_add(0x9E37_79B9_7F4A_7C15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl OrderedPartition {
    /// Cells are the color classes ordered by color value.
    pub fn from_colors(colors: &[u32]) -> Self {
        let mut elements: Vec<u32> = (0..colors.len() as u32).collect();
        elements.sort_by_key(|&v| (colors[v as usize], v));
        let mut p = Self::with_elements(elements);
        let mut start = 0;
        while start < p.elements.len() {
            let c = colors[p.elements[start] as usize];
            let mut end = start + 1;
            while end < p.elements.len() && colors[p.elements[end] as usize] == c {
                end += 1;
            }
            p.set_cell(start, end);
            start = end;
        }
        p
    }

    /// Cells in the order of the partition's cell ids.
    pub fn from_partition(p: &Partition) -> Self {
        Self::from_colors(&(0..p.element_count() as u32).map(|v| p.cell_of(v)).collect::<Vec<_>>())
    }

    pub fn unit(n: usize) -> Self {
        Self::from_colors(&vec![0; n])
    }

    fn with_elements(elements: Vec<u32>) -> Self {
        let n = elements.len();
        let mut pos = vec![0; n];
        for (i, &v) in elements.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        Self {
            elements,
            pos,
            cell_start: vec![0; n],
            cell_len: vec![0; n],
            num_cells: 0,
        }
    }

    fn set_cell(&mut self, start: usize, end: usize) {
        self.cell_len[start] = (end - start) as u32;
        for i in start..end {
            self.cell_start[self.elements[i] as usize] = start as u32;
        }
        self.num_cells += 1;
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn is_discrete(&self) -> bool {
        self.num_cells == self.elements.len()
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    /// `(start, len)` of every cell in position order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.elements.len() {
                return None;
            }
            let len = self.cell_len[i] as usize;
            let cell = (i, len);
            i += len;
            Some(cell)
        })
    }

    pub fn cell_members(&self, start: usize) -> &[u32] {
        &self.elements[start..start + self.cell_len[start] as usize]
    }

    pub fn cell_start_of(&self, v: u32) -> usize {
        self.cell_start[v as usize] as usize
    }

    /// Cell sequence as sizes, for shape comparison.
    pub fn shape(&self) -> Vec<u32> {
        self.cells().map(|(_, l)| l as u32).collect()
    }

    pub fn to_partition(&self) -> Partition {
        Partition::from_labels(&self.cell_start)
    }

    /// Moves `v` into a singleton cell placed in front of the rest of its
    /// cell. Returns the position of the new singleton, or `None` if `v` was
    /// already alone.
    pub fn individualize(&mut self, v: u32) -> Option<usize> {
        let start = self.cell_start[v as usize] as usize;
        let len = self.cell_len[start] as usize;
        if len == 1 {
            return None;
        }
        let p = self.pos[v as usize] as usize;
        let other = self.elements[start];
        self.elements.swap(start, p);
        self.pos[other as usize] = p as u32;
        self.pos[v as usize] = start as u32;
        self.cell_len[start] = 1;
        self.num_cells -= 1;
        self.set_cell(start + 1, start + len);
        self.num_cells += 1;
        Some(start)
    }

    /// Refines with every cell as an initial splitter.
    pub fn refine_all(&mut self, g: &Graph, scratch: &mut RefineScratch) -> u64 {
        let starts: Vec<u32> = self.cells().map(|(s, _)| s as u32).collect();
        self.refine(g, &starts, scratch)
    }

    /// Refines to the coarsest equitable partition below `self`, starting
    /// from the given splitter cells. Returns an invariant of the run: equal
    /// for two partitions related by an automorphism, usually different
    /// otherwise.
    pub fn refine(&mut self, g: &Graph, splitters: &[u32], s: &mut RefineScratch) -> u64 {
        let n = self.elements.len();
        s.count.resize(n, 0);
        s.in_queue.clear();
        s.in_queue.resize(n, false);
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &w in splitters {
            if !s.in_queue[w as usize] {
                s.in_queue[w as usize] = true;
                queue.push_back(w);
            }
        }
        let mut trace = 0u64;
        let mut splitter = Vec::new();
        while let Some(w) = queue.pop_front() {
            if self.is_discrete() {
                break;
            }
            s.in_queue[w as usize] = false;
            splitter.clear();
            splitter.extend_from_slice(self.cell_members(w as usize));

            s.touched.clear();
            for &v in &splitter {
                for &u in g.neighbors(v) {
                    if s.count[u as usize] == 0 {
                        s.touched.push(u);
                    }
                    s.count[u as usize] += 1;
                }
            }
            s.touched_cells.clear();
            for &u in &s.touched {
                s.touched_cells.push(self.cell_start[u as usize]);
            }
            s.touched_cells.sort_unstable();
            s.touched_cells.dedup();

            trace = mix(trace, w as u64);
            for ti in 0..s.touched_cells.len() {
                let start = s.touched_cells[ti] as usize;
                let len = self.cell_len[start] as usize;
                if len == 1 {
                    let v = self.elements[start];
                    trace = mix(trace, ((start as u64) << 32) | s.count[v as usize] as u64);
                    continue;
                }
                s.buf.clear();
                for i in start..start + len {
                    let v = self.elements[i];
                    s.buf.push((s.count[v as usize], v));
                }
                let first = s.buf[0].0;
                if s.buf.iter().all(|&(c, _)| c == first) {
                    trace = mix(trace, ((start as u64) << 32) | first as u64);
                    continue;
                }
                s.buf.sort_unstable();
                for (k, &(_, v)) in s.buf.iter().enumerate() {
                    self.elements[start + k] = v;
                    self.pos[v as usize] = (start + k) as u32;
                }
                // Cut into fragments of equal count.
                let was_queued = s.in_queue[start];
                self.num_cells -= 1;
                let mut frags: Vec<(usize, usize)> = Vec::new();
                let mut a = 0;
                while a < len {
                    let c = s.buf[a].0;
                    let mut b = a + 1;
                    while b < len && s.buf[b].0 == c {
                        b += 1;
                    }
                    self.set_cell(start + a, start + b);
                    trace = mix(trace, ((start + a) as u64) << 32 | c as u64);
                    trace = mix(trace, (b - a) as u64);
                    frags.push((start + a, b - a));
                    a = b;
                }
                if was_queued {
                    for &(fs, _) in &frags[1..] {
                        s.in_queue[fs] = true;
                        queue.push_back(fs as u32);
                    }
                } else {
                    let largest = frags
                        .iter()
                        .enumerate()
                        .max_by_key(|&(i, &(_, l))| (l, std::cmp::Reverse(i)))
                        .map(|(i, _)| i)
                        .unwrap();
                    for (i, &(fs, _)) in frags.iter().enumerate() {
                        if i != largest {
                            s.in_queue[fs] = true;
                            queue.push_back(fs as u32);
                        }
                    }
                }
            }
            for &u in &s.touched {
                s.count[u as usize] = 0;
            }
        }
        while let Some(w) = queue.pop_front() {
            s.in_queue[w as usize] = false;
        }
        mix(trace, self.num_cells as u64)
    }
}

/// The coarsest equitable partition refining `initial`.
pub fn color_refine(g: &Graph, initial: &Partition) -> Partition {
    assert_eq!(initial.element_count(), g.vertex_count() as usize);
    let mut p = OrderedPartition::from_partition(initial);
    p.refine_all(g, &mut RefineScratch::default());
    p.to_partition()
}

/// Refinement of `p` with `v` moved to a fresh color.
pub fn individualize(g: &Graph, p: &Partition, v: u32) -> Partition {
    assert!(v < g.vertex_count());
    let mut op = OrderedPartition::from_partition(p);
    op.individualize(v);
    op.refine_all(g, &mut RefineScratch::default());
    op.to_partition()
}

/// The initial partition given by the graph's vertex colors.
pub fn color_partition(g: &Graph) -> Partition {
    match g.colors() {
        Some(c) => Partition::from_labels(c),
        None => Partition::unit(g.vertex_count() as usize),
    }
}

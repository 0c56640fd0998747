use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(u32),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(u32, u32),
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("color vector has length {actual}, expected {expected}")]
    ColorLength { expected: usize, actual: usize },
}

/// An undirected simple graph on vertices `0..n` with optional vertex
/// colors. Adjacency lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    edge_count: usize,
    colors: Option<Vec<u32>>,
}

impl Graph {
    pub fn empty(n: u32) -> Self {
        Self {
            adj: vec![Vec::new(); n as usize],
            edge_count: 0,
            colors: None,
        }
    }

    /// Builds a graph, rejecting loops, duplicates and stray endpoints.
    pub fn from_edges<I>(n: u32, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<(), GraphError> {
        let n = self.vertex_count();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        let list = &mut self.adj[u as usize];
        match list.binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u.min(v), u.max(v))),
            Err(pos) => list.insert(pos, v),
        }
        let list = &mut self.adj[v as usize];
        let pos = list.binary_search(&u).unwrap_err();
        list.insert(pos, u);
        self.edge_count += 1;
        Ok(())
    }

    pub fn with_colors(mut self, colors: Vec<u32>) -> Result<Self, GraphError> {
        if colors.len() != self.adj.len() {
            return Err(GraphError::ColorLength {
                expected: self.adj.len(),
                actual: colors.len(),
            });
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn without_colors(mut self) -> Self {
        self.colors = None;
        self
    }

    pub fn vertex_count(&self) -> u32 {
        self.adj.len() as u32
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn colors(&self) -> Option<&[u32]> {
        self.colors.as_deref()
    }

    pub fn color(&self, v: u32) -> u32 {
        self.colors.as_ref().map_or(0, |c| c[v as usize])
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| {
            let u = u as u32;
            ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    /// Subgraph induced by vertices `0..k`, colors dropped.
    pub fn induced_prefix(&self, k: u32) -> Graph {
        let mut g = Graph::empty(k);
        for (u, v) in self.edges() {
            if v < k {
                g.add_edge(u, v).expect("edges of a simple graph");
            }
        }
        g
    }

    /// Whether `perm` (vertex `v` maps to `perm[v]`) preserves edges and
    /// colors.
    pub fn is_automorphism(&self, perm: &[u32]) -> bool {
        let n = self.adj.len();
        if perm.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
                return false;
            }
        }
        if let Some(c) = &self.colors {
            if (0..n).any(|v| c[v] != c[perm[v] as usize]) {
                return false;
            }
        }
        // A bijection that maps every edge to an edge preserves non-edges too.
        self.edges()
            .all(|(u, v)| self.has_edge(perm[u as usize], perm[v as usize]))
    }

    /// Degree multiset as sorted `(degree, count)` pairs.
    pub fn degree_spectrum(&self) -> Vec<(usize, usize)> {
        let degrees: BTreeSet<usize> = self.adj.iter().map(Vec::len).collect();
        degrees
            .into_iter()
            .map(|d| (d, self.adj.iter().filter(|a| a.len() == d).count()))
            .collect()
    }

    pub fn path(n: u32) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: u32) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: u32) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(GraphError::Loop(1)));
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::VertexOutOfRange { vertex: 3, n: 3 })
        );
        assert!(Graph::empty(2).with_colors(vec![0]).is_err());
    }

    #[test]
    fn edges_sorted() {
        let g = Graph::from_edges(4, [(3, 1), (0, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2), (1, 3)]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighbors(1), &[2, 3]);
    }

    #[test]
    fn automorphism_check() {
        let p = Graph::path(3);
        assert!(p.is_automorphism(&[2, 1, 0]));
        assert!(!p.is_automorphism(&[1, 0, 2]));
        assert!(!p.is_automorphism(&[0, 0, 2]));
        let colored = Graph::path(3).with_colors(vec![0, 0, 1]).unwrap();
        assert!(!colored.is_automorphism(&[2, 1, 0]));
    }

    #[test]
    fn families() {
        assert_eq!(Graph::complete(4).edge_count(), 6);
        assert_eq!(Graph::cycle(6).degree_spectrum(), vec![(2, 6)]);
        assert_eq!(Graph::path(3).degree_spectrum(), vec![(1, 2), (2, 1)]);
    }
}

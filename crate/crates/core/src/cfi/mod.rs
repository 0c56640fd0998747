//! Graphs built from 3-XOR formulas.
//!
//! * [`incidence_graph`]: the bipartite variable/clause incidence graph.
//! * [`build_core`]: each variable `X` becomes a pair `X^0 - X^1`, each
//!   clause becomes four vertices `C_000, C_011, C_110, C_101`, one per way
//!   of negating an even number of its literals. A clause vertex is joined to
//!   `X^1` when `X` occurs positively in it and to `X^0` when negated.
//! * [`build_full`]: the core plus the order gadget, a path
//!   `i_l - i_r - i_s` for every `1 <= i < n` with `i_l` joined to both
//!   copies of `X_i` and `i_r` to both copies of `X_{i+1}`.
//!
//! Vertex numbering is fixed by [`VertexScheme`] so exported files are
//! byte-identical across runs.

mod graph;

pub use graph::{Graph, GraphError};

use thiserror::Error;

use crate::formula::{Var, XorClause, XorFormula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfiError {
    #[error("the order gadget needs at least 2 variables, got {0}")]
    TooFewVariables(u32),
    #[error("assignment has length {actual}, expected {expected}")]
    AssignmentLength { expected: usize, actual: usize },
    #[error("assignment does not satisfy the homogeneous companion")]
    NotASolution,
}

/// Which construction a pipeline emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetMode {
    /// Core graph plus the order gadget.
    Full,
    /// Core graph only; sound when the incidence graph is asymmetric.
    CoreOnly,
}

impl GadgetMode {
    pub fn build(self, f: &XorFormula) -> Result<Graph, CfiError> {
        match self {
            GadgetMode::Full => build_full(f),
            GadgetMode::CoreOnly => Ok(build_core(f)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GadgetMode::Full => "full",
            GadgetMode::CoreOnly => "core-only",
        }
    }
}

/// The four clause vertices of a gadget, in numbering order. The pattern
/// lists which of the (first, second, third) literals are negated relative
/// to the clause as given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseTag {
    T000,
    T011,
    T110,
    T101,
}

impl ClauseTag {
    pub const ALL: [ClauseTag; 4] = [ClauseTag::T000, ClauseTag::T011, ClauseTag::T110, ClauseTag::T101];

    pub fn index(self) -> u32 {
        self as u32
    }

    pub fn pattern(self) -> [bool; 3] {
        match self {
            ClauseTag::T000 => [false, false, false],
            ClauseTag::T011 => [false, true, true],
            ClauseTag::T110 => [true, true, false],
            ClauseTag::T101 => [true, false, true],
        }
    }

    /// The tag whose pattern is `self.pattern() XOR flips`; `flips` must have
    /// even weight.
    pub fn flipped(self, flips: [bool; 3]) -> ClauseTag {
        let p = self.pattern();
        let q = [p[0] ^ flips[0], p[1] ^ flips[1], p[2] ^ flips[2]];
        ClauseTag::ALL
            .into_iter()
            .find(|t| t.pattern() == q)
            .expect("even-weight flip keeps an even-weight pattern")
    }
}

/// What a vertex of `G_phi` stands for. Indices are 1-based like variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRole {
    Var { var: Var, bit: bool },
    Clause { clause: u32, tag: ClauseTag },
    OrderLeft(u32),
    OrderRight(u32),
    OrderStub(u32),
}

/// Vertex numbering:
/// `X_j^b -> 2(j-1) + b`; clause `c` (1-based, canonical order) with tag
/// index `t -> 2n + 4(c-1) + t`; order gadget `i -> 2n + 4m + 3(i-1)` for
/// `i_l`, `+1` for `i_r`, `+2` for `i_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexScheme {
    pub n: u32,
    pub m: u32,
}

impl VertexScheme {
    pub fn for_formula(f: &XorFormula) -> Self {
        Self {
            n: f.num_vars(),
            m: f.num_clauses() as u32,
        }
    }

    pub fn var(&self, j: Var, bit: bool) -> u32 {
        debug_assert!(1 <= j && j <= self.n);
        2 * (j - 1) + u32::from(bit)
    }

    pub fn clause(&self, c: u32, tag: ClauseTag) -> u32 {
        debug_assert!(1 <= c && c <= self.m);
        2 * self.n + 4 * (c - 1) + tag.index()
    }

    fn gadget_base(&self, i: u32) -> u32 {
        debug_assert!(1 <= i && i < self.n);
        2 * self.n + 4 * self.m + 3 * (i - 1)
    }

    pub fn order_left(&self, i: u32) -> u32 {
        self.gadget_base(i)
    }

    pub fn order_right(&self, i: u32) -> u32 {
        self.gadget_base(i) + 1
    }

    pub fn order_stub(&self, i: u32) -> u32 {
        self.gadget_base(i) + 2
    }

    pub fn core_vertices(&self) -> u32 {
        2 * self.n + 4 * self.m
    }

    pub fn full_vertices(&self) -> u32 {
        4 * self.m + 2 * self.n + 3 * self.n.saturating_sub(1)
    }

    pub fn core_edges(&self) -> usize {
        12 * self.m as usize + self.n as usize
    }

    pub fn full_edges(&self) -> usize {
        self.core_edges() + 6 * self.n.saturating_sub(1) as usize
    }

    pub fn role(&self, v: u32) -> Option<VertexRole> {
        if v < 2 * self.n {
            return Some(VertexRole::Var {
                var: v / 2 + 1,
                bit: v % 2 == 1,
            });
        }
        let v = v - 2 * self.n;
        if v < 4 * self.m {
            return Some(VertexRole::Clause {
                clause: v / 4 + 1,
                tag: ClauseTag::ALL[(v % 4) as usize],
            });
        }
        let v = v - 4 * self.m;
        let i = v / 3 + 1;
        if i >= self.n.max(1) {
            return None;
        }
        Some(match v % 3 {
            0 => VertexRole::OrderLeft(i),
            1 => VertexRole::OrderRight(i),
            _ => VertexRole::OrderStub(i),
        })
    }
}

/// Bipartite incidence graph: variable `j -> j - 1`, clause `c -> n + c - 1`.
/// Variables get color 0 and clauses color 1. Parities are not represented,
/// so this graph determines a formula only when it is homogeneous.
pub fn incidence_graph(f: &XorFormula) -> Graph {
    let n = f.num_vars();
    let m = f.num_clauses() as u32;
    let mut g = Graph::empty(n + m);
    for (c, clause) in f.clauses().iter().enumerate() {
        for v in clause.vars() {
            g.add_edge(v - 1, n + c as u32).expect("distinct clause variables");
        }
    }
    let colors = (0..n + m).map(|v| u32::from(v >= n)).collect();
    g.with_colors(colors).expect("one color per vertex")
}

/// Which literals of clause vertex `(clause, tag)` are negated.
fn negations(clause: &XorClause, tag: ClauseTag) -> [bool; 3] {
    // A parity-1 clause is taken with its smallest variable negated.
    let base = [clause.rhs(), false, false];
    let p = tag.pattern();
    [base[0] ^ p[0], base[1] ^ p[1], base[2] ^ p[2]]
}

/// The core graph, without the order gadget: `2n + 4m` vertices and
/// `12m + n` edges.
pub fn build_core(f: &XorFormula) -> Graph {
    let scheme = VertexScheme::for_formula(f);
    let mut g = Graph::empty(scheme.core_vertices());
    add_core_edges(&mut g, f, &scheme);
    assert_eq!(g.edge_count(), scheme.core_edges());
    g
}

fn add_core_edges(g: &mut Graph, f: &XorFormula, scheme: &VertexScheme) {
    for j in 1..=f.num_vars() {
        g.add_edge(scheme.var(j, false), scheme.var(j, true))
            .expect("fresh variable pair");
    }
    for (ci, clause) in f.clauses().iter().enumerate() {
        let c = ci as u32 + 1;
        for tag in ClauseTag::ALL {
            let cv = scheme.clause(c, tag);
            let neg = negations(clause, tag);
            for (k, &var) in clause.vars().iter().enumerate() {
                g.add_edge(cv, scheme.var(var, !neg[k]))
                    .expect("distinct clause variables");
            }
        }
    }
}

/// The full graph: core plus order gadget, `4m + 2n + 3(n-1)` vertices and
/// `12m + n + 6(n-1)` edges.
pub fn build_full(f: &XorFormula) -> Result<Graph, CfiError> {
    let n = f.num_vars();
    if n < 2 {
        return Err(CfiError::TooFewVariables(n));
    }
    let scheme = VertexScheme::for_formula(f);
    let mut g = Graph::empty(scheme.full_vertices());
    add_core_edges(&mut g, f, &scheme);
    for i in 1..n {
        let (l, r, s) = (scheme.order_left(i), scheme.order_right(i), scheme.order_stub(i));
        let e = [
            (l, r),
            (r, s),
            (l, scheme.var(i, false)),
            (l, scheme.var(i, true)),
            (r, scheme.var(i + 1, false)),
            (r, scheme.var(i + 1, true)),
        ];
        for (a, b) in e {
            g.add_edge(a, b).expect("gadget edges are fresh");
        }
    }
    assert_eq!(g.vertex_count(), scheme.full_vertices());
    assert_eq!(g.edge_count(), scheme.full_edges());
    Ok(g)
}

/// The automorphism induced by a solution `t` of the homogeneous companion
/// of `f`: swap `X^0` and `X^1` whenever `t[X]` is set, move each clause
/// vertex to the tag obtained by flipping those literals, fix everything
/// else. Works on both the core and the full numbering (`vertex_count`
/// selects which).
pub fn assignment_automorphism(
    f: &XorFormula,
    t: &[bool],
    vertex_count: u32,
) -> Result<Vec<u32>, CfiError> {
    let n = f.num_vars() as usize;
    if t.len() != n {
        return Err(CfiError::AssignmentLength {
            expected: n,
            actual: t.len(),
        });
    }
    if !f.homogeneous_companion().satisfied_by(t) {
        return Err(CfiError::NotASolution);
    }
    let scheme = VertexScheme::for_formula(f);
    let mut perm: Vec<u32> = (0..vertex_count).collect();
    for j in 1..=f.num_vars() {
        if t[j as usize - 1] {
            perm.swap(scheme.var(j, false) as usize, scheme.var(j, true) as usize);
        }
    }
    for (ci, clause) in f.clauses().iter().enumerate() {
        let c = ci as u32 + 1;
        let flips = clause.vars().map(|v| t[v as usize - 1]);
        for tag in ClauseTag::ALL {
            perm[scheme.clause(c, tag) as usize] = scheme.clause(c, tag.flipped(flips));
        }
    }
    Ok(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::tests::{complete_triples, two_clause};
    use crate::sampler::{sample_general_with, sample_homogeneous_with, trial_rng};

    fn single() -> XorFormula {
        XorFormula::homogeneous(3, [[1, 2, 3]]).unwrap()
    }

    fn solutions(f: &XorFormula) -> Vec<Vec<bool>> {
        let n = f.num_vars();
        (0u32..1 << n)
            .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| f.homogeneous_companion().satisfied_by(a))
            .collect()
    }

    #[test]
    fn incidence_examples() {
        let g = incidence_graph(&single());
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.neighbors(3), &[0, 1, 2]);
        assert_eq!(g.colors().unwrap(), &[0, 0, 0, 1]);

        let g = incidence_graph(&complete_triples());
        for v in 0..4 {
            assert_eq!(g.degree(v), 3, "variable {v}");
        }
        for c in 4..8 {
            assert_eq!(g.degree(c), 3, "clause {c}");
        }
    }

    #[test]
    fn core_counts_and_gadget_shape() {
        let g = build_core(&single());
        assert_eq!(g.vertex_count(), 10);
        assert_eq!(g.edge_count(), 15);
        let s = VertexScheme::for_formula(&single());
        let x = |j, b| s.var(j, b);
        assert_eq!(
            g.neighbors(s.clause(1, ClauseTag::T000)),
            &[x(1, true), x(2, true), x(3, true)]
        );
        assert_eq!(
            g.neighbors(s.clause(1, ClauseTag::T110)),
            &[x(1, false), x(2, false), x(3, true)]
        );
        assert_eq!(
            g.neighbors(s.clause(1, ClauseTag::T011)),
            &[x(1, true), x(2, false), x(3, false)]
        );
        assert_eq!(
            g.neighbors(s.clause(1, ClauseTag::T101)),
            &[x(1, false), x(2, true), x(3, false)]
        );
    }

    #[test]
    fn parity_one_clause_negates_smallest_variable() {
        let f = XorFormula::new(3, [([1, 2, 3], true)]).unwrap();
        let g = build_core(&f);
        let s = VertexScheme::for_formula(&f);
        assert_eq!(
            g.neighbors(s.clause(1, ClauseTag::T000)),
            &[s.var(1, false), s.var(2, true), s.var(3, true)]
        );
        // Every clause vertex sees an odd number of zero-copies.
        for tag in ClauseTag::ALL {
            let zeros = g
                .neighbors(s.clause(1, tag))
                .iter()
                .filter(|&&v| v % 2 == 0)
                .count();
            assert_eq!(zeros % 2, 1);
        }
    }

    #[test]
    fn full_counts() {
        let f = complete_triples();
        let g = build_full(&f).unwrap();
        assert_eq!(g.vertex_count(), 33);
        assert_eq!(g.edge_count(), 70);
        let s = VertexScheme::for_formula(&f);
        for i in 1..4 {
            assert_eq!(g.degree(s.order_stub(i)), 1);
            assert_eq!(g.degree(s.order_left(i)), 3);
            assert_eq!(g.degree(s.order_right(i)), 4);
        }
        for c in 1..=4 {
            for t in ClauseTag::ALL {
                assert_eq!(g.degree(s.clause(c, t)), 3);
            }
        }
        assert_eq!(build_full(&XorFormula::homogeneous(1, []).unwrap()), Err(CfiError::TooFewVariables(1)));
    }

    #[test]
    fn scheme_roles_round_trip() {
        let f = complete_triples();
        let s = VertexScheme::for_formula(&f);
        for v in 0..s.full_vertices() {
            let back = match s.role(v).unwrap() {
                VertexRole::Var { var, bit } => s.var(var, bit),
                VertexRole::Clause { clause, tag } => s.clause(clause, tag),
                VertexRole::OrderLeft(i) => s.order_left(i),
                VertexRole::OrderRight(i) => s.order_right(i),
                VertexRole::OrderStub(i) => s.order_stub(i),
            };
            assert_eq!(back, v);
        }
        assert_eq!(s.role(s.full_vertices()), None);
    }

    #[test]
    fn random_instances_invariants() {
        let mut rng = trial_rng(31, 0);
        for t in 0..60u64 {
            let n = 3 + (t % 20) as u32;
            let m = 1 + t % (2 * n as u64);
            let f = if t % 3 == 0 {
                sample_general_with(&mut rng, n, m).unwrap()
            } else {
                sample_homogeneous_with(&mut rng, n, m.min(crate::sampler::triples(n))).unwrap()
            };
            let s = VertexScheme::for_formula(&f);
            let core = build_core(&f);
            let full = build_full(&f).unwrap();
            assert_eq!(full.vertex_count(), s.full_vertices());
            assert_eq!(full.edge_count(), s.full_edges());
            // Core is the induced subgraph on the first 2n + 4m vertices.
            assert_eq!(full.induced_prefix(s.core_vertices()), core);

            let occ = f.occurrences();
            for j in 1..=n {
                for b in [false, true] {
                    let d = full.degree(s.var(j, b));
                    if occ[j as usize - 1] >= 1 {
                        assert!(d >= 4, "X_{j}^{b} has degree {d}");
                    }
                }
            }
            for c in 1..=s.m {
                for tag in ClauseTag::ALL {
                    assert_eq!(full.degree(s.clause(c, tag)), 3);
                }
            }
            for i in 1..n {
                assert_eq!(full.degree(s.order_stub(i)), 1);
            }
        }
    }

    #[test]
    fn solutions_induce_automorphisms() {
        for f in [two_clause(), complete_triples(), single()] {
            for t in solutions(&f) {
                let full = build_full(&f).unwrap();
                let p = assignment_automorphism(&f, &t, full.vertex_count()).unwrap();
                assert!(full.is_automorphism(&p));
                let core = build_core(&f);
                let p = assignment_automorphism(&f, &t, core.vertex_count()).unwrap();
                assert!(core.is_automorphism(&p));
            }
        }
        let f = two_clause();
        assert_eq!(
            assignment_automorphism(&f, &[true, false, false, false], 20),
            Err(CfiError::NotASolution)
        );
    }

    #[test]
    fn random_solutions_induce_automorphisms() {
        let mut rng = trial_rng(8, 8);
        for _ in 0..30 {
            let f = sample_general_with(&mut rng, 8, 6).unwrap();
            let full = build_full(&f).unwrap();
            for t in solutions(&f) {
                let p = assignment_automorphism(&f, &t, full.vertex_count()).unwrap();
                assert!(full.is_automorphism(&p));
            }
        }
    }
}

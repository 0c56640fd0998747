//! 3-XOR formulas and the linear systems they denote.
//!
//! A clause over variables `x < y < z` stands for the equation
//! `x + y + z = rhs` over GF(2). Two clauses are equivalent when they give
//! the same equation, so a clause is stored as its sorted variable triple
//! and parity bit. Variables are numbered from 1; column `j` of a matrix
//! view is variable `j + 1`.
//!
//! Clauses inside a [`XorFormula`] are kept in lexicographic order of
//! `(v1, v2, v3, rhs)`. Vertex numbering in the graph constructions is
//! derived from that order, so it must not change.

mod dimacs;

pub use dimacs::{
    parse_cnf_dimacs, parse_xor_dimacs, read_xor_dimacs_file, write_cnf_dimacs,
    write_cnf_dimacs_file, write_xor_dimacs, write_xor_dimacs_file,
};

use std::collections::BTreeSet;
use std::path::PathBuf;

use thiserror::Error;

use crate::gf2::{Gf2Matrix, Gf2Vector};

/// 1-based variable index.
pub type Var = u32;

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("clause {clause:?} repeats a variable")]
    DuplicateVariable { clause: [Var; 3] },
    #[error("variable {var} out of range 1..={n}")]
    VariableOutOfRange { var: Var, n: u32 },
    #[error("contradictory clauses on variables {vars:?}: both parities present")]
    ContradictoryDuplicate { vars: [Var; 3] },
    #[error("operation requires a homogeneous formula")]
    NotHomogeneous,
    #[error("empty clause in CNF input")]
    EmptyClause,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One 3-XOR clause in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XorClause {
    vars: [Var; 3],
    rhs: bool,
}

impl XorClause {
    pub fn new(vars: [Var; 3], rhs: bool) -> Result<Self, FormulaError> {
        let mut sorted = vars;
        sorted.sort_unstable();
        if sorted[0] == sorted[1] || sorted[1] == sorted[2] {
            return Err(FormulaError::DuplicateVariable { clause: vars });
        }
        Ok(Self { vars: sorted, rhs })
    }

    pub fn homogeneous(vars: [Var; 3]) -> Result<Self, FormulaError> {
        Self::new(vars, false)
    }

    /// Variables in ascending order.
    pub fn vars(&self) -> [Var; 3] {
        self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    /// Whether `assignment` (indexed by variable - 1) satisfies the equation.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        let sum = self
            .vars
            .iter()
            .fold(false, |acc, &v| acc ^ assignment[v as usize - 1]);
        sum == self.rhs
    }
}

/// A set of pairwise inequivalent 3-XOR clauses over `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XorFormula {
    n: u32,
    clauses: Vec<XorClause>,
}

impl XorFormula {
    /// Builds a formula from raw triples, sorting each triple and merging
    /// equivalent clauses. Two clauses on the same variables with different
    /// parity are rejected: hand-written inputs with that shape are almost
    /// always mistakes. Use [`XorFormula::from_equations`] to allow them.
    pub fn new<I>(n: u32, raw: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = ([Var; 3], bool)>,
    {
        let f = Self::from_equations(n, raw)?;
        for pair in f.clauses.windows(2) {
            if pair[0].vars == pair[1].vars {
                return Err(FormulaError::ContradictoryDuplicate {
                    vars: pair[0].vars,
                });
            }
        }
        Ok(f)
    }

    /// Like [`XorFormula::new`] but keeps both parities of a triple as two
    /// inequivalent clauses.
    pub fn from_equations<I>(n: u32, raw: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = ([Var; 3], bool)>,
    {
        let mut set = BTreeSet::new();
        for (vars, rhs) in raw {
            let c = XorClause::new(vars, rhs)?;
            if let Some(&v) = c.vars.iter().find(|&&v| v == 0 || v > n) {
                return Err(FormulaError::VariableOutOfRange { var: v, n });
            }
            set.insert(c);
        }
        Ok(Self {
            n,
            clauses: set.into_iter().collect(),
        })
    }

    /// Homogeneous formula from variable triples.
    pub fn homogeneous<I>(n: u32, triples: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = [Var; 3]>,
    {
        Self::new(n, triples.into_iter().map(|t| (t, false)))
    }

    pub fn num_vars(&self) -> u32 {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Clauses in canonical order.
    pub fn clauses(&self) -> &[XorClause] {
        &self.clauses
    }

    pub fn is_homogeneous(&self) -> bool {
        self.clauses.iter().all(|c| !c.rhs)
    }

    /// Same variable triples, every parity zero.
    pub fn homogeneous_companion(&self) -> XorFormula {
        let set: BTreeSet<XorClause> = self
            .clauses
            .iter()
            .map(|c| XorClause {
                vars: c.vars,
                rhs: false,
            })
            .collect();
        XorFormula {
            n: self.n,
            clauses: set.into_iter().collect(),
        }
    }

    /// Adds the unit equation `X_var = value`.
    pub fn pin(&self, var: Var, value: bool) -> Result<PinnedSystem, FormulaError> {
        if var == 0 || var > self.n {
            return Err(FormulaError::VariableOutOfRange { var, n: self.n });
        }
        Ok(PinnedSystem {
            formula: self.clone(),
            var,
            value,
        })
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assert_eq!(assignment.len(), self.n as usize);
        self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }

    /// Number of occurrences of each variable, indexed by variable - 1.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.n as usize];
        for c in &self.clauses {
            for v in c.vars {
                occ[v as usize - 1] += 1;
            }
        }
        occ
    }

    /// True iff the homogeneous system has only the zero solution, decided by
    /// a rank computation.
    pub fn is_uniquely_satisfiable(&self) -> Result<bool, FormulaError> {
        if !self.is_homogeneous() {
            return Err(FormulaError::NotHomogeneous);
        }
        Ok(self.rank() == self.n as usize)
    }

    pub fn rank(&self) -> usize {
        self.to_matrix().0.rank()
    }

    /// The CNF "f holds and some variable is true": each equation
    /// `x + y + z = 0` becomes its four parity clauses, followed by one
    /// clause listing every variable positively. It is satisfiable exactly
    /// when `f` has a nonzero solution.
    pub fn nontrivial_solution_formula(&self) -> Result<CnfFormula, FormulaError> {
        if !self.is_homogeneous() {
            return Err(FormulaError::NotHomogeneous);
        }
        let mut clauses = Vec::with_capacity(4 * self.clauses.len() + 1);
        for c in &self.clauses {
            clauses.extend(parity_clauses(&c.vars, false));
        }
        clauses.push((1..=self.n as i32).collect());
        CnfFormula::new(self.n, clauses)
    }
}

/// CNF expansion of `v1 + ... + vk = rhs`: one clause per assignment of the
/// wrong parity, forbidding it. For three variables and rhs 0 this yields
/// `(-x -y -z) (-x y z) (x -y z) (x y -z)`, in that order.
pub fn parity_clauses(vars: &[Var], rhs: bool) -> Vec<Vec<i32>> {
    let k = vars.len();
    let mut out = Vec::with_capacity(1 << k.saturating_sub(1));
    // Enumerate the forbidden assignments from "all true" downwards so the
    // three-variable case lists the all-negative clause first.
    for mask in (0u32..1 << k).rev() {
        let ones = mask.count_ones() as usize;
        if (ones % 2 == 1) == rhs {
            continue;
        }
        // Variable i is true in the forbidden assignment iff bit (k-1-i) is set.
        let clause = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let truth = mask >> (k - 1 - i) & 1 == 1;
                if truth {
                    -(v as i32)
                } else {
                    v as i32
                }
            })
            .collect();
        out.push(clause);
    }
    out
}

/// Anything that can be presented as a list of XOR equations.
pub trait XorSystem {
    fn num_vars(&self) -> u32;

    /// Equations as (variables, parity); variables ascending.
    fn equations(&self) -> Vec<(Vec<Var>, bool)>;

    /// One row per equation, in [`XorSystem::equations`] order; column `j`
    /// is variable `j + 1`.
    fn to_matrix(&self) -> (Gf2Matrix, Gf2Vector) {
        let eqs = self.equations();
        let mut m = Gf2Matrix::zeros(eqs.len(), self.num_vars() as usize);
        let mut b = Gf2Vector::zeros(eqs.len());
        for (r, (vars, rhs)) in eqs.iter().enumerate() {
            for &v in vars {
                m.set(r, v as usize - 1, true);
            }
            b.set(r, *rhs);
        }
        (m, b)
    }

    fn is_satisfiable(&self) -> bool {
        let (m, b) = self.to_matrix();
        m.solve(&b).expect("dimensions agree by construction").is_some()
    }
}

impl XorSystem for XorFormula {
    fn num_vars(&self) -> u32 {
        self.n
    }

    fn equations(&self) -> Vec<(Vec<Var>, bool)> {
        self.clauses.iter().map(|c| (c.vars.to_vec(), c.rhs)).collect()
    }
}

impl XorFormula {
    pub fn to_matrix(&self) -> (Gf2Matrix, Gf2Vector) {
        XorSystem::to_matrix(self)
    }
}

/// A formula plus one unit equation `X_var = value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinnedSystem {
    formula: XorFormula,
    var: Var,
    value: bool,
}

impl PinnedSystem {
    pub fn formula(&self) -> &XorFormula {
        &self.formula
    }

    pub fn pinned_var(&self) -> Var {
        self.var
    }

    pub fn pinned_value(&self) -> bool {
        self.value
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.formula.satisfied_by(assignment) && assignment[self.var as usize - 1] == self.value
    }
}

impl XorSystem for PinnedSystem {
    fn num_vars(&self) -> u32 {
        self.formula.n
    }

    /// The formula's clauses followed by the unit row.
    fn equations(&self) -> Vec<(Vec<Var>, bool)> {
        let mut eqs = self.formula.equations();
        eqs.push((vec![self.var], self.value));
        eqs
    }
}

/// A CNF formula with DIMACS-style signed literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> Result<Self, FormulaError> {
        for c in &clauses {
            if c.is_empty() {
                return Err(FormulaError::EmptyClause);
            }
            for &lit in c {
                let v = lit.unsigned_abs();
                if lit == 0 || v > num_vars {
                    return Err(FormulaError::VariableOutOfRange { var: v, n: num_vars });
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }
}

//! A small instrumented DPLL solver for CNF plus XOR constraints.
//!
//! With Gaussian elimination off, every XOR row is expanded into its parity
//! clauses and plain DPLL runs on the result. With it on, the XOR rows are
//! brought to reduced row echelon form up front (an inconsistent system is
//! refuted immediately) and the reduced rows propagate natively alongside
//! the CNF part. Both modes share the search: unit propagation, branching on
//! the variable with the most occurrences in the shortest open constraints
//! (lowest index on ties), false before true, chronological backtracking, no
//! learning and no restarts. The decision count is therefore reproducible.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::budget::SolveBudget;
use crate::formula::{parity_clauses, CnfFormula, Var, XorFormula};
use crate::gf2::{Gf2Matrix, Gf2Vector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("empty clause")]
    EmptyClause,
    #[error("XOR row of width {0} is too wide to expand into clauses")]
    XorTooWide(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("formula must be homogeneous and uniquely satisfiable")]
    Precondition,
    #[error("budget exhausted on the Gaussian-elimination run")]
    BudgetExhausted,
}

/// Widest XOR row the no-Gauss mode expands (2^(w-1) clauses each).
pub const MAX_EXPANDED_XOR_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorRow {
    pub vars: Vec<Var>,
    pub rhs: bool,
}

/// Clauses plus XOR rows over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInput {
    num_vars: u32,
    clauses: Vec<Vec<i32>>,
    xors: Vec<XorRow>,
}

impl SatInput {
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>, xors: Vec<XorRow>) -> Result<Self, SatError> {
        for c in &clauses {
            if c.is_empty() {
                return Err(SatError::EmptyClause);
            }
            for &l in c {
                if l == 0 || l.unsigned_abs() > num_vars {
                    return Err(SatError::LiteralOutOfRange {
                        lit: l as i64,
                        num_vars,
                    });
                }
            }
        }
        for x in &xors {
            for &v in &x.vars {
                if v == 0 || v > num_vars {
                    return Err(SatError::LiteralOutOfRange {
                        lit: v as i64,
                        num_vars,
                    });
                }
            }
        }
        let xors = xors.into_iter().map(normalize_xor).collect();
        Ok(Self {
            num_vars,
            clauses,
            xors,
        })
    }

    pub fn from_cnf(c: &CnfFormula) -> Self {
        Self {
            num_vars: c.num_vars(),
            clauses: c.clauses().to_vec(),
            xors: Vec::new(),
        }
    }

    pub fn from_xor_formula(f: &XorFormula) -> Self {
        Self {
            num_vars: f.num_vars(),
            clauses: Vec::new(),
            xors: f
                .clauses()
                .iter()
                .map(|c| XorRow {
                    vars: c.vars().to_vec(),
                    rhs: c.rhs(),
                })
                .collect(),
        }
    }

    /// The formula's XOR rows plus the clause "some variable is true".
    /// Expanded without Gaussian elimination this is exactly
    /// [`XorFormula::nontrivial_solution_formula`].
    pub fn nontrivial_solution(f: &XorFormula) -> Self {
        let mut s = Self::from_xor_formula(f);
        if f.num_vars() > 0 {
            s.clauses.push((1..=f.num_vars() as i32).collect());
        }
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn xors(&self) -> &[XorRow] {
        &self.xors
    }

    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        let val = |v: Var| model[v as usize - 1];
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| val(l.unsigned_abs()) == (l > 0)))
            && self
                .xors
                .iter()
                .all(|x| x.vars.iter().fold(false, |a, &v| a ^ val(v)) == x.rhs)
    }

    /// CNF clauses for every constraint, XOR rows expanded.
    pub fn expanded_clauses(&self) -> Result<Vec<Vec<i32>>, SatError> {
        let mut out = self.clauses.clone();
        for x in &self.xors {
            if x.vars.len() > MAX_EXPANDED_XOR_WIDTH {
                return Err(SatError::XorTooWide(x.vars.len()));
            }
            if x.vars.is_empty() {
                // `0 = rhs` has no clause form; `solve` refutes the `0 = 1` case up front.
                continue;
            }
            out.extend(parity_clauses(&x.vars, x.rhs));
        }
        Ok(out)
    }

    /// Reads DIMACS CNF where lines starting with `x` are XOR rows whose
    /// parity is the number of negated literals mod 2.
    pub fn parse_dimacs(text: &str) -> Result<Self, SatError> {
        let perr = |line: usize, message: &str| SatError::Parse {
            line,
            message: message.to_string(),
        };
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut xors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let nums: Vec<u32> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| perr(lineno, "bad header")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 {
                    return Err(perr(lineno, "bad header"));
                }
                num_vars = Some(nums[0]);
                continue;
            }
            let Some(nv) = num_vars else {
                return Err(perr(lineno, "clause before header"));
            };
            let (is_xor, body) = match line.strip_prefix('x') {
                Some(rest) => (true, rest),
                None => (false, line),
            };
            let lits: Vec<i32> = body
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| perr(lineno, "bad literal")))
                .collect::<Result<_, _>>()?;
            let Some((&0, lits)) = lits.split_last() else {
                return Err(perr(lineno, "clause not terminated by 0"));
            };
            if lits.contains(&0) {
                return Err(perr(lineno, "0 inside clause"));
            }
            if let Some(&l) = lits.iter().find(|l| l.unsigned_abs() > nv) {
                return Err(SatError::LiteralOutOfRange {
                    lit: l as i64,
                    num_vars: nv,
                });
            }
            if is_xor {
                let rhs = lits.iter().filter(|&&l| l < 0).count() % 2 == 1;
                xors.push(XorRow {
                    vars: lits.iter().map(|l| l.unsigned_abs()).collect(),
                    rhs,
                });
            } else {
                clauses.push(lits.to_vec());
            }
        }
        let num_vars = num_vars.ok_or_else(|| perr(0, "missing header"))?;
        Self::new(num_vars, clauses, xors)
    }
}

/// Sorts variables and cancels repeated ones (`v + v = 0`).
fn normalize_xor(mut x: XorRow) -> XorRow {
    x.vars.sort_unstable();
    let mut out: Vec<Var> = Vec::with_capacity(x.vars.len());
    for v in x.vars {
        if out.last() == Some(&v) {
            out.pop();
        } else {
            out.push(v);
        }
    }
    XorRow { vars: out, rhs: x.rhs }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// A model, indexed by variable - 1.
    Sat(Vec<bool>),
    Unsat,
    BudgetExhausted,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveResult::Sat(_) => "SAT",
            SolveResult::Unsat => "UNSAT",
            SolveResult::BudgetExhausted => "BUDGET_EXHAUSTED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub elapsed: Duration,
    pub result: SolveResult,
}

impl fmt::Display for SolveStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} decisions={} propagations={} conflicts={} time={:?}",
            self.result.label(),
            self.decisions,
            self.propagations,
            self.conflicts,
            self.elapsed
        )
    }
}

/// Solves `input`. `budget.max_steps` bounds the number of decisions.
pub fn solve(input: &SatInput, use_gauss: bool, budget: SolveBudget) -> Result<SolveStats, SatError> {
    let mut clock = budget.start();
    if input.xors.iter().any(|x| x.vars.is_empty() && x.rhs) {
        return Ok(SolveStats {
            decisions: 0,
            propagations: 0,
            conflicts: 1,
            elapsed: clock.elapsed(),
            result: SolveResult::Unsat,
        });
    }
    let mut engine = if use_gauss {
        match reduce_xors(input) {
            Some(rows) => Engine::new(input.num_vars, input.clauses.clone(), rows),
            None => {
                return Ok(SolveStats {
                    decisions: 0,
                    propagations: 0,
                    conflicts: 1,
                    elapsed: clock.elapsed(),
                    result: SolveResult::Unsat,
                })
            }
        }
    } else {
        Engine::new(input.num_vars, input.expanded_clauses()?, Vec::new())
    };
    let result = engine.run(&mut clock);
    if let SolveResult::Sat(model) = &result {
        assert!(input.satisfied_by(model), "solver produced a non-model");
    }
    Ok(SolveStats {
        decisions: engine.decisions,
        propagations: engine.propagations,
        conflicts: engine.conflicts,
        elapsed: clock.elapsed(),
        result,
    })
}

/// Reduced XOR rows, or `None` if the XOR part alone is inconsistent.
fn reduce_xors(input: &SatInput) -> Option<Vec<XorRow>> {
    if input.xors.is_empty() {
        return Some(Vec::new());
    }
    let n = input.num_vars as usize;
    let mut m = Gf2Matrix::zeros(input.xors.len(), n + 1);
    for (r, x) in input.xors.iter().enumerate() {
        for &v in &x.vars {
            m.set(r, v as usize - 1, true);
        }
        m.set(r, n, x.rhs);
    }
    let (red, pivots) = m.rref();
    let mut rows = Vec::with_capacity(pivots.len());
    for (r, &p) in pivots.iter().enumerate() {
        if p == n {
            // Pivot on the right-hand side column: 0 = 1.
            return None;
        }
        let row: Gf2Vector = red.row(r);
        let vars = row.ones().filter(|&c| c < n).map(|c| c as Var + 1).collect();
        rows.push(XorRow {
            vars,
            rhs: row.get(n),
        });
    }
    Some(rows)
}

const UNASSIGNED: i8 = -1;

enum Constraint {
    Clause(Vec<i32>),
    Xor(XorRow),
}

struct Engine {
    num_vars: usize,
    constraints: Vec<Constraint>,
    /// Per literal index (see `lit_index`), clauses containing that literal.
    clause_occ: Vec<Vec<u32>>,
    /// Per variable, XOR constraints containing it.
    xor_occ: Vec<Vec<u32>>,
    value: Vec<i8>,
    trail: Vec<Var>,
    qhead: usize,
    /// (trail length before the decision, variable, already flipped)
    stack: Vec<(usize, Var, bool)>,
    decisions: u64,
    propagations: u64,
    conflicts: u64,
}

fn lit_index(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize - 1;
    2 * v + usize::from(lit < 0)
}

impl Engine {
    fn new(num_vars: u32, clauses: Vec<Vec<i32>>, xors: Vec<XorRow>) -> Self {
        let n = num_vars as usize;
        let mut constraints = Vec::with_capacity(clauses.len() + xors.len());
        let mut clause_occ = vec![Vec::new(); 2 * n];
        let mut xor_occ = vec![Vec::new(); n];
        for mut c in clauses {
            c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l < 0));
            c.dedup();
            let id = constraints.len() as u32;
            for &l in &c {
                clause_occ[lit_index(l)].push(id);
            }
            constraints.push(Constraint::Clause(c));
        }
        for x in xors {
            let id = constraints.len() as u32;
            for &v in &x.vars {
                xor_occ[v as usize - 1].push(id);
            }
            constraints.push(Constraint::Xor(x));
        }
        Self {
            num_vars: n,
            constraints,
            clause_occ,
            xor_occ,
            value: vec![UNASSIGNED; n],
            trail: Vec::new(),
            qhead: 0,
            stack: Vec::new(),
            decisions: 0,
            propagations: 0,
            conflicts: 0,
        }
    }

    fn lit_value(&self, lit: i32) -> i8 {
        let v = self.value[lit.unsigned_abs() as usize - 1];
        if v == UNASSIGNED {
            UNASSIGNED
        } else {
            i8::from((v == 1) == (lit > 0))
        }
    }

    fn assign(&mut self, var: Var, val: bool) {
        debug_assert_eq!(self.value[var as usize - 1], UNASSIGNED);
        self.value[var as usize - 1] = i8::from(val);
        self.trail.push(var);
    }

    /// Examines one constraint; assigns a forced literal if it is unit.
    /// Returns `false` on conflict.
    fn examine(&mut self, id: usize) -> bool {
        match &self.constraints[id] {
            Constraint::Clause(c) => {
                let mut free = None;
                let mut free_count = 0;
                for &l in c {
                    match self.lit_value(l) {
                        1 => return true,
                        UNASSIGNED => {
                            free_count += 1;
                            free = Some(l);
                        }
                        _ => {}
                    }
                }
                match (free_count, free) {
                    (0, _) => false,
                    (1, Some(l)) => {
                        self.assign(l.unsigned_abs(), l > 0);
                        self.propagations += 1;
                        true
                    }
                    _ => true,
                }
            }
            Constraint::Xor(x) => {
                let mut parity = x.rhs;
                let mut free = None;
                let mut free_count = 0;
                for &v in &x.vars {
                    match self.value[v as usize - 1] {
                        UNASSIGNED => {
                            free_count += 1;
                            free = Some(v);
                        }
                        b => parity ^= b == 1,
                    }
                }
                match (free_count, free) {
                    (0, _) => !parity,
                    (1, Some(v)) => {
                        self.assign(v, parity);
                        self.propagations += 1;
                        true
                    }
                    _ => true,
                }
            }
        }
    }

    /// Unit propagation from `qhead`. Returns `false` on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let var = self.trail[self.qhead];
            self.qhead += 1;
            let val = self.value[var as usize - 1] == 1;
            let false_lit = if val { -(var as i32) } else { var as i32 };
            let idx = lit_index(false_lit);
            for k in 0..self.clause_occ[idx].len() {
                let id = self.clause_occ[idx][k] as usize;
                if !self.examine(id) {
                    return false;
                }
            }
            for k in 0..self.xor_occ[var as usize - 1].len() {
                let id = self.xor_occ[var as usize - 1][k] as usize;
                if !self.examine(id) {
                    return false;
                }
            }
        }
        true
    }

    fn initial_scan(&mut self) -> bool {
        for id in 0..self.constraints.len() {
            if !self.examine(id) {
                return false;
            }
        }
        self.propagate()
    }

    /// Branching variable, or `None` when every constraint is satisfied.
    fn pick_branch(&self) -> Option<Var> {
        let mut best_size = usize::MAX;
        let mut counts = vec![0u32; self.num_vars];
        for c in &self.constraints {
            let (open, size) = match c {
                Constraint::Clause(lits) => {
                    if lits.iter().any(|&l| self.lit_value(l) == 1) {
                        (false, 0)
                    } else {
                        let size = lits
                            .iter()
                            .filter(|&&l| self.lit_value(l) == UNASSIGNED)
                            .count();
                        (true, size)
                    }
                }
                Constraint::Xor(x) => {
                    let size = x
                        .vars
                        .iter()
                        .filter(|&&v| self.value[v as usize - 1] == UNASSIGNED)
                        .count();
                    (size > 0, size)
                }
            };
            if !open || size > best_size {
                continue;
            }
            if size < best_size {
                best_size = size;
                counts.iter_mut().for_each(|c| *c = 0);
            }
            let mut bump = |v: Var| {
                if self.value[v as usize - 1] == UNASSIGNED {
                    counts[v as usize - 1] += 1;
                }
            };
            match c {
                Constraint::Clause(lits) => lits.iter().for_each(|&l| bump(l.unsigned_abs())),
                Constraint::Xor(x) => x.vars.iter().for_each(|&v| bump(v)),
            }
        }
        if best_size == usize::MAX {
            return None;
        }
        let mut best: Option<(u32, usize)> = None;
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 && best.is_none_or(|(bc, _)| c > bc) {
                best = Some((c, i));
            }
        }
        best.map(|(_, i)| i as Var + 1)
    }

    fn backtrack_to(&mut self, trail_len: usize) {
        for &v in &self.trail[trail_len..] {
            self.value[v as usize - 1] = UNASSIGNED;
        }
        self.trail.truncate(trail_len);
        self.qhead = trail_len;
    }

    /// Undoes the most recent unflipped decision and takes its other branch.
    /// Returns `false` when the search space is exhausted.
    fn resolve_conflict(&mut self) -> bool {
        self.conflicts += 1;
        while let Some((len, var, flipped)) = self.stack.pop() {
            self.backtrack_to(len);
            if !flipped {
                self.stack.push((len, var, true));
                self.assign(var, true);
                return true;
            }
        }
        false
    }

    fn model(&self) -> Vec<bool> {
        self.value.iter().map(|&v| v == 1).collect()
    }

    fn run(&mut self, clock: &mut crate::budget::BudgetClock) -> SolveResult {
        if !self.initial_scan() {
            self.conflicts += 1;
            return SolveResult::Unsat;
        }
        loop {
            match self.pick_branch() {
                None => return SolveResult::Sat(self.model()),
                Some(var) => {
                    if !clock.tick() {
                        return SolveResult::BudgetExhausted;
                    }
                    self.decisions += 1;
                    self.stack.push((self.trail.len(), var, false));
                    self.assign(var, false);
                }
            }
            while !self.propagate() {
                if !self.resolve_conflict() {
                    return SolveResult::Unsat;
                }
                if clock.time_exceeded() {
                    return SolveResult::BudgetExhausted;
                }
            }
        }
    }
}

/// Outcome of the Gaussian-gap measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRatio {
    /// `(plain decisions + 1) / (gauss decisions + 1)`; infinite when the
    /// run without elimination exhausted its budget.
    pub ratio: f64,
    pub with_gauss: SolveStats,
    pub without_gauss: SolveStats,
}

/// Measures how much harder refuting "f has a nonzero solution" is without
/// Gaussian elimination than with it. Costs are decision counts plus one so
/// that two propagation-only refutations compare as equal.
pub fn gauss_ratio(f: &XorFormula, budget: SolveBudget) -> Result<GaussRatio, SatError> {
    if !f.is_homogeneous() {
        return Err(SatError::Precondition);
    }
    let input = SatInput::nontrivial_solution(f);
    let with_gauss = solve(&input, true, budget)?;
    match with_gauss.result {
        SolveResult::Unsat => {}
        SolveResult::Sat(_) => return Err(SatError::Precondition),
        SolveResult::BudgetExhausted => return Err(SatError::BudgetExhausted),
    }
    let without_gauss = solve(&input, false, budget)?;
    let ratio = match without_gauss.result {
        SolveResult::BudgetExhausted => f64::INFINITY,
        SolveResult::Unsat => {
            (without_gauss.decisions + 1) as f64 / (with_gauss.decisions + 1) as f64
        }
        SolveResult::Sat(_) => unreachable!("modes disagree on satisfiability"),
    };
    Ok(GaussRatio {
        ratio,
        with_gauss,
        without_gauss,
    })
}

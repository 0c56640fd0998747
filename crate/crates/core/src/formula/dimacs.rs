//! DIMACS CNF and the XOR extension.
//!
//! XOR lines read `x <lit> <lit> <lit> 0`. The equation is the sum of the
//! variables, with parity equal to the number of negated literals mod 2;
//! so `x 1 2 3 0` is `x1 + x2 + x3 = 0`. On output, parity 1 is written by
//! negating the smallest variable. The header counts XOR lines as clauses.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CnfFormula, FormulaError, Var, XorFormula};

pub fn write_cnf_dimacs(c: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", c.num_vars(), c.num_clauses());
    for clause in c.clauses() {
        for lit in clause {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn write_xor_dimacs(f: &XorFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        let [a, b, d] = c.vars();
        if c.rhs() {
            writeln!(out, "x -{a} {b} {d} 0").unwrap();
        } else {
            writeln!(out, "x {a} {b} {d} 0").unwrap();
        }
    }
    out
}

pub fn write_cnf_dimacs_file(c: &CnfFormula, path: &Path) -> Result<(), FormulaError> {
    fs::write(path, write_cnf_dimacs(c)).map_err(|source| FormulaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_xor_dimacs_file(f: &XorFormula, path: &Path) -> Result<(), FormulaError> {
    fs::write(path, write_xor_dimacs(f)).map_err(|source| FormulaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_xor_dimacs_file(path: &Path) -> Result<XorFormula, FormulaError> {
    let text = fs::read_to_string(path).map_err(|source| FormulaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_xor_dimacs(&text)
}

struct Header {
    vars: u32,
    clauses: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Parse {
        line,
        message: message.into(),
    }
}

/// Splits the input into the header and the remaining body lines, skipping
/// comments and blank lines. Line numbers are 1-based.
fn split_header(text: &str) -> Result<(Header, Vec<(usize, &str)>), FormulaError> {
    let mut header = None;
    let mut body = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(parse_err(lineno, "expected 'p cnf <vars> <clauses>'"));
            }
            let vars = parts[2]
                .parse()
                .map_err(|_| parse_err(lineno, "bad variable count"))?;
            let clauses = parts[3]
                .parse()
                .map_err(|_| parse_err(lineno, "bad clause count"))?;
            header = Some(Header { vars, clauses });
            continue;
        }
        if header.is_none() {
            return Err(parse_err(lineno, "clause before header"));
        }
        body.push((lineno, line));
    }
    let header = header.ok_or_else(|| parse_err(0, "missing header"))?;
    Ok((header, body))
}

fn parse_literals(lineno: usize, text: &str, vars: u32) -> Result<Vec<i32>, FormulaError> {
    let mut lits = Vec::new();
    let mut terminated = false;
    for tok in text.split_whitespace() {
        if terminated {
            return Err(parse_err(lineno, "tokens after terminating 0"));
        }
        let lit: i32 = tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad literal {tok:?}")))?;
        if lit == 0 {
            terminated = true;
            continue;
        }
        if lit.unsigned_abs() > vars {
            return Err(parse_err(
                lineno,
                format!("literal {lit} exceeds declared variable count {vars}"),
            ));
        }
        lits.push(lit);
    }
    if !terminated {
        return Err(parse_err(lineno, "clause not terminated by 0"));
    }
    Ok(lits)
}

pub fn parse_cnf_dimacs(text: &str) -> Result<CnfFormula, FormulaError> {
    let (header, body) = split_header(text)?;
    let mut clauses = Vec::with_capacity(body.len());
    for (lineno, line) in body {
        if line.starts_with('x') {
            return Err(parse_err(lineno, "XOR clause in plain CNF input"));
        }
        let lits = parse_literals(lineno, line, header.vars)?;
        if lits.is_empty() {
            return Err(parse_err(lineno, "empty clause"));
        }
        clauses.push(lits);
    }
    if clauses.len() != header.clauses {
        return Err(parse_err(
            0,
            format!(
                "header declares {} clauses, found {}",
                header.clauses,
                clauses.len()
            ),
        ));
    }
    CnfFormula::new(header.vars, clauses)
}

/// Parses an XOR-extension file. Clauses are validated with the strict
/// constructor, so a triple given with both parities is an error.
pub fn parse_xor_dimacs(text: &str) -> Result<XorFormula, FormulaError> {
    let (header, body) = split_header(text)?;
    let mut raw = Vec::with_capacity(body.len());
    for (lineno, line) in body {
        let Some(rest) = line.strip_prefix('x') else {
            return Err(parse_err(lineno, "expected an XOR clause line"));
        };
        let lits = parse_literals(lineno, rest, header.vars)?;
        if lits.len() != 3 {
            return Err(parse_err(lineno, "XOR clause must have exactly 3 literals"));
        }
        let rhs = lits.iter().filter(|&&l| l < 0).count() % 2 == 1;
        let vars: [Var; 3] = [
            lits[0].unsigned_abs(),
            lits[1].unsigned_abs(),
            lits[2].unsigned_abs(),
        ];
        raw.push((vars, rhs));
    }
    if raw.len() != header.clauses {
        return Err(parse_err(
            0,
            format!(
                "header declares {} clauses, found {}",
                header.clauses,
                raw.len()
            ),
        ));
    }
    XorFormula::new(header.vars, raw)
}

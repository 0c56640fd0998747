//! Graph file formats: dreadnaut input and DIMACS edge lists.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_atomic, PipelineError};
use crate::cfi::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    #[default]
    Dre,
    Dimacs,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Dre => "dre",
            GraphFormat::Dimacs => "dimacs",
        }
    }

    pub fn write(self, g: &Graph) -> String {
        match self {
            GraphFormat::Dre => write_dre(g),
            GraphFormat::Dimacs => write_dimacs_graph(g),
        }
    }

    pub fn parse(self, text: &str) -> Result<Graph, PipelineError> {
        match self {
            GraphFormat::Dre => parse_dre(text),
            GraphFormat::Dimacs => parse_dimacs_graph(text),
        }
    }
}

/// `n=<N> $=0 g`, then one `v : w1 w2;` line per vertex with larger
/// neighbours; the last line ends in `.` instead of `;`.
pub fn write_dre(g: &Graph) -> String {
    let mut out = format!("n={} $=0 g\n", g.vertex_count());
    let lines: Vec<String> = (0..g.vertex_count())
        .filter_map(|v| {
            let up: Vec<String> = g.neighbors(v).iter().filter(|&&w| w > v).map(u32::to_string).collect();
            (!up.is_empty()).then(|| format!("{v} : {}", up.join(" ")))
        })
        .collect();
    if lines.is_empty() {
        out.push_str(".\n");
    }
    for (i, line) in lines.iter().enumerate() {
        let end = if i + 1 == lines.len() { '.' } else { ';' };
        let _ = writeln!(out, "{line}{end}");
    }
    out
}

fn parse_error(line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads the subset of dreadnaut syntax that [`write_dre`] emits.
pub fn parse_dre(text: &str) -> Result<Graph, PipelineError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let n: u32 = header
        .trim()
        .strip_prefix("n=")
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(1, format!("bad header {header:?}")))?;
    if header.split_whitespace().last() != Some("g") {
        return Err(parse_error(1, "header must end with the g command"));
    }
    let mut g = Graph::empty(n);
    let mut finished = false;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if finished {
            return Err(parse_error(lineno, "content after the final '.'"));
        }
        if line == "." {
            finished = true;
            continue;
        }
        let (body, end) = line.split_at(line.len() - 1);
        finished = match end {
            "." => true,
            ";" => false,
            _ => return Err(parse_error(lineno, "adjacency line must end in ';' or '.'")),
        };
        let (v, rest) = body
            .split_once(':')
            .ok_or_else(|| parse_error(lineno, "missing ':'"))?;
        let v: u32 = v.trim().parse().map_err(|_| parse_error(lineno, "bad vertex"))?;
        for w in rest.split_whitespace() {
            let w: u32 = w.parse().map_err(|_| parse_error(lineno, format!("bad neighbour {w:?}")))?;
            g.add_edge(v, w).map_err(|e| parse_error(lineno, e.to_string()))?;
        }
    }
    if !finished {
        return Err(parse_error(text.lines().count(), "missing final '.'"));
    }
    Ok(g)
}

/// `p edge N E` followed by 1-based `e u v` lines in ascending order.
pub fn write_dimacs_graph(g: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", g.vertex_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

pub fn parse_dimacs_graph(text: &str) -> Result<Graph, PipelineError> {
    let mut graph: Option<(Graph, usize)> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("c") => continue,
            Some("p") => {
                if graph.is_some() {
                    return Err(parse_error(lineno, "second problem line"));
                }
                if tok.next() != Some("edge") {
                    return Err(parse_error(lineno, "expected 'p edge'"));
                }
                let n: u32 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_error(lineno, "bad vertex count"))?;
                let e: usize = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_error(lineno, "bad edge count"))?;
                graph = Some((Graph::empty(n), e));
            }
            Some("e") => {
                let (g, _) = graph.as_mut().ok_or_else(|| parse_error(lineno, "edge before problem line"))?;
                let mut endpoint = || -> Result<u32, PipelineError> {
                    let x: u32 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_error(lineno, "bad endpoint"))?;
                    x.checked_sub(1).ok_or_else(|| parse_error(lineno, "endpoints are 1-based"))
                };
                let (u, v) = (endpoint()?, endpoint()?);
                g.add_edge(u, v).map_err(|e| parse_error(lineno, e.to_string()))?;
            }
            Some(other) => return Err(parse_error(lineno, format!("unknown line type {other:?}"))),
        }
    }
    let (g, declared) = graph.ok_or_else(|| parse_error(1, "missing problem line"))?;
    if g.edge_count() != declared {
        return Err(parse_error(1, format!("declared {declared} edges, found {}", g.edge_count())));
    }
    Ok(g)
}

pub fn export_graph(g: &Graph, format: GraphFormat, path: &Path) -> Result<(), PipelineError> {
    write_atomic(path, format.write(g).as_bytes())
}

pub fn import_graph(path: &Path, format: GraphFormat) -> Result<Graph, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    format.parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_in_both_formats() {
        let g = Graph::path(3);
        assert_eq!(write_dre(&g), "n=3 $=0 g\n0 : 1;\n1 : 2.\n");
        assert_eq!(write_dimacs_graph(&g), "p edge 3 2\ne 1 2\ne 2 3\n");
    }

    #[test]
    fn edgeless_graphs() {
        assert_eq!(write_dre(&Graph::empty(2)), "n=2 $=0 g\n.\n");
        assert_eq!(parse_dre("n=2 $=0 g\n.\n").unwrap().vertex_count(), 2);
        assert_eq!(write_dimacs_graph(&Graph::empty(2)), "p edge 2 0\n");
    }

    #[test]
    fn star_lists_each_edge_once() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(write_dre(&g), "n=4 $=0 g\n0 : 1 2 3.\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_dre("").is_err());
        assert!(parse_dre("n=3 $=0 g\n0 : 1;\n").is_err());
        assert!(parse_dre("n=3 $=0 g\n0 : 5.\n").is_err());
        assert!(parse_dre("n=3 $=0 g\n0 : 1.\n1 : 2.\n").is_err());
        assert!(parse_dimacs_graph("p edge 3 2\ne 1 2\n").is_err());
        assert!(parse_dimacs_graph("e 1 2\n").is_err());
        assert!(parse_dimacs_graph("p edge 3 1\ne 0 2\n").is_err());
        assert!(parse_dimacs_graph("p edge 3 1\ne 1 1\n").is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (0u32..16).prop_flat_map(|n| {
            let pairs: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |mask| {
                Graph::from_edges(n, pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&e, _)| e)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trips(g in arb_graph()) {
            for format in [GraphFormat::Dre, GraphFormat::Dimacs] {
                let text = format.write(&g);
                let back = format.parse(&text).unwrap();
                prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
                prop_assert_eq!(back.vertex_count(), g.vertex_count());
                prop_assert_eq!(format.write(&back), text);
            }
        }
    }
}

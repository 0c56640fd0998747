//! Running instances through automorphism solvers and summarizing costs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::budget::SolveBudget;
use crate::canon::{ir_automorphisms, SearchOptions, SearchStatus, TargetCell};
use crate::cfi::Graph;
use crate::pipeline::{import_graph, write_dimacs_graph, GraphFormat, InstanceRecord, PipelineError};

pub const MISSING_SOLVER: &str = "MISSING_SOLVER";
pub const INTERNAL_SOLVER: &str = "internal";
pub const CSV_HEADER: &str = "instance,n_vars,m,vertices,solver,time,status,nodes";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BenchStatus {
    Ok,
    Timeout,
    Error,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Ok => "OK",
            BenchStatus::Timeout => "TIMEOUT",
            BenchStatus::Error => "ERROR",
        }
    }
}

/// A graph file plus what is known about the formula behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchInstance {
    pub id: String,
    pub digest: Option<String>,
    pub n_vars: Option<u32>,
    pub m: Option<u64>,
    pub path: PathBuf,
    pub format: GraphFormat,
}

impl BenchInstance {
    pub fn from_record(record: &InstanceRecord, base: &Path) -> Self {
        Self {
            id: record.id.clone(),
            digest: Some(record.clause_digest.clone()),
            n_vars: Some(record.n),
            m: Some(record.m),
            path: base.join(&record.graph_file),
            format: record.graph_format,
        }
    }

    /// A bare graph file; the format follows the extension (`.dre` unless
    /// it is `.dimacs`).
    pub fn from_graph_file(path: &Path) -> Self {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("dimacs") => GraphFormat::Dimacs,
            _ => GraphFormat::Dre,
        };
        Self {
            id: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            digest: None,
            n_vars: None,
            m: None,
            path: path.to_path_buf(),
            format,
        }
    }

    pub fn load(&self) -> Result<Graph, PipelineError> {
        import_graph(&self.path, self.format)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub instance: String,
    pub digest: Option<String>,
    pub n_vars: Option<u32>,
    pub m: Option<u64>,
    pub vertices: Option<u32>,
    pub solver: String,
    pub solver_version: Option<String>,
    /// Wall time; the configured limit for timeouts.
    pub time: Duration,
    pub status: BenchStatus,
    pub reason: Option<String>,
    pub group_size: Option<BigUint>,
    pub search_nodes: Option<u64>,
}

impl BenchResult {
    fn for_instance(inst: &BenchInstance, solver: &str) -> Self {
        Self {
            instance: inst.id.clone(),
            digest: inst.digest.clone(),
            n_vars: inst.n_vars,
            m: inst.m,
            vertices: None,
            solver: solver.to_string(),
            solver_version: None,
            time: Duration::ZERO,
            status: BenchStatus::Error,
            reason: None,
            group_size: None,
            search_nodes: None,
        }
    }

    fn error(mut self, reason: impl Into<String>) -> Self {
        self.status = BenchStatus::Error;
        self.reason = Some(reason.into());
        self
    }
}

/// How a solver wants its input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverKind {
    /// dreadnaut reading the `.dre` body on stdin, then `command` (e.g.
    /// `At` for Traces, `An` for nauty), `x` and `q`.
    Dreadnaut { command: String },
    /// `program [args] <dimacs file>`; output `|Aut|: <n>`.
    Bliss,
    /// `program [args] <dimacs file>`; group size only if printed in a
    /// recognised form.
    Conauto,
    /// Arbitrary command; `{file}` in an argument is replaced by the graph
    /// path, `{dimacs}` by a DIMACS copy of the graph.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverAdapter {
    pub name: String,
    pub program: PathBuf,
    pub args: Vec<String>,
    pub version: Option<String>,
    pub kind: SolverKind,
}

impl SolverAdapter {
    pub fn traces(program: impl Into<PathBuf>) -> Self {
        Self::dreadnaut("traces", program, "At")
    }

    pub fn nauty(program: impl Into<PathBuf>) -> Self {
        Self::dreadnaut("nauty", program, "An")
    }

    fn dreadnaut(name: &str, program: impl Into<PathBuf>, command: &str) -> Self {
        Self {
            name: name.into(),
            program: program.into(),
            args: Vec::new(),
            version: None,
            kind: SolverKind::Dreadnaut {
                command: command.into(),
            },
        }
    }

    pub fn bliss(program: impl Into<PathBuf>) -> Self {
        Self {
            name: "bliss".into(),
            program: program.into(),
            args: Vec::new(),
            version: None,
            kind: SolverKind::Bliss,
        }
    }

    pub fn conauto(program: impl Into<PathBuf>) -> Self {
        Self {
            name: "conauto".into(),
            program: program.into(),
            args: Vec::new(),
            version: None,
            kind: SolverKind::Conauto,
        }
    }

    pub fn custom(name: &str, program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        Self {
            name: name.into(),
            program: program.into(),
            args,
            version: None,
            kind: SolverKind::Custom,
        }
    }

    /// Adapter for `name=program` (name one of traces, nauty, bliss,
    /// conauto), or a bare known name looked up on `PATH`.
    pub fn from_spec(spec: &str) -> Option<Self> {
        let (name, program) = match spec.split_once('=') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let default = |p: &str| PathBuf::from(program.unwrap_or(p));
        Some(match name {
            "traces" => Self::traces(default("dreadnaut")),
            "nauty" => Self::nauty(default("dreadnaut")),
            "bliss" => Self::bliss(default("bliss")),
            "conauto" => Self::conauto(default("conauto")),
            _ => return None,
        })
    }
}

/// Finds `program` on `PATH` unless it already names a file.
pub fn find_program(program: &Path) -> Option<PathBuf> {
    if program.components().count() > 1 {
        return program.is_file().then(|| program.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

/// Group size from solver output: dreadnaut's `grpsize=<n>` or bliss's
/// `|Aut|: <n>`. Only exact integers are reported.
pub fn parse_group_size(output: &str) -> Option<BigUint> {
    for marker in ["grpsize=", "|Aut|:"] {
        if let Some(at) = output.find(marker) {
            let rest = output[at + marker.len()..].trim_start();
            let end = rest.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '+')).unwrap_or(rest.len());
            let token = rest[..end].trim_end_matches('.');
            if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
                return token.parse().ok();
            }
            return None;
        }
    }
    None
}

/// Runs one external solver on one instance, killing it at `timeout`.
pub fn run_external(adapter: &SolverAdapter, inst: &BenchInstance, timeout: Duration) -> BenchResult {
    let mut result = BenchResult::for_instance(inst, &adapter.name);
    result.solver_version = adapter.version.clone();
    let Some(program) = find_program(&adapter.program) else {
        return result.error(MISSING_SOLVER);
    };
    let graph = match inst.load() {
        Ok(g) => g,
        Err(e) => return result.error(format!("bad instance: {e}")),
    };
    result.vertices = Some(graph.vertex_count());

    let needs_dimacs = match &adapter.kind {
        SolverKind::Bliss | SolverKind::Conauto => true,
        SolverKind::Custom => adapter.args.iter().any(|a| a.contains("{dimacs}")),
        SolverKind::Dreadnaut { .. } => false,
    };
    let dimacs = if needs_dimacs {
        let file = tempfile::Builder::new().prefix("hardgraph-").suffix(".dimacs").tempfile();
        match file.and_then(|mut f| f.write_all(write_dimacs_graph(&graph).as_bytes()).map(|_| f)) {
            Ok(f) => Some(f),
            Err(e) => return result.error(format!("temp file: {e}")),
        }
    } else {
        None
    };
    let dimacs_path = dimacs.as_ref().map(|f| f.path().to_string_lossy().into_owned());

    let mut cmd = Command::new(&program);
    let mut stdin_data: Option<Vec<u8>> = None;
    match &adapter.kind {
        SolverKind::Dreadnaut { command } => {
            let body = match std::fs::read(&inst.path) {
                Ok(b) => b,
                Err(e) => return result.error(format!("read {}: {e}", inst.path.display())),
            };
            let body = if inst.format == GraphFormat::Dre {
                body
            } else {
                crate::pipeline::write_dre(&graph).into_bytes()
            };
            let mut input = body;
            input.extend_from_slice(format!("{command}\nx\nq\n").as_bytes());
            stdin_data = Some(input);
            cmd.args(&adapter.args);
        }
        SolverKind::Bliss | SolverKind::Conauto => {
            cmd.args(&adapter.args);
            cmd.arg(dimacs_path.as_deref().unwrap_or_default());
        }
        SolverKind::Custom => {
            let file = inst.path.to_string_lossy();
            for a in &adapter.args {
                let a = a.replace("{file}", &file);
                let a = match &dimacs_path {
                    Some(d) => a.replace("{dimacs}", d),
                    None => a,
                };
                cmd.arg(a);
            }
        }
    }
    cmd.stdin(if stdin_data.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::null());

    let started = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => return result.error(format!("spawn: {e}")),
    };
    if let (Some(data), Some(mut stdin)) = (stdin_data, child.stdin.take()) {
        std::thread::spawn(move || {
            let _ = stdin.write_all(&data);
        });
    }
    let reader = child.stdout.take().map(|mut out| {
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = out.read_to_string(&mut s);
            s
        })
    });

    let exit = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if started.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => {
                let _ = child.kill();
                return result.error(format!("wait: {e}"));
            }
        }
    };
    let elapsed = started.elapsed();
    let output = reader.and_then(|h| h.join().ok()).unwrap_or_default();
    match exit {
        None => {
            result.status = BenchStatus::Timeout;
            result.time = timeout;
        }
        Some(status) if !status.success() => {
            result.time = elapsed;
            result = result.error(format!("exit status {status}"));
        }
        Some(_) => {
            result.status = BenchStatus::Ok;
            result.time = elapsed;
            result.group_size = parse_group_size(&output);
        }
    }
    result
}

/// Runs the internal IR search with a time limit.
pub fn run_internal(inst: &BenchInstance, timeout: Duration, target: TargetCell) -> BenchResult {
    let mut result = BenchResult::for_instance(inst, INTERNAL_SOLVER);
    result.solver_version = Some(crate::pipeline::TOOL_VERSION.to_string());
    let graph = match inst.load() {
        Ok(g) => g,
        Err(e) => return result.error(format!("bad instance: {e}")),
    };
    run_internal_graph(result, &graph, timeout, target)
}

fn run_internal_graph(mut result: BenchResult, graph: &Graph, timeout: Duration, target: TargetCell) -> BenchResult {
    result.vertices = Some(graph.vertex_count());
    let started = Instant::now();
    let report = ir_automorphisms(
        graph,
        &SearchOptions {
            target,
            budget: SolveBudget::time(timeout),
        },
    );
    result.search_nodes = Some(report.search_nodes);
    match report.status {
        SearchStatus::Complete => {
            result.status = BenchStatus::Ok;
            result.time = started.elapsed();
            result.group_size = Some(report.group_size);
        }
        SearchStatus::Timeout => {
            result.status = BenchStatus::Timeout;
            result.time = timeout;
        }
    }
    result
}

/// Runs every adapter (and optionally the internal solver) on every
/// instance. With `parallel`, instances run concurrently, which skews wall
/// times.
pub fn run_batch(
    adapters: &[SolverAdapter],
    internal: Option<TargetCell>,
    instances: &[BenchInstance],
    timeout: Duration,
    parallel: bool,
) -> Vec<BenchResult> {
    let one = |inst: &BenchInstance| -> Vec<BenchResult> {
        let mut out: Vec<BenchResult> = adapters.iter().map(|a| run_external(a, inst, timeout)).collect();
        if let Some(target) = internal {
            out.push(run_internal(inst, timeout, target));
        }
        for r in &out {
            if r.status == BenchStatus::Error {
                log::warn!("{} on {}: {}", r.solver, r.instance, r.reason.as_deref().unwrap_or(""));
            }
        }
        out
    };
    if parallel {
        use rayon::prelude::*;
        instances.par_iter().flat_map(one).collect()
    } else {
        instances.iter().flat_map(one).collect()
    }
}

/// Pairs of results on the same instance whose exact group sizes differ.
pub fn group_size_disagreements(results: &[BenchResult]) -> Vec<(String, String, String)> {
    let mut by_instance: BTreeMap<&str, Vec<&BenchResult>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.group_size.is_some()) {
        by_instance.entry(&r.instance).or_default().push(r);
    }
    let mut out = Vec::new();
    for (inst, rs) in by_instance {
        for pair in rs.windows(2) {
            if pair[0].group_size != pair[1].group_size {
                out.push((inst.to_string(), pair[0].solver.clone(), pair[1].solver.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub solver: String,
    pub points: usize,
    pub distinct_sizes: usize,
    /// Least-squares slope of ln(cost) against vertex count.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Cost ratio between the largest and smallest size, from medians.
    pub end_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub csv: String,
    pub growth_report: String,
    pub fits: Vec<GrowthFit>,
    /// Per-solver `vertices cost status` data files, keyed by solver.
    pub plot_data: BTreeMap<String, String>,
}

fn cost(r: &BenchResult) -> f64 {
    match r.search_nodes {
        Some(n) => n as f64,
        None => r.time.as_secs_f64(),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Least-squares fit of `ln(cost)` against vertices.
pub fn fit_growth(solver: &str, points: &[(u32, f64)]) -> GrowthFit {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, c)| c > 0.0 && c.is_finite())
        .map(|&(v, c)| (v as f64, c.ln()))
        .collect();
    let mut sizes: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for &(v, c) in points {
        sizes.entry(v).or_default().push(c);
    }
    let distinct = sizes.len();
    let end_ratio = if distinct >= 2 {
        let first = median(sizes.values().next().unwrap().clone());
        let last = median(sizes.values().next_back().unwrap().clone());
        (first > 0.0).then(|| last / first)
    } else {
        None
    };
    let (slope, intercept) = if distinct >= 3 && usable.len() >= 3 {
        let n = usable.len() as f64;
        let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
        let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let b = sxy / sxx;
            (Some(b), Some(my - b * mx))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    GrowthFit {
        solver: solver.to_string(),
        points: points.len(),
        distinct_sizes: distinct,
        slope,
        intercept,
        end_ratio,
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn summarize(results: &[BenchResult]) -> Summary {
    let mut rows: Vec<&BenchResult> = results.iter().collect();
    rows.sort_by(|a, b| (&a.instance, &a.solver).cmp(&(&b.instance, &b.solver)));

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.6},{},{}",
            r.instance,
            opt(r.n_vars),
            opt(r.m),
            opt(r.vertices),
            r.solver,
            r.time.as_secs_f64(),
            r.status.as_str(),
            opt(r.search_nodes)
        );
    }

    let mut per_solver: BTreeMap<&str, Vec<&BenchResult>> = BTreeMap::new();
    for r in &rows {
        per_solver.entry(&r.solver).or_default().push(r);
    }
    let mut report = String::new();
    let mut fits = Vec::new();
    let mut plot_data = BTreeMap::new();
    for (solver, rs) in per_solver {
        let timed: Vec<&&BenchResult> = rs.iter().filter(|r| r.status != BenchStatus::Error && r.vertices.is_some()).collect();
        let points: Vec<(u32, f64)> = timed.iter().map(|r| (r.vertices.unwrap(), cost(r))).collect();
        let metric = if timed.iter().all(|r| r.search_nodes.is_some()) && !timed.is_empty() {
            "search nodes"
        } else {
            "seconds"
        };
        let timeouts = rs.iter().filter(|r| r.status == BenchStatus::Timeout).count();
        let errors = rs.iter().filter(|r| r.status == BenchStatus::Error).count();
        let fit = fit_growth(solver, &points);
        let _ = writeln!(
            report,
            "{solver}: {} runs, {timeouts} timeouts, {errors} errors, cost in {metric}",
            rs.len()
        );
        match (fit.slope, fit.end_ratio) {
            (Some(b), _) => {
                let _ = writeln!(
                    report,
                    "  fit ln(cost) = {:.4} + {:.6} * vertices over {} sizes; cost doubles every {} vertices",
                    fit.intercept.unwrap_or(0.0),
                    b,
                    fit.distinct_sizes,
                    if b > 0.0 { format!("{:.1}", std::f64::consts::LN_2 / b) } else { "-".into() }
                );
            }
            (None, Some(r)) => {
                let _ = writeln!(report, "  two sizes only: median cost ratio {r:.3}, no fit");
            }
            (None, None) => {
                let _ = writeln!(report, "  not enough sizes for a trend");
            }
        }
        let mut dat = String::from("# vertices cost status\n");
        let mut sorted: Vec<&&&BenchResult> = timed.iter().collect();
        sorted.sort_by(|a, b| a.vertices.cmp(&b.vertices).then(cost(a).total_cmp(&cost(b))));
        for r in sorted {
            let _ = writeln!(dat, "{} {} {}", r.vertices.unwrap(), cost(r), r.status.as_str());
        }
        plot_data.insert(solver.to_string(), dat);
        fits.push(fit);
    }
    let disagreements = group_size_disagreements(results);
    if !disagreements.is_empty() {
        for (inst, a, b) in &disagreements {
            let _ = writeln!(report, "group size disagreement on {inst}: {a} vs {b}");
        }
    }
    Summary {
        csv,
        growth_report: report,
        fits,
        plot_data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::write_dre;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    fn p3_instance(dir: &Path) -> BenchInstance {
        let path = dir.join("p3.dre");
        std::fs::write(&path, write_dre(&Graph::path(3))).unwrap();
        BenchInstance::from_graph_file(&path)
    }

    #[test]
    fn parses_group_sizes() {
        assert_eq!(parse_group_size("1 orbit; grpsize=2; 1 gen; 3 nodes"), Some(2u32.into()));
        assert_eq!(parse_group_size("|Aut|: 24\n"), Some(24u32.into()));
        assert_eq!(parse_group_size("grpsize=1.2e34;"), None);
        assert_eq!(parse_group_size("nothing here"), None);
    }

    #[test]
    fn dreadnaut_adapter_feeds_commands() {
        let dir = tempfile::tempdir().unwrap();
        // Echo the commands back so the test can see them, then report.
        let log = dir.path().join("stdin.txt");
        let fake = script(
            dir.path(),
            "fake-dreadnaut",
            &format!("cat > {}\necho '1 orbit; grpsize=2; 1 gen;'", log.display()),
        );
        let inst = p3_instance(dir.path());
        let r = run_external(&SolverAdapter::traces(&fake), &inst, Duration::from_secs(10));
        assert_eq!(r.status, BenchStatus::Ok, "{r:?}");
        assert_eq!(r.group_size, Some(2u32.into()));
        assert_eq!(r.vertices, Some(3));
        let fed = std::fs::read_to_string(&log).unwrap();
        assert_eq!(fed, "n=3 $=0 g\n0 : 1;\n1 : 2.\nAt\nx\nq\n");
    }

    #[test]
    fn bliss_adapter_gets_dimacs() {
        let dir = tempfile::tempdir().unwrap();
        let copy = dir.path().join("seen.dimacs");
        let fake = script(dir.path(), "fake-bliss", &format!("cp \"$1\" {}\necho '|Aut|: 2'", copy.display()));
        let r = run_external(&SolverAdapter::bliss(&fake), &p3_instance(dir.path()), Duration::from_secs(10));
        assert_eq!(r.group_size, Some(2u32.into()));
        assert_eq!(std::fs::read_to_string(copy).unwrap(), "p edge 3 2\ne 1 2\ne 2 3\n");
    }

    #[test]
    fn failures_do_not_stop_the_batch() {
        let dir = tempfile::tempdir().unwrap();
        let inst = p3_instance(dir.path());
        let missing = SolverAdapter::traces(dir.path().join("no-such-solver"));
        let failing = SolverAdapter::custom("failing", script(dir.path(), "fail", "exit 3"), vec![]);
        let silent = SolverAdapter::custom("silent", script(dir.path(), "silent", "echo done"), vec!["{file}".into()]);
        let results = run_batch(&[missing, failing, silent], Some(TargetCell::FirstSmallest), &[inst], Duration::from_secs(10), false);
        assert_eq!(results.len(), 4);
        assert_eq!(results[0].status, BenchStatus::Error);
        assert_eq!(results[0].reason.as_deref(), Some(MISSING_SOLVER));
        assert_eq!(results[1].status, BenchStatus::Error);
        assert_eq!(results[2].status, BenchStatus::Ok);
        assert_eq!(results[2].group_size, None);
        assert_eq!(results[3].group_size, Some(2u32.into()));
        assert!(group_size_disagreements(&results).is_empty());
    }

    #[test]
    fn timeout_records_the_limit() {
        let dir = tempfile::tempdir().unwrap();
        let slow = SolverAdapter::custom("slow", script(dir.path(), "slow", "exec sleep 30"), vec![]);
        let limit = Duration::from_millis(200);
        let started = Instant::now();
        let r = run_external(&slow, &p3_instance(dir.path()), limit);
        assert!(started.elapsed() < Duration::from_secs(10));
        assert_eq!(r.status, BenchStatus::Timeout);
        assert_eq!(r.time, limit);
    }

    #[test]
    fn internal_runs_are_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k4.dimacs");
        std::fs::write(&path, write_dimacs_graph(&Graph::complete(4))).unwrap();
        let inst = BenchInstance::from_graph_file(&path);
        let a = run_internal(&inst, Duration::from_secs(10), TargetCell::FirstSmallest);
        let b = run_internal(&inst, Duration::from_secs(10), TargetCell::FirstSmallest);
        assert_eq!(a.status, BenchStatus::Ok);
        assert_eq!(a.group_size, Some(24u32.into()));
        assert_eq!(a.search_nodes, b.search_nodes);
    }

    #[test]
    fn complete_triples_instance_is_asymmetric() {
        let g = crate::cfi::build_full(&crate::formula::tests::complete_triples()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ct.dre");
        std::fs::write(&path, write_dre(&g)).unwrap();
        let r = run_internal(&BenchInstance::from_graph_file(&path), Duration::from_secs(10), TargetCell::FirstSmallest);
        assert_eq!(r.status, BenchStatus::Ok);
        assert_eq!(r.group_size, Some(1u32.into()));
    }

    fn synthetic(solver: &str, pts: &[(u32, u64)]) -> Vec<BenchResult> {
        pts.iter()
            .enumerate()
            .map(|(i, &(v, nodes))| BenchResult {
                instance: format!("i{i:02}"),
                digest: None,
                n_vars: Some(v / 10),
                m: None,
                vertices: Some(v),
                solver: solver.into(),
                solver_version: None,
                time: Duration::from_millis(5),
                status: BenchStatus::Ok,
                reason: None,
                group_size: None,
                search_nodes: Some(nodes),
            })
            .collect()
    }

    #[test]
    fn empty_summary_has_header_only() {
        let s = summarize(&[]);
        assert_eq!(s.csv, format!("{CSV_HEADER}\n"));
        assert!(s.fits.is_empty());
    }

    #[test]
    fn two_sizes_give_a_ratio_only() {
        let s = summarize(&synthetic("internal", &[(100, 10), (200, 40)]));
        let fit = &s.fits[0];
        assert_eq!(fit.slope, None);
        assert_eq!(fit.end_ratio, Some(4.0));
        assert!(s.growth_report.contains("no fit"));
    }

    #[test]
    fn exponential_series_has_positive_slope() {
        let pts: Vec<(u32, u64)> = (1..=6).map(|i| (100 * i, 1u64 << (2 * i))).collect();
        let s = summarize(&synthetic("internal", &pts));
        let slope = s.fits[0].slope.unwrap();
        // ln(4) per 100 vertices.
        assert!((slope - 4f64.ln() / 100.0).abs() < 1e-9);
        assert!(s.growth_report.contains("doubles every 50.0 vertices"));
        assert_eq!(s.plot_data["internal"].lines().count(), 7);
    }

    #[test]
    fn csv_rows_are_sorted() {
        let mut rs = synthetic("b", &[(10, 1), (20, 2)]);
        rs.extend(synthetic("a", &[(10, 1), (20, 2)]));
        rs.reverse();
        let s = summarize(&rs);
        let rows: Vec<&str> = s.csv.lines().skip(1).collect();
        assert_eq!(
            rows,
            vec![
                "i00,1,,10,a,0.005000,OK,1",
                "i00,1,,10,b,0.005000,OK,1",
                "i01,2,,20,a,0.005000,OK,2",
                "i01,2,,20,b,0.005000,OK,2",
            ]
        );
    }

    #[test]
    fn real_solvers_when_installed() {
        let dir = tempfile::tempdir().unwrap();
        let inst = p3_instance(dir.path());
        for adapter in [SolverAdapter::traces("dreadnaut"), SolverAdapter::nauty("dreadnaut"), SolverAdapter::bliss("bliss")] {
            if find_program(&adapter.program).is_none() {
                continue;
            }
            let r = run_external(&adapter, &inst, Duration::from_secs(30));
            assert_eq!(r.status, BenchStatus::Ok);
            if let Some(size) = r.group_size {
                assert_eq!(size, 2u32.into());
            }
        }
    }
}

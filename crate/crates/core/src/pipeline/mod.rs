//! Batch generation: sample, filter, build, export, record.

mod export;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use export::{
    export_graph, import_graph, parse_dimacs_graph, parse_dre, write_dimacs_graph, write_dre, GraphFormat,
};

use crate::budget::SolveBudget;
use crate::canon::{color_partition, color_refine, ir_automorphisms, SearchOptions, SearchStatus};
use crate::cfi::{incidence_graph, CfiError, GadgetMode, Graph, VertexScheme};
use crate::formula::{parse_xor_dimacs, write_xor_dimacs, FormulaError, XorFormula};
use crate::sampler::{clauses_for_ratio, sample_homogeneous_with, triples, trial_rng, SampleError};
use crate::xorsat::{gauss_ratio, solve, SatError, SatInput, SolveResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const INDEX_FILE: &str = "index.toml";
pub const INSTANCE_DIR: &str = "instances";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Cfi(#[from] CfiError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseCount {
    Ratio(f64),
    Exact(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n: u32,
    pub clauses: ClauseCount,
    pub seed: u64,
    pub trials: u64,
    pub gadget: GadgetMode,
    /// Minimum Gaussian-gap ratio; `None` disables the filter.
    pub gauss_threshold: Option<f64>,
    /// Reject graphs where color refinement separates a variable pair.
    pub wl1_filter: bool,
    /// Confirm the rank verdict with the SAT solver.
    pub sat_crosscheck: bool,
    /// Decision limit for each SAT run.
    pub budget_decisions: u64,
    /// Wall-clock limit for each SAT run. Makes acceptance timing-dependent.
    pub budget_seconds: Option<f64>,
    /// Node limit for the incidence-graph asymmetry search.
    pub aut_budget_nodes: u64,
    pub format: GraphFormat,
}

impl PipelineConfig {
    pub fn new(n: u32, clauses: ClauseCount, seed: u64) -> Self {
        Self {
            n,
            clauses,
            seed,
            trials: 1,
            gadget: GadgetMode::Full,
            gauss_threshold: Some(5.0),
            wl1_filter: false,
            sat_crosscheck: false,
            budget_decisions: 100_000,
            budget_seconds: None,
            aut_budget_nodes: 1_000_000,
            format: GraphFormat::Dre,
        }
    }

    pub fn num_clauses(&self) -> Result<u64, PipelineError> {
        Ok(match self.clauses {
            ClauseCount::Ratio(r) => clauses_for_ratio(self.n, r)?,
            ClauseCount::Exact(m) => m,
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if self.n < 3 {
            return bad(format!("n must be at least 3, got {}", self.n));
        }
        if let ClauseCount::Ratio(r) = self.clauses {
            if !(r.is_finite() && r > 1.0) {
                return bad(format!("ratio must exceed 1 (fewer clauses than variables cannot have full rank), got {r}"));
            }
        }
        let m = self.num_clauses()?;
        if m < self.n as u64 {
            return bad(format!("{m} clauses cannot have rank {}", self.n));
        }
        if m > triples(self.n) {
            return bad(format!("{m} clauses exceed the {} distinct triples", triples(self.n)));
        }
        if self.trials == 0 {
            return bad("trial count must be positive".into());
        }
        if self.budget_decisions == 0 || self.aut_budget_nodes == 0 {
            return bad("budgets must be positive".into());
        }
        if let Some(s) = self.budget_seconds {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("time budget must be positive and finite, got {s}"));
            }
        }
        if let Some(t) = self.gauss_threshold {
            if t.is_nan() || t < 0.0 {
                return bad(format!("gauss threshold must be nonnegative, got {t}"));
            }
        }
        Ok(())
    }

    pub fn sat_budget(&self) -> SolveBudget {
        let b = SolveBudget::steps(self.budget_decisions);
        match self.budget_seconds {
            Some(s) => b.with_time(Duration::from_secs_f64(s)),
            None => b,
        }
    }

    /// Filters this configuration enables, in the default order.
    pub fn enabled_filters(&self) -> Vec<Filter> {
        Filter::ALL
            .into_iter()
            .filter(|f| match f {
                Filter::PhiAsymmetry => self.gadget == GadgetMode::CoreOnly,
                Filter::UniqueSatisfiability => true,
                Filter::GaussGap => self.gauss_threshold.is_some(),
                Filter::Wl1NonSeparation => self.wl1_filter,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    PhiAsymmetry,
    UniqueSatisfiability,
    GaussGap,
    Wl1NonSeparation,
}

impl Filter {
    pub const ALL: [Filter; 4] = [
        Filter::PhiAsymmetry,
        Filter::UniqueSatisfiability,
        Filter::GaussGap,
        Filter::Wl1NonSeparation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Filter::PhiAsymmetry => "phi-asymmetry",
            Filter::UniqueSatisfiability => "unique-satisfiability",
            Filter::GaussGap => "gauss-gap",
            Filter::Wl1NonSeparation => "wl1-non-separation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    PhiSymmetric,
    NotUniquelySatisfiable,
    /// The SAT solver disagreed with the rank computation.
    SatCrosscheck,
    GaussGapTooSmall(f64),
    /// Color refinement separated the two vertices of this variable.
    Wl1Separates(u32),
    Budget(Filter),
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::PhiSymmetric => write!(f, "phi-symmetric"),
            Rejection::NotUniquelySatisfiable => write!(f, "not-uniquely-satisfiable"),
            Rejection::SatCrosscheck => write!(f, "sat-crosscheck-disagrees"),
            Rejection::GaussGapTooSmall(r) => write!(f, "gauss-gap {r:.3}"),
            Rejection::Wl1Separates(v) => write!(f, "wl1-separates x{v}"),
            Rejection::Budget(filter) => write!(f, "BUDGET in {}", filter.as_str()),
        }
    }
}

/// Filter results; `None` where a filter did not run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcomes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_asymmetric: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniquely_satisfiable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sat_crosscheck: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decisions_with_gauss: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decisions_without_gauss: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wl1_nonseparating: Option<bool>,
}

#[derive(Debug, Clone)]
pub enum TrialOutcome {
    Accepted {
        trial: u64,
        formula: XorFormula,
        graph: Graph,
        outcomes: FilterOutcomes,
    },
    Rejected {
        trial: u64,
        reason: Rejection,
        outcomes: FilterOutcomes,
    },
}

impl TrialOutcome {
    pub fn trial(&self) -> u64 {
        match self {
            TrialOutcome::Accepted { trial, .. } | TrialOutcome::Rejected { trial, .. } => *trial,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, TrialOutcome::Accepted { .. })
    }
}

fn run_filter(
    cfg: &PipelineConfig,
    filter: Filter,
    f: &XorFormula,
    graph: &Graph,
    out: &mut FilterOutcomes,
) -> Result<(), Rejection> {
    match filter {
        Filter::PhiAsymmetry => {
            let phi = incidence_graph(f);
            let opts = SearchOptions {
                budget: SolveBudget::steps(cfg.aut_budget_nodes),
                ..Default::default()
            };
            let report = ir_automorphisms(&phi, &opts);
            if report.status == SearchStatus::Timeout {
                return Err(Rejection::Budget(filter));
            }
            let asymmetric = report.group_size == 1u32.into();
            out.phi_asymmetric = Some(asymmetric);
            if !asymmetric {
                return Err(Rejection::PhiSymmetric);
            }
        }
        Filter::UniqueSatisfiability => {
            let unique = f.rank() == f.num_vars() as usize;
            out.uniquely_satisfiable = Some(unique);
            if cfg.sat_crosscheck {
                let stats = solve(&SatInput::nontrivial_solution(f), true, cfg.sat_budget())
                    .expect("nontrivial-solution CNF is well formed");
                let agrees = match stats.result {
                    SolveResult::Unsat => unique,
                    SolveResult::Sat(_) => !unique,
                    SolveResult::BudgetExhausted => return Err(Rejection::Budget(filter)),
                };
                out.sat_crosscheck = Some(agrees);
                if !agrees {
                    log::error!("SAT solver and rank disagree on {f:?}");
                    return Err(Rejection::SatCrosscheck);
                }
            }
            if !unique {
                return Err(Rejection::NotUniquelySatisfiable);
            }
        }
        Filter::GaussGap => {
            let threshold = cfg.gauss_threshold.unwrap_or(0.0);
            match gauss_ratio(f, cfg.sat_budget()) {
                Ok(r) => {
                    out.gauss_ratio = Some(r.ratio);
                    out.decisions_with_gauss = Some(r.with_gauss.decisions);
                    out.decisions_without_gauss = Some(r.without_gauss.decisions);
                    if r.ratio < threshold {
                        return Err(Rejection::GaussGapTooSmall(r.ratio));
                    }
                }
                Err(SatError::BudgetExhausted) => return Err(Rejection::Budget(filter)),
                // A nonzero solution exists: the instance is not uniquely
                // satisfiable whatever order the filters run in.
                Err(_) => return Err(Rejection::NotUniquelySatisfiable),
            }
        }
        Filter::Wl1NonSeparation => {
            let scheme = VertexScheme::for_formula(f);
            let p = color_refine(graph, &color_partition(graph));
            let separated = (1..=f.num_vars()).find(|&j| !p.same_cell(scheme.var(j, false), scheme.var(j, true)));
            out.wl1_nonseparating = Some(separated.is_none());
            if let Some(j) = separated {
                return Err(Rejection::Wl1Separates(j));
            }
        }
    }
    Ok(())
}

/// Runs `order` on one formula. Filters are pure, so the order only
/// changes cost and the reported rejection reason.
pub fn evaluate(cfg: &PipelineConfig, trial: u64, f: XorFormula, order: &[Filter]) -> Result<TrialOutcome, PipelineError> {
    let graph = cfg.gadget.build(&f)?;
    let mut outcomes = FilterOutcomes::default();
    for &filter in order {
        if let Err(reason) = run_filter(cfg, filter, &f, &graph, &mut outcomes) {
            log::info!("trial {trial} rejected: {reason}");
            return Ok(TrialOutcome::Rejected {
                trial,
                reason,
                outcomes,
            });
        }
    }
    Ok(TrialOutcome::Accepted {
        trial,
        formula: f,
        graph,
        outcomes,
    })
}

pub fn instance_id(n: u32, m: u64, seed: u64, trial: u64) -> String {
    format!("xor-n{n}-m{m}-s{seed}-t{trial}")
}

/// The formula trial `trial` of `cfg` samples.
pub fn sample_trial(cfg: &PipelineConfig, trial: u64) -> Result<XorFormula, PipelineError> {
    let mut rng = trial_rng(cfg.seed, trial);
    Ok(sample_homogeneous_with(&mut rng, cfg.n, cfg.num_clauses()?)?)
}

/// Samples and filters every trial without touching the filesystem.
pub fn run_trials(cfg: &PipelineConfig, order: &[Filter]) -> Result<Vec<TrialOutcome>, PipelineError> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| evaluate(cfg, t, sample_trial(cfg, t)?, order))
        .collect()
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Manifest of one accepted instance. File names are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema_version: u32,
    pub id: String,
    pub n: u32,
    pub m: u64,
    pub seed: u64,
    pub trial: u64,
    pub gadget: GadgetMode,
    pub clause_digest: String,
    pub vertices: u32,
    pub edges: usize,
    pub graph_format: GraphFormat,
    pub graph_file: String,
    pub clause_file: String,
    pub tool_version: String,
    pub filters: FilterOutcomes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedEntry {
    pub trial: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchIndex {
    pub schema_version: u32,
    pub tool_version: String,
    pub filters: Vec<Filter>,
    pub config: PipelineConfig,
    pub accepted: Vec<IndexEntry>,
    pub rejected: Vec<RejectedEntry>,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub index: BatchIndex,
    pub records: Vec<InstanceRecord>,
}

fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("records serialize to TOML")
}

/// Writes the clause file, graph file and manifest of one accepted instance.
pub fn write_instance(
    cfg: &PipelineConfig,
    dir: &Path,
    trial: u64,
    f: &XorFormula,
    graph: &Graph,
    outcomes: &FilterOutcomes,
) -> Result<InstanceRecord, PipelineError> {
    let id = instance_id(f.num_vars(), f.num_clauses() as u64, cfg.seed, trial);
    let clause_file = format!("{id}.xor");
    let graph_file = format!("{id}.{}", cfg.format.extension());
    let clauses = write_xor_dimacs(f);
    write_atomic(&dir.join(&clause_file), clauses.as_bytes())?;
    export_graph(graph, cfg.format, &dir.join(&graph_file))?;
    let record = InstanceRecord {
        schema_version: SCHEMA_VERSION,
        id: id.clone(),
        n: f.num_vars(),
        m: f.num_clauses() as u64,
        seed: cfg.seed,
        trial,
        gadget: cfg.gadget,
        clause_digest: digest(clauses.as_bytes()),
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        graph_format: cfg.format,
        graph_file,
        clause_file,
        tool_version: TOOL_VERSION.to_string(),
        filters: outcomes.clone(),
    };
    write_atomic(&dir.join(format!("{id}.toml")), to_toml(&record).as_bytes())?;
    Ok(record)
}

/// Runs the whole pipeline and writes the batch under `out`.
pub fn generate(cfg: &PipelineConfig, out: &Path) -> Result<Batch, PipelineError> {
    generate_with_filters(cfg, &cfg.enabled_filters(), out)
}

pub fn generate_with_filters(cfg: &PipelineConfig, order: &[Filter], out: &Path) -> Result<Batch, PipelineError> {
    let outcomes = run_trials(cfg, order)?;
    let dir = out.join(INSTANCE_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let mut records = Vec::new();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for outcome in &outcomes {
        match outcome {
            TrialOutcome::Accepted {
                trial,
                formula,
                graph,
                outcomes,
            } => {
                let record = write_instance(cfg, &dir, *trial, formula, graph, outcomes)?;
                accepted.push(IndexEntry {
                    id: record.id.clone(),
                    manifest: format!("{INSTANCE_DIR}/{}.toml", record.id),
                });
                records.push(record);
            }
            TrialOutcome::Rejected { trial, reason, .. } => rejected.push(RejectedEntry {
                trial: *trial,
                reason: reason.to_string(),
            }),
        }
    }
    let index = BatchIndex {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        filters: order.to_vec(),
        config: cfg.clone(),
        accepted,
        rejected,
    };
    write_atomic(&out.join(INDEX_FILE), to_toml(&index).as_bytes())?;
    log::info!(
        "{} of {} trials accepted",
        index.accepted.len(),
        cfg.trials
    );
    Ok(Batch { index, records })
}

pub fn read_record(path: &Path) -> Result<InstanceRecord, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    toml::from_str(&text).map_err(|e| PipelineError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_index(path: &Path) -> Result<BatchIndex, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    toml::from_str(&text).map_err(|e| PipelineError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub id: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok" } else { "FAIL" };
            writeln!(f, "{} {:<16} {:<4} {}", self.id, c.name, status, c.detail)?;
        }
        Ok(())
    }
}

fn expected_counts(gadget: GadgetMode, n: u32, m: u64) -> (u64, u64) {
    let (n, m) = (n as u64, m);
    match gadget {
        GadgetMode::Full => (4 * m + 2 * n + 3 * (n - 1), 12 * m + n + 6 * (n - 1)),
        GadgetMode::CoreOnly => (4 * m + 2 * n, 12 * m + n),
    }
}

/// Re-reads an instance from disk and re-checks what can be checked cheaply.
pub fn validate(manifest: &Path) -> Result<ValidationReport, PipelineError> {
    let record = read_record(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    Ok(validate_record(&record, base))
}

pub fn validate_record(record: &InstanceRecord, base: &Path) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| checks.push(Check { name, passed, detail });

    let clause_path = base.join(&record.clause_file);
    let clause_bytes = std::fs::read(&clause_path);
    let formula = match &clause_bytes {
        Err(e) => {
            push("clause-file", false, format!("{}: {e}", clause_path.display()));
            None
        }
        Ok(bytes) => {
            let d = digest(bytes);
            push("digest", d == record.clause_digest, d);
            match std::str::from_utf8(bytes).map_err(|e| e.to_string()).and_then(|t| parse_xor_dimacs(t).map_err(|e| e.to_string())) {
                Ok(f) => {
                    let shape_ok = f.num_vars() == record.n && f.num_clauses() as u64 == record.m;
                    push("clause-shape", shape_ok, format!("n={} m={}", f.num_vars(), f.num_clauses()));
                    Some(f)
                }
                Err(e) => {
                    push("clause-shape", false, e);
                    None
                }
            }
        }
    };

    let graph_path = base.join(&record.graph_file);
    let graph = match import_graph(&graph_path, record.graph_format) {
        Ok(g) => Some(g),
        Err(e) => {
            push("graph-file", false, e.to_string());
            None
        }
    };

    if let Some(g) = &graph {
        if record.n >= 2 || record.gadget == GadgetMode::CoreOnly {
            let (v, e) = expected_counts(record.gadget, record.n, record.m);
            push(
                "vertex-count",
                g.vertex_count() as u64 == v && g.vertex_count() == record.vertices,
                format!("{} (expected {v})", g.vertex_count()),
            );
            push(
                "edge-count",
                g.edge_count() as u64 == e && g.edge_count() == record.edges,
                format!("{} (expected {e})", g.edge_count()),
            );
        }
    }
    if let Some(f) = &formula {
        let rank = f.rank();
        push("rank", rank == f.num_vars() as usize, format!("{rank} of {}", f.num_vars()));
        if let (Some(g), Ok(rebuilt)) = (&graph, record.gadget.build(f)) {
            let same = g.degree_spectrum() == rebuilt.degree_spectrum();
            push("degree-spectrum", same, format!("{:?}", g.degree_spectrum()));
        }
    }
    ValidationReport {
        id: record.id.clone(),
        checks,
    }
}

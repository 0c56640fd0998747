use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hardgraph::bench::{self, BenchInstance, SolverAdapter};
use hardgraph::canon::TargetCell;
use hardgraph::cfi::GadgetMode;
use hardgraph::formula::{read_xor_dimacs_file, write_xor_dimacs};
use hardgraph::pipeline::{
    self, export_graph, instance_id, read_index, read_record, sample_trial, write_atomic, ClauseCount, GraphFormat,
    PipelineConfig, INDEX_FILE,
};

#[derive(Parser)]
#[command(name = "hardgraph", version, about = "Asymmetric graphs from random 3-XOR formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample homogeneous 3-XOR formulas without filtering.
    Sample(SampleArgs),
    /// Build the graph of one XOR formula file.
    Build(BuildArgs),
    /// Sample, filter, build and export a batch of instances.
    Generate(GenerateArgs),
    /// Re-validate manifests or a whole batch directory.
    Check(CheckArgs),
    /// Run automorphism solvers over instances and summarize the costs.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Size {
    /// Number of variables.
    #[arg(long)]
    n: u32,
    /// Clauses per variable.
    #[arg(long, conflicts_with = "m", default_value_t = 2.0)]
    ratio: f64,
    /// Exact clause count.
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

impl Size {
    fn clauses(&self) -> ClauseCount {
        match self.m {
            Some(m) => ClauseCount::Exact(m),
            None => ClauseCount::Ratio(self.ratio),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Gadget {
    Full,
    Core,
}

impl From<Gadget> for GadgetMode {
    fn from(g: Gadget) -> Self {
        match g {
            Gadget::Full => GadgetMode::Full,
            Gadget::Core => GadgetMode::CoreOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dre,
    Dimacs,
}

impl From<Format> for GraphFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Dre => GraphFormat::Dre,
            Format::Dimacs => GraphFormat::Dimacs,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    size: Size,
    /// Directory for the `.xor` files; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Formula in XOR-DIMACS form.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    gadget: Gadget,
    #[arg(long, value_enum, default_value = "dre")]
    format: Format,
    /// Output file; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    size: Size,
    #[arg(long, value_enum, default_value = "full")]
    gadget: Gadget,
    /// Minimum ratio of plain to Gauss-assisted DPLL decisions.
    #[arg(long, default_value_t = 5.0, conflicts_with = "no_gauss_filter")]
    gauss_threshold: f64,
    #[arg(long)]
    no_gauss_filter: bool,
    /// Also reject graphs where color refinement splits a variable pair.
    #[arg(long)]
    wl1_filter: bool,
    /// Confirm unique satisfiability with the SAT solver as well.
    #[arg(long)]
    sat_crosscheck: bool,
    #[arg(long, default_value_t = 100_000)]
    budget_decisions: u64,
    /// Wall-clock limit per SAT run. Makes the accepted set timing-dependent.
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long, value_enum, default_value = "dre")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Instance manifests (`.toml`) or batch directories.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    FirstSmallest,
    FirstLargest,
}

#[derive(Args)]
struct BenchArgs {
    /// Batch directories, manifests or bare `.dre`/`.dimacs` graph files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// External solver: traces, nauty, bliss or conauto, optionally
    /// `name=/path/to/program`.
    #[arg(long = "solver")]
    solvers: Vec<String>,
    /// Custom solver as `name=command arg ...`; `{file}` and `{dimacs}` are
    /// replaced by graph paths.
    #[arg(long = "custom")]
    custom: Vec<String>,
    /// Skip the built-in search.
    #[arg(long)]
    no_internal: bool,
    #[arg(long, value_enum, default_value = "first-smallest")]
    target: Target,
    /// Per-run limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Run instances concurrently. Wall times are then not comparable.
    #[arg(long)]
    parallel: bool,
    /// Directory for results.csv, growth.txt and per-solver .dat files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Build(a) => build(a),
        Command::Generate(a) => generate(a),
        Command::Check(a) => check(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn sample(a: SampleArgs) -> Result<ExitCode> {
    let mut cfg = PipelineConfig::new(a.size.n, a.size.clauses(), a.size.seed);
    cfg.trials = a.size.count;
    cfg.validate()?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for trial in 0..cfg.trials {
        let f = sample_trial(&cfg, trial)?;
        let text = write_xor_dimacs(&f);
        match &a.out {
            Some(dir) => {
                let id = instance_id(f.num_vars(), f.num_clauses() as u64, cfg.seed, trial);
                write_atomic(&dir.join(format!("{id}.xor")), text.as_bytes())?;
            }
            None => print!("{text}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn build(a: BuildArgs) -> Result<ExitCode> {
    let f = read_xor_dimacs_file(&a.input)?;
    let g = GadgetMode::from(a.gadget).build(&f)?;
    let format = GraphFormat::from(a.format);
    match &a.out {
        Some(path) => export_graph(&g, format, path)?,
        None => print!("{}", format.write(&g)),
    }
    log::info!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
    Ok(ExitCode::SUCCESS)
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let mut cfg = PipelineConfig::new(a.size.n, a.size.clauses(), a.size.seed);
    cfg.trials = a.size.count;
    cfg.gadget = a.gadget.into();
    cfg.gauss_threshold = (!a.no_gauss_filter).then_some(a.gauss_threshold);
    cfg.wl1_filter = a.wl1_filter;
    cfg.sat_crosscheck = a.sat_crosscheck;
    cfg.budget_decisions = a.budget_decisions;
    cfg.budget_seconds = a.budget_seconds;
    cfg.format = a.format.into();
    cfg.validate()?;
    let batch = pipeline::generate(&cfg, &a.out)?;
    println!(
        "{} accepted, {} rejected, index at {}",
        batch.index.accepted.len(),
        batch.index.rejected.len(),
        a.out.join(INDEX_FILE).display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Manifest paths named by `path`: the file itself, or every entry of the
/// batch index in a directory.
fn manifests(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let index = read_index(&path.join(INDEX_FILE))?;
        Ok(index.accepted.iter().map(|e| path.join(&e.manifest)).collect())
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn check(a: CheckArgs) -> Result<ExitCode> {
    let mut failed = 0;
    let mut total = 0;
    for path in &a.paths {
        for manifest in manifests(path)? {
            total += 1;
            let report = pipeline::validate(&manifest)?;
            println!("{}: {}", manifest.display(), if report.passed() { "PASS" } else { "FAIL" });
            if !report.passed() {
                failed += 1;
                print!("{report}");
            }
        }
    }
    println!("{} of {total} manifests passed", total - failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn instances(path: &Path) -> Result<Vec<BenchInstance>> {
    let is_manifest = path.extension().is_some_and(|e| e == "toml");
    if path.is_dir() || is_manifest {
        manifests(path)?
            .into_iter()
            .map(|m| {
                let record = read_record(&m)?;
                let base = m.parent().unwrap_or(Path::new("."));
                Ok(BenchInstance::from_record(&record, base))
            })
            .collect()
    } else {
        Ok(vec![BenchInstance::from_graph_file(path)])
    }
}

fn run_bench(a: BenchArgs) -> Result<ExitCode> {
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        bail!("timeout must be positive");
    }
    let mut adapters = Vec::new();
    for spec in &a.solvers {
        match SolverAdapter::from_spec(spec) {
            Some(adapter) => adapters.push(adapter),
            None => bail!("unknown solver {spec:?}"),
        }
    }
    for spec in &a.custom {
        let (name, command) = spec.split_once('=').with_context(|| format!("custom solver {spec:?} needs name=command"))?;
        let mut words = command.split_whitespace();
        let program = words.next().with_context(|| format!("custom solver {name:?} has no command"))?;
        adapters.push(SolverAdapter::custom(name, program, words.map(String::from).collect()));
    }
    let internal = (!a.no_internal).then_some(match a.target {
        Target::FirstSmallest => TargetCell::FirstSmallest,
        Target::FirstLargest => TargetCell::FirstLargest,
    });
    let mut all = Vec::new();
    for input in &a.inputs {
        all.extend(instances(input)?);
    }
    let results = bench::run_batch(&adapters, internal, &all, Duration::from_secs_f64(a.timeout), a.parallel);
    let summary = bench::summarize(&results);
    let mut csv = String::new();
    if a.parallel {
        csv.push_str("# parallel run: wall times are not comparable\n");
    }
    csv.push_str(&summary.csv);
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_atomic(&dir.join("results.csv"), csv.as_bytes())?;
            write_atomic(&dir.join("growth.txt"), summary.growth_report.as_bytes())?;
            for (solver, dat) in &summary.plot_data {
                write_atomic(&dir.join(format!("{solver}.dat")), dat.as_bytes())?;
            }
            print!("{}", summary.growth_report);
        }
        None => print!("{csv}\n{}", summary.growth_report),
    }
    let disagreements = bench::group_size_disagreements(&results);
    Ok(if disagreements.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

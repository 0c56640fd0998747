//! End-to-end acceptance checks A1 to A9. Each criterion prints one
//! PASS/FAIL line; the test fails if any criterion fails.
//!
//! Run with `cargo test -p hardgraph --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigUint;

use hardgraph::canon::{
    brute_force_automorphisms, color_partition, color_refine, ir_automorphisms, local_consistency, wl_indistinguishable,
    SearchOptions, SearchStatus, TargetCell,
};
use hardgraph::cfi::{build_full, Graph, VertexScheme};
use hardgraph::formula::XorFormula;
use hardgraph::pipeline::{self, run_trials, sample_trial, ClauseCount, GraphFormat, PipelineConfig, TrialOutcome};
use hardgraph::sampler::{sample_general_with, sample_homogeneous_with, triples, trial_rng, uniform_below, Rng};
use hardgraph::xorsat::{solve, SatInput};
use hardgraph::SolveBudget;

struct Verdict {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(id: &'static str, passed: bool, detail: String) -> Verdict {
    Verdict { id, passed, detail }
}

/// Number of assignments satisfying every parity constraint, by enumeration.
fn count_solutions(f: &XorFormula) -> u64 {
    let n = f.num_vars();
    (0u64..1 << n)
        .filter(|bits| {
            f.clauses()
                .iter()
                .all(|c| c.vars().iter().fold(false, |acc, &v| acc ^ (bits >> (v - 1) & 1 == 1)) == c.rhs())
        })
        .count() as u64
}

fn between(rng: &mut Rng, lo: u64, hi: u64) -> u64 {
    lo + uniform_below(rng, hi - lo + 1)
}

fn random_graph(rng: &mut Rng, max_vertices: u64) -> Graph {
    let n = between(rng, 1, max_vertices) as u32;
    // Vary density so sparse, dense and symmetric graphs all show up.
    let density = between(rng, 1, 9);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if uniform_below(rng, 10) < density {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn median(mut xs: Vec<u64>) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}

/// Accepted formulas of a batch without the Gaussian-gap filter.
fn accepted_formulas(n: u32, seed: u64, want: usize) -> Vec<XorFormula> {
    let mut cfg = PipelineConfig::new(n, ClauseCount::Ratio(2.0), seed);
    cfg.gauss_threshold = None;
    cfg.trials = 3 * want as u64;
    let mut out: Vec<XorFormula> = run_trials(&cfg, &cfg.enabled_filters())
        .unwrap()
        .into_iter()
        .filter_map(|o| match o {
            TrialOutcome::Accepted { formula, .. } => Some(formula),
            TrialOutcome::Rejected { .. } => None,
        })
        .collect();
    assert!(out.len() >= want, "only {} of {} trials accepted at n = {n}", out.len(), cfg.trials);
    out.truncate(want);
    out
}

fn a1_construction_counts() -> Verdict {
    let mut rng = trial_rng(0xA1, 0);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let n = between(&mut rng, 3, 30);
        let m = between(&mut rng, 1, (3 * n).min(triples(n as u32)));
        let f = sample_homogeneous_with(&mut rng, n as u32, m).unwrap();
        let g = build_full(&f).unwrap();
        let vertices = 4 * m + 2 * n + 3 * (n - 1);
        let edges = 12 * m + n + 6 * (n - 1);
        let degree_sum: u64 = (0..g.vertex_count()).map(|v| g.neighbors(v).len() as u64).sum();
        if g.vertex_count() as u64 != vertices || g.edge_count() as u64 != edges || degree_sum != 2 * edges {
            bad.push(format!("n={n} m={m}: {} vertices, {} edges", g.vertex_count(), g.edge_count()));
        }
    }
    verdict("A1", bad.is_empty(), format!("100 configs, 3 <= n <= 30, {} mismatches {bad:?}", bad.len()))
}

fn a2_a3_asymmetry_and_group_size() -> (Verdict, Verdict) {
    let mut rng = trial_rng(0xA2, 0);
    let mut a2_bad = 0;
    let mut a3_bad = 0;
    let mut asymmetric = 0;
    for _ in 0..50 {
        let n = between(&mut rng, 4, 8) as u32;
        let m = between(&mut rng, n as u64, (2 * n as u64).min(triples(n)));
        let f = sample_homogeneous_with(&mut rng, n, m).unwrap();
        let r = ir_automorphisms(&build_full(&f).unwrap(), &SearchOptions::default());
        assert_eq!(r.status, SearchStatus::Complete);
        let rank = f.rank();
        let one = BigUint::from(1u32);
        if (r.group_size == one) != (rank == n as usize) {
            a2_bad += 1;
        }
        asymmetric += usize::from(r.group_size == one);
        let solutions = count_solutions(&f);
        if r.group_size != BigUint::from(solutions) || solutions != 1u64 << (n as usize - rank) {
            a3_bad += 1;
        }
    }

    // The IR search against exhaustive enumeration.
    let mut graph_bad = 0;
    for _ in 0..200 {
        let g = random_graph(&mut rng, 8);
        let ir = ir_automorphisms(&g, &SearchOptions::default());
        let brute = brute_force_automorphisms(&g).unwrap();
        if ir.group_size != brute.group_size || ir.orbit_partition != brute.orbit_partition {
            graph_bad += 1;
        }
    }
    (
        verdict(
            "A2",
            a2_bad == 0 && graph_bad == 0,
            format!(
                "{a2_bad}/50 disagreements between asymmetry and full rank ({asymmetric} asymmetric); IR vs brute force: {graph_bad}/200 graph mismatches"
            ),
        ),
        verdict("A3", a3_bad == 0, format!("{a3_bad}/50 group sizes differ from 2^(n - rank) or the solution count")),
    )
}

fn a4_color_refinement_on_consistent_pins() -> Verdict {
    const K: usize = 6;
    const INSTANCES: usize = 20;
    // Largest size first; smaller sizes are only tried when nothing
    // qualifies.
    let sizes = [30u32, 24, 18, 12];
    let mut report = Vec::new();
    let mut qualifying = 0;
    let mut violations = 0;
    for (round, &n) in sizes.iter().enumerate() {
        let started = Instant::now();
        let mut checked = 0;
        let mut over_budget = 0;
        let mut together = 0;
        for f in accepted_formulas(n, 0xA4 + round as u64, INSTANCES) {
            let g = build_full(&f).unwrap();
            let s = VertexScheme::for_formula(&f);
            let stable = color_refine(&g, &color_partition(&g));
            for i in 1..=n {
                let same = stable.same_cell(s.var(i, false), s.var(i, true));
                together += usize::from(same);
                match local_consistency(&f.pin(i, true).unwrap(), K, SolveBudget::unlimited()) {
                    Ok(true) => {
                        qualifying += 1;
                        violations += usize::from(!same);
                    }
                    Ok(false) => {}
                    Err(_) => over_budget += 1,
                }
                checked += 1;
            }
        }
        report.push(format!(
            "n={n}: {checked} pairs, {over_budget} over checker budget, {together} left together by color refinement ({:.0?})",
            started.elapsed()
        ));
        if qualifying > 0 {
            break;
        }
    }
    let detail = if qualifying == 0 {
        format!("vacuous: no pin is {K}-locally consistent, coverage 0 qualifying pairs; {}", report.join("; "))
    } else {
        format!("{violations}/{qualifying} qualifying pairs separated; {}", report.join("; "))
    };
    verdict("A4", violations == 0, detail)
}

fn a5_two_wl_spot_check() -> Verdict {
    const K: usize = 9;
    let mut searched = Vec::new();
    let mut found = None;
    'search: for n in 10u32..=12 {
        let mut pins = 0;
        for f in accepted_formulas(n, 0xA5 + n as u64, 4) {
            for i in 1..=n {
                pins += 1;
                if local_consistency(&f.pin(i, true).unwrap(), K, SolveBudget::unlimited()).unwrap() {
                    let g = build_full(&f).unwrap();
                    let s = VertexScheme::for_formula(&f);
                    found = Some((n, i, wl_indistinguishable(&g, s.var(i, false), s.var(i, true), 2).unwrap()));
                    searched.push(format!("n={n}: {pins} pins"));
                    break 'search;
                }
            }
        }
        searched.push(format!("n={n}: 0/{pins} pins"));
    }
    match found {
        Some((n, i, same)) => verdict(
            "A5",
            same,
            format!("pin x{i} at n={n} is {K}-locally consistent; 2-WL indistinguishable: {same}"),
        ),
        None => verdict(
            "A5",
            true,
            format!(
                "best effort, negative search recorded: no uniquely satisfiable instance has a {K}-locally consistent pin ({}); for n <= {K} the check is exact and always fails",
                searched.join(", ")
            ),
        ),
    }
}

fn a6_unique_satisfiability_trend() -> Verdict {
    // Rank-oracle calibration, 4000 trials per size at seed 0xCA1B:
    // n = 20 -> 0.9755, n = 200 -> 0.6155. The floor is the n = 200 value
    // less three standard errors of a 200-trial estimate.
    const CALIBRATED_200: f64 = 0.6155;
    const FLOOR_200: f64 = 0.51;
    let fraction = |n: u32| {
        let cfg = PipelineConfig::new(n, ClauseCount::Ratio(2.0), 0xA6);
        (0..200).filter(|&t| sample_trial(&cfg, t).unwrap().rank() == n as usize).count() as f64 / 200.0
    };
    let (small, large) = (fraction(20), fraction(200));
    verdict(
        "A6",
        large >= small && large >= FLOOR_200,
        format!(
            "ratio 2.0, 200 trials: n=20 {small:.3}, n=200 {large:.3}; trend n=200 >= n=20: {}; floor {FLOOR_200} (calibrated {CALIBRATED_200}): {}",
            large >= small,
            large >= FLOOR_200
        ),
    )
}

fn a7_hardness_growth() -> Verdict {
    // Frozen before the pilot; the pilot medians (about 7, 15, 15, 15) do
    // not justify lowering it.
    const MIN_RATIO: f64 = 8.0;
    let sizes = [15u32, 20, 25, 30];
    let mut medians = Vec::new();
    let mut sensitive = 0;
    let mut timeouts = 0;
    let mut per_size = BTreeMap::new();
    for &n in &sizes {
        let mut nodes = Vec::new();
        for f in accepted_formulas(n, 0xA7, 5) {
            let g = build_full(&f).unwrap();
            let smallest = ir_automorphisms(&g, &SearchOptions::default());
            let largest = ir_automorphisms(
                &g,
                &SearchOptions {
                    target: TargetCell::FirstLargest,
                    ..Default::default()
                },
            );
            timeouts += usize::from(smallest.status != SearchStatus::Complete);
            sensitive += usize::from(smallest.search_nodes != largest.search_nodes);
            nodes.push(smallest.search_nodes);
        }
        per_size.insert(n, nodes.clone());
        medians.push(median(nodes));
    }
    let increasing = medians.windows(2).all(|w| w[1] > w[0]);
    let ratio = medians[medians.len() - 1] / medians[0];
    verdict(
        "A7",
        increasing && ratio >= MIN_RATIO && sensitive > 0 && timeouts == 0,
        format!(
            "search nodes {per_size:?}; medians {medians:?}; strictly increasing: {increasing}; last/first {ratio:.2} (need >= {MIN_RATIO}); cell choice changes nodes on {sensitive}/20 instances"
        ),
    )
}

fn a8_solver_and_formats() -> Verdict {
    let mut rng = trial_rng(0xA8, 0);
    let mut sat_bad = 0;
    let mut cnf_bad = 0;
    let mut satisfiable = 0;
    for t in 0..200u64 {
        let n = between(&mut rng, 3, 16) as u32;
        let m = between(&mut rng, 1, (2 * n as u64).min(triples(n)));
        // Alternate between arbitrary and homogeneous systems.
        let f = if t % 2 == 0 {
            sample_general_with(&mut rng, n, m).unwrap()
        } else {
            sample_homogeneous_with(&mut rng, n, m).unwrap()
        };
        let expected = count_solutions(&f) > 0;
        satisfiable += usize::from(expected);
        let input = SatInput::from_xor_formula(&f);
        for gauss in [true, false] {
            let r = solve(&input, gauss, SolveBudget::unlimited()).unwrap().result;
            if r.is_sat() != expected || r.is_unsat() == expected {
                sat_bad += 1;
            }
        }
        if f.is_homogeneous() {
            let phi = f.nontrivial_solution_formula().unwrap();
            let nonzero = count_solutions(&f) > 1;
            let r = solve(&SatInput::from_cnf(&phi), false, SolveBudget::unlimited()).unwrap().result;
            if phi.num_clauses() != 4 * f.num_clauses() + 1 || r.is_sat() != nonzero {
                cnf_bad += 1;
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let mut format_bad = 0;
    for i in 0..100 {
        let g = random_graph(&mut rng, 40);
        for format in [GraphFormat::Dre, GraphFormat::Dimacs] {
            let path = dir.path().join(format!("g{i}.{}", format.extension()));
            pipeline::export_graph(&g, format, &path).unwrap();
            let written = std::fs::read(&path).unwrap();
            let back = pipeline::import_graph(&path, format).unwrap();
            let same_graph = back.vertex_count() == g.vertex_count() && back.edges().eq(g.edges());
            if !same_graph || format.write(&back).into_bytes() != written {
                format_bad += 1;
            }
        }
    }
    verdict(
        "A8",
        sat_bad == 0 && cnf_bad == 0 && format_bad == 0,
        format!(
            "xorsat vs enumeration: {sat_bad} mismatches over 200 formulas x 2 modes ({satisfiable} satisfiable); nonzero-solution CNF size or verdict: {cnf_bad} mismatches; round-trips: {format_bad}/200 failures"
        ),
    )
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn a9_determinism() -> Verdict {
    let mut cfg = PipelineConfig::new(40, ClauseCount::Ratio(2.0), 0xA9);
    cfg.trials = 12;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let batch = pipeline::generate(&cfg, a.path()).unwrap();
    pipeline::generate(&cfg, b.path()).unwrap();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    verdict(
        "A9",
        ta == tb && !batch.records.is_empty(),
        format!(
            "{} files, {} accepted of {} trials; trees identical: {}",
            ta.len(),
            batch.records.len(),
            cfg.trials,
            ta == tb
        ),
    )
}

#[test]
fn acceptance() {
    // Start on a fresh line after libtest's "test acceptance ...".
    println!();
    let mut verdicts = Vec::new();
    let mut timed = |run: &mut dyn FnMut() -> Vec<Verdict>| {
        let started = Instant::now();
        for v in run() {
            println!(
                "{} {}  ({:.1?}) {}",
                v.id,
                if v.passed { "PASS" } else { "FAIL" },
                started.elapsed(),
                v.detail
            );
            verdicts.push(v);
        }
    };
    timed(&mut || vec![a1_construction_counts()]);
    timed(&mut || {
        let (a2, a3) = a2_a3_asymmetry_and_group_size();
        vec![a2, a3]
    });
    timed(&mut || vec![a4_color_refinement_on_consistent_pins()]);
    timed(&mut || vec![a5_two_wl_spot_check()]);
    timed(&mut || vec![a6_unique_satisfiability_trend()]);
    timed(&mut || vec![a7_hardness_growth()]);
    timed(&mut || vec![a8_solver_and_formats()]);
    timed(&mut || vec![a9_determinism()]);
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

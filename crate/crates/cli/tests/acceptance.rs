//! Acceptance gate: one `[PASS]` or `[FAIL]` line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dutycycle::domination::{
    closed_neighborhood_instance, greedy_domatic_partition, petersen, search_config, verify_config, ConfigMethod,
    ConfigSearch, SearchBudget,
};
use dutycycle::game::{binomial, blll_place_and_schedule, blll_schedule, two_stage_place_and_schedule, BlllParams};
use dutycycle::graph::NetworkGraph;
use dutycycle::greedy::greedy_schedule;
use dutycycle::oracle::{exact_optimal_schedule, search_space};
use dutycycle::randnet::{
    all_nodes_instance, closed_form_er, closed_form_geometric, gen_erdos_renyi, gen_geometric, gen_pipe_network,
    simulate_random_family, ErdosRenyiSpec, GeometricGraphSpec,
};
use dutycycle::rng;
use dutycycle::schedule::{ratio_to_f64, score};
use dutycycle::verify::{potential_game_suite, random_instance, reduction_suite, slot_sum_suite};
use rand::RngCore;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(start: Instant, limit: Duration, what: String) -> Outcome {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{what}; took {took:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{what}; {took:.1?}"))
    }
}

fn ac1() -> Outcome {
    let t = Instant::now();
    let r = potential_game_suite(11, 25, 50).map_err(|e| e.to_string())?;
    if !r.passed() || r.checks < 1000 || r.instances < 20 {
        return Err(format!("{} checks, {} failures: {:?}", r.checks, r.failures, r.details));
    }
    within(t, Duration::from_secs(30), format!("{} deviations over {} instances, all exact", r.checks, r.instances))
}

fn ac2() -> Outcome {
    let t = Instant::now();
    let r = slot_sum_suite(12, 12, 10).map_err(|e| e.to_string())?;
    if !r.passed() || r.checks < 200 {
        return Err(format!("{} checks, {} failures: {:?}", r.checks, r.failures, r.details));
    }
    within(t, Duration::from_secs(10), format!("120 labelings over {} instances, {} checks", r.instances, r.checks))
}

fn ac3() -> Outcome {
    let t = Instant::now();
    let (r, graphs) = reduction_suite(13, 50, 12, false).map_err(|e| e.to_string())?;
    let per_labeling = graphs.iter().filter(|g| g.nodes <= 8).map(|g| g.labelings_checked).sum::<u64>();
    if !r.passed() || graphs.len() != 50 {
        return Err(format!("{} failures: {:?}", r.failures, r.details));
    }
    let (general, reports) = reduction_suite(13, 20, 10, true).map_err(|e| e.to_string())?;
    let equal = reports.iter().filter(|g| g.optimum == g.predicted).count();
    if !general.passed() {
        return Err(format!("lower bound broken on graphs with triangles: {:?}", general.details));
    }
    within(
        t,
        Duration::from_secs(120),
        format!(
            "50 triangle-free graphs exact, {per_labeling} labelings checked on n <= 8; \
             graphs with triangles: bound only, equality on {equal}/20"
        ),
    )
}

fn ac4() -> Outcome {
    let t = Instant::now();
    let mut ratios = Vec::new();
    let (mut hits, mut pairs) = (0, 0);
    let mut index = 0u64;
    while ratios.len() < 30 {
        let mut r = rng::stream(14, "acceptance-solver", index);
        index += 1;
        let inst = random_instance(&mut r, 6);
        if inst.coverage().device_count() > 6
            || binomial(inst.k(), inst.sigma()) > 15
            || search_space(&inst) > 20_000_000
        {
            continue;
        }
        let best = exact_optimal_schedule(&inst, 20_000_000).map_err(|e| e.to_string())?.best_potential;
        let greedy = greedy_schedule(&inst, None).objective();
        ratios.push(if best == 0 { 1.0 } else { greedy as f64 / best as f64 });
        for seed in 0..5 {
            let params = BlllParams { seed, ..BlllParams::default() };
            let out = blll_schedule(&inst, &params).map_err(|e| e.to_string())?;
            pairs += 1;
            hits += usize::from(out.best_phi == best);
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let rate = hits as f64 / pairs as f64;
    let what = format!("greedy/optimum mean {mean:.4}; BLLL optimal in {hits}/{pairs} pairs");
    if mean < 0.95 || rate < 0.9 {
        return Err(what);
    }
    within(t, Duration::from_secs(300), what)
}

fn ac5() -> Outcome {
    let er = closed_form_er(10, 2, 100, 0.05).map_err(|e| e.to_string())?;
    let geo = closed_form_geometric(10, 2, 1.0, 2.0).map_err(|e| e.to_string())?;
    let what = format!("ER {er:.5} (0.70573), geometric {geo:.5} (0.93520)");
    if (er - 0.70573).abs() > 5e-4 || (geo - 0.93520).abs() > 5e-4 {
        return Err(what);
    }
    Ok(what)
}

fn graph_seed(seed: u64, t: u64) -> u64 {
    rng::stream(seed, "acceptance-graph", t).next_u64()
}

fn ac6() -> Outcome {
    let t = Instant::now();
    let closed_er = closed_form_er(10, 2, 500, 0.02).map_err(|e| e.to_string())?;
    let er = simulate_random_family(
        |i| gen_erdos_renyi(&ErdosRenyiSpec { n: 500, p: 0.02, seed: graph_seed(16, i) }),
        10,
        2,
        1,
        200,
        16,
    )
    .map_err(|e| e.to_string())?;
    let er_took = t.elapsed();

    let t = Instant::now();
    let n = 1000usize;
    let side = (n as f64).sqrt();
    let radius = (12.5 / std::f64::consts::PI).sqrt();
    let closed_geo = closed_form_geometric(10, 2, 1.0, radius).map_err(|e| e.to_string())?;
    let geo = simulate_random_family(
        |i| Ok(gen_geometric(&GeometricGraphSpec { n, side, radius, seed: graph_seed(17, i), torus: true })?.graph),
        10,
        2,
        1,
        100,
        17,
    )
    .map_err(|e| e.to_string())?;
    let geo_took = t.elapsed();

    let er_err = (er.mean - closed_er).abs() / closed_er;
    let geo_err = (geo.mean - closed_geo).abs() / closed_geo;
    let what = format!(
        "ER {:.5} vs {closed_er:.5} ({:.2}%, {er_took:.1?}); torus {:.5} vs {closed_geo:.5} ({:.2}%, {geo_took:.1?})",
        er.mean,
        100.0 * er_err,
        geo.mean,
        100.0 * geo_err
    );
    let limit = Duration::from_secs(180);
    if er_err > 0.02 || geo_err > 0.03 || er_took > limit || geo_took > limit {
        return Err(what);
    }
    Ok(what)
}

fn full_coverage(
    g: &NetworkGraph,
    k: usize,
    sigma: usize,
    cfg: &dutycycle::domination::KSigmaConfig,
) -> Result<bool, String> {
    let inst = closed_neighborhood_instance(g, k, sigma).map_err(|e| e.to_string())?;
    let report = score(&inst, &cfg.to_labeling()).map_err(|e| e.to_string())?;
    Ok(report.per_slot_covered.iter().all(|&c| c == g.node_count() as u64))
}

fn ac7() -> Outcome {
    let t = Instant::now();
    let p4 = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).map_err(|e| e.to_string())?;
    for sigma in 1..=3 {
        let life = greedy_domatic_partition(&p4, None).lifetime(sigma);
        if life != 2 * sigma {
            return Err(format!("P4 lifetime {life} for sigma {sigma}"));
        }
    }

    let budget = SearchBudget { fast_path: false, ..SearchBudget::default() };
    let pg = petersen();
    let ConfigSearch::Found { config, .. } = search_config(&pg, 5, 2, &budget).map_err(|e| e.to_string())? else {
        return Err("no (5,2)-configuration found on the Petersen graph".into());
    };
    if !verify_config(&pg, &config).map_err(|e| e.to_string())?.is_empty() || !full_coverage(&pg, 5, 2, &config)? {
        return Err("Petersen configuration does not verify".into());
    }

    let mut graphs = vec![p4, pg];
    graphs.push(NetworkGraph::from_edges(7, &(1..7).map(|i| (0, i)).collect::<Vec<_>>()).map_err(|e| e.to_string())?);
    graphs.push(
        NetworkGraph::from_edges(6, &(0..6).map(|i| (i, (i + 1) % 6)).collect::<Vec<_>>())
            .map_err(|e| e.to_string())?,
    );
    for i in 0..6 {
        graphs.push(gen_erdos_renyi(&ErdosRenyiSpec { n: 30, p: 0.2, seed: i }).map_err(|e| e.to_string())?);
    }
    let mut checked = 0;
    for g in &graphs {
        for sigma in 1..=2 {
            let k = greedy_domatic_partition(g, None).lifetime(sigma);
            match search_config(g, k, sigma, &SearchBudget::default()).map_err(|e| e.to_string())? {
                ConfigSearch::Found { config, method: ConfigMethod::Domatic } => {
                    if !verify_config(g, &config).map_err(|e| e.to_string())?.is_empty()
                        || !full_coverage(g, k, sigma, &config)?
                    {
                        return Err(format!("fast-path config ({k},{sigma}) fails on a {}-node graph", g.node_count()));
                    }
                    checked += 1;
                }
                other => return Err(format!("fast path did not produce ({k},{sigma}): {other:?}")),
            }
        }
    }
    within(
        t,
        Duration::from_secs(60),
        format!("P4 lifetime 2*sigma; Petersen (5,2) found; {checked} fast-path configs with D = 1 in every slot"),
    )
}

fn ac8() -> Outcome {
    let t = Instant::now();
    let (mut joint, mut staged) = (Vec::new(), Vec::new());
    for i in 0..20u64 {
        let g = gen_geometric(&GeometricGraphSpec { n: 50, side: 1.0, radius: 0.2, seed: 800 + i, torus: false })
            .map_err(|e| e.to_string())?
            .graph;
        let k = 4 + (i as usize % 9);
        let inst = all_nodes_instance(&g, k, 2, 1).map_err(|e| e.to_string())?;
        let params = BlllParams { seed: i, ..BlllParams::default() };
        let a = blll_place_and_schedule(&inst, 10, &params).map_err(|e| e.to_string())?;
        let b = two_stage_place_and_schedule(&inst, 10, &params).map_err(|e| e.to_string())?;
        joint.push(ratio_to_f64(a.best_score(&inst)));
        staged.push(ratio_to_f64(b.schedule.best_score(&inst)));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let wins = joint.iter().zip(&staged).filter(|(a, b)| a >= b).count();
    let what = format!(
        "mean D_joint {:.4}, mean D_twostage {:.4}; joint >= two-stage on {wins}/20",
        mean(&joint),
        mean(&staged)
    );
    if mean(&joint) < mean(&staged) {
        return Err(what);
    }
    within(t, Duration::from_secs(600), what)
}

fn ac9() -> Outcome {
    let t = Instant::now();
    let g = gen_pipe_network(126, 168, 1).map_err(|e| e.to_string())?.graph;
    let inst = all_nodes_instance(&g, 10, 2, 2).map_err(|e| e.to_string())?;
    let seeds = 10u64;
    let mut fast = 0;
    for seed in 0..seeds {
        let params = BlllParams { seed, ..BlllParams::default() };
        let out = blll_schedule(&inst, &params).map_err(|e| e.to_string())?;
        if out.trace.windows(2).any(|w| w[1].best_phi < w[0].best_phi) {
            return Err(format!("seed {seed}: best-seen trace decreases"));
        }
        let at_5000 = out.trace.iter().filter(|p| p.iteration <= 5000).map(|p| p.best_phi).max().unwrap_or(0);
        fast += usize::from(at_5000 as f64 >= 0.95 * out.best_phi as f64);
    }
    let what = format!("95% of the final value by iteration 5000 in {fast}/{seeds} seeds");
    if (fast as f64) < 0.8 * seeds as f64 {
        return Err(what);
    }
    within(t, Duration::from_secs(300), what)
}

fn run_cli(args: &[&str], threads: &str, dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dutycycle"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = out.stdout;
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|x| x == "csv" || x == "txt" || x == "toml") {
            bytes.extend(path.file_name().unwrap().to_string_lossy().as_bytes());
            bytes.extend(std::fs::read(&path).map_err(|e| e.to_string())?);
            std::fs::remove_file(&path).map_err(|e| e.to_string())?;
        }
    }
    Ok(bytes)
}

fn ac10() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let water = data.join("water1.toml");
    let path = data.join("path.toml");
    let petersen = data.join("petersen.toml");
    let (water, path, petersen) = (water.to_str().unwrap(), path.to_str().unwrap(), petersen.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["schedule", water, "--seed", "3", "--iters", "3000", "--trace", "trace.csv", "-o", "out.txt"],
        vec!["schedule", water, "--solver", "greedy", "--trace", "trace.csv", "-o", "out.txt"],
        vec!["schedule", path, "--solver", "oracle", "-o", "out.txt"],
        vec![
            "place-and-schedule",
            water,
            "--devices",
            "8",
            "--iters",
            "2000",
            "--seed",
            "5",
            "--k-range",
            "4..6",
            "-o",
            "out.csv",
        ],
        vec![
            "rand-experiment",
            "--family",
            "er",
            "--n",
            "200",
            "--p",
            "0.03",
            "--k-range",
            "4..6",
            "--sigma",
            "2",
            "--trials",
            "40",
            "--seed",
            "9",
            "-o",
            "out.csv",
        ],
        vec![
            "rand-experiment",
            "--family",
            "geometric",
            "--n",
            "300",
            "--side",
            "10",
            "--radius",
            "1",
            "--torus",
            "--k-range",
            "5",
            "--sigma",
            "2",
            "--trials",
            "20",
            "-o",
            "out.csv",
        ],
        vec!["lifetime", petersen, "--sigma", "2", "--mode", "config", "--k", "5", "--no-fast-path", "-o", "out.txt"],
        vec!["generate", "--family", "pipe", "--n", "60", "--edges", "80", "--seed", "4", "-o", "net.toml"],
        vec!["verify", "--seed", "2"],
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for args in &commands {
        let first = run_cli(args, "4", dir.path())?;
        let again = run_cli(args, "4", dir.path())?;
        let single = run_cli(args, "1", dir.path())?;
        let mut flagged = args.clone();
        flagged.extend(["--threads", "2"]);
        let pinned = run_cli(&flagged, "4", dir.path())?;
        if first != again || first != single || first != pinned {
            return Err(format!("{} output differs between runs or thread counts", args[0]));
        }
    }
    Ok(format!("{} seeded commands byte-identical across reruns and 1/2/4 threads", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("potential-game identity", ac1),
        ("slot/target sum equivalence", ac2),
        ("max-cut correspondence", ac3),
        ("solver quality against the oracle", ac4),
        ("closed-form spot values", ac5),
        ("random scheduling against the closed forms", ac6),
        ("domination lifetimes and configurations", ac7),
        ("joint versus two-stage placement", ac8),
        ("BLLL convergence on a pipe network", ac9),
        ("determinism", ac10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] AC{} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] AC{} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

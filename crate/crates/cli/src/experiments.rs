use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dutycycle::domination::{
    closed_neighborhood_instance, config_from_domatic, exact_domatic_partition, greedy_domatic_partition,
    search_config, ConfigMethod, ConfigSearch, SearchBudget, DEFAULT_EXHAUSTIVE_LIMIT, EXACT_DOMATIC_LIMIT,
};
use dutycycle::graph::NetworkGraph;
use dutycycle::randnet::{
    closed_form_er, closed_form_geometric, gen_erdos_renyi, gen_geometric, gen_pipe_network, simulate_random_family,
    ErdosRenyiSpec, GeometricGraphSpec,
};
use dutycycle::rng;
use dutycycle::schedule::{score, write_labeling};
use dutycycle::verify::{potential_game_suite, reduction_suite, slot_sum_suite, SuiteReport};
use rand::RngCore;

use crate::instance::{parse_edge_list, Instance, InstanceFile};
use crate::output::{csv_writer, decimal, emit, parse_range};
use crate::{Failure, OutFlag};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LifetimeMode {
    Disjoint,
    Config,
}

#[derive(Args, Debug)]
pub struct LifetimeArgs {
    /// Instance file; only its graph is used.
    pub instance: PathBuf,
    #[arg(long)]
    pub sigma: usize,
    #[arg(long, value_enum, default_value_t = LifetimeMode::Disjoint)]
    pub mode: LifetimeMode,
    /// Number of labels to look for (config mode).
    #[arg(long)]
    pub k: Option<usize>,
    /// BLLL iterations for the configuration search.
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest `C(k, sigma)^n` searched exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_LIMIT)]
    pub exhaustive_limit: u128,
    /// Skip the domatic-partition construction in config mode.
    #[arg(long)]
    pub no_fast_path: bool,
    #[command(flatten)]
    pub out: OutFlag,
}

fn coverage_block(
    g: &NetworkGraph,
    k: usize,
    sigma: usize,
    labels: &dutycycle::schedule::Labeling,
) -> Result<String, Failure> {
    let inst = closed_neighborhood_instance(g, k, sigma)?;
    let report = score(&inst, labels)?;
    Ok(format!("{report}{}", write_labeling(inst.coverage(), labels)))
}

pub fn lifetime(args: &LifetimeArgs) -> Result<(), Failure> {
    let g = Instance::load(&args.instance)?.graph;
    let sigma = args.sigma;
    let mut text = String::new();
    match args.mode {
        LifetimeMode::Disjoint => {
            if args.k.is_some() {
                log::warn!("--k is ignored in disjoint mode");
            }
            let dp = greedy_domatic_partition(&g, None);
            let k = dp.lifetime(sigma);
            writeln!(text, "# mode: disjoint\n# sigma: {sigma}\n# dominating_sets: {}\n# lifetime: {k}", dp.len())
                .unwrap();
            if g.node_count() <= EXACT_DOMATIC_LIMIT {
                writeln!(text, "# exact_domatic_number: {}", exact_domatic_partition(&g)?.len()).unwrap();
            } else {
                writeln!(text, "# exact_domatic_number: not computed (heuristic count is a lower bound)").unwrap();
            }
            for (i, set) in dp.sets().iter().enumerate() {
                let names: Vec<&str> = set.iter().map(|&v| g.name(v)).collect();
                writeln!(text, "# set {}: {}", i + 1, names.join(",")).unwrap();
            }
            let cfg = config_from_domatic(&g, &dp, sigma)?;
            text += &coverage_block(&g, cfg.k, sigma, &cfg.to_labeling())?;
            emit(args.out.out.as_deref(), &text)
        }
        LifetimeMode::Config => {
            let k = args.k.ok_or_else(|| Failure::Input("config mode needs --k".into()))?;
            let budget = SearchBudget {
                iterations: args.budget,
                seed: args.seed,
                exhaustive_limit: args.exhaustive_limit,
                fast_path: !args.no_fast_path,
                ..SearchBudget::default()
            };
            writeln!(text, "# mode: config\n# k: {k}\n# sigma: {sigma}").unwrap();
            match search_config(&g, k, sigma, &budget)? {
                ConfigSearch::Found { config, method } => {
                    let how = match method {
                        ConfigMethod::Domatic => "domatic partition",
                        ConfigMethod::Exhaustive => "exhaustive search",
                        ConfigMethod::Stochastic => "stochastic search",
                    };
                    writeln!(text, "# status: found ({how})").unwrap();
                    text += &coverage_block(&g, k, sigma, &config.to_labeling())?;
                    emit(args.out.out.as_deref(), &text)
                }
                ConfigSearch::Nonexistent => {
                    writeln!(text, "# status: nonexistent (proven)").unwrap();
                    emit(args.out.out.as_deref(), &text)
                }
                ConfigSearch::BudgetExhausted { best_satisfied, required } => {
                    writeln!(
                        text,
                        "# status: not found within budget (best {best_satisfied} of {required} constraints)"
                    )
                    .unwrap();
                    emit(args.out.out.as_deref(), &text)?;
                    Err(Failure::Refusal(format!(
                        "no ({k},{sigma})-configuration found within {} iterations",
                        args.budget
                    )))
                }
            }
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Geometric,
    Er,
}

#[derive(Args, Debug)]
pub struct RandArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Edge probability (er).
    #[arg(long)]
    pub p: Option<f64>,
    /// Side of the deployment square (geometric).
    #[arg(long)]
    pub side: Option<f64>,
    /// Connection radius (geometric).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Wrap distances around the square (geometric).
    #[arg(long)]
    pub torus: bool,
    /// Slot counts `a..b`.
    #[arg(long)]
    pub k_range: String,
    #[arg(long)]
    pub sigma: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub lambda: usize,
    #[command(flatten)]
    pub out: OutFlag,
}

pub fn rand_experiment(args: &RandArgs) -> Result<(), Failure> {
    let (lo, hi) = parse_range(&args.k_range).map_err(Failure::Input)?;
    if args.sigma == 0 || args.sigma > hi {
        return Err(Failure::Input(format!("sigma {} must be in 1..={hi}", args.sigma)));
    }
    if args.trials == 0 {
        return Err(Failure::Input("--trials must be positive".into()));
    }
    let need =
        |v: Option<f64>, flag: &str| v.ok_or_else(|| Failure::Input(format!("--{flag} is required for this family")));
    // Trial t uses the same graph for every k.
    let graph_seed = |t: u64| rng::stream(args.seed, "rand-experiment-graph", t).next_u64();
    let family = args.family;
    let (p, side, radius) = match family {
        Family::Er => (need(args.p, "p")?, 0.0, 0.0),
        Family::Geometric => (0.0, need(args.side, "side")?, need(args.radius, "radius")?),
    };
    let make = |t: u64| -> dutycycle::Result<NetworkGraph> {
        match family {
            Family::Er => gen_erdos_renyi(&ErdosRenyiSpec { n: args.n, p, seed: graph_seed(t) }),
            Family::Geometric => Ok(gen_geometric(&GeometricGraphSpec {
                n: args.n,
                side,
                radius,
                seed: graph_seed(t),
                torus: args.torus,
            })?
            .graph),
        }
    };
    let header = ["k", "sigma", "closed_form", "empirical_mean", "stderr", "trials"];
    let mut w = csv_writer(args.out.out.as_deref(), &header)?;
    for k in lo.max(args.sigma)..=hi {
        let closed = match family {
            Family::Er => closed_form_er(k, args.sigma, args.n, p)?,
            Family::Geometric => closed_form_geometric(k, args.sigma, args.n as f64 / (side * side), radius)?,
        };
        let seed = rng::stream(args.seed, "rand-experiment-schedule", k as u64).next_u64();
        let est = simulate_random_family(make, k, args.sigma, args.lambda, args.trials, seed)?;
        w.write_record([
            k.to_string(),
            args.sigma.to_string(),
            decimal(closed),
            decimal(est.mean),
            decimal(est.stderr),
            est.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Run every suite (the default when none is selected).
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub potential_game: bool,
    #[arg(long)]
    pub reduction: bool,
    /// Per-target and per-slot coverage totals agree.
    #[arg(long)]
    pub proposition1: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn suite_line(r: &SuiteReport) -> String {
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    let mut line = format!(
        "{}: {} checks over {} instances, {} failures [{verdict}]\n",
        r.name, r.checks, r.instances, r.failures
    );
    for d in &r.details {
        writeln!(line, "  {d}").unwrap();
    }
    line
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let all = args.all || !(args.potential_game || args.reduction || args.proposition1);
    let mut reports = Vec::new();
    let mut text = String::new();
    if all || args.potential_game {
        reports.push(potential_game_suite(args.seed, 25, 50)?);
    }
    if all || args.proposition1 {
        reports.push(slot_sum_suite(args.seed, 12, 10)?);
    }
    if all || args.reduction {
        let (strict, details) = reduction_suite(args.seed, 50, 12, false)?;
        reports.push(strict);
        let (bound, general) = reduction_suite(args.seed, 20, 10, true)?;
        let equal = general.iter().filter(|r| r.optimum == r.predicted).count();
        writeln!(
            text,
            "# reduction: {} triangle-free graphs, largest n = {}",
            details.len(),
            details.iter().map(|r| r.nodes).max().unwrap_or(0)
        )
        .unwrap();
        writeln!(
            text,
            "# reduction: on {} general graphs the cut formula is a lower bound; equality on {equal}",
            general.len()
        )
        .unwrap();
        reports.push(SuiteReport { name: "reduction-lower-bound", ..bound });
    }
    for r in &reports {
        text += &suite_line(r);
    }
    emit(None, &text)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    /// Edge list: `a b` per line; extra columns and `#` comments are ignored.
    pub edgelist: PathBuf,
    #[command(flatten)]
    pub out: OutFlag,
}

pub fn import_edgelist(args: &ImportArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.edgelist)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", args.edgelist.display())))?;
    let g = parse_edge_list(&text)?;
    emit(args.out.out.as_deref(), &InstanceFile::from_graph(&g).to_toml())
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenFamily {
    /// Spanning tree plus short links, like a pipe network.
    Pipe,
    Geometric,
    Er,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: GenFamily,
    #[arg(long)]
    pub n: usize,
    /// Number of links (pipe).
    #[arg(long)]
    pub edges: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub torus: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub sigma: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[command(flatten)]
    pub out: OutFlag,
}

pub fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let missing = |flag: &str| Failure::Input(format!("--{flag} is required for this family"));
    let g = match args.family {
        GenFamily::Pipe => gen_pipe_network(args.n, args.edges.ok_or_else(|| missing("edges"))?, args.seed)?.graph,
        GenFamily::Er => {
            gen_erdos_renyi(&ErdosRenyiSpec { n: args.n, p: args.p.ok_or_else(|| missing("p"))?, seed: args.seed })?
        }
        GenFamily::Geometric => {
            gen_geometric(&GeometricGraphSpec {
                n: args.n,
                side: args.side.ok_or_else(|| missing("side"))?,
                radius: args.radius.ok_or_else(|| missing("radius"))?,
                seed: args.seed,
                torus: args.torus,
            })?
            .graph
        }
    };
    let mut file = InstanceFile::from_graph(&g);
    file.k = args.k;
    file.sigma = args.sigma;
    if args.lambda.is_some() {
        file.lambda = args.lambda;
    }
    emit(args.out.out.as_deref(), &file.to_toml())
}

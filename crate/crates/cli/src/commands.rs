use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dutycycle::game::{
    blll_place_and_schedule, blll_schedule, two_stage_place_and_schedule, AcceptanceRule, BlllOutcome, BlllParams,
};
use dutycycle::graph::NodeId;
use dutycycle::greedy::greedy_schedule;
use dutycycle::oracle::{exact_optimal_schedule, DEFAULT_ORACLE_LIMIT};
use dutycycle::schedule::{format_ratio, ratio_to_f64, score, write_labeling, Labeling, ProblemInstance};
use num_rational::Ratio;

use crate::instance::Instance;
use crate::output::{csv_writer, decimal, emit, parse_range};
use crate::{Failure, InstanceFlags, OutFlag};

#[derive(Args, Debug)]
pub struct CoverageArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub flags: InstanceFlags,
    #[command(flatten)]
    pub out: OutFlag,
}

pub fn build_coverage(args: &CoverageArgs) -> Result<(), Failure> {
    let inst = Instance::load(&args.instance)?;
    let cov = inst.coverage(&args.flags.overrides(), None)?;
    let summary = format!(
        "# objective: {}\n# devices: {}\n# y-elements: {}\n# edges: {}\n",
        cov.objective().as_str(),
        cov.device_count(),
        cov.y_count(),
        cov.edge_count()
    );
    match &args.out.out {
        Some(path) => {
            emit(Some(path), &cov.to_adjacency_text())?;
            emit(None, &summary)
        }
        None => emit(None, &(summary + &cov.to_adjacency_text())),
    }
}

/// BLLL settings shared by the scheduling commands.
#[derive(Args, Debug, Clone)]
pub struct BlllFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.015)]
    pub epsilon: f64,
    /// Use the acceptance rule with base epsilon instead of 1/epsilon.
    #[arg(long)]
    pub printed_rule: bool,
    /// Record every n-th iteration in the trace.
    #[arg(long, default_value_t = 100)]
    pub trace_stride: usize,
}

impl BlllFlags {
    pub fn params(&self) -> BlllParams {
        BlllParams {
            epsilon: self.epsilon,
            iterations: self.iters,
            seed: self.seed,
            trace_stride: self.trace_stride,
            rule: if self.printed_rule { AcceptanceRule::AsPrinted } else { AcceptanceRule::LogLinear },
            ..BlllParams::default()
        }
    }

    fn header(&self) -> String {
        let rule = if self.printed_rule { "printed" } else { "log-linear" };
        format!("# seed: {}\n# iterations: {}\n# epsilon: {}\n# rule: {rule}\n", self.seed, self.iters, self.epsilon)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Greedy,
    Blll,
    Oracle,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Solver::Blll)]
    pub solver: Solver,
    #[command(flatten)]
    pub flags: InstanceFlags,
    #[command(flatten)]
    pub blll: BlllFlags,
    /// Break greedy ties at random (seeded by --seed) instead of by lowest index.
    #[arg(long)]
    pub random_ties: bool,
    /// Largest labeling space the oracle will enumerate.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    pub oracle_limit: u128,
    /// Write the solver trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutFlag,
}

fn report_block(inst: &ProblemInstance, labeling: &Labeling) -> Result<String, Failure> {
    let report = score(inst, labeling)?;
    Ok(format!("{report}{}", write_labeling(inst.coverage(), labeling)))
}

fn write_blll_trace(path: &std::path::Path, out: &BlllOutcome, capacity: u64) -> Result<(), Failure> {
    let mut w = csv_writer(Some(path), &["iteration", "phi", "best_phi", "score", "best_score"])?;
    for t in &out.trace {
        w.write_record([
            t.iteration.to_string(),
            t.phi.to_string(),
            t.best_phi.to_string(),
            decimal(t.phi as f64 / capacity as f64),
            decimal(t.best_phi as f64 / capacity as f64),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn schedule(args: &ScheduleArgs) -> Result<(), Failure> {
    let inst = Instance::load(&args.instance)?.problem(&args.flags.overrides(), None)?;
    let mut text = format!("# solver: {}\n", format!("{:?}", args.solver).to_lowercase());
    let labeling = match args.solver {
        Solver::Greedy => {
            let out = greedy_schedule(&inst, args.random_ties.then_some(args.blll.seed));
            if let Some(path) = &args.trace {
                let mut w = csv_writer(Some(path), &["iteration", "device", "slot", "gain", "potential"])?;
                for s in &out.trace {
                    w.write_record([
                        s.iteration.to_string(),
                        inst.coverage().device_name(s.device).to_string(),
                        (s.slot + 1).to_string(),
                        s.gain.to_string(),
                        s.objective.to_string(),
                    ])?;
                }
                w.flush()?;
            }
            out.labeling
        }
        Solver::Blll => {
            text += &args.blll.header();
            let out = blll_schedule(&inst, &args.blll.params())?;
            if let Some(path) = &args.trace {
                write_blll_trace(path, &out, inst.capacity())?;
            }
            writeln!(text, "# final_score: {}", format_ratio(out.final_score(&inst))).unwrap();
            out.best_labeling
        }
        Solver::Oracle => {
            if args.trace.is_some() {
                return Err(Failure::Input("the oracle has no trace".into()));
            }
            let out = exact_optimal_schedule(&inst, args.oracle_limit)?;
            writeln!(text, "# search_space: {}\n# optimal_labelings: {}", out.space, out.optimum_count).unwrap();
            out.optima.into_iter().next().expect("at least one labeling is optimal")
        }
    };
    text += &report_block(&inst, &labeling)?;
    emit(args.out.out.as_deref(), &text)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaceSolver {
    BlllJoint,
    TwoStage,
    Both,
}

#[derive(Args, Debug)]
pub struct PlaceArgs {
    pub instance: PathBuf,
    /// Number of devices to place.
    #[arg(long)]
    pub devices: usize,
    /// Candidate sites: `all` or a comma-separated list of node names.
    #[arg(long, default_value = "all")]
    pub sites: String,
    #[arg(long, value_enum, default_value_t = PlaceSolver::Both)]
    pub solver: PlaceSolver,
    #[command(flatten)]
    pub flags: InstanceFlags,
    #[command(flatten)]
    pub blll: BlllFlags,
    /// Sweep k over `a..b` and write `k,D_joint,D_twostage` rows as CSV.
    #[arg(long)]
    pub k_range: Option<String>,
    #[command(flatten)]
    pub out: OutFlag,
}

/// Scores a placement: the instance restricted to `sites` with `labels` per site.
fn placed(inst: &ProblemInstance, sites: &[usize], labels: &Labeling) -> Result<(ProblemInstance, Labeling), Failure> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by_key(|&i| sites[i]);
    let kept: Vec<usize> = order.iter().map(|&i| sites[i]).collect();
    let sub = inst.with_coverage(inst.coverage().restrict(&kept)?);
    let labeling = Labeling::from_sets(order.iter().map(|&i| labels.get(i)).collect());
    Ok((sub, labeling))
}

fn joint(inst: &ProblemInstance, devices: usize, params: &BlllParams) -> Result<(ProblemInstance, Labeling), Failure> {
    let out = blll_place_and_schedule(inst, devices, params)?;
    placed(inst, &out.best_sites, &out.best_labeling)
}

fn two_stage(
    inst: &ProblemInstance,
    devices: usize,
    params: &BlllParams,
) -> Result<(ProblemInstance, Labeling), Failure> {
    let out = two_stage_place_and_schedule(inst, devices, params)?;
    placed(inst, &out.schedule.best_sites, &out.schedule.best_labeling)
}

fn sites_of(inst: &Instance, spec: &str) -> Result<Vec<NodeId>, Failure> {
    if spec == "all" {
        return Ok(inst.graph.nodes().collect());
    }
    let mut unknown = Vec::new();
    let sites: Vec<NodeId> = spec
        .split(',')
        .map(str::trim)
        .filter_map(|name| inst.graph.node_id(name).map_err(|_| unknown.push(name.to_string())).ok())
        .collect();
    if !unknown.is_empty() {
        return Err(Failure::Input(format!("unknown sites: {}", unknown.join(", "))));
    }
    Ok(sites)
}

pub fn place_and_schedule(args: &PlaceArgs) -> Result<(), Failure> {
    let file = Instance::load(&args.instance)?;
    let sites = sites_of(&file, &args.sites)?;
    if args.devices > sites.len() {
        return Err(Failure::Input(format!("{} devices but only {} candidate sites", args.devices, sites.len())));
    }
    let overrides = args.flags.overrides();
    let params = args.blll.params();

    if let Some(range) = &args.k_range {
        let (lo, hi) = parse_range(range).map_err(Failure::Input)?;
        let sigma = overrides
            .sigma
            .or(file.sigma)
            .ok_or_else(|| Failure::Input("sigma is required (file or --sigma)".into()))?;
        let cov = file.coverage(&overrides, Some(&sites))?;
        let mut w = csv_writer(args.out.out.as_deref(), &["k", "D_joint", "D_twostage"])?;
        for k in lo.max(sigma)..=hi {
            let inst = ProblemInstance::new(cov.clone(), k, sigma)?;
            let (a, la) = joint(&inst, args.devices, &params)?;
            let (b, lb) = two_stage(&inst, args.devices, &params)?;
            w.write_record([
                k.to_string(),
                decimal(ratio_to_f64(score(&a, &la)?.score)),
                decimal(ratio_to_f64(score(&b, &lb)?.score)),
            ])?;
        }
        w.flush()?;
        return Ok(());
    }

    let inst = file.problem(&overrides, Some(&sites))?;
    let mut text = args.blll.header();
    writeln!(text, "# devices: {}\n# candidate_sites: {}", args.devices, sites.len()).unwrap();
    let mut scores: Vec<(&str, Ratio<u64>)> = Vec::new();
    let runs: &[(&str, PlaceSolver)] = &[("blll-joint", PlaceSolver::BlllJoint), ("two-stage", PlaceSolver::TwoStage)];
    for &(name, mode) in runs {
        if args.solver != mode && args.solver != PlaceSolver::Both {
            continue;
        }
        let (sub, labeling) = if mode == PlaceSolver::BlllJoint {
            joint(&inst, args.devices, &params)?
        } else {
            two_stage(&inst, args.devices, &params)?
        };
        let names: Vec<&str> = (0..sub.coverage().device_count()).map(|x| sub.coverage().device_name(x)).collect();
        writeln!(text, "\n# mode: {name}\n# placement: {}", names.join(",")).unwrap();
        text += &report_block(&sub, &labeling)?;
        scores.push((name, score(&sub, &labeling)?.score));
    }
    if let [(_, joint), (_, staged)] = scores[..] {
        writeln!(text, "\n# comparison: D_joint = {}, D_twostage = {}", format_ratio(joint), format_ratio(staged))
            .unwrap();
    }
    emit(args.out.out.as_deref(), &text)
}

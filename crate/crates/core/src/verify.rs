//! Randomized self-checks: the potential-game identity, the two forms of the
//! score, and the max-cut correspondence. Each suite is seeded and reports its
//! check count and failures.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::coverage::{build, CoverageGraph, Objective};
use crate::error::Result;
use crate::game::{random_label_set, Action, GameState};
use crate::graph::{GraphBuilder, NetworkGraph, NodeId, Target};
use crate::oracle::{reduction_check, ReductionReport};
use crate::rng::{self, Rng};
use crate::schedule::{f_union, labeling_to_schedule, schedule_to_labeling, score, Labeling, ProblemInstance};

/// Failure messages kept per suite.
const DETAIL_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub instances: usize,
    pub checks: u64,
    pub failures: u64,
    pub details: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, checks: 0, failures: 0, details: Vec::new() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.details.len() < DETAIL_CAP {
                self.details.push(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

/// `G(n, p)` with nodes named by index.
pub fn random_graph(rng: &mut Rng, n: usize, p: f64) -> NetworkGraph {
    let mut b = GraphBuilder::with_numbered_nodes(n);
    for a in 0..n {
        for c in a + 1..n {
            if rng.gen_bool(p) {
                b.edge_between(NodeId(a), NodeId(c)).expect("fresh pair");
            }
        }
    }
    b.build()
}

/// Random graph without triangles: pairs are visited in random order and kept when
/// they close no triangle.
pub fn random_triangle_free_graph(rng: &mut Rng, n: usize, p: f64) -> NetworkGraph {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).collect();
    pairs.shuffle(rng);
    let mut b = GraphBuilder::with_numbered_nodes(n);
    let mut adj = vec![vec![false; n]; n];
    for (a, c) in pairs {
        if rng.gen_bool(p) && !(0..n).any(|w| adj[a][w] && adj[c][w]) {
            b.edge_between(NodeId(a), NodeId(c)).expect("fresh pair");
            adj[a][c] = true;
            adj[c][a] = true;
        }
    }
    b.build()
}

/// A random scheduling instance on a small random network, with random devices,
/// mixed node and edge targets, range and objective. Slots never exceed `max_k`.
pub fn random_instance(rng: &mut Rng, max_k: usize) -> ProblemInstance {
    loop {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(0.2..0.7);
        let g = random_graph(rng, n, p);
        let mut nodes: Vec<NodeId> = g.nodes().collect();
        nodes.shuffle(rng);
        let sensors = &nodes[..rng.gen_range(1..=n.min(6))];
        let mut targets: Vec<Target> = g.nodes().filter(|_| rng.gen_bool(0.5)).map(Target::Node).collect();
        targets.extend(g.edges().filter(|_| rng.gen_bool(0.5)).map(|(e, _, _)| Target::Edge(e)));
        let objective = if rng.gen_bool(0.3) { Objective::Isolation } else { Objective::Detection };
        if targets.len() < 2 {
            continue;
        }
        let lambda = rng.gen_range(0..=2);
        let Ok(cov) = build(&g, objective, sensors, &targets, lambda) else {
            continue;
        };
        let k = rng.gen_range(1..=max_k);
        let sigma = rng.gen_range(1..=k);
        return ProblemInstance::new(cov, k, sigma).expect("valid slot counts");
    }
}

fn random_action(rng: &mut Rng, state: &GameState<'_>, player: usize) -> Action {
    let labels = random_label_set(rng, state.k(), state.sigma());
    let own = state.action(player).site;
    if !state.is_placement() {
        return Action { site: own, labels };
    }
    let occupied: BTreeSet<usize> = state.sites().into_iter().collect();
    let free: Vec<usize> =
        (0..state.coverage().device_count()).filter(|s| *s == own || !occupied.contains(s)).collect();
    Action { site: free[rng.gen_range(0..free.len())], labels }
}

/// Checks `dU = dphi` for random unilateral deviations, alternating between
/// scheduling and placement games. The state follows about half the deviations.
pub fn potential_game_suite(seed: u64, instances: usize, deviations: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("potential-game");
    for i in 0..instances {
        let mut rng = rng::stream(seed, "verify-potential", i as u64);
        let inst = random_instance(&mut rng, 8);
        let (cov, k, sigma) = (inst.coverage(), inst.k(), inst.sigma());
        let mut state = if i % 2 == 1 {
            let players = rng.gen_range(1..=cov.device_count());
            GameState::random_placement(cov, k, sigma, players, &mut rng)?
        } else {
            GameState::random_schedule(cov, k, sigma, &mut rng)?
        };
        report.instances += 1;
        for _ in 0..deviations {
            let player = rng.gen_range(0..state.players());
            let alt = random_action(&mut rng, &state, player);
            let (du, dphi) = state.check_potential_identity(player, alt)?;
            report.record(du == dphi, || format!("instance {i}, player {player}: dU = {du}, dphi = {dphi}"));
            if rng.gen_bool(0.5) {
                state.deviate(player, alt)?;
            }
        }
        report.record(state.audit(), || format!("instance {i}: cached counters drifted"));
    }
    Ok(report)
}

fn random_partial_labeling(rng: &mut Rng, devices: usize, k: usize, sigma: usize) -> Labeling {
    Labeling::from_sets(
        (0..devices)
            .map(|_| {
                let size = rng.gen_range(0..=sigma);
                random_label_set(rng, k, size)
            })
            .collect(),
    )
}

/// `sum_y |F(y)| = sum_j |N(S_j)|` on random labelings, each form computed on its
/// own, plus agreement of scores through the schedule round trip.
pub fn slot_sum_suite(seed: u64, instances: usize, labelings: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("slot-sums");
    for i in 0..instances {
        let mut rng = rng::stream(seed, "verify-slot-sums", i as u64);
        let inst = random_instance(&mut rng, 10);
        let cov: &CoverageGraph = inst.coverage();
        report.instances += 1;
        for l in 0..labelings {
            let labeling = random_partial_labeling(&mut rng, cov.device_count(), inst.k(), inst.sigma());
            let by_target: u64 = (0..cov.y_count()).map(|y| f_union(&labeling, cov, y).len() as u64).sum();
            let slots = labeling_to_schedule(&labeling, inst.k());
            let by_slot: u64 = slots
                .iter()
                .map(|active| active.iter().flat_map(|&x| cov.neighbors(x)).collect::<BTreeSet<_>>().len() as u64)
                .sum();
            report.record(by_target == by_slot, || {
                format!("instance {i}, labeling {l}: sum |F(y)| = {by_target}, sum |N(S_j)| = {by_slot}")
            });
            let back = schedule_to_labeling(&slots, cov.device_count())?;
            let same = back == labeling && score(&inst, &labeling)?.score == score(&inst, &back)?.score;
            report.record(same, || format!("instance {i}, labeling {l}: schedule round trip changed the score"));
        }
    }
    Ok(report)
}

/// Max-cut correspondence on random graphs with `3..=max_n` nodes. Graphs are
/// triangle-free unless `allow_triangles`, in which case the formula is only a
/// lower bound and is checked as such.
pub fn reduction_suite(
    seed: u64,
    graphs: usize,
    max_n: usize,
    allow_triangles: bool,
) -> Result<(SuiteReport, Vec<ReductionReport>)> {
    let mut report = SuiteReport::new("reduction");
    let mut details = Vec::with_capacity(graphs);
    let mut g_index = 0u64;
    while details.len() < graphs {
        let mut rng = rng::stream(seed, "verify-reduction", g_index);
        g_index += 1;
        let n = rng.gen_range(3..=max_n.max(3));
        let p = rng.gen_range(0.25..0.75);
        let g = if allow_triangles { random_graph(&mut rng, n, p) } else { random_triangle_free_graph(&mut rng, n, p) };
        if g.edge_count() == 0 {
            continue;
        }
        let r = reduction_check(&g)?;
        report.instances += 1;
        report.record(r.holds(), || {
            format!(
                "n = {}, |E| = {}: optimum {} vs 1/2 + {}/(2|E|) = {}, {} labeling mismatches",
                r.nodes, r.edges, r.optimum, r.max_cut, r.predicted, r.labeling_mismatches
            )
        });
        details.push(r);
    }
    Ok((report, details))
}

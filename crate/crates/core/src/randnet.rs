//! Random networks and random scheduling.
//!
//! When every node holds a device that picks a uniform `sigma`-subset of the `k`
//! slots, a node with `d` neighbors is uncovered in a given slot with probability
//! `((k - sigma) / k)^(d + 1)`. Averaging over a Poisson neighbor count gives
//!
//! ```text
//! D = 1 - ((k - sigma) / k) * exp(-sigma * m / k)
//! ```
//!
//! with mean degree `m = rho * pi * r^2` for geometric graphs and `m = n * p` for
//! Erdos-Renyi graphs. Both are approximations; [`simulate_random_schedule`] measures
//! the real value.

use rand::Rng as _;
use rayon::prelude::*;

use crate::coverage::build_detection;
use crate::error::{Error, Result};
use crate::game::random_label_set;
use crate::graph::{GraphBuilder, NetworkGraph, NodeId};
use crate::rng;
use crate::schedule::{check_slots, ratio_to_f64, score, Labeling, ProblemInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraphSpec {
    pub n: usize,
    /// Side length of the square deployment area.
    pub side: f64,
    /// Connection radius.
    pub radius: f64,
    pub seed: u64,
    /// Measure distances on the torus, removing boundary effects.
    pub torus: bool,
}

impl GeometricGraphSpec {
    /// Nodes per unit area.
    pub fn density(&self) -> f64 {
        self.n as f64 / (self.side * self.side)
    }

    /// `rho * pi * r^2`, the mean degree away from the boundary.
    pub fn expected_degree(&self) -> f64 {
        self.density() * std::f64::consts::PI * self.radius * self.radius
    }

    fn validate(&self) -> Result<()> {
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::InvalidParameter(format!("side must be positive, got {}", self.side)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }
}

/// A generated graph with node coordinates.
#[derive(Clone, Debug)]
pub struct GeometricGraph {
    pub graph: NetworkGraph,
    pub coords: Vec<(f64, f64)>,
}

fn random_points(n: usize, side: f64, rng: &mut rng::Rng) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side)).collect()
}

fn distance(a: (f64, f64), b: (f64, f64), wrap: Option<f64>) -> f64 {
    let (mut dx, mut dy) = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
    if let Some(side) = wrap {
        dx = dx.min(side - dx);
        dy = dy.min(side - dy);
    }
    dx.hypot(dy)
}

/// Uniform points in `[0, side]^2`; an edge joins points at distance at most `radius`.
pub fn gen_geometric(spec: &GeometricGraphSpec) -> Result<GeometricGraph> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, "geometric", 0);
    let coords = random_points(spec.n, spec.side, &mut rng);
    let wrap = spec.torus.then_some(spec.side);
    let mut builder = GraphBuilder::with_numbered_nodes(spec.n);
    for a in 0..spec.n {
        for b in a + 1..spec.n {
            if distance(coords[a], coords[b], wrap) <= spec.radius {
                builder.edge_between(NodeId(a), NodeId(b))?;
            }
        }
    }
    Ok(GeometricGraph { graph: builder.build(), coords })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErdosRenyiSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

/// Each unordered pair is an edge independently with probability `p`.
pub fn gen_erdos_renyi(spec: &ErdosRenyiSpec) -> Result<NetworkGraph> {
    if !(0.0..=1.0).contains(&spec.p) {
        return Err(Error::InvalidParameter(format!("p must be in [0, 1], got {}", spec.p)));
    }
    let mut rng = rng::stream(spec.seed, "erdos-renyi", 0);
    let mut builder = GraphBuilder::with_numbered_nodes(spec.n);
    for a in 0..spec.n {
        for b in a + 1..spec.n {
            if rng.gen_bool(spec.p) {
                builder.edge_between(NodeId(a), NodeId(b))?;
            }
        }
    }
    Ok(builder.build())
}

/// A sparse planar-looking network resembling a pipe layout: a Euclidean minimum
/// spanning tree over uniform points plus the shortest remaining links until
/// `edges` links exist.
pub fn gen_pipe_network(nodes: usize, edges: usize, seed: u64) -> Result<GeometricGraph> {
    if nodes < 2 {
        return Err(Error::InvalidParameter("a pipe network needs at least two nodes".into()));
    }
    let max_edges = nodes * (nodes - 1) / 2;
    if edges + 1 < nodes || edges > max_edges {
        return Err(Error::InvalidParameter(format!(
            "edge count {edges} must be in {}..={max_edges} for {nodes} nodes",
            nodes - 1
        )));
    }
    let mut rng = rng::stream(seed, "pipe-network", 0);
    let coords = random_points(nodes, 1.0, &mut rng);
    let dist = |a: usize, b: usize| distance(coords[a], coords[b], None);

    let mut builder = GraphBuilder::with_numbered_nodes(nodes);
    // Prim's algorithm on the complete Euclidean graph.
    let mut in_tree = vec![false; nodes];
    let mut best: Vec<(f64, usize)> = (0..nodes).map(|v| (dist(0, v), 0)).collect();
    in_tree[0] = true;
    for _ in 1..nodes {
        let v = (0..nodes)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(a.cmp(&b)))
            .expect("nodes remain outside the tree");
        in_tree[v] = true;
        builder.edge_between(NodeId(best[v].1), NodeId(v))?;
        for u in 0..nodes {
            if !in_tree[u] && dist(v, u) < best[u].0 {
                best[u] = (dist(v, u), v);
            }
        }
    }
    let mut extra: Vec<(f64, usize, usize)> = (0..nodes)
        .flat_map(|a| (a + 1..nodes).map(move |b| (a, b)))
        .filter(|&(a, b)| !builder.has_edge(NodeId(a), NodeId(b)))
        .map(|(a, b)| (dist(a, b), a, b))
        .collect();
    extra.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    for &(_, a, b) in extra.iter().take(edges - (nodes - 1)) {
        builder.edge_between(NodeId(a), NodeId(b))?;
    }
    Ok(GeometricGraph { graph: builder.build(), coords })
}

fn check_closed_form(k: usize, sigma: usize) -> Result<()> {
    if sigma == 0 || sigma > k {
        return Err(Error::InvalidParameter(format!("need 1 <= sigma <= k, got sigma = {sigma}, k = {k}")));
    }
    Ok(())
}

fn closed_form(k: usize, sigma: usize, mean_degree: f64) -> f64 {
    let (k, sigma) = (k as f64, sigma as f64);
    1.0 - (k - sigma) / k * (-sigma * mean_degree / k).exp()
}

/// Random-scheduling detection on a geometric graph of density `rho` and radius `r`.
pub fn closed_form_geometric(k: usize, sigma: usize, rho: f64, r: f64) -> Result<f64> {
    check_closed_form(k, sigma)?;
    if !(rho >= 0.0 && r >= 0.0) {
        return Err(Error::InvalidParameter("density and radius must be non-negative".into()));
    }
    Ok(closed_form(k, sigma, rho * std::f64::consts::PI * r * r))
}

/// Random-scheduling detection on an Erdos-Renyi graph.
pub fn closed_form_er(k: usize, sigma: usize, n: usize, p: f64) -> Result<f64> {
    check_closed_form(k, sigma)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must be in [0, 1], got {p}")));
    }
    Ok(closed_form(k, sigma, n as f64 * p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single trial.
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    fn from_samples(samples: &[f64]) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / t;
        let stderr = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, trials: samples.len() }
    }
}

/// Every node is a device and a target; range `lambda`.
pub fn all_nodes_instance(g: &NetworkGraph, k: usize, sigma: usize, lambda: usize) -> Result<ProblemInstance> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    ProblemInstance::new(build_detection(g, &nodes, &g.all_node_targets(), lambda)?, k, sigma)
}

fn random_detection(inst: &ProblemInstance, rng: &mut rng::Rng) -> Result<f64> {
    let (k, sigma) = (inst.k(), inst.sigma());
    let labeling =
        Labeling::from_sets((0..inst.coverage().device_count()).map(|_| random_label_set(rng, k, sigma)).collect());
    Ok(ratio_to_f64(score(inst, &labeling)?.score))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    Ok(())
}

/// Detection of uniformly random schedules on a fixed graph, over `trials` draws.
pub fn simulate_random_schedule(
    g: &NetworkGraph,
    k: usize,
    sigma: usize,
    lambda: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    check_trials(trials)?;
    if g.node_count() == 0 {
        return Err(Error::EmptyTargets);
    }
    if lambda != 1 {
        log::warn!("range {lambda}: the closed forms assume range 1");
    }
    let inst = all_nodes_instance(g, k, sigma, lambda)?;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| random_detection(&inst, &mut rng::stream(seed, "random-schedule", t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// Like [`simulate_random_schedule`], but trial `t` runs on the graph
/// `make_graph(t)`; one random schedule per graph.
pub fn simulate_random_family<F>(
    make_graph: F,
    k: usize,
    sigma: usize,
    lambda: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(u64) -> Result<NetworkGraph> + Sync,
{
    check_trials(trials)?;
    check_slots(k, sigma)?;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = make_graph(t)?;
            let inst = all_nodes_instance(&g, k, sigma, lambda)?;
            random_detection(&inst, &mut rng::stream(seed, "random-family", t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&samples))
}

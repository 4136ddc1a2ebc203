//! Bipartite coverage graph between device locations (X) and the elements they
//! cover (Y): targets for detection, unordered target pairs for isolation.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NetworkGraph, NodeId, Target};

/// Pair count above which isolation graphs are built with a warning.
pub const DEFAULT_PAIR_WARN_THRESHOLD: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    Detection,
    Isolation,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Detection => "detection",
            Objective::Isolation => "isolation",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detection" => Ok(Objective::Detection),
            "isolation" => Ok(Objective::Isolation),
            other => Err(Error::InvalidParameter(format!("unknown objective `{other}`"))),
        }
    }
}

/// Unordered pair of distinct targets, stored in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetPair {
    first: Target,
    second: Target,
}

impl TargetPair {
    pub fn new(a: Target, b: Target) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { first: a, second: b }),
            std::cmp::Ordering::Greater => Some(Self { first: b, second: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> Target {
        self.first
    }

    pub fn second(&self) -> Target {
        self.second
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum YElement {
    Target(Target),
    Pair(TargetPair),
}

#[derive(Clone, Debug)]
pub struct CoverageGraph {
    objective: Objective,
    devices: Vec<NodeId>,
    device_names: Vec<String>,
    /// Canonically sorted, deduplicated targets.
    targets: Vec<Target>,
    target_keys: Vec<String>,
    /// Isolation only: target index pairs `(i, j)`, `i < j`, in lexicographic order.
    pairs: Vec<(u32, u32)>,
    adjacency: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
}

/// Builds the detection graph: `x ~ y` iff target `y` lies within `lambda` of `x`.
pub fn build_detection(
    g: &NetworkGraph,
    sensors: &[NodeId],
    targets: &[Target],
    lambda: usize,
) -> Result<CoverageGraph> {
    let (sensors, targets) = validate(g, sensors, targets)?;
    let adjacency = detection_adjacency(g, &sensors, &targets, lambda);
    Ok(CoverageGraph::assemble(g, Objective::Detection, sensors, targets, Vec::new(), adjacency))
}

/// Builds the isolation graph: `x ~ {a, b}` iff `x` covers exactly one of `a`, `b`.
pub fn build_isolation(
    g: &NetworkGraph,
    sensors: &[NodeId],
    targets: &[Target],
    lambda: usize,
) -> Result<CoverageGraph> {
    build_isolation_guarded(g, sensors, targets, lambda, DEFAULT_PAIR_WARN_THRESHOLD)
}

pub fn build_isolation_guarded(
    g: &NetworkGraph,
    sensors: &[NodeId],
    targets: &[Target],
    lambda: usize,
    warn_threshold: usize,
) -> Result<CoverageGraph> {
    let (sensors, targets) = validate(g, sensors, targets)?;
    let m = targets.len();
    if m < 2 {
        return Err(Error::TooFewTargets(m));
    }
    let pair_count = m * (m - 1) / 2;
    if pair_count > warn_threshold {
        log::warn!("isolation graph over {m} targets materializes {pair_count} pairs (threshold {warn_threshold})");
    }
    let detection = detection_adjacency(g, &sensors, &targets, lambda);
    let adjacency = detection
        .par_iter()
        .map(|covered| {
            let mut is_covered = vec![false; m];
            for &t in covered {
                is_covered[t] = true;
            }
            let mut ys = Vec::with_capacity(covered.len() * (m - covered.len()));
            for &i in covered {
                for j in (0..m).filter(|&j| !is_covered[j]) {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    ys.push(pair_index(a, b, m));
                }
            }
            ys.sort_unstable();
            ys
        })
        .collect();
    let pairs = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i as u32, j as u32))).collect();
    Ok(CoverageGraph::assemble(g, Objective::Isolation, sensors, targets, pairs, adjacency))
}

pub fn build(
    g: &NetworkGraph,
    objective: Objective,
    sensors: &[NodeId],
    targets: &[Target],
    lambda: usize,
) -> Result<CoverageGraph> {
    match objective {
        Objective::Detection => build_detection(g, sensors, targets, lambda),
        Objective::Isolation => build_isolation(g, sensors, targets, lambda),
    }
}

/// Index of pair `(i, j)`, `i < j`, in the lexicographic list of pairs over `m` targets.
fn pair_index(i: usize, j: usize, m: usize) -> usize {
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

fn validate(g: &NetworkGraph, sensors: &[NodeId], targets: &[Target]) -> Result<(Vec<NodeId>, Vec<Target>)> {
    if sensors.is_empty() {
        return Err(Error::EmptyDevices);
    }
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let mut seen = vec![false; g.node_count()];
    for &s in sensors {
        g.check_node(s)?;
        if std::mem::replace(&mut seen[s.0], true) {
            return Err(Error::DuplicateDevice(g.name(s).to_string()));
        }
    }
    for &t in targets {
        g.check_target(t)?;
    }
    let mut targets = targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    Ok((sensors.to_vec(), targets))
}

fn detection_adjacency(g: &NetworkGraph, sensors: &[NodeId], targets: &[Target], lambda: usize) -> Vec<Vec<usize>> {
    sensors
        .par_iter()
        .map(|&x| {
            let dist = g.bfs_within(x, lambda);
            targets
                .iter()
                .enumerate()
                .filter(|&(_, &t)| g.target_distance(&dist, t).is_some_and(|d| d <= lambda))
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

fn reverse_adjacency(adjacency: &[Vec<usize>], y_count: usize) -> Vec<Vec<usize>> {
    let mut reverse = vec![Vec::new(); y_count];
    for (x, ys) in adjacency.iter().enumerate() {
        for &y in ys {
            reverse[y].push(x);
        }
    }
    reverse
}

impl CoverageGraph {
    fn assemble(
        g: &NetworkGraph,
        objective: Objective,
        devices: Vec<NodeId>,
        targets: Vec<Target>,
        pairs: Vec<(u32, u32)>,
        adjacency: Vec<Vec<usize>>,
    ) -> Self {
        let y_count = match objective {
            Objective::Detection => targets.len(),
            Objective::Isolation => pairs.len(),
        };
        let reverse = reverse_adjacency(&adjacency, y_count);
        Self {
            objective,
            device_names: devices.iter().map(|&d| g.name(d).to_string()).collect(),
            target_keys: targets.iter().map(|&t| g.target_key(t)).collect(),
            devices,
            targets,
            pairs,
            adjacency,
            reverse,
        }
    }

    /// Builds a graph directly from an adjacency list. Devices and targets get
    /// synthetic names (`x0`, `y0`, ...); used for abstract instances.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, y_count: usize) -> Result<Self> {
        if adjacency.is_empty() {
            return Err(Error::EmptyDevices);
        }
        if y_count == 0 {
            return Err(Error::EmptyTargets);
        }
        let mut adjacency = adjacency;
        for ys in &mut adjacency {
            ys.sort_unstable();
            ys.dedup();
            if ys.last().is_some_and(|&y| y >= y_count) {
                return Err(Error::InvalidParameter(format!("y index out of range 0..{y_count}")));
            }
        }
        let reverse = reverse_adjacency(&adjacency, y_count);
        Ok(Self {
            objective: Objective::Detection,
            devices: (0..adjacency.len()).map(NodeId).collect(),
            device_names: (0..adjacency.len()).map(|i| format!("x{i}")).collect(),
            targets: (0..y_count).map(|i| Target::Node(NodeId(i))).collect(),
            target_keys: (0..y_count).map(|i| format!("y{i}")).collect(),
            pairs: Vec::new(),
            adjacency,
            reverse,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn device_count(&self) -> usize {
        self.devices.len()
    }

    pub fn y_count(&self) -> usize {
        self.reverse.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn devices(&self) -> &[NodeId] {
        &self.devices
    }

    pub fn device_name(&self, x: usize) -> &str {
        &self.device_names[x]
    }

    pub fn device_index(&self, name: &str) -> Option<usize> {
        self.device_names.iter().position(|n| n == name)
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    /// Y-elements covered by device `x`, ascending.
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    /// Devices covering `y`, ascending.
    pub fn y_neighbors(&self, y: usize) -> &[usize] {
        &self.reverse[y]
    }

    pub fn y_element(&self, y: usize) -> YElement {
        match self.objective {
            Objective::Detection => YElement::Target(self.targets[y]),
            Objective::Isolation => {
                let (i, j) = self.pairs[y];
                YElement::Pair(
                    TargetPair::new(self.targets[i as usize], self.targets[j as usize])
                        .expect("pairs hold distinct targets"),
                )
            }
        }
    }

    /// Display key: target key, or `a|b` for a target pair.
    pub fn y_key(&self, y: usize) -> String {
        match self.objective {
            Objective::Detection => self.target_keys[y].clone(),
            Objective::Isolation => {
                let (i, j) = self.pairs[y];
                format!("{}|{}", self.target_keys[i as usize], self.target_keys[j as usize])
            }
        }
    }

    /// Number of Y-elements with at least one covering device.
    pub fn coverable_count(&self) -> usize {
        self.reverse.iter().filter(|xs| !xs.is_empty()).count()
    }

    /// The same graph restricted to the devices at indices `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyDevices);
        }
        let mut seen = vec![false; self.device_count()];
        for &x in keep {
            if x >= self.device_count() {
                return Err(Error::InvalidParameter(format!("device index {x} out of range")));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::DuplicateDevice(self.device_names[x].clone()));
            }
        }
        let adjacency: Vec<Vec<usize>> = keep.iter().map(|&x| self.adjacency[x].clone()).collect();
        Ok(Self {
            objective: self.objective,
            devices: keep.iter().map(|&x| self.devices[x]).collect(),
            device_names: keep.iter().map(|&x| self.device_names[x].clone()).collect(),
            targets: self.targets.clone(),
            target_keys: self.target_keys.clone(),
            pairs: self.pairs.clone(),
            reverse: reverse_adjacency(&adjacency, self.y_count()),
            adjacency,
        })
    }

    /// Canonical text form: one line `x_name: y_key,y_key,...` per device.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for x in 0..self.device_count() {
            let keys: Vec<String> = self.adjacency[x].iter().map(|&y| self.y_key(y)).collect();
            let _ = writeln!(out, "{}: {}", self.device_names[x], keys.join(","));
        }
        out
    }
}

//! Complete-coverage lifetime: disjoint dominating sets and `(k, sigma)`-configurations.
//!
//! With every node hosting a device, targets = nodes and range 1, a slot gives
//! complete coverage exactly when its active set dominates the graph. Disjoint
//! dominating sets, each active for `sigma` slots, give lifetime `sigma * gamma`.
//! A `(k, sigma)`-configuration relaxes disjointness: each node holds `sigma` of
//! `k` labels and every label appears in every closed neighborhood.

use rand::Rng as _;

use crate::coverage::build_detection;
use crate::error::{Error, Result};
use crate::game::{binomial, Blll, BlllParams, GameState};
use crate::graph::{NetworkGraph, NodeId};
use crate::rng;
use crate::schedule::{check_slots, LabelSet, Labeling, ProblemInstance};

/// Largest graph for which [`exact_domatic_partition`] runs.
pub const EXACT_DOMATIC_LIMIT: usize = 12;

/// Default cap on `C(k, sigma)^n` for the exhaustive configuration search.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u128 = 10_000_000;

fn closed_masks(g: &NetworkGraph) -> Vec<Vec<usize>> {
    g.nodes()
        .map(|v| {
            let mut n: Vec<usize> = g.neighbors(v).iter().map(|u| u.0).collect();
            n.push(v.0);
            n.sort_unstable();
            n
        })
        .collect()
}

pub fn is_dominating(g: &NetworkGraph, set: &[NodeId]) -> bool {
    let mut dominated = vec![false; g.node_count()];
    for &s in set {
        if s.0 >= g.node_count() {
            return false;
        }
        dominated[s.0] = true;
        for u in g.neighbors(s) {
            dominated[u.0] = true;
        }
    }
    dominated.iter().all(|&d| d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomaticPartition {
    sets: Vec<Vec<NodeId>>,
}

impl DomaticPartition {
    /// Checks that the sets are disjoint dominating sets of `g`. Sets are sorted.
    pub fn new(g: &NetworkGraph, mut sets: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut owner = vec![false; g.node_count()];
        for set in &mut sets {
            set.sort_unstable();
            for &v in set.iter() {
                g.check_node(v)?;
                if std::mem::replace(&mut owner[v.0], true) {
                    return Err(Error::InvalidParameter(format!("node `{}` is in two sets", g.name(v))));
                }
            }
            if !is_dominating(g, set) {
                return Err(Error::InvalidParameter("a partition set does not dominate the graph".into()));
            }
        }
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Lifetime reachable by running each set for `sigma` slots.
    pub fn lifetime(&self, sigma: usize) -> usize {
        sigma * self.sets.len()
    }
}

/// Repeatedly extracts a dominating set from the unused nodes, preferring nodes that
/// dominate many still-undominated nodes, and drops redundant members. Stops when
/// the unused nodes no longer dominate; those are merged into the last set.
/// Ties go to the lowest node id, or are drawn at random when a seed is given.
pub fn greedy_domatic_partition(g: &NetworkGraph, seed: Option<u64>) -> DomaticPartition {
    let n = g.node_count();
    let closed = closed_masks(g);
    let mut rng = seed.map(|s| rng::stream(s, "domatic", 0));
    let mut used = vec![false; n];
    let mut sets: Vec<Vec<NodeId>> = Vec::new();

    'extract: loop {
        let mut dominated = vec![false; n];
        let mut left = n;
        let mut set: Vec<usize> = Vec::new();
        while left > 0 {
            let mut best = 0;
            let mut ties = Vec::new();
            for v in (0..n).filter(|&v| !used[v] && !set.contains(&v)) {
                let gain = closed[v].iter().filter(|&&u| !dominated[u]).count();
                if gain > best {
                    best = gain;
                    ties.clear();
                }
                if gain == best && gain > 0 {
                    ties.push(v);
                }
            }
            if ties.is_empty() {
                break 'extract;
            }
            let v = match rng.as_mut() {
                Some(r) => ties[r.gen_range(0..ties.len())],
                None => ties[0],
            };
            for &u in &closed[v] {
                if !dominated[u] {
                    dominated[u] = true;
                    left -= 1;
                }
            }
            set.push(v);
        }
        // Drop members whose removal keeps the set dominating, latest picks first.
        let mut cover = vec![0u32; n];
        for &v in &set {
            for &u in &closed[v] {
                cover[u] += 1;
            }
        }
        for i in (0..set.len()).rev() {
            let v = set[i];
            if closed[v].iter().all(|&u| cover[u] > 1) {
                for &u in &closed[v] {
                    cover[u] -= 1;
                }
                set.remove(i);
            }
        }
        for &v in &set {
            used[v] = true;
        }
        sets.push(set.into_iter().map(NodeId).collect());
        if used.iter().all(|&u| u) {
            break;
        }
    }
    if let Some(last) = sets.last_mut() {
        last.extend((0..n).filter(|&v| !used[v]).map(NodeId));
    }
    DomaticPartition::new(g, sets).expect("greedy extraction yields disjoint dominating sets")
}

/// Maximum number of disjoint dominating sets, by backtracking over node colorings.
pub fn exact_domatic_partition(g: &NetworkGraph) -> Result<DomaticPartition> {
    let n = g.node_count();
    if n > EXACT_DOMATIC_LIMIT {
        return Err(Error::SearchSpaceTooLarge { size: n as u128, limit: EXACT_DOMATIC_LIMIT as u128 });
    }
    if n == 0 {
        return Ok(DomaticPartition { sets: Vec::new() });
    }
    let closed = closed_masks(g);
    let min_closed = closed.iter().map(Vec::len).min().unwrap_or(0);
    // Nodes whose closed neighborhood is fully colored once node `i` is colored.
    let mut completes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, c) in closed.iter().enumerate() {
        completes[*c.last().expect("closed neighborhood contains the node")].push(v);
    }
    let closed_bits: Vec<u16> = closed.iter().map(|c| c.iter().fold(0u16, |m, &u| m | 1 << u)).collect();

    for d in (1..=min_closed).rev() {
        let mut color = vec![0usize; n];
        let mut class = vec![0u16; d];
        if color_search(0, 0, d, &closed_bits, &completes, &mut color, &mut class) {
            let sets = (0..d).map(|c| (0..n).filter(|&v| color[v] == c).map(NodeId).collect()).collect();
            return DomaticPartition::new(g, sets);
        }
    }
    unreachable!("a single class always dominates")
}

fn color_search(
    i: usize,
    used: usize,
    d: usize,
    closed: &[u16],
    completes: &[Vec<usize>],
    color: &mut [usize],
    class: &mut [u16],
) -> bool {
    if i == color.len() {
        return true;
    }
    // Classes are interchangeable: node `i` may open at most one new class.
    for c in 0..d.min(used + 1) {
        color[i] = c;
        class[c] |= 1 << i;
        let ok = completes[i].iter().all(|&v| class.iter().all(|&m| m & closed[v] != 0));
        if ok && color_search(i + 1, used.max(c + 1), d, closed, completes, color, class) {
            return true;
        }
        class[c] &= !(1 << i);
    }
    false
}

/// Per-node label sets; labels are 0-based internally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSigmaConfig {
    pub k: usize,
    pub sigma: usize,
    pub labels: Vec<LabelSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfigViolation {
    pub node: NodeId,
    /// 0-based label missing from the node's closed neighborhood.
    pub label: usize,
}

impl KSigmaConfig {
    pub fn to_labeling(&self) -> Labeling {
        Labeling::from_sets(self.labels.clone())
    }
}

/// Lists every `(node, label)` pair whose closed neighborhood lacks the label.
pub fn verify_config(g: &NetworkGraph, cfg: &KSigmaConfig) -> Result<Vec<ConfigViolation>> {
    check_slots(cfg.k, cfg.sigma)?;
    if cfg.labels.len() != g.node_count() {
        return Err(Error::MalformedLabeling(format!("{} label sets for {} nodes", cfg.labels.len(), g.node_count())));
    }
    let allowed = LabelSet::full(cfg.k).bits();
    for (v, set) in cfg.labels.iter().enumerate() {
        if set.len() != cfg.sigma || set.bits() & !allowed != 0 {
            return Err(Error::MalformedLabeling(format!(
                "node `{}` must hold exactly {} labels from 1..={}",
                g.name(NodeId(v)),
                cfg.sigma,
                cfg.k
            )));
        }
    }
    let mut violations = Vec::new();
    for v in g.nodes() {
        let seen = g.neighbors(v).iter().fold(cfg.labels[v.0], |acc, u| acc.union(cfg.labels[u.0]));
        violations
            .extend(LabelSet::from_bits(allowed & !seen.bits()).iter().map(|label| ConfigViolation { node: v, label }));
    }
    Ok(violations)
}

/// Gives the nodes of set `i` the labels `i*sigma .. (i+1)*sigma`. Nodes outside the
/// partition take the labels of the last set.
pub fn config_from_domatic(g: &NetworkGraph, dp: &DomaticPartition, sigma: usize) -> Result<KSigmaConfig> {
    let dp = DomaticPartition::new(g, dp.sets.clone())?;
    if dp.is_empty() {
        return Err(Error::InvalidParameter("empty partition".into()));
    }
    let k = sigma * dp.len();
    check_slots(k, sigma)?;
    let block = |i: usize| LabelSet::from_bits(LabelSet::full(sigma).bits() << (i * sigma));
    let mut labels = vec![block(dp.len() - 1); g.node_count()];
    for (i, set) in dp.sets.iter().enumerate() {
        for v in set {
            labels[v.0] = block(i);
        }
    }
    Ok(KSigmaConfig { k, sigma, labels })
}

/// Shrinks a valid configuration to `k` labels: each label `>= k` is replaced by the
/// smallest label the node lacks. Labels below `k` are untouched, so coverage of
/// them is preserved.
pub fn reduce_config(cfg: &KSigmaConfig, k: usize) -> Result<KSigmaConfig> {
    check_slots(k, cfg.sigma)?;
    if k > cfg.k {
        return Err(Error::InvalidParameter(format!("cannot grow a configuration from {} to {k} labels", cfg.k)));
    }
    let keep = LabelSet::full(k).bits();
    let labels = cfg
        .labels
        .iter()
        .map(|set| {
            let mut next = LabelSet::from_bits(set.bits() & keep);
            let mut fill = (0..k).filter(|&j| !set.contains(j));
            while next.len() < set.len() {
                next.insert(fill.next().expect("sigma <= k"));
            }
            next
        })
        .collect();
    Ok(KSigmaConfig { k, sigma: cfg.sigma, labels })
}

/// The detection instance whose complete coverage is a configuration: every node
/// is a device and a target, range 1.
pub fn closed_neighborhood_instance(g: &NetworkGraph, k: usize, sigma: usize) -> Result<ProblemInstance> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    ProblemInstance::new(build_detection(g, &nodes, &g.all_node_targets(), 1)?, k, sigma)
}

#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// BLLL iterations for the stochastic stage.
    pub iterations: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Exhaustive search runs when `C(k, sigma)^n` is at most this.
    pub exhaustive_limit: u128,
    /// Try the domatic-partition construction first.
    pub fast_path: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            iterations: 200_000,
            seed: 0,
            epsilon: 0.01,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            fast_path: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigMethod {
    Domatic,
    Exhaustive,
    Stochastic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigSearch {
    Found {
        config: KSigmaConfig,
        method: ConfigMethod,
    },
    /// Proven impossible, by the degree bound or by exhaustive search.
    Nonexistent,
    /// Not found by the stochastic search; says nothing about existence.
    BudgetExhausted {
        best_satisfied: u64,
        required: u64,
    },
}

/// Looks for a `(k, sigma)`-configuration of `g`.
pub fn search_config(g: &NetworkGraph, k: usize, sigma: usize, budget: &SearchBudget) -> Result<ConfigSearch> {
    check_slots(k, sigma)?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidParameter("graph has no nodes".into()));
    }
    if budget.fast_path {
        let plain = greedy_domatic_partition(g, None);
        let seeded = greedy_domatic_partition(g, Some(budget.seed));
        let dp = if seeded.len() > plain.len() { seeded } else { plain };
        if k <= sigma * dp.len() && sigma * dp.len() <= crate::schedule::MAX_SLOTS {
            let config = reduce_config(&config_from_domatic(g, &dp, sigma)?, k)?;
            return Ok(ConfigSearch::Found { config, method: ConfigMethod::Domatic });
        }
    }
    // A node sees at most sigma * |N[v]| labels.
    let min_closed = g.nodes().map(|v| g.degree(v) + 1).min().unwrap_or(0);
    if k > sigma * min_closed {
        return Ok(ConfigSearch::Nonexistent);
    }
    let space = binomial(k, sigma).checked_pow(n as u32).unwrap_or(u128::MAX);
    if space <= budget.exhaustive_limit {
        return Ok(match exhaustive_config(g, k, sigma) {
            Some(config) => ConfigSearch::Found { config, method: ConfigMethod::Exhaustive },
            None => ConfigSearch::Nonexistent,
        });
    }
    stochastic_config(g, k, sigma, budget)
}

/// Backtracking over all label assignments with neighborhood pruning.
pub fn exhaustive_config(g: &NetworkGraph, k: usize, sigma: usize) -> Option<KSigmaConfig> {
    let n = g.node_count();
    let closed = closed_masks(g);
    let mut completes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, c) in closed.iter().enumerate() {
        completes[*c.last().expect("closed neighborhood contains the node")].push(v);
    }
    let actions = subsets(k, sigma);
    let full = LabelSet::full(k).bits();
    let mut labels = vec![LabelSet::EMPTY; n];

    fn go(
        i: usize,
        actions: &[LabelSet],
        closed: &[Vec<usize>],
        completes: &[Vec<usize>],
        full: u64,
        labels: &mut [LabelSet],
    ) -> bool {
        if i == labels.len() {
            return true;
        }
        // Label permutations are symmetries: node 0 takes the first subset.
        let choices = if i == 0 { &actions[..1] } else { actions };
        for &a in choices {
            labels[i] = a;
            let ok = completes[i].iter().all(|&v| closed[v].iter().fold(0, |m, &u| m | labels[u].bits()) == full);
            if ok && go(i + 1, actions, closed, completes, full, labels) {
                return true;
            }
        }
        false
    }

    go(0, &actions, &closed, &completes, full, &mut labels).then_some(KSigmaConfig { k, sigma, labels })
}

/// All `sigma`-subsets of `0..k` in lexicographic order.
pub(crate) fn subsets(k: usize, sigma: usize) -> Vec<LabelSet> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..sigma).collect();
    loop {
        out.push(idx.iter().copied().collect());
        let Some(pos) = (0..sigma).rev().find(|&p| idx[p] != p + k - sigma) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..sigma {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// BLLL on the closed-neighborhood instance, stopping at complete coverage.
pub fn stochastic_config(g: &NetworkGraph, k: usize, sigma: usize, budget: &SearchBudget) -> Result<ConfigSearch> {
    let inst = closed_neighborhood_instance(g, k, sigma)?;
    let required = inst.capacity();
    let mut r = rng::stream(budget.seed, "config-search", 0);
    let state = GameState::random_schedule(inst.coverage(), k, sigma, &mut r)?;
    let params = BlllParams {
        epsilon: budget.epsilon,
        iterations: budget.iterations,
        seed: budget.seed,
        trace_stride: budget.iterations.max(1),
        ..BlllParams::default()
    };
    let mut chain = Blll::new(state, params, r)?;
    while chain.best_phi() < required && chain.iteration() < budget.iterations {
        chain.step();
    }
    if chain.best_phi() < required {
        return Ok(ConfigSearch::BudgetExhausted { best_satisfied: chain.best_phi(), required });
    }
    let config = KSigmaConfig { k, sigma, labels: chain.best_actions().iter().map(|a| a.labels).collect() };
    debug_assert!(verify_config(g, &config).map(|v| v.is_empty()).unwrap_or(false));
    Ok(ConfigSearch::Found { config, method: ConfigMethod::Stochastic })
}

/// Petersen graph: outer 5-cycle 0..4, inner pentagram 5..9, spokes `i -- i+5`.
pub fn petersen() -> NetworkGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
        edges.push((i, i + 5));
    }
    NetworkGraph::from_edges(10, &edges).expect("static edge list")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::slot_coverage;

    fn path4() -> NetworkGraph {
        NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    fn complete(n: usize) -> NetworkGraph {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        NetworkGraph::from_edges(n, &edges).unwrap()
    }

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn domination_on_path() {
        let g = path4();
        assert!(is_dominating(&g, &ids(&[1, 2])));
        assert!(is_dominating(&g, &ids(&[0, 3])));
        assert!(!is_dominating(&g, &ids(&[0])));
        assert!(!is_dominating(&g, &[]));
        assert!(is_dominating(&g, &ids(&[0, 1, 2, 3])));
    }

    #[test]
    fn greedy_partitions() {
        assert_eq!(greedy_domatic_partition(&complete(4), None).len(), 4);
        assert_eq!(greedy_domatic_partition(&path4(), None).len(), 2);
        let star = NetworkGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let dp = greedy_domatic_partition(&star, None);
        assert!(!dp.is_empty());
        assert_eq!(dp.sets()[0], ids(&[0]));
    }

    #[test]
    fn leftovers_join_last_set() {
        // Triangle with a pendant: {0,1,2,3}, 3 hangs off 2.
        let g = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let dp = greedy_domatic_partition(&g, None);
        let total: usize = dp.sets().iter().map(Vec::len).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn exact_domatic_numbers() {
        assert_eq!(exact_domatic_partition(&path4()).unwrap().len(), 2);
        assert_eq!(exact_domatic_partition(&complete(5)).unwrap().len(), 5);
        let c6 = NetworkGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        assert_eq!(exact_domatic_partition(&c6).unwrap().len(), 3);
        let c4 = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(exact_domatic_partition(&c4).unwrap().len(), 2);
        assert_eq!(exact_domatic_partition(&petersen()).unwrap().len(), 2);
    }

    #[test]
    fn configs_from_partitions() {
        let g = path4();
        let dp = DomaticPartition::new(&g, vec![ids(&[1, 3]), ids(&[0, 2])]).unwrap();
        let cfg = config_from_domatic(&g, &dp, 2).unwrap();
        assert_eq!(cfg.k, 4);
        assert!(verify_config(&g, &cfg).unwrap().is_empty());

        let one = config_from_domatic(&g, &dp, 1).unwrap();
        assert_eq!(one.labels[1], LabelSet::from_bits(1));
        assert_eq!(one.labels[0], LabelSet::from_bits(2));

        let k4 = complete(4);
        let cfg = config_from_domatic(&k4, &greedy_domatic_partition(&k4, None), 2).unwrap();
        assert_eq!(cfg.k, 8);
        assert!(verify_config(&k4, &cfg).unwrap().is_empty());
    }

    #[test]
    fn violations_and_malformed() {
        let g = path4();
        let dp = greedy_domatic_partition(&g, None);
        let mut cfg = config_from_domatic(&g, &dp, 1).unwrap();
        let full = KSigmaConfig { k: 3, sigma: 3, labels: vec![LabelSet::full(3); 4] };
        assert!(verify_config(&g, &full).unwrap().is_empty());
        // Swap node 0 onto the label of its only neighbor's class.
        cfg.labels[0] = cfg.labels[1];
        let v = verify_config(&g, &cfg).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().any(|x| x.node == NodeId(0)));
        cfg.labels[0] = LabelSet::EMPTY;
        assert!(verify_config(&g, &cfg).is_err());
    }

    #[test]
    fn reduction_preserves_validity() {
        let g = complete(4);
        let cfg = config_from_domatic(&g, &greedy_domatic_partition(&g, None), 2).unwrap();
        for k in 2..=8 {
            let small = reduce_config(&cfg, k).unwrap();
            assert!(verify_config(&g, &small).unwrap().is_empty(), "k = {k}");
        }
    }

    #[test]
    fn search_outcomes() {
        let g = path4();
        let budget = SearchBudget::default();
        assert!(matches!(
            search_config(&g, 4, 2, &budget).unwrap(),
            ConfigSearch::Found { method: ConfigMethod::Domatic, .. }
        ));
        assert_eq!(search_config(&g, 9, 2, &budget).unwrap(), ConfigSearch::Nonexistent);
        let c4 = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(search_config(&c4, 3, 1, &budget).unwrap(), ConfigSearch::Nonexistent);
        let c3 = complete(3);
        let found = search_config(&c3, 3, 1, &SearchBudget { fast_path: false, ..budget.clone() }).unwrap();
        assert!(matches!(found, ConfigSearch::Found { method: ConfigMethod::Exhaustive, .. }));
    }

    #[test]
    fn petersen_five_two() {
        let g = petersen();
        let budget = SearchBudget { fast_path: false, seed: 7, ..SearchBudget::default() };
        let ConfigSearch::Found { config, method } = search_config(&g, 5, 2, &budget).unwrap() else {
            panic!("no (5,2)-configuration found");
        };
        assert_eq!(method, ConfigMethod::Stochastic);
        assert!(verify_config(&g, &config).unwrap().is_empty());
        let inst = closed_neighborhood_instance(&g, 5, 2).unwrap();
        assert!(slot_coverage(inst.coverage(), &config.to_labeling(), 5).iter().all(|&c| c == 10));
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets(4, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], LabelSet::from_bits(0b0011));
        assert_eq!(s[5], LabelSet::from_bits(0b1100));
        assert_eq!(subsets(3, 3).len(), 1);
    }
}

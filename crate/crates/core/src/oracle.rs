//! Exhaustive solvers for tiny inputs, used as ground truth.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::coverage::build_detection;
use crate::domination::subsets;
use crate::error::{Error, Result};
use crate::game::binomial;
use crate::graph::{NetworkGraph, NodeId};
use crate::schedule::{LabelSet, Labeling, ProblemInstance};

pub const DEFAULT_ORACLE_LIMIT: u128 = 10_000_000;
/// At most this many optimal labelings are kept.
pub const OPTIMA_CAP: usize = 64;
pub const MAX_CUT_LIMIT: usize = 24;
pub const REDUCTION_LIMIT: usize = 14;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best_potential: u64,
    pub best_score: Ratio<u64>,
    /// Optimal labelings in enumeration order, at most [`OPTIMA_CAP`].
    pub optima: Vec<Labeling>,
    /// Number of optimal labelings, including those not kept.
    pub optimum_count: u64,
    pub space: u128,
}

/// Size of the exactly-`sigma` labeling space.
pub fn search_space(inst: &ProblemInstance) -> u128 {
    let per = binomial(inst.k(), inst.sigma());
    let mut total: u128 = 1;
    for _ in 0..inst.coverage().device_count() {
        total = total.saturating_mul(per);
    }
    total
}

struct Branch {
    best: u64,
    count: u64,
    optima: Vec<Vec<LabelSet>>,
}

struct Walk<'a> {
    inst: &'a ProblemInstance,
    actions: &'a [LabelSet],
    counts: Vec<u32>,
    chosen: Vec<LabelSet>,
    out: Branch,
}

impl Walk<'_> {
    fn push(&mut self, x: usize, a: LabelSet) -> u64 {
        let k = self.inst.k();
        let mut gain = 0;
        for &y in self.inst.coverage().neighbors(x) {
            for j in a.iter() {
                let c = &mut self.counts[y * k + j];
                gain += u64::from(*c == 0);
                *c += 1;
            }
        }
        self.chosen.push(a);
        gain
    }

    fn pop(&mut self, x: usize) {
        let k = self.inst.k();
        let a = self.chosen.pop().expect("pop follows push");
        for &y in self.inst.coverage().neighbors(x) {
            for j in a.iter() {
                self.counts[y * k + j] -= 1;
            }
        }
    }

    fn descend(&mut self, x: usize, phi: u64) {
        if x == self.inst.coverage().device_count() {
            let out = &mut self.out;
            if phi > out.best {
                out.best = phi;
                out.count = 0;
                out.optima.clear();
            }
            if phi == out.best {
                out.count += 1;
                if out.optima.len() < OPTIMA_CAP {
                    out.optima.push(self.chosen.clone());
                }
            }
            return;
        }
        for i in 0..self.actions.len() {
            let gain = self.push(x, self.actions[i]);
            self.descend(x + 1, phi + gain);
            self.pop(x);
        }
    }
}

/// Enumerates every exactly-`sigma` labeling in lexicographic order of
/// `(device, subset rank)`. Refuses when the space exceeds `limit`.
pub fn exact_optimal_schedule(inst: &ProblemInstance, limit: u128) -> Result<OracleResult> {
    let space = search_space(inst);
    if space > limit {
        return Err(Error::SearchSpaceTooLarge { size: space, limit });
    }
    let actions = subsets(inst.k(), inst.sigma());
    let counts = vec![0u32; inst.coverage().y_count() * inst.k()];
    let branches: Vec<Branch> = actions
        .par_iter()
        .map(|&first| {
            let mut walk = Walk {
                inst,
                actions: &actions,
                counts: counts.clone(),
                chosen: Vec::with_capacity(inst.coverage().device_count()),
                out: Branch { best: 0, count: 0, optima: Vec::new() },
            };
            let gain = walk.push(0, first);
            walk.descend(1, gain);
            walk.out
        })
        .collect();

    let best = branches.iter().map(|b| b.best).max().unwrap_or(0);
    let mut optima = Vec::new();
    let mut optimum_count = 0;
    for b in branches.into_iter().filter(|b| b.best == best) {
        optimum_count += b.count;
        for sets in b.optima {
            if optima.len() < OPTIMA_CAP {
                optima.push(Labeling::from_sets(sets));
            }
        }
    }
    Ok(OracleResult {
        best_potential: best,
        best_score: Ratio::new(best, inst.capacity()),
        optima,
        optimum_count,
        space,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxCut {
    pub cut: usize,
    /// `side[v]` is true for nodes in the second part. Node 0 is always in the first.
    pub side: Vec<bool>,
}

fn cut_size(g: &NetworkGraph, mask: u64) -> usize {
    g.edges().filter(|&(_, a, b)| (mask >> a.0 ^ mask >> b.0) & 1 == 1).count()
}

/// Maximum cut by enumerating the `2^(n-1)` bipartitions. Among maximum cuts the one
/// with the smallest mask is returned.
pub fn max_cut_brute(g: &NetworkGraph) -> Result<MaxCut> {
    let n = g.node_count();
    if n > MAX_CUT_LIMIT {
        return Err(Error::SearchSpaceTooLarge { size: 1u128 << (n - 1), limit: 1u128 << (MAX_CUT_LIMIT - 1) });
    }
    if n == 0 {
        return Ok(MaxCut { cut: 0, side: Vec::new() });
    }
    let (cut, mask) = (0..1u64 << (n - 1))
        .into_par_iter()
        .map(|m| {
            let mask = m << 1;
            (cut_size(g, mask), std::cmp::Reverse(mask))
        })
        .max()
        .map(|(c, std::cmp::Reverse(m))| (c, m))
        .expect("at least one bipartition");
    Ok(MaxCut { cut, side: (0..n).map(|v| mask >> v & 1 == 1).collect() })
}

/// Outcome of checking the max-cut correspondence on one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub nodes: usize,
    pub edges: usize,
    pub triangle_free: bool,
    pub max_cut: usize,
    /// Oracle optimum of the reduced instance.
    pub optimum: Ratio<u64>,
    /// `1/2 + max_cut / (2|E|)`.
    pub predicted: Ratio<u64>,
    pub labelings_checked: u64,
    /// Labelings whose score differs from `1/2 + cut / (2|E|)` for their cut.
    pub labeling_mismatches: u64,
    /// Labelings scoring below the formula (never expected).
    pub labelings_below: u64,
}

impl ReductionReport {
    /// Exact equality on triangle-free graphs; otherwise the formula is a lower bound.
    pub fn holds(&self) -> bool {
        if self.triangle_free {
            self.optimum == self.predicted && self.labeling_mismatches == 0
        } else {
            self.optimum >= self.predicted && self.labelings_below == 0
        }
    }
}

/// The two-slot instance of a graph: every node a device, every edge a target,
/// range 1, one slot per device.
pub fn reduction_instance(g: &NetworkGraph) -> Result<ProblemInstance> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    ProblemInstance::new(build_detection(g, &nodes, &g.all_edge_targets(), 1)?, 2, 1)
}

/// Relates the two-slot instance to the maximum cut. A labeling splits the nodes
/// into the two slots; each edge is covered in one slot, or in both when cut, so
/// the score is `1/2 + cut / (2|E|)` provided no node reaches the far edge of a
/// triangle. Every labeling is checked, and the oracle optimum is compared with
/// the maximum cut.
pub fn reduction_check(g: &NetworkGraph) -> Result<ReductionReport> {
    let n = g.node_count();
    if n > REDUCTION_LIMIT {
        return Err(Error::SearchSpaceTooLarge { size: 1u128 << n, limit: 1u128 << REDUCTION_LIMIT });
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyTargets);
    }
    let inst = reduction_instance(g)?;
    let cov = inst.coverage();
    let m = g.edge_count() as u64;
    let max_cut = max_cut_brute(g)?;
    let optimum = exact_optimal_schedule(&inst, u128::MAX)?.best_score;

    let (mut mismatches, mut below) = (0, 0);
    for mask in 0..1u64 << n {
        // Bit v set: node v is active in the second slot.
        let mut total = 0u64;
        for y in 0..cov.y_count() {
            let mut seen = 0u8;
            for &x in cov.y_neighbors(y) {
                seen |= 1 << (mask >> x & 1);
            }
            total += u64::from(seen.count_ones());
        }
        let formula = m + cut_size(g, mask) as u64;
        mismatches += u64::from(total != formula);
        below += u64::from(total < formula);
    }
    Ok(ReductionReport {
        nodes: n,
        edges: g.edge_count(),
        triangle_free: !g.has_triangle(),
        max_cut: max_cut.cut,
        optimum,
        predicted: Ratio::new(m + max_cut.cut as u64, 2 * m),
        labelings_checked: 1 << n,
        labeling_mismatches: mismatches,
        labelings_below: below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageGraph;
    use crate::graph::GraphBuilder;

    fn path_instance(k: usize, sigma: usize) -> ProblemInstance {
        let mut b = GraphBuilder::new();
        b.edge("1", "2").unwrap();
        b.edge("2", "3").unwrap();
        b.edge("3", "4").unwrap();
        let g = b.build();
        let s = [g.node_id("2").unwrap(), g.node_id("3").unwrap()];
        ProblemInstance::new(build_detection(&g, &s, &g.all_edge_targets(), 1).unwrap(), k, sigma).unwrap()
    }

    #[test]
    fn path_fixture_optima() {
        let out = exact_optimal_schedule(&path_instance(2, 1), DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(out.best_score, Ratio::new(2, 3));
        assert_eq!(out.optimum_count, 2);
        assert_eq!(out.optima[0], Labeling::from_slots(&[&[0], &[1]]));
        assert_eq!(out.optima[1], Labeling::from_slots(&[&[1], &[0]]));
        assert_eq!(out.space, 4);
    }

    #[test]
    fn full_battery_gives_coverable_fraction() {
        let cov = CoverageGraph::from_adjacency(vec![vec![0, 2], vec![2]], 4).unwrap();
        let inst = ProblemInstance::new(cov, 3, 3).unwrap();
        let out = exact_optimal_schedule(&inst, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(out.best_score, Ratio::new(2, 4));
    }

    #[test]
    fn refuses_large_spaces() {
        let inst = path_instance(10, 5);
        let err = exact_optimal_schedule(&inst, 1000).unwrap_err();
        assert!(matches!(err, Error::SearchSpaceTooLarge { size: 63504, limit: 1000 }));
        assert!(err.is_refusal());
    }

    #[test]
    fn max_cut_values() {
        let c4 = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(max_cut_brute(&c4).unwrap().cut, 4);
        let tri = NetworkGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(max_cut_brute(&tri).unwrap().cut, 2);
        let k4 = NetworkGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let mc = max_cut_brute(&k4).unwrap();
        assert_eq!(mc.cut, 4);
        assert!(!mc.side[0]);
    }

    #[test]
    fn reduction_on_small_graphs() {
        let c4 = NetworkGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let r = reduction_check(&c4).unwrap();
        assert!(r.triangle_free && r.holds());
        assert_eq!(r.optimum, Ratio::from_integer(1));

        let edge = NetworkGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(reduction_check(&edge).unwrap().optimum, Ratio::from_integer(1));

        // Each node of a triangle reaches all three edges, so the optimum is 1
        // rather than the cut-based 5/6.
        let tri = NetworkGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = reduction_check(&tri).unwrap();
        assert!(!r.triangle_free);
        assert_eq!(r.predicted, Ratio::new(5, 6));
        assert_eq!(r.optimum, Ratio::from_integer(1));
        assert!(r.labeling_mismatches > 0);
        assert!(r.holds());
    }
}

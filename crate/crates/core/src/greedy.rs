//! Greedy labeling: repeatedly give one label to one device, choosing the pair with
//! the largest increase of `sum_y |F(y)|`, until every device holds `sigma` labels.

use rand::Rng as _;

use crate::rng;
use crate::schedule::{LabelSet, Labeling, ProblemInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyStep {
    pub iteration: usize,
    pub device: usize,
    /// 0-based slot.
    pub slot: usize,
    pub gain: u64,
    /// `sum_y |F(y)|` after the pick.
    pub objective: u64,
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub labeling: Labeling,
    pub trace: Vec<GreedyStep>,
}

impl GreedyOutcome {
    pub fn objective(&self) -> u64 {
        self.trace.last().map_or(0, |s| s.objective)
    }
}

/// Runs the greedy heuristic. Ties are broken by lowest `(device, slot)` unless a
/// seed is given, in which case a uniformly random tied pair is taken.
pub fn greedy_schedule(inst: &ProblemInstance, tie_seed: Option<u64>) -> GreedyOutcome {
    let cov = inst.coverage();
    let (k, sigma) = (inst.k(), inst.sigma());
    let all = LabelSet::full(k).bits();
    let mut rng = tie_seed.map(|s| rng::stream(s, "greedy", 0));

    let mut labeling = Labeling::empty(cov.device_count());
    let mut available = vec![LabelSet::EMPTY; cov.y_count()];
    let mut open: Vec<usize> = (0..cov.device_count()).collect();
    let mut objective = 0u64;
    let mut trace = Vec::with_capacity(cov.device_count() * sigma);
    let mut gains = vec![0u64; k];
    let mut ties: Vec<(usize, usize)> = Vec::new();

    while !open.is_empty() {
        let mut best = 0u64;
        ties.clear();
        for &x in &open {
            let own = labeling.get(x).bits();
            gains.iter_mut().for_each(|g| *g = 0);
            for &y in cov.neighbors(x) {
                let missing = LabelSet::from_bits(all & !available[y].bits() & !own);
                for slot in missing.iter() {
                    gains[slot] += 1;
                }
            }
            for slot in LabelSet::from_bits(all & !own).iter() {
                let gain = gains[slot];
                if gain > best || ties.is_empty() {
                    if gain > best {
                        ties.clear();
                    }
                    best = gain;
                    ties.push((x, slot));
                } else if gain == best {
                    ties.push((x, slot));
                }
            }
        }
        // `open` is ascending and slots are scanned ascending, so ties[0] is the
        // lexicographically smallest pair.
        let (x, slot) = match rng.as_mut() {
            Some(rng) => ties[rng.gen_range(0..ties.len())],
            None => ties[0],
        };
        labeling.add(x, slot);
        for &y in cov.neighbors(x) {
            available[y].insert(slot);
        }
        objective += best;
        trace.push(GreedyStep { iteration: trace.len() + 1, device: x, slot, gain: best, objective });
        if labeling.get(x).len() == sigma {
            open.retain(|&d| d != x);
        }
    }
    GreedyOutcome { labeling, trace }
}

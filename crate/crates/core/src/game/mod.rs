//! The labeling problem as a potential game.
//!
//! Players are devices. A player's action is a `sigma`-subset of the `k` slots and, in
//! placement mode, also a location among the candidate sites (the devices of the
//! coverage graph). The potential is
//!
//! ```text
//! phi(a) = sum_j |union_{x in S_j} N(x)|
//! ```
//!
//! and the utility of player `x` counts the `(y, j)` pairs with `y` in `N(x)`, `j` in
//! `a_x`, for which `x` is the only provider of label `j` to `y`. A unilateral change
//! of action changes the utility and the potential by the same amount.

mod blll;
mod placement;

pub use blll::{blll_place_and_schedule, blll_schedule, AcceptanceRule, Blll, BlllOutcome, BlllParams, TracePoint};
pub use placement::{greedy_coverage_placement, two_stage_place_and_schedule, TwoStageOutcome};

use rand::seq::index;
use rand::Rng as _;

use crate::coverage::CoverageGraph;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::schedule::{check_slots, LabelSet, Labeling};

/// A player's joint choice: the coverage-graph device it occupies and its slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub site: usize,
    pub labels: LabelSet,
}

#[derive(Clone, Debug)]
pub struct GameState<'a> {
    cov: &'a CoverageGraph,
    k: usize,
    sigma: usize,
    placement: bool,
    actions: Vec<Action>,
    /// `counts[y * k + j]`: players covering `y` that hold label `j`.
    counts: Vec<u32>,
    phi: u64,
}

/// Uniform `sigma`-subset of `0..k`.
pub fn random_label_set(rng: &mut Rng, k: usize, sigma: usize) -> LabelSet {
    index::sample(rng, k, sigma).into_iter().collect()
}

impl<'a> GameState<'a> {
    /// Scheduling mode: player `x` sits on device `x` of the coverage graph.
    pub fn schedule(cov: &'a CoverageGraph, k: usize, sigma: usize, labels: Vec<LabelSet>) -> Result<Self> {
        if labels.len() != cov.device_count() {
            return Err(Error::MalformedLabeling(format!(
                "{} actions for {} players",
                labels.len(),
                cov.device_count()
            )));
        }
        let actions = labels.into_iter().enumerate().map(|(site, labels)| Action { site, labels }).collect();
        Self::assemble(cov, k, sigma, false, actions)
    }

    /// Placement mode: players choose distinct sites among the coverage graph's devices.
    pub fn placement(cov: &'a CoverageGraph, k: usize, sigma: usize, actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyDevices);
        }
        if actions.len() > cov.device_count() {
            return Err(Error::InvalidParameter(format!(
                "{} devices but only {} candidate sites",
                actions.len(),
                cov.device_count()
            )));
        }
        let mut used = vec![false; cov.device_count()];
        for a in &actions {
            if a.site >= cov.device_count() {
                return Err(Error::InvalidParameter(format!("site {} out of range", a.site)));
            }
            if std::mem::replace(&mut used[a.site], true) {
                return Err(Error::DuplicateDevice(cov.device_name(a.site).to_string()));
            }
        }
        Self::assemble(cov, k, sigma, true, actions)
    }

    pub fn random_schedule(cov: &'a CoverageGraph, k: usize, sigma: usize, rng: &mut Rng) -> Result<Self> {
        check_slots(k, sigma)?;
        let labels = (0..cov.device_count()).map(|_| random_label_set(rng, k, sigma)).collect();
        Self::schedule(cov, k, sigma, labels)
    }

    pub fn random_placement(
        cov: &'a CoverageGraph,
        k: usize,
        sigma: usize,
        devices: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        check_slots(k, sigma)?;
        if devices == 0 || devices > cov.device_count() {
            return Err(Error::InvalidParameter(format!(
                "device count {devices} must be in 1..={}",
                cov.device_count()
            )));
        }
        let sites = index::sample(rng, cov.device_count(), devices).into_vec();
        let actions = sites.into_iter().map(|site| Action { site, labels: random_label_set(rng, k, sigma) }).collect();
        Self::placement(cov, k, sigma, actions)
    }

    fn assemble(cov: &'a CoverageGraph, k: usize, sigma: usize, placement: bool, actions: Vec<Action>) -> Result<Self> {
        check_slots(k, sigma)?;
        let allowed = LabelSet::full(k).bits();
        if let Some(a) = actions.iter().find(|a| a.labels.len() != sigma || a.labels.bits() & !allowed != 0) {
            return Err(Error::MalformedLabeling(format!(
                "player at `{}` must hold exactly {sigma} labels below {k}",
                cov.device_name(a.site)
            )));
        }
        let mut state =
            Self { cov, k, sigma, placement, counts: vec![0; cov.y_count() * k], actions: actions.clone(), phi: 0 };
        for a in actions {
            state.phi += state.fresh_gain(a);
            state.apply(a, true);
        }
        Ok(state)
    }

    pub fn coverage(&self) -> &'a CoverageGraph {
        self.cov
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn is_placement(&self) -> bool {
        self.placement
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, player: usize) -> Action {
        self.actions[player]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn sites(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.site).collect()
    }

    /// Labels per player (player order).
    pub fn labeling(&self) -> Labeling {
        Labeling::from_sets(self.actions.iter().map(|a| a.labels).collect())
    }

    /// Labels indexed by coverage-graph device; unoccupied sites get no labels.
    pub fn site_labeling(&self) -> Labeling {
        let mut labeling = Labeling::empty(self.cov.device_count());
        for a in &self.actions {
            labeling.set(a.site, a.labels);
        }
        labeling
    }

    /// Cached potential.
    pub fn potential(&self) -> u64 {
        debug_assert_eq!(self.phi, self.recount_potential());
        self.phi
    }

    /// `sum_j |union_{x in S_j} N(x)|`, recomputed from the actions alone.
    pub fn recount_potential(&self) -> u64 {
        let mut mark = vec![usize::MAX; self.cov.y_count()];
        let mut total = 0;
        for j in 0..self.k {
            for a in self.actions.iter().filter(|a| a.labels.contains(j)) {
                for &y in self.cov.neighbors(a.site) {
                    if mark[y] != j {
                        mark[y] = j;
                        total += 1;
                    }
                }
            }
        }
        total
    }

    /// `U_x`: label deliveries for which `player` is the sole provider.
    pub fn utility(&self, player: usize) -> u64 {
        let a = self.actions[player];
        let mut total = 0;
        for &y in self.cov.neighbors(a.site) {
            let row = &self.counts[y * self.k..(y + 1) * self.k];
            total += a.labels.iter().filter(|&j| row[j] == 1).count() as u64;
        }
        total
    }

    /// Rebuilds the counters from scratch and compares them with the cached ones.
    pub fn audit(&self) -> bool {
        let mut counts = vec![0u32; self.counts.len()];
        for a in &self.actions {
            for &y in self.cov.neighbors(a.site) {
                for j in a.labels.iter() {
                    counts[y * self.k + j] += 1;
                }
            }
        }
        counts == self.counts && self.phi == self.recount_potential()
    }

    /// Replaces `player`'s action.
    pub fn deviate(&mut self, player: usize, action: Action) -> Result<()> {
        self.check_action(player, action)?;
        self.detach(player);
        self.attach(player, action);
        Ok(())
    }

    /// Utility and potential change for a unilateral deviation, computed on a copy
    /// of the state: the utility from its definition, the potential by recount.
    pub fn check_potential_identity(&self, player: usize, alternative: Action) -> Result<(i64, i64)> {
        let mut after = self.clone();
        after.deviate(player, alternative)?;
        let du = after.utility(player) as i64 - self.utility(player) as i64;
        let dphi = after.recount_potential() as i64 - self.recount_potential() as i64;
        Ok((du, dphi))
    }

    fn check_action(&self, player: usize, action: Action) -> Result<()> {
        if player >= self.actions.len() {
            return Err(Error::InvalidParameter(format!("player {player} out of range")));
        }
        if action.labels.len() != self.sigma || action.labels.bits() & !LabelSet::full(self.k).bits() != 0 {
            return Err(Error::MalformedLabeling(format!("action must be a {}-subset of 0..{}", self.sigma, self.k)));
        }
        let current = self.actions[player].site;
        if !self.placement && action.site != current {
            return Err(Error::InvalidParameter("players cannot move in scheduling mode".into()));
        }
        if action.site >= self.cov.device_count() {
            return Err(Error::InvalidParameter(format!("site {} out of range", action.site)));
        }
        if action.site != current && self.actions.iter().any(|a| a.site == action.site) {
            return Err(Error::DuplicateDevice(self.cov.device_name(action.site).to_string()));
        }
        Ok(())
    }

    fn apply(&mut self, action: Action, add: bool) {
        for &y in self.cov.neighbors(action.site) {
            let row = &mut self.counts[y * self.k..(y + 1) * self.k];
            for j in action.labels.iter() {
                if add {
                    row[j] += 1;
                } else {
                    row[j] -= 1;
                }
            }
        }
    }

    /// `(y, j)` pairs `action` would newly provide given the current counters.
    fn fresh_gain(&self, action: Action) -> u64 {
        let mut total = 0;
        for &y in self.cov.neighbors(action.site) {
            let row = &self.counts[y * self.k..(y + 1) * self.k];
            total += action.labels.iter().filter(|&j| row[j] == 0).count() as u64;
        }
        total
    }

    /// Removes `player` from the counters; returns its utility, which is also the
    /// potential it contributed.
    fn detach(&mut self, player: usize) -> u64 {
        let a = self.actions[player];
        self.apply(a, false);
        let utility = self.fresh_gain(a);
        self.phi -= utility;
        utility
    }

    fn attach(&mut self, player: usize, action: Action) {
        self.phi += self.fresh_gain(action);
        self.apply(action, true);
        self.actions[player] = action;
    }
}

/// Draws an alternative label set for a player.
#[derive(Clone, Copy, Debug)]
pub(crate) enum LabelProposal {
    /// Uniform over the other `C(k, sigma) - 1` subsets.
    Uniform,
    /// Swap one held label for one free label.
    Swap,
}

/// `C(n, r)` saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Largest `C(k, sigma)` for which proposals stay uniform.
pub(crate) const UNIFORM_PROPOSAL_LIMIT: u128 = 1_000_000;

impl LabelProposal {
    pub(crate) fn for_space(k: usize, sigma: usize) -> Self {
        if binomial(k, sigma) <= UNIFORM_PROPOSAL_LIMIT {
            LabelProposal::Uniform
        } else {
            LabelProposal::Swap
        }
    }

    pub(crate) fn propose(self, rng: &mut Rng, current: LabelSet, k: usize, sigma: usize) -> LabelSet {
        if sigma == k {
            return current;
        }
        match self {
            LabelProposal::Uniform => loop {
                let candidate = random_label_set(rng, k, sigma);
                if candidate != current {
                    return candidate;
                }
            },
            LabelProposal::Swap => {
                let held: Vec<usize> = current.iter().collect();
                let free: Vec<usize> = (0..k).filter(|&j| !current.contains(j)).collect();
                let mut next = current;
                next.remove(held[rng.gen_range(0..held.len())]);
                next.insert(free[rng.gen_range(0..free.len())]);
                next
            }
        }
    }
}

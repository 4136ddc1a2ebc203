//! Two-stage baseline: greedy maximum-coverage placement, then BLLL scheduling on
//! the chosen sites.

use super::blll::{blll_schedule, BlllOutcome, BlllParams};
use crate::coverage::CoverageGraph;
use crate::error::{Error, Result};
use crate::schedule::ProblemInstance;

/// Picks `count` sites, each time the one covering the most still-uncovered
/// y-elements (lowest index on ties). Returned in pick order.
pub fn greedy_coverage_placement(cov: &CoverageGraph, count: usize) -> Result<Vec<usize>> {
    if count == 0 || count > cov.device_count() {
        return Err(Error::InvalidParameter(format!("device count {count} must be in 1..={}", cov.device_count())));
    }
    let mut covered = vec![false; cov.y_count()];
    let mut taken = vec![false; cov.device_count()];
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let (site, _) = (0..cov.device_count())
            .filter(|&x| !taken[x])
            .map(|x| (x, cov.neighbors(x).iter().filter(|&&y| !covered[y]).count()))
            .fold(None, |best: Option<(usize, usize)>, (x, gain)| match best {
                Some((_, g)) if g >= gain => best,
                _ => Some((x, gain)),
            })
            .expect("count is at most the number of sites");
        taken[site] = true;
        for &y in cov.neighbors(site) {
            covered[y] = true;
        }
        picks.push(site);
    }
    Ok(picks)
}

#[derive(Clone, Debug)]
pub struct TwoStageOutcome {
    /// Sites from the placement stage, in pick order.
    pub placement: Vec<usize>,
    /// Scheduling result; its site fields index the original coverage graph.
    pub schedule: BlllOutcome,
}

/// Greedy placement of `devices` sites followed by BLLL on the restricted instance
/// with the same parameters.
pub fn two_stage_place_and_schedule(
    inst: &ProblemInstance,
    devices: usize,
    params: &BlllParams,
) -> Result<TwoStageOutcome> {
    let placement = greedy_coverage_placement(inst.coverage(), devices)?;
    let restricted = inst.with_coverage(inst.coverage().restrict(&placement)?);
    let mut schedule = blll_schedule(&restricted, params)?;
    for site in schedule.sites.iter_mut().chain(schedule.best_sites.iter_mut()) {
        *site = placement[*site];
    }
    Ok(TwoStageOutcome { placement, schedule })
}

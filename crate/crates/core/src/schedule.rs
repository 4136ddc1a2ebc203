//! Labelings, schedules and their scores.
//!
//! A labeling gives every device `x` a set `f(x)` of slots it is active in. The
//! equivalent schedule lists, for every slot `j`, the devices `S_j = {x : j in f(x)}`.
//! Scores are exact: the numerator is `sum_y |F(y)|` with `F(y)` the union of the
//! labels of the devices covering `y`, and the denominator is `k * |Y|`.
//!
//! Slots are 0-based in this API and 1-based in every text format.

use std::fmt::{self, Write as _};

use num_rational::Ratio;

use crate::coverage::{CoverageGraph, Objective};
use crate::error::{Error, Result};

/// Largest supported lifetime; label sets are 64-bit masks.
pub const MAX_SLOTS: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn from_bits(bits: u64) -> Self {
        LabelSet(bits)
    }

    /// All slots `0..k`.
    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_SLOTS);
        if k == MAX_SLOTS {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << k) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, slot: usize) -> bool {
        slot < MAX_SLOTS && self.0 >> slot & 1 == 1
    }

    pub fn insert(&mut self, slot: usize) {
        self.0 |= 1 << slot;
    }

    pub fn remove(&mut self, slot: usize) {
        self.0 &= !(1 << slot);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    /// Slots in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let slot = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(slot)
        })
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = LabelSet::EMPTY;
        for slot in iter {
            set.insert(slot);
        }
        set
    }
}

/// A coverage graph together with the lifetime `k` and battery `sigma`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    coverage: CoverageGraph,
    k: usize,
    sigma: usize,
}

pub(crate) fn check_slots(k: usize, sigma: usize) -> Result<()> {
    if k == 0 || k > MAX_SLOTS {
        return Err(Error::InvalidParameter(format!("k must be in 1..={MAX_SLOTS}, got {k}")));
    }
    if sigma == 0 || sigma > k {
        return Err(Error::InvalidParameter(format!("sigma must be in 1..=k ({k}), got {sigma}")));
    }
    Ok(())
}

impl ProblemInstance {
    pub fn new(coverage: CoverageGraph, k: usize, sigma: usize) -> Result<Self> {
        check_slots(k, sigma)?;
        Ok(Self { coverage, k, sigma })
    }

    pub fn coverage(&self) -> &CoverageGraph {
        &self.coverage
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn objective(&self) -> Objective {
        self.coverage.objective()
    }

    pub fn with_coverage(&self, coverage: CoverageGraph) -> Self {
        Self { coverage, k: self.k, sigma: self.sigma }
    }

    /// `k * |Y|`, the score denominator.
    pub fn capacity(&self) -> u64 {
        (self.k * self.coverage.y_count()) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
    sets: Vec<LabelSet>,
}

impl Labeling {
    pub fn empty(devices: usize) -> Self {
        Self { sets: vec![LabelSet::EMPTY; devices] }
    }

    pub fn from_sets(sets: Vec<LabelSet>) -> Self {
        Self { sets }
    }

    /// From 0-based slot lists, one per device.
    pub fn from_slots(slots: &[&[usize]]) -> Self {
        Self { sets: slots.iter().map(|s| s.iter().copied().collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, x: usize) -> LabelSet {
        self.sets[x]
    }

    pub fn set(&mut self, x: usize, labels: LabelSet) {
        self.sets[x] = labels;
    }

    pub fn add(&mut self, x: usize, slot: usize) {
        self.sets[x].insert(slot);
    }

    pub fn sets(&self) -> &[LabelSet] {
        &self.sets
    }

    /// Checks labels are below `k` and no device exceeds `sigma` slots.
    pub fn validate(&self, cov: &CoverageGraph, k: usize, sigma: usize) -> Result<()> {
        if self.sets.len() != cov.device_count() {
            return Err(Error::MalformedLabeling(format!(
                "{} label sets for {} devices",
                self.sets.len(),
                cov.device_count()
            )));
        }
        let allowed = LabelSet::full(k);
        if let Some(x) = self.sets.iter().position(|s| s.0 & !allowed.0 != 0) {
            return Err(Error::MalformedLabeling(format!("device `{}` uses a slot beyond {k}", cov.device_name(x))));
        }
        let over: Vec<String> = (0..self.sets.len())
            .filter(|&x| self.sets[x].len() > sigma)
            .map(|x| cov.device_name(x).to_string())
            .collect();
        if over.is_empty() {
            Ok(())
        } else {
            Err(Error::BatteryViolation { sigma, devices: over })
        }
    }
}

/// `S_j = {x : j in f(x)}` for `j` in `0..k`.
pub fn labeling_to_schedule(labeling: &Labeling, k: usize) -> Vec<Vec<usize>> {
    let mut slots = vec![Vec::new(); k];
    for (x, set) in labeling.sets.iter().enumerate() {
        for j in set.iter().filter(|&j| j < k) {
            slots[j].push(x);
        }
    }
    slots
}

pub fn schedule_to_labeling(slots: &[Vec<usize>], devices: usize) -> Result<Labeling> {
    let mut labeling = Labeling::empty(devices);
    for (j, active) in slots.iter().enumerate() {
        if j >= MAX_SLOTS {
            return Err(Error::InvalidParameter(format!("more than {MAX_SLOTS} slots")));
        }
        for &x in active {
            if x >= devices {
                return Err(Error::MalformedLabeling(format!("device index {x} out of range")));
            }
            labeling.add(x, j);
        }
    }
    Ok(labeling)
}

/// `F(y)`: the slots in which `y` is covered.
pub fn f_union(labeling: &Labeling, cov: &CoverageGraph, y: usize) -> LabelSet {
    cov.y_neighbors(y).iter().fold(LabelSet::EMPTY, |acc, &x| acc.union(labeling.get(x)))
}

/// `sum_y |F(y)|`.
pub fn label_union_total(cov: &CoverageGraph, labeling: &Labeling) -> u64 {
    (0..cov.y_count()).map(|y| f_union(labeling, cov, y).len() as u64).sum()
}

/// `|N(S_j)|` for every slot.
pub fn slot_coverage(cov: &CoverageGraph, labeling: &Labeling, k: usize) -> Vec<u64> {
    let mut mark = vec![usize::MAX; cov.y_count()];
    labeling_to_schedule(labeling, k)
        .iter()
        .enumerate()
        .map(|(j, active)| {
            let mut covered = 0;
            for &x in active {
                for &y in cov.neighbors(x) {
                    if mark[y] != j {
                        mark[y] = j;
                        covered += 1;
                    }
                }
            }
            covered
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleReport {
    pub objective: Objective,
    pub k: usize,
    pub sigma: usize,
    /// `|N(S_j)|` per slot.
    pub per_slot_covered: Vec<u64>,
    /// `sum_y |F(y)|`.
    pub potential: u64,
    /// Average detection (or isolation) measure.
    pub score: Ratio<u64>,
    pub schedule: Vec<Vec<usize>>,
}

/// Scores `labeling` both per target and per slot and checks the two agree.
pub fn score(inst: &ProblemInstance, labeling: &Labeling) -> Result<ScheduleReport> {
    let cov = inst.coverage();
    labeling.validate(cov, inst.k, inst.sigma)?;
    let potential = label_union_total(cov, labeling);
    let per_slot_covered = slot_coverage(cov, labeling, inst.k);
    assert_eq!(potential, per_slot_covered.iter().sum::<u64>(), "per-target and per-slot totals disagree");
    Ok(ScheduleReport {
        objective: cov.objective(),
        k: inst.k,
        sigma: inst.sigma,
        per_slot_covered,
        potential,
        score: Ratio::new(potential, inst.capacity()),
        schedule: labeling_to_schedule(labeling, inst.k),
    })
}

/// Expected detection `Q = (1/|Y|) sum_tau |F(tau)| / k`.
pub fn expected_detection_q(inst: &ProblemInstance, labeling: &Labeling) -> Result<Ratio<u64>> {
    if inst.objective() != Objective::Detection {
        return Err(Error::ObjectiveMismatch("detection"));
    }
    let cov = inst.coverage();
    labeling.validate(cov, inst.k, inst.sigma)?;
    let k = inst.k as u64;
    let total = (0..cov.y_count())
        .map(|y| Ratio::new(f_union(labeling, cov, y).len() as u64, k))
        .fold(Ratio::from_integer(0), |acc, q| acc + q);
    Ok(total / Ratio::from_integer(cov.y_count() as u64))
}

/// Six significant digits, as used in every report.
pub fn format_decimal(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `2/3 (0.666667)`.
pub fn format_ratio(r: Ratio<u64>) -> String {
    format!("{} ({})", r, format_decimal(ratio_to_f64(r)))
}

impl fmt::Display for ScheduleReport {
    /// Report block; every line is a `#` comment so it can trail a labeling table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots: Vec<String> = self.per_slot_covered.iter().map(u64::to_string).collect();
        writeln!(f, "# objective: {}", self.objective.as_str())?;
        writeln!(f, "# k: {}", self.k)?;
        writeln!(f, "# sigma: {}", self.sigma)?;
        writeln!(f, "# per_slot_covered: {}", slots.join(","))?;
        writeln!(f, "# potential: {}", self.potential)?;
        writeln!(f, "# score: {}", format_ratio(self.score))
    }
}

/// Labeling table: one `device_name: slot,slot,...` line per device, 1-based slots.
pub fn write_labeling(cov: &CoverageGraph, labeling: &Labeling) -> String {
    let mut out = String::new();
    for x in 0..labeling.len() {
        let slots: Vec<String> = labeling.get(x).iter().map(|j| (j + 1).to_string()).collect();
        let _ = writeln!(out, "{}: {}", cov.device_name(x), slots.join(","));
    }
    out
}

/// Parses a labeling table. Blank lines and `#` comments are skipped; devices
/// missing from the table get no labels.
pub fn parse_labeling(text: &str, cov: &CoverageGraph) -> Result<Labeling> {
    let mut labeling = Labeling::empty(cov.device_count());
    let mut seen = vec![false; cov.device_count()];
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: String| Error::MalformedLabeling(format!("line {}: {why}", number + 1));
        let (name, slots) = line.rsplit_once(':').ok_or_else(|| bad("expected `name: slots`".into()))?;
        let x = cov.device_index(name.trim()).ok_or_else(|| bad(format!("unknown device `{}`", name.trim())))?;
        if std::mem::replace(&mut seen[x], true) {
            return Err(bad(format!("device `{}` listed twice", name.trim())));
        }
        for token in slots.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let slot: usize = token.parse().map_err(|_| bad(format!("bad slot `{token}`")))?;
            if slot == 0 || slot > MAX_SLOTS {
                return Err(bad(format!("slot {slot} out of range")));
            }
            labeling.add(x, slot - 1);
        }
    }
    Ok(labeling)
}

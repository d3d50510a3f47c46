//! Objectives of the three allocation schemes and the random allocator.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSnapshot;
use crate::error::{Error, Result};
use crate::evaluator::{task_times, Allocation, TaskAllocation, TaskTimes};
use crate::model::{HopKind, TaskSpec, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Minimise the summed execution time of all tasks.
    Minimum,
    /// Minimise the number of deadline misses.
    Deterministic,
    /// Random placement with best-effort deadline rejection sampling.
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Minimum, PolicyKind::Deterministic, PolicyKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Minimum => "minimum",
            PolicyKind::Deterministic => "deterministic",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minimum" | "min" => Ok(PolicyKind::Minimum),
            "deterministic" | "det" => Ok(PolicyKind::Deterministic),
            "random" | "rand" => Ok(PolicyKind::Random),
            other => Err(Error::argument("policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// Step penalty on the normalised execution time: zero up to and including
/// the deadline, `m` past it.
pub fn penalty_beta(xi: f64, m: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::argument("xi", format!("must be nonnegative, got {xi}")));
    }
    Ok(if xi <= 1.0 { 0.0 } else { m })
}

pub fn objective_minimum(times: &[TaskTimes]) -> f64 {
    times.iter().map(|t| t.total).sum()
}

/// Sum of deadline penalties. An infeasible task counts as one miss.
pub fn objective_deterministic(times: &[TaskTimes], deadlines: &[f64], m: f64) -> f64 {
    times
        .iter()
        .zip(deadlines)
        .map(|(t, &d)| penalty_beta(t.total / d, m).unwrap_or(m))
        .sum()
}

struct FreePools {
    intra: Vec<Vec<u32>>,
    wan: Vec<u32>,
}

impl FreePools {
    fn pool_mut(&mut self, kind: HopKind, subnet: Option<usize>) -> &mut Vec<u32> {
        match kind {
            HopKind::Intra => &mut self.intra[subnet.expect("intra links belong to a subnetwork")],
            HopKind::Wan => &mut self.wan,
            HopKind::Backhaul => unreachable!("backhaul hops carry no grant"),
        }
    }
}

/// Random placement: tasks in random order, a uniform candidate unit, and a
/// uniform number of uniformly chosen free resources per radio hop. Each
/// task accepts the first of up to `max_retries` draws that meets its
/// deadline and the capacity budgets; otherwise the last valid draw is kept.
pub fn random_allocate<R: Rng + ?Sized>(
    tasks: &[TaskSpec],
    topo: &Topology,
    snapshot: &ChannelSnapshot,
    rng: &mut R,
    max_retries: usize,
) -> Result<Allocation> {
    if max_retries == 0 {
        return Err(Error::argument("max_retries", "must be at least 1"));
    }
    let mut free = FreePools {
        intra: vec![(0..topo.pool.k_s_count as u32).collect(); topo.subnets.len()],
        wan: (0..topo.pool.k_p_count as u32).collect(),
    };
    let mut load = vec![0.0; topo.units.len()];
    let mut entries: Vec<Option<TaskAllocation>> = vec![None; tasks.len()];

    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.shuffle(rng);

    for ti in order {
        let task = &tasks[ti];
        let candidates = topo.candidates(task.source);
        let mut fallback: Option<(TaskAllocation, bool)> = None;
        let mut accepted = None;

        for _ in 0..max_retries {
            let cand = &candidates[rng.random_range(0..candidates.len())];
            let Some(entry) = draw_grants(cand.unit, &cand.route, topo, &mut free, rng) else {
                continue;
            };
            let within_capacity = load[entry.unit] + task.cycles <= topo.unit(entry.unit).capacity_cycles;
            let times = task_times(task, &entry, topo, snapshot)?;
            if times.satisfied && within_capacity {
                accepted = Some(entry);
                break;
            }
            // Keep the latest draw, preferring ones inside the capacity budget.
            if within_capacity || !fallback.as_ref().is_some_and(|(_, ok)| *ok) {
                fallback = Some((entry, within_capacity));
            }
        }

        let entry = match accepted.or(fallback.map(|(e, _)| e)) {
            Some(e) => e,
            None => exhausted_entry(task, topo),
        };
        for (hop, grant) in topo
            .route(task.source, entry.unit)
            .expect("entry unit is a candidate")
            .radio_hops()
            .zip(&entry.grants)
        {
            let subnet = topo.links[hop.link].subnet;
            free.pool_mut(hop.kind, subnet).retain(|k| !grant.contains(k));
        }
        load[entry.unit] += task.cycles;
        entries[ti] = Some(entry);
    }

    Ok(Allocation {
        entries: entries.into_iter().map(|e| e.expect("every task visited")).collect(),
    })
}

/// Draws grants for every radio hop of `route` without committing them.
/// Returns `None` if some hop finds its pool empty.
fn draw_grants<R: Rng + ?Sized>(
    unit: usize,
    route: &crate::model::Route,
    topo: &Topology,
    free: &mut FreePools,
    rng: &mut R,
) -> Option<TaskAllocation> {
    let mut grants: Vec<Vec<u32>> = Vec::new();
    let mut taken: Vec<(HopKind, Option<usize>, u32)> = Vec::new();
    for hop in route.radio_hops() {
        let subnet = topo.links[hop.link].subnet;
        let pool = free.pool_mut(hop.kind, subnet);
        // Indices already drawn for an earlier hop of this route are unavailable.
        let avail: Vec<u32> = pool
            .iter()
            .copied()
            .filter(|k| {
                !taken
                    .iter()
                    .any(|&(kind, s, t)| kind == hop.kind && s == subnet && t == *k)
            })
            .collect();
        if avail.is_empty() {
            return None;
        }
        let count = rng.random_range(1..=avail.len());
        let mut grant: Vec<u32> = index::sample(rng, avail.len(), count)
            .into_iter()
            .map(|i| avail[i])
            .collect();
        grant.sort_unstable();
        taken.extend(grant.iter().map(|&k| (hop.kind, subnet, k)));
        grants.push(grant);
    }
    Some(TaskAllocation { unit, grants })
}

/// Placement for a task whose every draw found an exhausted pool: process
/// at the source when it can, otherwise leave it unserved (infeasible).
fn exhausted_entry(task: &TaskSpec, topo: &Topology) -> TaskAllocation {
    let cands = topo.candidates(task.source);
    match cands.iter().find(|c| c.route.is_local()) {
        Some(c) => TaskAllocation::local(c.unit),
        None => TaskAllocation {
            unit: cands[0].unit,
            grants: vec![Vec::new(); cands[0].route.radio_hop_count()],
        },
    }
}

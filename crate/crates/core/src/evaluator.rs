//! Task timing and constraint verification for a candidate allocation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{link_rate, transmission_time, ChannelSnapshot};
use crate::error::{Error, Result};
use crate::model::{HopKind, TaskSpec, Topology, UnitId, UnitKind};

/// Placement of one task: the processing unit plus the resource indices
/// granted on each radio hop of the route to it, in route order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskAllocation {
    pub unit: UnitId,
    pub grants: Vec<Vec<u32>>,
}

impl TaskAllocation {
    pub fn local(unit: UnitId) -> Self {
        Self {
            unit,
            grants: Vec::new(),
        }
    }
}

/// One entry per task, aligned with the task list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub entries: Vec<TaskAllocation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskTimes {
    pub t_comm_fwd: f64,
    pub t_proc: f64,
    pub t_comm_ret: f64,
    pub total: f64,
    pub satisfied: bool,
}

impl TaskTimes {
    pub fn new(t_comm_fwd: f64, t_proc: f64, t_comm_ret: f64, deadline_s: f64) -> Self {
        let total = t_comm_fwd + t_proc + t_comm_ret;
        Self {
            t_comm_fwd,
            t_proc,
            t_comm_ret,
            total,
            satisfied: total <= deadline_s,
        }
    }

    /// Sentinel for a task whose route has a zero-rate hop.
    pub fn infeasible(t_proc: f64) -> Self {
        Self::new(f64::INFINITY, t_proc, f64::INFINITY, 0.0)
    }

    pub fn is_infeasible(&self) -> bool {
        self.total.is_infinite()
    }
}

pub fn process_time(cycles: f64, power_hz: f64) -> Result<f64> {
    if !(power_hz > 0.0) {
        return Err(Error::argument("power_hz", "unit has no processing capacity"));
    }
    Ok(cycles / power_hz)
}

pub fn task_times(
    task: &TaskSpec,
    entry: &TaskAllocation,
    topo: &Topology,
    snapshot: &ChannelSnapshot,
) -> Result<TaskTimes> {
    let unit = topo.unit(entry.unit);
    let t_proc = process_time(task.cycles, unit.power_hz).map_err(|_| Error::InvalidUnit { unit: unit.id })?;
    if entry.unit == task.source {
        return Ok(TaskTimes::new(0.0, t_proc, 0.0, task.deadline_s));
    }
    let route = topo.route(task.source, entry.unit).ok_or_else(|| {
        Error::argument(
            "allocation",
            format!("unit {} is not a candidate for source {}", entry.unit, task.source),
        )
    })?;
    let times = transmission_time(task.size_bits, route, &entry.grants, topo, snapshot).and_then(|fwd| {
        let ret = transmission_time(task.result_bits, route, &entry.grants, topo, snapshot)?;
        Ok((fwd, ret))
    });
    match times {
        Ok((fwd, ret)) => Ok(TaskTimes::new(fwd, t_proc, ret, task.deadline_s)),
        Err(Error::InfeasibleLink { .. }) => Ok(TaskTimes::infeasible(t_proc)),
        Err(e) => Err(e),
    }
}

/// Times for every task of an allocation.
pub fn evaluate(
    allocation: &Allocation,
    tasks: &[TaskSpec],
    topo: &Topology,
    snapshot: &ChannelSnapshot,
) -> Result<Vec<TaskTimes>> {
    if allocation.entries.len() != tasks.len() {
        return Err(Error::argument(
            "allocation",
            format!("{} entries for {} tasks", allocation.entries.len(), tasks.len()),
        ));
    }
    tasks
        .iter()
        .zip(&allocation.entries)
        .map(|(t, e)| task_times(t, e, topo, snapshot))
        .collect()
}

/// A (task index, radio hop position) pair holding a resource.
pub type GrantHolder = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// Task not placed on exactly one candidate unit, or its grants do not
    /// match the route's radio hops.
    Placement { task: usize, reason: String },
    /// An intra-subnetwork resource held by more than one (task, hop).
    IntraCollision {
        subnet: usize,
        resource: u32,
        holders: Vec<GrantHolder>,
    },
    /// A shared wide-area resource held by more than one (task, hop).
    WanCollision { resource: u32, holders: Vec<GrantHolder> },
    /// Per-task rates on a link add up to more than the link can carry.
    LinkRate { link: usize, demand_bps: f64, max_bps: f64 },
    /// LC or HC workload above its per-episode cycle budget.
    LocalCapacity {
        unit: UnitId,
        load_cycles: f64,
        capacity_cycles: f64,
    },
    /// Edge or Cloud workload above its per-episode cycle budget.
    ContinuumCapacity {
        unit: UnitId,
        load_cycles: f64,
        capacity_cycles: f64,
    },
}

impl Violation {
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Violation::LocalCapacity { .. } | Violation::ContinuumCapacity { .. }
        )
    }
}

/// Every constraint violation of `allocation`. Violations are data; an
/// empty list means the allocation is admissible.
pub fn check_constraints(
    allocation: &Allocation,
    tasks: &[TaskSpec],
    topo: &Topology,
    snapshot: &ChannelSnapshot,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut intra: BTreeMap<(usize, u32), Vec<GrantHolder>> = BTreeMap::new();
    let mut wan: BTreeMap<u32, Vec<GrantHolder>> = BTreeMap::new();
    let mut link_demand: BTreeMap<usize, f64> = BTreeMap::new();

    if allocation.entries.len() != tasks.len() {
        out.push(Violation::Placement {
            task: allocation.entries.len().min(tasks.len()),
            reason: format!("{} entries for {} tasks", allocation.entries.len(), tasks.len()),
        });
    }

    for (ti, (task, entry)) in tasks.iter().zip(&allocation.entries).enumerate() {
        let Some(route) = topo.route(task.source, entry.unit) else {
            out.push(Violation::Placement {
                task: ti,
                reason: format!("unit {} is not a candidate", entry.unit),
            });
            continue;
        };
        let radio: Vec<_> = route.radio_hops().collect();
        if radio.len() != entry.grants.len() {
            out.push(Violation::Placement {
                task: ti,
                reason: format!("{} grants for {} radio hops", entry.grants.len(), radio.len()),
            });
            continue;
        }
        for (pos, (hop, grant)) in radio.iter().zip(&entry.grants).enumerate() {
            let link = &topo.links[hop.link];
            let pool = topo.pool_size(hop.kind);
            if let Some(&bad) = grant.iter().find(|&&k| k as usize >= pool) {
                out.push(Violation::Placement {
                    task: ti,
                    reason: format!("resource {bad} outside pool of {pool} on link {}", link.id),
                });
                continue;
            }
            for &k in grant {
                match hop.kind {
                    HopKind::Intra => {
                        let subnet = link.subnet.expect("intra links belong to a subnetwork");
                        intra.entry((subnet, k)).or_default().push((ti, pos));
                    }
                    HopKind::Wan => wan.entry(k).or_default().push((ti, pos)),
                    HopKind::Backhaul => {}
                }
            }
            let rate = link_rate(link, grant, snapshot).expect("indices checked above");
            *link_demand.entry(link.id).or_default() += rate;
        }
    }

    for ((subnet, resource), holders) in intra {
        if holders.len() > 1 {
            out.push(Violation::IntraCollision {
                subnet,
                resource,
                holders,
            });
        }
    }
    for (resource, holders) in wan {
        if holders.len() > 1 {
            out.push(Violation::WanCollision { resource, holders });
        }
    }

    for (link, demand) in link_demand {
        let pool = topo.pool_size(topo.links[link].kind);
        let all: Vec<u32> = (0..pool as u32).collect();
        let max = link_rate(&topo.links[link], &all, snapshot).expect("full pool is in range");
        if demand > max * (1.0 + 1e-12) {
            out.push(Violation::LinkRate {
                link,
                demand_bps: demand,
                max_bps: max,
            });
        }
    }

    let mut load = vec![0.0; topo.units.len()];
    for (task, entry) in tasks.iter().zip(&allocation.entries) {
        if entry.unit < load.len() {
            load[entry.unit] += task.cycles;
        }
    }
    for unit in &topo.units {
        let l = load[unit.id];
        if l <= unit.capacity_cycles {
            continue;
        }
        match unit.kind {
            UnitKind::Lc | UnitKind::Hc => out.push(Violation::LocalCapacity {
                unit: unit.id,
                load_cycles: l,
                capacity_cycles: unit.capacity_cycles,
            }),
            UnitKind::Edge | UnitKind::Cloud => out.push(Violation::ContinuumCapacity {
                unit: unit.id,
                load_cycles: l,
                capacity_cycles: unit.capacity_cycles,
            }),
            // Never a candidate; caught as a placement violation.
            UnitKind::Sne => {}
        }
    }
    out
}

//! Per-episode metrics: satisfaction, fairness, utilization and locality.

use std::collections::HashMap;

use serde::Serialize;

use crate::evaluator::{Allocation, TaskTimes};
use crate::model::{HopKind, TaskSpec, Topology, UnitId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub satisfaction_ratio: f64,
    pub per_subnet_sr: Vec<f64>,
    pub jfi: f64,
    pub comm_util_mean: f64,
    pub comm_util_std: f64,
    pub comp_util_mean: f64,
    pub comp_util_std: f64,
    pub local_ratio: f64,
}

impl MetricsReport {
    pub fn compute(
        allocation: &Allocation,
        times: &[TaskTimes],
        tasks: &[TaskSpec],
        topo: &Topology,
        slot_s: f64,
    ) -> Self {
        let (satisfaction_ratio, per_subnet_sr) = satisfaction_ratio(times, tasks, topo.subnets.len());
        let util = utilization(allocation, times, tasks, topo, slot_s);
        Self {
            satisfaction_ratio,
            jfi: jfi(&per_subnet_sr),
            per_subnet_sr,
            comm_util_mean: util.comm_mean,
            comm_util_std: util.comm_std,
            comp_util_mean: util.comp_mean,
            comp_util_std: util.comp_std,
            local_ratio: local_ratio(allocation, tasks, topo),
        }
    }
}

/// Overall ratio is the unweighted mean of the per-subnetwork ratios.
/// Subnetworks without tasks are reported as 0 and still averaged in;
/// configuration validation rules them out.
pub fn satisfaction_ratio(times: &[TaskTimes], tasks: &[TaskSpec], n_subnets: usize) -> (f64, Vec<f64>) {
    let mut met = vec![0usize; n_subnets];
    let mut total = vec![0usize; n_subnets];
    for (t, task) in times.iter().zip(tasks) {
        total[task.id.subnet] += 1;
        met[task.id.subnet] += t.satisfied as usize;
    }
    let per: Vec<f64> = met
        .iter()
        .zip(&total)
        .map(|(&m, &n)| if n == 0 { 0.0 } else { m as f64 / n as f64 })
        .collect();
    let overall = if per.is_empty() {
        0.0
    } else {
        per.iter().sum::<f64>() / per.len() as f64
    };
    (overall, per)
}

/// Jain's fairness index. An all-zero list is perfectly equal.
pub fn jfi(values: &[f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if sq == 0.0 {
        return 1.0;
    }
    sum * sum / (values.len() as f64 * sq)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Utilization {
    pub comm_mean: f64,
    pub comm_std: f64,
    pub comp_mean: f64,
    pub comp_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Resource {
    Intra { subnet: usize, index: u32 },
    Wan { index: u32 },
}

/// Slot-discretised busy timeline of one resource or unit.
#[derive(Debug, Default)]
struct Timeline {
    busy: Vec<bool>,
}

fn slot_floor(t: f64, slot: f64) -> usize {
    (t / slot + 1e-9).floor().max(0.0) as usize
}

fn slot_ceil(t: f64, slot: f64) -> usize {
    (t / slot - 1e-9).ceil().max(0.0) as usize
}

impl Timeline {
    fn mark(&mut self, start: f64, end: f64, slot: f64, horizon: usize) {
        if !(end > start) {
            return;
        }
        let a = slot_floor(start, slot).min(horizon);
        let b = if end.is_finite() {
            slot_ceil(end, slot).min(horizon)
        } else {
            horizon
        };
        if self.busy.len() < horizon {
            self.busy.resize(horizon, false);
        }
        self.busy[a..b].iter_mut().for_each(|s| *s = true);
    }

    fn ratio(&self, window: usize) -> f64 {
        if window == 0 {
            return 0.0;
        }
        let busy = self.busy.iter().take(window).filter(|b| **b).count();
        (busy as f64 / window as f64).min(1.0)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Utilization of the resources and units each task selected, measured over
/// the window from allocation (t = 0) to that task's deadline.
///
/// A task occupies its granted resources while sending the input and while
/// returning the result, and its unit while processing. A task whose route
/// cannot carry traffic holds its grants for the whole episode and never
/// reaches its unit. Statistics are taken over all (task, selected resource)
/// pairs, separately for communication resources and computing units.
pub fn utilization(
    allocation: &Allocation,
    times: &[TaskTimes],
    tasks: &[TaskSpec],
    topo: &Topology,
    slot_s: f64,
) -> Utilization {
    let max_deadline = tasks.iter().map(|t| t.deadline_s).fold(0.0, f64::max);
    let horizon = slot_ceil(max_deadline, slot_s);

    let mut comm: HashMap<Resource, Timeline> = HashMap::new();
    let mut comp: HashMap<UnitId, Timeline> = HashMap::new();
    let mut comm_pairs: Vec<(usize, Resource)> = Vec::new();
    let mut comp_pairs: Vec<(usize, UnitId)> = Vec::new();

    for (ti, ((task, entry), t)) in tasks.iter().zip(&allocation.entries).zip(times).enumerate() {
        if let Some(route) = topo.route(task.source, entry.unit) {
            for (hop, grant) in route.radio_hops().zip(&entry.grants) {
                for &index in grant {
                    let key = match hop.kind {
                        HopKind::Intra => Resource::Intra {
                            subnet: topo.links[hop.link].subnet.expect("intra links belong to a subnetwork"),
                            index,
                        },
                        _ => Resource::Wan { index },
                    };
                    let line = comm.entry(key).or_default();
                    if t.is_infeasible() {
                        line.mark(0.0, f64::INFINITY, slot_s, horizon);
                    } else {
                        line.mark(0.0, t.t_comm_fwd, slot_s, horizon);
                        line.mark(t.t_comm_fwd + t.t_proc, t.total, slot_s, horizon);
                    }
                    comm_pairs.push((ti, key));
                }
            }
        }
        let line = comp.entry(entry.unit).or_default();
        if !t.is_infeasible() {
            line.mark(t.t_comm_fwd, t.t_comm_fwd + t.t_proc, slot_s, horizon);
        }
        comp_pairs.push((ti, entry.unit));
    }

    let window = |ti: usize| slot_ceil(tasks[ti].deadline_s, slot_s);
    let comm_vals: Vec<f64> = comm_pairs.iter().map(|(ti, k)| comm[k].ratio(window(*ti))).collect();
    let comp_vals: Vec<f64> = comp_pairs.iter().map(|(ti, u)| comp[u].ratio(window(*ti))).collect();
    let (comm_mean, comm_std) = mean_std(&comm_vals);
    let (comp_mean, comp_std) = mean_std(&comp_vals);
    Utilization {
        comm_mean,
        comm_std,
        comp_mean,
        comp_std,
    }
}

/// Fraction of tasks processed on an LC or HC of their own subnetwork.
pub fn local_ratio(allocation: &Allocation, tasks: &[TaskSpec], topo: &Topology) -> f64 {
    if tasks.is_empty() {
        return 0.0;
    }
    let local = tasks
        .iter()
        .zip(&allocation.entries)
        .filter(|(t, e)| topo.is_local_processor(e.unit, t.id.subnet))
        .count();
    local as f64 / tasks.len() as f64
}

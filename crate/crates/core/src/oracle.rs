//! Exhaustive search over every (unit, demand) combination of a small
//! instance. Scores are computed through the evaluator and the policy
//! objectives, not through the solver's fitness routine, so the result is
//! an independent reference for the GA.

use crate::error::{Error, Result};
use crate::evaluator::{check_constraints, evaluate};
use crate::model::{ScenarioConfig, TaskSplit};
use crate::policies::{objective_deterministic, objective_minimum, PolicyKind};
use crate::solver::{decode, Chromosome, GaConfig, GenomeLayout, Instance};

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_score: f64,
    pub best: Chromosome,
    pub evaluated: u64,
}

/// Size of the search space, or `None` on overflow.
pub fn search_space(layout: &GenomeLayout) -> Option<u64> {
    (0..layout.len()).try_fold(1u64, |acc, g| acc.checked_mul(layout.cardinality(g) as u64))
}

/// Score of one chromosome via the full evaluation path.
pub fn reference_score(
    chrom: &Chromosome,
    layout: &GenomeLayout,
    policy: PolicyKind,
    inst: &Instance<'_>,
    ga: &GaConfig,
) -> Result<f64> {
    let alloc = decode(chrom, layout, inst);
    let times = evaluate(&alloc, inst.tasks, inst.topo, inst.snapshot)?;
    let capacity = check_constraints(&alloc, inst.tasks, inst.topo, inst.snapshot)
        .iter()
        .filter(|v| v.is_capacity())
        .count() as f64;
    let objective = match policy {
        PolicyKind::Minimum => {
            let finite: Vec<_> = times.iter().copied().filter(|t| !t.is_infeasible()).collect();
            let unserved = (times.len() - finite.len()) as f64;
            objective_minimum(&finite) + ga.infeasibility_penalty * unserved
        }
        PolicyKind::Deterministic => {
            let deadlines: Vec<f64> = inst.tasks.iter().map(|t| t.deadline_s).collect();
            objective_deterministic(&times, &deadlines, inst.cfg.penalty_m)
        }
        PolicyKind::Random => return Err(Error::argument("policy", "the random scheme has no objective")),
    };
    Ok(objective + ga.infeasibility_penalty * capacity)
}

/// Enumerates the whole genome space. Refuses spaces above `limit`.
pub fn exhaustive_optimum(policy: PolicyKind, inst: &Instance<'_>, ga: &GaConfig, limit: u64) -> Result<OracleResult> {
    let layout = GenomeLayout::new(inst.tasks, inst.topo);
    let space = search_space(&layout).filter(|&s| s <= limit).ok_or_else(|| {
        Error::argument(
            "instance",
            format!("search space exceeds the limit of {limit} candidates"),
        )
    })?;

    let mut digits = vec![0u32; layout.len()];
    let mut best: Option<(f64, Chromosome)> = None;
    for _ in 0..space {
        let chrom = Chromosome { genes: digits.clone() };
        let score = reference_score(&chrom, &layout, policy, inst, ga)?;
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, chrom));
        }
        // Mixed-radix increment.
        for (g, d) in digits.iter_mut().enumerate() {
            *d += 1;
            if *d < layout.cardinality(g) {
                break;
            }
            *d = 0;
        }
    }
    let (best_score, best) = best.expect("search space is never empty");
    Ok(OracleResult {
        best_score,
        best,
        evaluated: space,
    })
}

/// The tiny reference scenario: one subnetwork, two HC-sourced tasks (three
/// candidate units each) and two resources per pool.
pub fn tiny_config() -> ScenarioConfig {
    ScenarioConfig {
        n_subnets: 1,
        tasks_per_subnet: 2,
        task_gen_split: TaskSplit {
            sne: 0.0,
            lc: 0.0,
            hc: 1.0,
        },
        k_s: 2,
        k_p: 2,
        ..Default::default()
    }
}

/// True if two scores agree to a relative tolerance of 1e-9.
pub fn scores_match(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

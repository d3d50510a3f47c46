//! Episode runner, experiment sweeps and CSV persistence.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{draw_snapshot, ChannelSnapshot};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, Allocation, TaskTimes};
use crate::metrics::MetricsReport;
use crate::model::{build_topology, sample_tasks, ScenarioConfig, TaskSpec, Topology};
use crate::policies::{objective_deterministic, objective_minimum, random_allocate, PolicyKind};
use crate::solver::{run_ga, GaConfig, Instance};

pub const DEFAULT_RANDOM_RETRIES: usize = 100;

/// Independent RNG stream for `label`, derived from the master seed. Streams
/// depend only on (seed, label), so adding policies or cells to a sweep
/// never perturbs the draws of another.
pub fn child_rng(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub n_subnets_list: Vec<usize>,
    pub tasks_list: Vec<usize>,
    pub sinr_wan_db_list: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_subnets_list: vec![2, 3, 4, 5],
            tasks_list: vec![5, 15, 25],
            sinr_wan_db_list: vec![0.0, 30.0],
            policies: PolicyKind::ALL.to_vec(),
            seeds: (0..20).collect(),
            output: None,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, bool); 5] = [
            ("sweep.n_subnets_list", self.n_subnets_list.is_empty()),
            ("sweep.tasks_list", self.tasks_list.is_empty()),
            ("sweep.sinr_wan_db_list", self.sinr_wan_db_list.is_empty()),
            ("sweep.policies", self.policies.is_empty()),
            ("sweep.seeds", self.seeds.is_empty()),
        ];
        for (field, empty) in checks {
            if empty {
                return Err(Error::config(field, "list must not be empty"));
            }
        }
        if self.n_subnets_list.contains(&0) {
            return Err(Error::config("sweep.n_subnets_list", "entries must be at least 1"));
        }
        if self.tasks_list.contains(&0) {
            return Err(Error::config("sweep.tasks_list", "entries must be at least 1"));
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.n_subnets_list.len()
            * self.tasks_list.len()
            * self.sinr_wan_db_list.len()
            * self.policies.len()
            * self.seeds.len()
    }
}

/// The full JSON configuration file. Omitted sections and fields take
/// their defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub ga: GaConfig,
    pub sweep: SweepSpec,
    pub random_max_retries: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.ga.validate()?;
        self.sweep.validate()?;
        if self.random_max_retries == Some(0) {
            return Err(Error::config("random_max_retries", "must be at least 1"));
        }
        Ok(())
    }

    pub fn random_retries(&self) -> usize {
        self.random_max_retries.unwrap_or(DEFAULT_RANDOM_RETRIES)
    }
}

/// The scenario draws shared by every policy for one master seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub topo: Topology,
    pub tasks: Vec<TaskSpec>,
    pub snapshot: ChannelSnapshot,
}

impl Scenario {
    pub fn draw(cfg: &ScenarioConfig, master_seed: u64) -> Result<Self> {
        let topo = build_topology(cfg)?;
        let tasks = sample_tasks(cfg, &topo, &mut child_rng(master_seed, "tasks"));
        let snapshot = draw_snapshot(&topo, cfg, &mut child_rng(master_seed, "channel"));
        Ok(Self {
            cfg: cfg.clone(),
            topo,
            tasks,
            snapshot,
        })
    }

    pub fn instance(&self) -> Instance<'_> {
        Instance {
            tasks: &self.tasks,
            topo: &self.topo,
            snapshot: &self.snapshot,
            cfg: &self.cfg,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub report: MetricsReport,
    pub allocation: Allocation,
    pub times: Vec<TaskTimes>,
    /// Time-sum objective for the minimum scheme; deadline-penalty sum
    /// for the other two.
    pub objective: f64,
    pub ga_best_final: Option<f64>,
    pub runtime_ms: f64,
}

pub fn run_episode(
    policy: PolicyKind,
    cfg: &ScenarioConfig,
    ga: &GaConfig,
    random_retries: usize,
    master_seed: u64,
) -> Result<EpisodeOutcome> {
    let scenario = Scenario::draw(cfg, master_seed)?;
    run_on_scenario(policy, &scenario, ga, random_retries, master_seed)
}

/// Runs one policy on already drawn scenario data.
pub fn run_on_scenario(
    policy: PolicyKind,
    scenario: &Scenario,
    ga: &GaConfig,
    random_retries: usize,
    master_seed: u64,
) -> Result<EpisodeOutcome> {
    let start = Instant::now();
    let inst = scenario.instance();
    let (allocation, ga_best_final) = match policy {
        PolicyKind::Random => {
            let mut rng = child_rng(master_seed, "random");
            let alloc = random_allocate(inst.tasks, inst.topo, inst.snapshot, &mut rng, random_retries)?;
            (alloc, None)
        }
        _ => {
            let mut rng = child_rng(master_seed, "solver");
            let out = run_ga(policy, &inst, ga, &mut rng)?;
            (out.allocation, Some(out.best_score))
        }
    };
    let times = evaluate(&allocation, inst.tasks, inst.topo, inst.snapshot)?;
    let report = MetricsReport::compute(&allocation, &times, inst.tasks, inst.topo, scenario.cfg.slot_s);
    let objective = match policy {
        PolicyKind::Minimum => objective_minimum(&times),
        _ => {
            let deadlines: Vec<f64> = inst.tasks.iter().map(|t| t.deadline_s).collect();
            objective_deterministic(&times, &deadlines, scenario.cfg.penalty_m)
        }
    };
    Ok(EpisodeOutcome {
        report,
        allocation,
        times,
        objective,
        ga_best_final,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub policy: PolicyKind,
    pub n_subnets: usize,
    pub tasks_per_subnet: usize,
    pub sinr_wan_db: f64,
    pub seed: u64,
    pub satisfaction_ratio: Option<f64>,
    pub jfi: Option<f64>,
    pub comm_util_mean: Option<f64>,
    pub comm_util_std: Option<f64>,
    pub comp_util_mean: Option<f64>,
    pub comp_util_std: Option<f64>,
    pub local_ratio: Option<f64>,
    pub objective: Option<f64>,
    pub ga_best_trace_final: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 16] = [
    "policy",
    "n_subnets",
    "tasks_per_subnet",
    "sinr_wan_db",
    "seed",
    "satisfaction_ratio",
    "jfi",
    "comm_util_mean",
    "comm_util_std",
    "comp_util_mean",
    "comp_util_std",
    "local_ratio",
    "objective",
    "ga_best_trace_final",
    "runtime_ms",
    "error",
];

impl EpisodeRecord {
    pub fn from_outcome(policy: PolicyKind, cfg: &ScenarioConfig, seed: u64, result: Result<EpisodeOutcome>) -> Self {
        let mut rec = Self {
            policy,
            n_subnets: cfg.n_subnets,
            tasks_per_subnet: cfg.tasks_per_subnet,
            sinr_wan_db: cfg.mean_sinr_wan_db,
            seed,
            satisfaction_ratio: None,
            jfi: None,
            comm_util_mean: None,
            comm_util_std: None,
            comp_util_mean: None,
            comp_util_std: None,
            local_ratio: None,
            objective: None,
            ga_best_trace_final: None,
            runtime_ms: None,
            error: None,
        };
        match result {
            Ok(out) => {
                let r = &out.report;
                rec.satisfaction_ratio = Some(r.satisfaction_ratio);
                rec.jfi = Some(r.jfi);
                rec.comm_util_mean = Some(r.comm_util_mean);
                rec.comm_util_std = Some(r.comm_util_std);
                rec.comp_util_mean = Some(r.comp_util_mean);
                rec.comp_util_std = Some(r.comp_util_std);
                rec.local_ratio = Some(r.local_ratio);
                rec.objective = Some(out.objective);
                rec.ga_best_trace_final = out.ga_best_final;
                rec.runtime_ms = Some(out.runtime_ms);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

/// Cells of a sweep in output order: N, then I, then SINR, then policy,
/// then seed.
pub fn sweep_cells(spec: &SweepSpec, base: &ScenarioConfig) -> Vec<(ScenarioConfig, PolicyKind, u64)> {
    let mut cells = Vec::with_capacity(spec.row_count());
    for &n in &spec.n_subnets_list {
        for &i in &spec.tasks_list {
            for &sinr in &spec.sinr_wan_db_list {
                let cfg = ScenarioConfig {
                    n_subnets: n,
                    tasks_per_subnet: i,
                    mean_sinr_wan_db: sinr,
                    ..base.clone()
                };
                for &p in &spec.policies {
                    for &s in &spec.seeds {
                        cells.push((cfg.clone(), p, s));
                    }
                }
            }
        }
    }
    cells
}

/// Runs every cell of the sweep and returns the rows in deterministic order.
/// Failed episodes yield a row carrying the error message.
pub fn sweep_records(exp: &ExperimentConfig) -> Vec<EpisodeRecord> {
    let retries = exp.random_retries();
    sweep_cells(&exp.sweep, &exp.scenario)
        .into_par_iter()
        .map(|(cfg, policy, seed)| {
            let out = run_episode(policy, &cfg, &exp.ga, retries, seed);
            EpisodeRecord::from_outcome(policy, &cfg, seed, out)
        })
        .collect()
}

pub fn write_records(path: &Path, records: &[EpisodeRecord]) -> Result<()> {
    write_records_to(File::create(path)?, records)
}

pub fn write_records_to<W: std::io::Write>(w: W, records: &[EpisodeRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Runs the sweep and writes the CSV to `out`. The output file is created
/// before any episode runs so an unwritable path fails fast.
pub fn run_sweep(exp: &ExperimentConfig, out: &Path) -> Result<usize> {
    exp.validate()?;
    let file = File::create(out)?;
    let records = sweep_records(exp);
    write_records_to(file, &records)?;
    Ok(records.len())
}

//! Elitist genetic algorithm over task placements and resource demands.
//!
//! A chromosome holds, per task, the index of the chosen candidate unit and
//! one requested resource count per radio hop of the task's longest route.
//! Every candidate route of a source is a prefix of that longest route, so
//! the demand genes stay meaningful whatever unit is chosen. Decoding grants
//! demands first-fit in task order, which keeps every decoded allocation
//! free of resource collisions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSnapshot;
use crate::error::{Error, Result};
use crate::evaluator::{Allocation, TaskAllocation};
use crate::model::{HopKind, ScenarioConfig, TaskSpec, Topology};
use crate::policies::PolicyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub elite_fraction: f64,
    pub generations: usize,
    /// Probability that an offspring has one gene resampled.
    pub mutation_rate: f64,
    /// Added once per capacity violation (and per unserved task under the
    /// time-minimising objective).
    pub infeasibility_penalty: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 1000,
            elite_fraction: 0.20,
            generations: 10,
            mutation_rate: 0.20,
            infeasibility_penalty: 1e4,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("ga.population", "must be at least 2"));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::config("ga.elite_fraction", "must lie in (0, 1)"));
        }
        if self.generations == 0 {
            return Err(Error::config("ga.generations", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::config("ga.mutation_rate", "must lie in [0, 1]"));
        }
        if !(self.infeasibility_penalty > 0.0) {
            return Err(Error::config("ga.infeasibility_penalty", "must be positive"));
        }
        Ok(())
    }

    /// Number of individuals copied unchanged into the next generation.
    pub fn elite_count(&self) -> usize {
        ((self.population as f64 * self.elite_fraction).round() as usize).clamp(1, self.population - 1)
    }
}

/// Everything a fitness evaluation reads.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub tasks: &'a [TaskSpec],
    pub topo: &'a Topology,
    pub snapshot: &'a ChannelSnapshot,
    pub cfg: &'a ScenarioConfig,
}

/// Resource counts a demand gene can request from a pool of `pool`
/// resources: a geometric ladder with ratio sqrt(2), from 1 up to the pool
/// size. Small grants are as reachable as large ones.
pub fn demand_levels(pool: usize) -> Vec<u32> {
    let mut levels = Vec::new();
    let mut x = 1.0f64;
    while (x.round() as usize) < pool {
        let v = x.round() as u32;
        if levels.last() != Some(&v) {
            levels.push(v);
        }
        x *= std::f64::consts::SQRT_2;
    }
    if pool > 0 {
        levels.push(pool as u32);
    }
    levels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Domain {
    /// Index into the task's candidate list.
    Unit(u32),
    /// Index into the demand ladder of a pool.
    Demand(HopKind),
}

/// Shape of the genome for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenomeLayout {
    /// Offset of each task's unit gene; its demand genes follow it.
    offsets: Vec<usize>,
    domains: Vec<Domain>,
    intra_levels: Vec<u32>,
    wan_levels: Vec<u32>,
}

impl GenomeLayout {
    pub fn new(tasks: &[TaskSpec], topo: &Topology) -> Self {
        let mut offsets = Vec::with_capacity(tasks.len());
        let mut domains = Vec::new();
        for task in tasks {
            offsets.push(domains.len());
            let cands = topo.candidates(task.source);
            domains.push(Domain::Unit(cands.len() as u32));
            let longest = cands
                .iter()
                .max_by_key(|c| c.route.hops.len())
                .expect("every source has candidates");
            domains.extend(longest.route.radio_hops().map(|h| Domain::Demand(h.kind)));
        }
        Self {
            offsets,
            domains,
            intra_levels: demand_levels(topo.pool.k_s_count),
            wan_levels: demand_levels(topo.pool.k_p_count),
        }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    fn levels(&self, kind: HopKind) -> &[u32] {
        match kind {
            HopKind::Intra => &self.intra_levels,
            HopKind::Wan => &self.wan_levels,
            HopKind::Backhaul => &[],
        }
    }

    /// Number of distinct values gene `g` can take.
    pub fn cardinality(&self, g: usize) -> u32 {
        match self.domains[g] {
            Domain::Unit(n) => n,
            Domain::Demand(kind) => self.levels(kind).len() as u32,
        }
    }

    /// Resource count requested by demand gene `g` holding `v`.
    pub fn demand(&self, g: usize, v: u32) -> u32 {
        match self.domains[g] {
            Domain::Demand(kind) => self.levels(kind)[v as usize],
            Domain::Unit(_) => panic!("gene {g} is a unit gene"),
        }
    }

    pub fn sample_gene<R: Rng + ?Sized>(&self, g: usize, rng: &mut R) -> u32 {
        rng.random_range(0..self.cardinality(g))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Chromosome {
        Chromosome {
            genes: (0..self.len()).map(|g| self.sample_gene(g, rng)).collect(),
        }
    }
}

/// Genes hold zero-based indices into their domain: the candidate list for
/// unit genes, the demand ladder for demand genes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub genes: Vec<u32>,
}

impl Chromosome {
    pub fn unit_gene(&self, layout: &GenomeLayout, task: usize) -> u32 {
        self.genes[layout.offsets[task]]
    }

    /// Requested resource count of each demand gene of `task`.
    pub fn demands<'a>(&'a self, layout: &'a GenomeLayout, task: usize) -> impl Iterator<Item = u32> + 'a {
        let start = layout.offsets[task] + 1;
        let end = layout.offsets.get(task + 1).copied().unwrap_or(self.genes.len());
        (start..end).map(move |g| layout.demand(g, self.genes[g]))
    }

    /// Checks every gene against its domain.
    pub fn is_valid(&self, layout: &GenomeLayout) -> bool {
        self.genes.len() == layout.len() && self.genes.iter().enumerate().all(|(g, &v)| v < layout.cardinality(g))
    }
}

/// One contiguous first-fit grant: `len` resources starting at `start`.
#[derive(Debug, Clone, Copy)]
struct Block {
    link: usize,
    start: usize,
    len: usize,
}

/// Walks the chromosome in task order, granting each hop's demand from the
/// lowest free indices of its pool. Since nothing is ever released, the used
/// indices of a pool are always a prefix and each grant is contiguous.
fn decode_with<F>(chrom: &Chromosome, layout: &GenomeLayout, inst: &Instance<'_>, mut visit: F)
where
    F: FnMut(usize, usize, &[Block]),
{
    let topo = inst.topo;
    let mut used_intra = vec![0usize; topo.subnets.len()];
    let mut used_wan = 0usize;
    let mut blocks: Vec<Block> = Vec::with_capacity(4);

    for (ti, task) in inst.tasks.iter().enumerate() {
        let cand = &topo.candidates(task.source)[chrom.unit_gene(layout, ti) as usize];
        blocks.clear();
        for (hop, want) in cand.route.radio_hops().zip(chrom.demands(layout, ti)) {
            let link = &topo.links[hop.link];
            let (used, pool) = match hop.kind {
                HopKind::Intra => (
                    &mut used_intra[link.subnet.expect("intra links belong to a subnetwork")],
                    topo.pool.k_s_count,
                ),
                HopKind::Wan => (&mut used_wan, topo.pool.k_p_count),
                HopKind::Backhaul => unreachable!("radio hops only"),
            };
            let len = (want as usize).min(pool - *used);
            blocks.push(Block {
                link: link.id,
                start: *used,
                len,
            });
            *used += len;
        }
        visit(ti, cand.unit, &blocks);
    }
}

/// Decodes a chromosome into a concrete allocation.
pub fn decode(chrom: &Chromosome, layout: &GenomeLayout, inst: &Instance<'_>) -> Allocation {
    let mut entries = Vec::with_capacity(inst.tasks.len());
    decode_with(chrom, layout, inst, |_, unit, blocks| {
        entries.push(TaskAllocation {
            unit,
            grants: blocks
                .iter()
                .map(|b| (b.start as u32..(b.start + b.len) as u32).collect())
                .collect(),
        });
    });
    Allocation { entries }
}

/// Lower is better. The policy objective plus `infeasibility_penalty` per
/// capacity violation. Under the time-minimising objective an unserved task
/// (a hop left without resources) costs `infeasibility_penalty` instead of
/// an infinite time, so the search can still rank such candidates.
pub fn fitness(
    chrom: &Chromosome,
    layout: &GenomeLayout,
    policy: PolicyKind,
    inst: &Instance<'_>,
    ga: &GaConfig,
) -> f64 {
    let topo = inst.topo;
    let snap = inst.snapshot;
    let mut load = vec![0.0; topo.units.len()];
    let mut objective = 0.0;

    decode_with(chrom, layout, inst, |ti, unit, blocks| {
        let task = &inst.tasks[ti];
        load[unit] += task.cycles;
        let t_proc = task.cycles / topo.unit(unit).power_hz;
        let mut fwd = 0.0;
        let mut ret = 0.0;
        let mut feasible = true;
        if unit != task.source {
            let route = &topo.candidates(task.source)[chrom.unit_gene(layout, ti) as usize].route;
            let mut radio = blocks.iter();
            for hop in &route.hops {
                let rate = if hop.kind.is_radio() {
                    let b = radio.next().expect("one block per radio hop");
                    snap.block_rate(b.link, b.start, b.len)
                } else {
                    snap.backhaul_rate_bps()
                };
                if rate <= 0.0 {
                    feasible = false;
                    break;
                }
                fwd += task.size_bits / rate;
                ret += task.result_bits / rate;
            }
        }
        let total = fwd + t_proc + ret;
        objective += match policy {
            PolicyKind::Minimum if feasible => total,
            PolicyKind::Minimum => ga.infeasibility_penalty,
            _ if feasible && total <= task.deadline_s => 0.0,
            _ => inst.cfg.penalty_m,
        };
    });

    let violations = topo
        .units
        .iter()
        .filter(|u| u.can_process() && load[u.id] > u.capacity_cycles)
        .count();
    objective + ga.infeasibility_penalty * violations as f64
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub allocation: Allocation,
    pub best: Chromosome,
    pub best_score: f64,
    /// Best score after each generation, starting with the initial population.
    pub trace: Vec<f64>,
}

struct Scored {
    chrom: Chromosome,
    score: f64,
    serial: u64,
}

fn sort_population(pop: &mut [Scored]) {
    pop.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.serial.cmp(&b.serial)));
}

/// Runs the elitist GA for `policy`. Fitness evaluation is parallel but the
/// result is independent of thread count: all randomness is drawn
/// sequentially and scores are merged in population order.
pub fn run_ga<R: Rng + ?Sized>(
    policy: PolicyKind,
    inst: &Instance<'_>,
    ga: &GaConfig,
    rng: &mut R,
) -> Result<GaOutcome> {
    ga.validate()?;
    if policy == PolicyKind::Random {
        return Err(Error::argument("policy", "the random scheme is not optimised"));
    }
    let layout = GenomeLayout::new(inst.tasks, inst.topo);
    let elites = ga.elite_count();
    let mut serial = 0u64;

    let evaluate = |chroms: Vec<Chromosome>, serial: &mut u64| -> Vec<Scored> {
        let scores: Vec<f64> = chroms
            .par_iter()
            .map(|c| fitness(c, &layout, policy, inst, ga))
            .collect();
        chroms
            .into_iter()
            .zip(scores)
            .map(|(chrom, score)| {
                *serial += 1;
                Scored {
                    chrom,
                    score,
                    serial: *serial - 1,
                }
            })
            .collect()
    };

    let initial: Vec<Chromosome> = (0..ga.population).map(|_| layout.random(rng)).collect();
    let mut pop = evaluate(initial, &mut serial);
    sort_population(&mut pop);
    let mut trace = vec![pop[0].score];

    for _ in 0..ga.generations {
        pop.truncate(elites);
        let mut offspring = Vec::with_capacity(ga.population - elites);
        for _ in elites..ga.population {
            let a = rng.random_range(0..elites);
            let b = if elites > 1 {
                let b = rng.random_range(0..elites - 1);
                if b >= a {
                    b + 1
                } else {
                    b
                }
            } else {
                a
            };
            let (pa, pb) = (&pop[a].chrom.genes, &pop[b].chrom.genes);
            let mut genes: Vec<u32> = pa
                .iter()
                .zip(pb)
                .map(|(&x, &y)| if rng.random_bool(0.5) { x } else { y })
                .collect();
            if !genes.is_empty() && rng.random_bool(ga.mutation_rate) {
                let g = rng.random_range(0..genes.len());
                genes[g] = layout.sample_gene(g, rng);
            }
            offspring.push(Chromosome { genes });
        }
        pop.extend(evaluate(offspring, &mut serial));
        sort_population(&mut pop);
        trace.push(pop[0].score);
    }

    let best = pop.swap_remove(0);
    Ok(GaOutcome {
        allocation: decode(&best.chrom, &layout, inst),
        best: best.chrom,
        best_score: best.score,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_snapshot;
    use crate::evaluator::{check_constraints, evaluate, Violation};
    use crate::model::{build_topology, sample_tasks, TaskSplit};
    use crate::policies::{objective_deterministic, objective_minimum};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        cfg: ScenarioConfig,
        topo: Topology,
        tasks: Vec<TaskSpec>,
        snap: ChannelSnapshot,
    }

    impl Fixture {
        fn new(cfg: ScenarioConfig, seed: u64) -> Self {
            let topo = build_topology(&cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tasks = sample_tasks(&cfg, &topo, &mut rng);
            let snap = draw_snapshot(&topo, &cfg, &mut rng);
            Self { cfg, topo, tasks, snap }
        }

        fn inst(&self) -> Instance<'_> {
            Instance {
                tasks: &self.tasks,
                topo: &self.topo,
                snapshot: &self.snap,
                cfg: &self.cfg,
            }
        }
    }

    fn small_ga() -> GaConfig {
        GaConfig {
            population: 60,
            generations: 5,
            ..Default::default()
        }
    }

    #[test]
    fn ladder_spans_the_pool() {
        assert_eq!(
            demand_levels(273),
            vec![1, 2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256, 273]
        );
        assert_eq!(demand_levels(2), vec![1, 2]);
        assert_eq!(demand_levels(1), vec![1]);
    }

    #[test]
    fn default_elite_split() {
        let ga = GaConfig::default();
        assert_eq!(ga.elite_count(), 200);
        assert_eq!(ga.population - ga.elite_count(), 800);
    }

    #[test]
    fn first_fit_grants_are_disjoint_prefixes() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            tasks_per_subnet: 2,
            task_gen_split: TaskSplit {
                sne: 0.0,
                lc: 1.0,
                hc: 0.0,
            },
            k_s: 4,
            ..Default::default()
        };
        let fx = Fixture::new(cfg, 1);
        let layout = GenomeLayout::new(&fx.tasks, &fx.topo);
        assert_eq!(demand_levels(4), vec![1, 2, 3, 4]);
        // LC sources: unit gene 1 is the HC, one intra hop then one wan hop.
        // Ladder index 1 requests two resources.
        let chrom = Chromosome {
            genes: vec![1, 1, 0, 1, 1, 0],
        };
        assert!(chrom.is_valid(&layout));
        let alloc = decode(&chrom, &layout, &fx.inst());
        assert_eq!(alloc.entries[0].grants, vec![vec![0, 1]]);
        assert_eq!(alloc.entries[1].grants, vec![vec![2, 3]]);
        assert!(check_constraints(&alloc, &fx.tasks, &fx.topo, &fx.snap).is_empty());
    }

    #[test]
    fn exhausted_pool_leaves_second_task_unserved() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            tasks_per_subnet: 2,
            task_gen_split: TaskSplit {
                sne: 0.0,
                lc: 0.0,
                hc: 1.0,
            },
            ..Default::default()
        };
        let fx = Fixture::new(cfg, 2);
        let layout = GenomeLayout::new(&fx.tasks, &fx.topo);
        let kp = fx.topo.pool.k_p_count as u32;
        let top = demand_levels(kp as usize).len() as u32 - 1;
        let chrom = Chromosome {
            genes: vec![1, top, 2, top],
        };
        let alloc = decode(&chrom, &layout, &fx.inst());
        assert_eq!(alloc.entries[0].grants[0].len(), kp as usize);
        assert!(alloc.entries[1].grants[0].is_empty());
        let times = evaluate(&alloc, &fx.tasks, &fx.topo, &fx.snap).unwrap();
        assert!(!times[0].is_infeasible());
        assert!(times[1].is_infeasible());
    }

    #[test]
    fn fitness_examples() {
        let fx = Fixture::new(
            ScenarioConfig {
                n_subnets: 1,
                tasks_per_subnet: 3,
                ..Default::default()
            },
            3,
        );
        let inst = fx.inst();
        let layout = GenomeLayout::new(&fx.tasks, &fx.topo);
        let ga = GaConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let c = layout.random(&mut rng);
            let alloc = decode(&c, &layout, &inst);
            let times = evaluate(&alloc, &fx.tasks, &fx.topo, &fx.snap).unwrap();
            let cap = check_constraints(&alloc, &fx.tasks, &fx.topo, &fx.snap)
                .iter()
                .filter(|v| v.is_capacity())
                .count() as f64;
            let deadlines: Vec<f64> = fx.tasks.iter().map(|t| t.deadline_s).collect();
            let det = objective_deterministic(&times, &deadlines, 100.0) + 1e4 * cap;
            assert_eq!(fitness(&c, &layout, PolicyKind::Deterministic, &inst, &ga), det);

            let finite: Vec<_> = times.iter().copied().filter(|t| !t.is_infeasible()).collect();
            let unserved = (times.len() - finite.len()) as f64;
            let min = objective_minimum(&finite) + 1e4 * (cap + unserved);
            let got = fitness(&c, &layout, PolicyKind::Minimum, &inst, &ga);
            assert!((got - min).abs() <= 1e-9 * min.abs(), "{got} vs {min}");
        }
    }

    #[test]
    fn one_late_task_and_one_capacity_violation() {
        // Three LC-sourced tasks pinned locally on an LC with a tiny horizon.
        let cfg = ScenarioConfig {
            n_subnets: 1,
            tasks_per_subnet: 1,
            lc_per_subnet: 1,
            task_gen_split: TaskSplit {
                sne: 0.0,
                lc: 1.0,
                hc: 0.0,
            },
            episode_horizon_s: 0.001,
            ..Default::default()
        };
        let mut fx = Fixture::new(cfg, 4);
        fx.tasks[0].cycles = 50e6;
        fx.tasks[0].deadline_s = 0.010;
        let layout = GenomeLayout::new(&fx.tasks, &fx.topo);
        let chrom = Chromosome { genes: vec![0, 1, 1] };
        let ga = GaConfig::default();
        // 20 ms on a 2.5 GHz LC misses a 10 ms deadline; 5e7 cycles exceed 2.5e6.
        let f = fitness(&chrom, &layout, PolicyKind::Deterministic, &fx.inst(), &ga);
        assert_eq!(f, 10100.0);
        let f = fitness(&chrom, &layout, PolicyKind::Minimum, &fx.inst(), &ga);
        assert!((f - (0.020 + 1e4)).abs() < 1e-12);
    }

    #[test]
    fn trace_is_non_increasing_and_seeded() {
        let fx = Fixture::new(
            ScenarioConfig {
                n_subnets: 3,
                tasks_per_subnet: 10,
                ..Default::default()
            },
            5,
        );
        for policy in [PolicyKind::Minimum, PolicyKind::Deterministic] {
            let a = run_ga(policy, &fx.inst(), &small_ga(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = run_ga(policy, &fx.inst(), &small_ga(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a.trace.len(), small_ga().generations + 1);
            assert!(a.trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", a.trace);
            assert_eq!(a.allocation, b.allocation);
            assert_eq!(a.trace, b.trace);
            assert_eq!(*a.trace.last().unwrap(), a.best_score);
        }
    }

    #[test]
    fn random_policy_is_not_optimised() {
        let fx = Fixture::new(ScenarioConfig::default(), 6);
        let r = run_ga(
            PolicyKind::Random,
            &fx.inst(),
            &small_ga(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn invalid_ga_config() {
        let bad = GaConfig {
            elite_fraction: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            population: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decoded_chromosomes_never_collide(seed in any::<u64>(), n in 1usize..4, i in 1usize..20) {
            let fx = Fixture::new(
                ScenarioConfig { n_subnets: n, tasks_per_subnet: i, ..Default::default() },
                seed,
            );
            let layout = GenomeLayout::new(&fx.tasks, &fx.topo);
            let c = layout.random(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
            prop_assert!(c.is_valid(&layout));
            let alloc = decode(&c, &layout, &fx.inst());
            let v = check_constraints(&alloc, &fx.tasks, &fx.topo, &fx.snap);
            prop_assert!(v.iter().all(Violation::is_capacity), "{:?}", v);
        }
    }
}

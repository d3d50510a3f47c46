//! Topology, tasks and scenario configuration.
//!
//! A scenario is `n_subnets` identical subnetworks, each holding SNEs, LC
//! units and one HC unit, plus a single Edge and a single Cloud unit shared
//! by every subnetwork. Units are laid out contiguously per subnetwork
//! (SNEs, then LCs, then the HC), followed by Edge and Cloud.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type UnitId = usize;
pub type LinkId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitKind {
    Sne,
    Lc,
    Hc,
    Edge,
    Cloud,
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnitKind::Sne => "SNE",
            UnitKind::Lc => "LC",
            UnitKind::Hc => "HC",
            UnitKind::Edge => "Edge",
            UnitKind::Cloud => "Cloud",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeUnit {
    pub id: UnitId,
    pub kind: UnitKind,
    /// `None` for the global Edge and Cloud units.
    pub subnet: Option<usize>,
    pub power_hz: f64,
    /// Maximum cycles schedulable on this unit within one episode.
    pub capacity_cycles: f64,
}

impl ComputeUnit {
    pub fn can_process(&self) -> bool {
        self.power_hz > 0.0
    }
}

/// Task identifier: `index` within subnetwork `subnet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskId {
    pub index: usize,
    pub subnet: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub source: UnitId,
    pub cycles: f64,
    pub size_bits: f64,
    pub result_bits: f64,
    pub deadline_s: f64,
    pub birth_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourcePool {
    /// Intra-subnetwork resources, one independent pool per subnetwork.
    pub k_s_count: usize,
    /// Wide-area resources shared by all subnetworks.
    pub k_p_count: usize,
    pub resource_bw_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HopKind {
    Intra,
    Wan,
    Backhaul,
}

impl HopKind {
    pub fn is_radio(self) -> bool {
        !matches!(self, HopKind::Backhaul)
    }
}

/// A directed upward link between two units. The return direction reuses
/// the same link and channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub kind: HopKind,
    pub from: UnitId,
    pub to: UnitId,
    /// Subnetwork the link originates in; `None` for the backhaul.
    pub subnet: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub link: LinkId,
    pub kind: HopKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Route {
    pub hops: Vec<Hop>,
}

impl Route {
    pub fn is_local(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn radio_hops(&self) -> impl Iterator<Item = &Hop> {
        self.hops.iter().filter(|h| h.kind.is_radio())
    }

    pub fn radio_hop_count(&self) -> usize {
        self.radio_hops().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub unit: UnitId,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subnet {
    pub snes: Vec<UnitId>,
    pub lcs: Vec<UnitId>,
    pub hc: UnitId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub units: Vec<ComputeUnit>,
    pub subnets: Vec<Subnet>,
    pub edge: UnitId,
    pub cloud: UnitId,
    pub links: Vec<Link>,
    pub pool: ResourcePool,
    serving_lc: Vec<Option<UnitId>>,
    uplink: Vec<Option<LinkId>>,
    candidates: Vec<Vec<Candidate>>,
}

impl Topology {
    pub fn unit(&self, id: UnitId) -> &ComputeUnit {
        &self.units[id]
    }

    pub fn serving_lc(&self, sne: UnitId) -> Option<UnitId> {
        self.serving_lc[sne]
    }

    /// Units a task generated at `source` may be processed on, with their routes.
    pub fn candidates(&self, source: UnitId) -> &[Candidate] {
        &self.candidates[source]
    }

    pub fn route(&self, source: UnitId, target: UnitId) -> Option<&Route> {
        self.candidates[source]
            .iter()
            .find(|c| c.unit == target)
            .map(|c| &c.route)
    }

    /// Size of the resource pool that serves a hop of the given kind.
    pub fn pool_size(&self, kind: HopKind) -> usize {
        match kind {
            HopKind::Intra => self.pool.k_s_count,
            HopKind::Wan => self.pool.k_p_count,
            HopKind::Backhaul => 0,
        }
    }

    /// Units of `kind` in subnetwork `subnet`.
    pub fn units_of(&self, subnet: usize, kind: UnitKind) -> &[UnitId] {
        let s = &self.subnets[subnet];
        match kind {
            UnitKind::Sne => &s.snes,
            UnitKind::Lc => &s.lcs,
            UnitKind::Hc => std::slice::from_ref(&s.hc),
            UnitKind::Edge => std::slice::from_ref(&self.edge),
            UnitKind::Cloud => std::slice::from_ref(&self.cloud),
        }
    }

    /// True if `unit` is an LC or HC belonging to `subnet`.
    pub fn is_local_processor(&self, unit: UnitId, subnet: usize) -> bool {
        let u = &self.units[unit];
        matches!(u.kind, UnitKind::Lc | UnitKind::Hc) && u.subnet == Some(subnet)
    }

    fn path_to(&self, source: UnitId, target: UnitId) -> Route {
        let mut hops = Vec::new();
        let mut at = source;
        while at != target {
            let link = self.uplink[at].expect("target lies above source in the hierarchy");
            let l = &self.links[link];
            hops.push(Hop { link, kind: l.kind });
            at = l.to;
        }
        Route { hops }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..self.max)
        }
    }

    fn validate(&self, field: &'static str, positive: bool) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::config(
                field,
                format!("empty range [{}, {}]", self.min, self.max),
            ));
        }
        if positive && self.min <= 0.0 {
            return Err(Error::config(field, "range must be strictly positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitPowers {
    pub lc_hz: f64,
    pub hc_hz: f64,
    pub edge_hz: f64,
    pub cloud_hz: f64,
}

impl Default for UnitPowers {
    fn default() -> Self {
        Self {
            lc_hz: 2.5e9,
            hc_hz: 5e9,
            edge_hz: 7e10,
            cloud_hz: 1.5e11,
        }
    }
}

impl UnitPowers {
    pub fn of(&self, kind: UnitKind) -> f64 {
        match kind {
            UnitKind::Sne => 0.0,
            UnitKind::Lc => self.lc_hz,
            UnitKind::Hc => self.hc_hz,
            UnitKind::Edge => self.edge_hz,
            UnitKind::Cloud => self.cloud_hz,
        }
    }
}

/// Fractions of tasks generated by each source kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSplit {
    pub sne: f64,
    pub lc: f64,
    pub hc: f64,
}

impl Default for TaskSplit {
    fn default() -> Self {
        Self {
            sne: 0.6,
            lc: 0.2,
            hc: 0.2,
        }
    }
}

impl TaskSplit {
    /// Largest-remainder apportionment of `total` tasks into (SNE, LC, HC)
    /// counts. Ties go to the earlier kind.
    pub fn quotas(&self, total: usize) -> [usize; 3] {
        let fracs = [self.sne, self.lc, self.hc];
        let exact: Vec<f64> = fracs.iter().map(|f| f * total as f64).collect();
        let mut counts: [usize; 3] = [0; 3];
        for (c, e) in counts.iter_mut().zip(&exact) {
            *c = e.floor() as usize;
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        let assigned: usize = counts.iter().sum();
        for &k in order.iter().take(total.saturating_sub(assigned)) {
            counts[k] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_subnets: usize,
    pub tasks_per_subnet: usize,
    pub sne_per_subnet: usize,
    pub lc_per_subnet: usize,
    pub hc_per_subnet: usize,
    pub powers: UnitPowers,
    pub bw_s_hz: f64,
    pub bw_p_hz: f64,
    pub resource_bw_hz: f64,
    pub k_s: usize,
    pub k_p: usize,
    pub mean_sinr_intra_db: f64,
    pub mean_sinr_wan_db: f64,
    pub ber: f64,
    pub backhaul_rate_bps: f64,
    pub episode_horizon_s: f64,
    pub task_gen_split: TaskSplit,
    pub workload_range_cycles: UniformRange,
    pub size_range_bits: UniformRange,
    pub result_fraction: f64,
    pub deadline_range_s: UniformRange,
    pub penalty_m: f64,
    pub slot_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_subnets: 5,
            tasks_per_subnet: 5,
            sne_per_subnet: 15,
            lc_per_subnet: 4,
            hc_per_subnet: 1,
            powers: UnitPowers::default(),
            bw_s_hz: 100e6,
            bw_p_hz: 50e6,
            // 12 subcarriers at 30 kHz spacing.
            resource_bw_hz: 360e3,
            k_s: 273,
            k_p: 133,
            mean_sinr_intra_db: 30.0,
            mean_sinr_wan_db: 30.0,
            ber: 0.0,
            backhaul_rate_bps: 1e10,
            episode_horizon_s: 0.1,
            task_gen_split: TaskSplit::default(),
            workload_range_cycles: UniformRange::new(20e6, 50e6),
            size_range_bits: UniformRange::new(0.75e6, 2.25e6),
            result_fraction: 0.15,
            deadline_range_s: UniformRange::new(0.020, 0.100),
            penalty_m: 100.0,
            slot_s: 0.5e-3,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn pool(&self) -> ResourcePool {
        ResourcePool {
            k_s_count: self.k_s,
            k_p_count: self.k_p,
            resource_bw_hz: self.resource_bw_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        }
        fn nonzero(field: &'static str, v: usize) -> Result<()> {
            if v == 0 {
                Err(Error::config(field, "must be at least 1"))
            } else {
                Ok(())
            }
        }

        nonzero("n_subnets", self.n_subnets)?;
        nonzero("tasks_per_subnet", self.tasks_per_subnet)?;
        nonzero("sne_per_subnet", self.sne_per_subnet)?;
        nonzero("lc_per_subnet", self.lc_per_subnet)?;
        if self.hc_per_subnet != 1 {
            return Err(Error::config(
                "hc_per_subnet",
                "exactly one HC per subnetwork is supported",
            ));
        }
        nonzero("k_s", self.k_s)?;
        nonzero("k_p", self.k_p)?;
        positive("powers.lc_hz", self.powers.lc_hz)?;
        positive("powers.hc_hz", self.powers.hc_hz)?;
        positive("powers.edge_hz", self.powers.edge_hz)?;
        positive("powers.cloud_hz", self.powers.cloud_hz)?;
        positive("bw_s_hz", self.bw_s_hz)?;
        positive("bw_p_hz", self.bw_p_hz)?;
        positive("resource_bw_hz", self.resource_bw_hz)?;
        positive("backhaul_rate_bps", self.backhaul_rate_bps)?;
        positive("episode_horizon_s", self.episode_horizon_s)?;
        positive("penalty_m", self.penalty_m)?;
        positive("slot_s", self.slot_s)?;
        // Tolerate rounding in the product, e.g. 273 x 360 kHz.
        let slack = 1.0 + 1e-9;
        if self.k_s as f64 * self.resource_bw_hz > self.bw_s_hz * slack {
            return Err(Error::config("k_s", "k_s x resource_bw_hz exceeds bw_s_hz"));
        }
        if self.k_p as f64 * self.resource_bw_hz > self.bw_p_hz * slack {
            return Err(Error::config("k_p", "k_p x resource_bw_hz exceeds bw_p_hz"));
        }
        if !self.mean_sinr_intra_db.is_finite() {
            return Err(Error::config("mean_sinr_intra_db", "must be finite"));
        }
        if !self.mean_sinr_wan_db.is_finite() {
            return Err(Error::config("mean_sinr_wan_db", "must be finite"));
        }
        if !(0.0..1.0).contains(&self.ber) {
            return Err(Error::config("ber", "must lie in [0, 1)"));
        }
        let split = self.task_gen_split;
        if [split.sne, split.lc, split.hc].iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::config("task_gen_split", "fractions must lie in [0, 1]"));
        }
        if ((split.sne + split.lc + split.hc) - 1.0).abs() > 1e-9 {
            return Err(Error::config("task_gen_split", "fractions must sum to 1"));
        }
        self.workload_range_cycles.validate("workload_range_cycles", true)?;
        self.size_range_bits.validate("size_range_bits", true)?;
        self.deadline_range_s.validate("deadline_range_s", true)?;
        if !(0.0..=1.0).contains(&self.result_fraction) {
            return Err(Error::config("result_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Builds the unit set, link table, SNE-to-LC serving map and per-source
/// candidate routes.
pub fn build_topology(cfg: &ScenarioConfig) -> Result<Topology> {
    cfg.validate()?;
    let mut units = Vec::new();
    let mut subnets = Vec::with_capacity(cfg.n_subnets);

    let push = |units: &mut Vec<ComputeUnit>, kind: UnitKind, subnet: Option<usize>| {
        let id = units.len();
        let power_hz = cfg.powers.of(kind);
        units.push(ComputeUnit {
            id,
            kind,
            subnet,
            power_hz,
            capacity_cycles: power_hz * cfg.episode_horizon_s,
        });
        id
    };

    for n in 0..cfg.n_subnets {
        let snes = (0..cfg.sne_per_subnet)
            .map(|_| push(&mut units, UnitKind::Sne, Some(n)))
            .collect();
        let lcs = (0..cfg.lc_per_subnet)
            .map(|_| push(&mut units, UnitKind::Lc, Some(n)))
            .collect();
        let hc = push(&mut units, UnitKind::Hc, Some(n));
        subnets.push(Subnet { snes, lcs, hc });
    }
    let edge = push(&mut units, UnitKind::Edge, None);
    let cloud = push(&mut units, UnitKind::Cloud, None);

    let mut serving_lc = vec![None; units.len()];
    let mut uplink = vec![None; units.len()];
    let mut links = Vec::new();
    let add_link = |links: &mut Vec<Link>, kind, from, to, subnet| {
        let id = links.len();
        links.push(Link {
            id,
            kind,
            from,
            to,
            subnet,
        });
        id
    };

    for (n, s) in subnets.iter().enumerate() {
        for (k, &sne) in s.snes.iter().enumerate() {
            let lc = s.lcs[k % s.lcs.len()];
            serving_lc[sne] = Some(lc);
            uplink[sne] = Some(add_link(&mut links, HopKind::Intra, sne, lc, Some(n)));
        }
        for &lc in &s.lcs {
            uplink[lc] = Some(add_link(&mut links, HopKind::Intra, lc, s.hc, Some(n)));
        }
        uplink[s.hc] = Some(add_link(&mut links, HopKind::Wan, s.hc, edge, Some(n)));
    }
    uplink[edge] = Some(add_link(&mut links, HopKind::Backhaul, edge, cloud, None));

    let mut topo = Topology {
        units,
        subnets,
        edge,
        cloud,
        links,
        pool: cfg.pool(),
        serving_lc,
        uplink,
        candidates: Vec::new(),
    };

    let mut candidates = vec![Vec::new(); topo.units.len()];
    for s in &topo.subnets {
        for &sne in &s.snes {
            let lc = topo.serving_lc[sne].expect("every SNE has a serving LC");
            candidates[sne] = [lc, s.hc, edge, cloud]
                .iter()
                .map(|&u| Candidate {
                    unit: u,
                    route: topo.path_to(sne, u),
                })
                .collect();
        }
        for &lc in &s.lcs {
            candidates[lc] = [lc, s.hc, edge, cloud]
                .iter()
                .map(|&u| Candidate {
                    unit: u,
                    route: topo.path_to(lc, u),
                })
                .collect();
        }
        candidates[s.hc] = [s.hc, edge, cloud]
            .iter()
            .map(|&u| Candidate {
                unit: u,
                route: topo.path_to(s.hc, u),
            })
            .collect();
    }
    topo.candidates = candidates;
    Ok(topo)
}

/// Samples `tasks_per_subnet` tasks for every subnetwork, ordered by
/// (subnet, index).
pub fn sample_tasks<R: Rng + ?Sized>(cfg: &ScenarioConfig, topo: &Topology, rng: &mut R) -> Vec<TaskSpec> {
    let mut tasks = Vec::with_capacity(cfg.n_subnets * cfg.tasks_per_subnet);
    let quotas = cfg.task_gen_split.quotas(cfg.tasks_per_subnet);
    let kinds = [UnitKind::Sne, UnitKind::Lc, UnitKind::Hc];

    for subnet in 0..cfg.n_subnets {
        let mut source_kinds: Vec<UnitKind> = kinds
            .iter()
            .zip(quotas)
            .flat_map(|(&k, q)| std::iter::repeat_n(k, q))
            .collect();
        source_kinds.shuffle(rng);

        for (index, kind) in source_kinds.into_iter().enumerate() {
            let pool = topo.units_of(subnet, kind);
            let source = pool[rng.random_range(0..pool.len())];
            let cycles = cfg.workload_range_cycles.sample(rng);
            let size_bits = cfg.size_range_bits.sample(rng);
            let deadline_s = cfg.deadline_range_s.sample(rng);
            tasks.push(TaskSpec {
                id: TaskId { index, subnet },
                source,
                cycles,
                size_bits,
                result_bits: cfg.result_fraction * size_bits,
                deadline_s,
                birth_s: 0.0,
            });
        }
    }
    tasks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_topology_has_102_units() {
        let topo = build_topology(&ScenarioConfig::default()).unwrap();
        assert_eq!(topo.units.len(), 102);
        assert_eq!(topo.unit(topo.edge).kind, UnitKind::Edge);
        assert_eq!(topo.unit(topo.cloud).kind, UnitKind::Cloud);
    }

    #[test]
    fn round_robin_with_equal_counts() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            sne_per_subnet: 4,
            lc_per_subnet: 4,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        let mut served: Vec<UnitId> = topo.subnets[0]
            .snes
            .iter()
            .map(|&s| topo.serving_lc(s).unwrap())
            .collect();
        served.sort();
        assert_eq!(served, topo.subnets[0].lcs);
    }

    #[test]
    fn sne_to_cloud_route() {
        let topo = build_topology(&ScenarioConfig::default()).unwrap();
        let sne = topo.subnets[2].snes[5];
        let route = topo.route(sne, topo.cloud).unwrap();
        let kinds: Vec<HopKind> = route.hops.iter().map(|h| h.kind).collect();
        assert_eq!(kinds, [HopKind::Intra, HopKind::Intra, HopKind::Wan, HopKind::Backhaul]);
        let lc = topo.serving_lc(sne).unwrap();
        let l0 = &topo.links[route.hops[0].link];
        let l1 = &topo.links[route.hops[1].link];
        assert_eq!((l0.from, l0.to), (sne, lc));
        assert_eq!((l1.from, l1.to), (lc, topo.subnets[2].hc));
        assert_eq!(route.radio_hop_count(), 3);
    }

    #[test]
    fn candidate_sets_follow_hierarchy() {
        let topo = build_topology(&ScenarioConfig::default()).unwrap();
        let s = &topo.subnets[0];
        let units = |src| -> Vec<UnitId> { topo.candidates(src).iter().map(|c| c.unit).collect() };
        let sne = s.snes[0];
        assert_eq!(units(sne), [topo.serving_lc(sne).unwrap(), s.hc, topo.edge, topo.cloud]);
        assert_eq!(units(s.lcs[1]), [s.lcs[1], s.hc, topo.edge, topo.cloud]);
        assert_eq!(units(s.hc), [s.hc, topo.edge, topo.cloud]);
        assert!(topo.route(s.hc, s.hc).unwrap().is_local());
        assert!(topo.candidates(topo.edge).is_empty());
    }

    #[test]
    fn zero_counts_name_the_field() {
        let cfg = ScenarioConfig {
            lc_per_subnet: 0,
            ..Default::default()
        };
        match build_topology(&cfg) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "lc_per_subnet"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = ScenarioConfig {
            deadline_range_s: UniformRange::new(0.1, 0.02),
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "deadline_range_s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quota_split_for_ten_tasks() {
        assert_eq!(TaskSplit::default().quotas(10), [6, 2, 2]);
        assert_eq!(TaskSplit::default().quotas(5), [3, 1, 1]);
        assert_eq!(TaskSplit::default().quotas(7).iter().sum::<usize>(), 7);
    }

    #[test]
    fn sampled_split_and_result_fraction() {
        let cfg = ScenarioConfig {
            n_subnets: 2,
            tasks_per_subnet: 10,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        let tasks = sample_tasks(&cfg, &topo, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(tasks.len(), 20);
        for n in 0..2 {
            let mut counts = [0; 3];
            for t in tasks.iter().filter(|t| t.id.subnet == n) {
                let u = topo.unit(t.source);
                assert_eq!(u.subnet, Some(n));
                match u.kind {
                    UnitKind::Sne => counts[0] += 1,
                    UnitKind::Lc => counts[1] += 1,
                    UnitKind::Hc => counts[2] += 1,
                    k => panic!("task sourced at {k}"),
                }
                assert!((t.result_bits - 0.15 * t.size_bits).abs() < 1e-9);
            }
            assert_eq!(counts, [6, 2, 2]);
        }
    }

    #[test]
    fn result_fraction_example() {
        assert!((0.15_f64 * 2.0e6 - 0.3e6).abs() < 1e-6);
    }

    #[test]
    fn seeded_sampling_is_repeatable() {
        let cfg = ScenarioConfig::default();
        let topo = build_topology(&cfg).unwrap();
        let a = sample_tasks(&cfg, &topo, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_tasks(&cfg, &topo, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn json_overrides_and_defaults() {
        let cfg = ScenarioConfig::from_json_str(r#"{"n_subnets": 2, "mean_sinr_wan_db": 0}"#).unwrap();
        assert_eq!(cfg.n_subnets, 2);
        assert_eq!(cfg.mean_sinr_wan_db, 0.0);
        assert_eq!(cfg.k_s, 273);
        assert!(ScenarioConfig::from_json_str(r#"{"bogus": 1}"#).is_err());
    }
}

//! Rayleigh-faded channel draws and rate / transmission-time arithmetic.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::{HopKind, Link, LinkId, Route, ScenarioConfig, Topology};

/// Per-(link, resource) SINR draws for one episode, with the per-resource
/// rates derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    gamma: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
    // prefix[l][k] = sum of rates[l][..k]
    prefix: Vec<Vec<f64>>,
    backhaul_rate_bps: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Shannon rate of one resource, derated by the bit error rate.
pub fn resource_rate(bw_hz: f64, gamma_linear: f64, ber: f64) -> Result<f64> {
    if !(bw_hz > 0.0) {
        return Err(Error::argument("bw_hz", format!("must be positive, got {bw_hz}")));
    }
    if !(gamma_linear >= 0.0) {
        return Err(Error::argument(
            "gamma_linear",
            format!("must be nonnegative, got {gamma_linear}"),
        ));
    }
    if !(0.0..1.0).contains(&ber) {
        return Err(Error::argument("ber", format!("must lie in [0, 1), got {ber}")));
    }
    Ok(bw_hz * gamma_linear.ln_1p() / std::f64::consts::LN_2 * (1.0 - ber))
}

/// Draws one exponential SINR (Rayleigh power) per (link, resource).
///
/// Links are visited in id order and resources in index order, so a seeded
/// stream always yields the same snapshot for the same topology.
pub fn draw_snapshot<R: Rng + ?Sized>(topo: &Topology, cfg: &ScenarioConfig, rng: &mut R) -> ChannelSnapshot {
    let intra = Exp::new(1.0 / db_to_linear(cfg.mean_sinr_intra_db)).expect("positive mean");
    let wan = Exp::new(1.0 / db_to_linear(cfg.mean_sinr_wan_db)).expect("positive mean");

    let mut gamma = Vec::with_capacity(topo.links.len());
    for link in &topo.links {
        let draws: Vec<f64> = match link.kind {
            HopKind::Intra => (0..topo.pool.k_s_count).map(|_| intra.sample(rng)).collect(),
            HopKind::Wan => (0..topo.pool.k_p_count).map(|_| wan.sample(rng)).collect(),
            HopKind::Backhaul => Vec::new(),
        };
        gamma.push(draws);
    }
    ChannelSnapshot::from_gamma(gamma, cfg.resource_bw_hz, cfg.ber, cfg.backhaul_rate_bps)
}

impl ChannelSnapshot {
    /// Builds a snapshot from explicit SINR values (one row per link).
    pub fn from_gamma(gamma: Vec<Vec<f64>>, resource_bw_hz: f64, ber: f64, backhaul_rate_bps: f64) -> Self {
        let rates: Vec<Vec<f64>> = gamma
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&g| resource_rate(resource_bw_hz, g, ber).expect("validated channel inputs"))
                    .collect()
            })
            .collect();
        let prefix = rates
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                let mut p = Vec::with_capacity(row.len() + 1);
                p.push(0.0);
                for r in row {
                    acc += r;
                    p.push(acc);
                }
                p
            })
            .collect();
        Self {
            gamma,
            rates,
            prefix,
            backhaul_rate_bps,
        }
    }

    pub fn gamma(&self, link: LinkId, resource: usize) -> f64 {
        self.gamma[link][resource]
    }

    pub fn gammas(&self, link: LinkId) -> &[f64] {
        &self.gamma[link]
    }

    pub fn rate(&self, link: LinkId, resource: usize) -> f64 {
        self.rates[link][resource]
    }

    pub fn backhaul_rate_bps(&self) -> f64 {
        self.backhaul_rate_bps
    }

    /// Aggregate rate of the contiguous resource block `start..start + len`.
    pub(crate) fn block_rate(&self, link: LinkId, start: usize, len: usize) -> f64 {
        let p = &self.prefix[link];
        p[start + len] - p[start]
    }
}

/// Aggregate rate of a link given the resources granted on it. Backhaul
/// links ignore the grant and run at the fixed backhaul rate.
pub fn link_rate(link: &Link, grant: &[u32], snapshot: &ChannelSnapshot) -> Result<f64> {
    if link.kind == HopKind::Backhaul {
        return Ok(snapshot.backhaul_rate_bps);
    }
    let row = &snapshot.rates[link.id];
    grant.iter().try_fold(0.0, |acc, &k| {
        row.get(k as usize).map(|r| acc + r).ok_or(Error::Grant {
            link: link.id,
            index: k,
            pool: row.len(),
        })
    })
}

/// Time to move `bits` along `route`. `grants` holds one entry per radio hop
/// in route order.
pub fn transmission_time(
    bits: f64,
    route: &Route,
    grants: &[Vec<u32>],
    topo: &Topology,
    snapshot: &ChannelSnapshot,
) -> Result<f64> {
    let mut radio = grants.iter();
    let mut total = 0.0;
    for hop in &route.hops {
        let link = &topo.links[hop.link];
        let rate = if hop.kind.is_radio() {
            let grant = radio.next().map(Vec::as_slice).unwrap_or(&[]);
            link_rate(link, grant, snapshot)?
        } else {
            link_rate(link, &[], snapshot)?
        };
        if rate <= 0.0 {
            return Err(Error::InfeasibleLink { link: link.id });
        }
        total += bits / rate;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_topology;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp_sample_mean(mean_db: f64, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Exp::new(1.0 / db_to_linear(mean_db)).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn fading_means_match_exponential() {
        // Exp(mean) has std = mean, so 1e5 draws give a 0.3% standard error.
        let m30 = exp_sample_mean(30.0, 100_000, 1);
        assert!((m30 / 1000.0 - 1.0).abs() < 0.02, "{m30}");
        let m0 = exp_sample_mean(0.0, 100_000, 2);
        assert!((m0 - 1.0).abs() < 0.02, "{m0}");
    }

    #[test]
    fn snapshot_covers_every_link_and_is_seeded() {
        let cfg = ScenarioConfig {
            n_subnets: 2,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        let a = draw_snapshot(&topo, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let b = draw_snapshot(&topo, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        for link in &topo.links {
            let expected = topo.pool_size(link.kind);
            assert_eq!(a.gammas(link.id).len(), expected);
            assert!(a.gammas(link.id).iter().all(|g| *g >= 0.0));
        }
    }

    #[test]
    fn snapshot_means_follow_config() {
        let cfg = ScenarioConfig {
            mean_sinr_wan_db: 0.0,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        let snap = draw_snapshot(&topo, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let mean_of = |kind| {
            let vals: Vec<f64> = topo
                .links
                .iter()
                .filter(|l| l.kind == kind)
                .flat_map(|l| snap.gammas(l.id).iter().copied())
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        // 25k intra draws and 665 wan draws.
        assert!((mean_of(HopKind::Intra) / 1000.0 - 1.0).abs() < 0.05);
        assert!((mean_of(HopKind::Wan) - 1.0).abs() < 0.2);
    }

    #[test]
    fn resource_rate_examples() {
        let r = resource_rate(360e3, 1000.0, 0.0).unwrap();
        assert_relative_eq!(r, 360e3 * 1001f64.log2(), max_relative = 1e-12);
        assert_relative_eq!(r, 3.588e6, max_relative = 1e-3);
        assert_eq!(resource_rate(1e6, 0.0, 0.3).unwrap(), 0.0);
        assert_relative_eq!(resource_rate(360e3, 1.0, 0.5).unwrap(), 1.8e5, max_relative = 1e-12);
        assert!(resource_rate(-1.0, 1.0, 0.0).is_err());
        assert!(resource_rate(1.0, -1.0, 0.0).is_err());
        assert!(resource_rate(1.0, 1.0, 1.0).is_err());
    }

    fn two_resource_setup() -> (Topology, ChannelSnapshot) {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            sne_per_subnet: 1,
            lc_per_subnet: 1,
            k_s: 2,
            k_p: 2,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        // Links: SNE->LC, LC->HC, HC->Edge, Edge->Cloud.
        let gamma = vec![vec![1000.0, 1.0], vec![1000.0, 1000.0], vec![1.0, 1.0], vec![]];
        (topo, ChannelSnapshot::from_gamma(gamma, 360e3, 0.0, 1e10))
    }

    #[test]
    fn link_rate_sums_grants() {
        let (topo, snap) = two_resource_setup();
        let l0 = &topo.links[0];
        assert_eq!(link_rate(l0, &[], &snap).unwrap(), 0.0);
        let sum = link_rate(l0, &[0, 1], &snap).unwrap();
        assert_relative_eq!(sum, 360e3 * 1001f64.log2() + 360e3, max_relative = 1e-12);
        let backhaul = &topo.links[3];
        assert_eq!(link_rate(backhaul, &[0, 1], &snap).unwrap(), 1e10);
        assert!(matches!(link_rate(l0, &[7], &snap), Err(Error::Grant { index: 7, .. })));
    }

    #[test]
    fn transmission_time_examples() {
        let (topo, snap) = two_resource_setup();
        let sne = topo.subnets[0].snes[0];
        let lc = topo.subnets[0].lcs[0];
        let route = topo.route(sne, lc).unwrap();
        assert_eq!(transmission_time(0.0, route, &[vec![0]], &topo, &snap).unwrap(), 0.0);
        let t = transmission_time(1e6, route, &[vec![0]], &topo, &snap).unwrap();
        assert_relative_eq!(t, 1e6 / (360e3 * 1001f64.log2()), max_relative = 1e-12);
        assert_relative_eq!(t, 0.2787, max_relative = 1e-3);
        assert!(matches!(
            transmission_time(1e6, route, &[vec![]], &topo, &snap),
            Err(Error::InfeasibleLink { .. })
        ));
    }

    #[test]
    fn two_equal_hops() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            sne_per_subnet: 1,
            lc_per_subnet: 1,
            k_s: 1,
            k_p: 1,
            resource_bw_hz: 1e7,
            ..Default::default()
        };
        let topo = build_topology(&cfg).unwrap();
        // gamma = 1 gives exactly bw bits/s.
        let gamma = vec![vec![1.0], vec![1.0], vec![1.0], vec![]];
        let snap = ChannelSnapshot::from_gamma(gamma, 1e7, 0.0, 1e10);
        let s = &topo.subnets[0];
        let route = topo.route(s.snes[0], s.hc).unwrap();
        let t = transmission_time(1e6, route, &[vec![0], vec![0]], &topo, &snap).unwrap();
        assert_relative_eq!(t, 0.2, max_relative = 1e-12);
    }
}

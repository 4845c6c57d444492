//! Classicalized holographic tensor network.
//!
//! A binary MERA is built as a plain graph: leaves at layer 0, then per
//! layer a row of disentanglers on shifted wire pairs `(2j+1, 2j+2 mod w)`
//! followed by a row of isometries merging pairs `(2m, 2m+1)`. Each site of
//! the classicalized network holds an independent 1-bit spin mixture, so the
//! total entropy equals the discretized area `A_TN`, the site count.
//! Interval entropies are proxied by minimal cuts through unit-capacity bonds.

use std::collections::VecDeque;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{shannon_entropy, EntropyUnit};

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Leaf,
    Disentangler,
    Isometry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub kind: SiteKind,
    pub layer: usize,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub index: usize,
    /// Number of wires entering the layer.
    pub width_in: usize,
    pub disentanglers: Vec<usize>,
    pub isometries: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeraNetwork {
    pub schema_version: u32,
    pub n_leaves: usize,
    pub branching: usize,
    pub layers: Vec<Layer>,
    pub sites: Vec<Site>,
    pub bonds: Vec<(usize, usize)>,
    /// Site whose output leg is the top of the network.
    pub top: usize,
}

pub fn build_mera(n_leaves: usize) -> Result<MeraNetwork> {
    if n_leaves < 4 || !n_leaves.is_power_of_two() {
        return Err(Error::InvalidNetwork(format!("n_leaves must be a power of two >= 4, got {n_leaves}")));
    }
    let mut sites: Vec<Site> = (0..n_leaves)
        .map(|i| Site { id: i, kind: SiteKind::Leaf, layer: 0, position: i })
        .collect();
    let mut bonds = Vec::new();
    let mut layers = Vec::new();
    let mut wires: Vec<usize> = (0..n_leaves).collect();
    let add = |sites: &mut Vec<Site>, kind, layer, position| {
        let id = sites.len();
        sites.push(Site { id, kind, layer, position });
        id
    };

    let mut layer = 1;
    while wires.len() > 1 {
        let w = wires.len();
        let mut outputs = wires.clone();
        let mut disentanglers = Vec::new();
        if w >= 4 {
            for j in 0..w / 2 {
                let (a, b) = (2 * j + 1, (2 * j + 2) % w);
                let d = add(&mut sites, SiteKind::Disentangler, layer, j);
                bonds.push((wires[a], d));
                bonds.push((wires[b], d));
                outputs[a] = d;
                outputs[b] = d;
                disentanglers.push(d);
            }
        }
        let mut isometries = Vec::new();
        for m in 0..w / 2 {
            let u = add(&mut sites, SiteKind::Isometry, layer, m);
            bonds.push((outputs[2 * m], u));
            bonds.push((outputs[2 * m + 1], u));
            isometries.push(u);
        }
        layers.push(Layer { index: layer, width_in: w, disentanglers, isometries: isometries.clone() });
        wires = isometries;
        layer += 1;
    }
    Ok(MeraNetwork {
        schema_version: NETWORK_SCHEMA_VERSION,
        n_leaves,
        branching: 2,
        layers,
        sites,
        bonds,
        top: wires[0],
    })
}

impl MeraNetwork {
    /// Degenerate one-site network with no bonds.
    pub fn single_site() -> Self {
        MeraNetwork {
            schema_version: NETWORK_SCHEMA_VERSION,
            n_leaves: 1,
            branching: 2,
            layers: Vec::new(),
            sites: vec![Site { id: 0, kind: SiteKind::Leaf, layer: 0, position: 0 }],
            bonds: Vec::new(),
            top: 0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Discretized area `A_TN`: the number of sites. Bonds do not count.
    pub fn area(&self) -> usize {
        self.n_sites()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.sites.len()];
        for &(a, b) in &self.bonds {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.sites.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Network whose sites each carry an independent maximally mixed classical
/// spin (`σ_z = ±1` with probability ½).
#[derive(Clone, Debug)]
pub struct ClassicalizedHologram {
    network: MeraNetwork,
    a_tn: usize,
}

pub fn classicalize(network: &MeraNetwork) -> ClassicalizedHologram {
    ClassicalizedHologram { network: network.clone(), a_tn: network.area() }
}

impl ClassicalizedHologram {
    pub const SITE_DISTRIBUTION: [f64; 2] = [0.5, 0.5];

    pub fn network(&self) -> &MeraNetwork {
        &self.network
    }

    pub fn area(&self) -> usize {
        self.a_tn
    }

    pub fn site_entropy_bits(&self) -> f64 {
        shannon_entropy(&Self::SITE_DISTRIBUTION, EntropyUnit::Bits).expect("fixed valid distribution")
    }

    /// Sum of the independent per-site entropies.
    pub fn entropy_bits(&self) -> f64 {
        (0..self.a_tn).map(|_| self.site_entropy_bits()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinEvent {
    pub index: usize,
    pub site: usize,
    /// `+1` (up) or `-1` (down).
    pub spin: i8,
}

/// `n_events` independent fair spin readouts, cycling through the sites.
pub fn readout_spin_events(hologram: &ClassicalizedHologram, n_events: usize, seed: u64) -> Vec<SpinEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_events)
        .map(|index| SpinEvent {
            index,
            site: index % hologram.a_tn,
            spin: if rng.random::<bool>() { 1 } else { -1 },
        })
        .collect()
}

/// Whole spin events covered by `bits` of information, and the leftover fraction.
pub fn events_for_information(bits: f64) -> Result<(usize, f64)> {
    if !(bits >= 0.0 && bits.is_finite()) {
        return Err(Error::Domain(format!("information must be non-negative, got {bits}")));
    }
    let whole = bits.floor();
    Ok((whole as usize, bits - whole))
}

pub fn write_events_csv<W: Write>(events: &[SpinEvent], mut w: W) -> Result<()> {
    writeln!(w, "event,site,spin")?;
    for e in events {
        writeln!(w, "{},{},{}", e.index, e.site, e.spin)?;
    }
    Ok(())
}

/// Contiguous leaf range `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafInterval {
    pub start: usize,
    pub len: usize,
}

impl LeafInterval {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn contains(&self, leaf: usize) -> bool {
        leaf >= self.start && leaf < self.start + self.len
    }

    fn check(&self, network: &MeraNetwork) -> Result<()> {
        if self.len == 0 {
            return Err(Error::Domain("interval is empty".into()));
        }
        if self.start + self.len > network.n_leaves {
            return Err(Error::Domain(format!(
                "interval [{}, {}) exceeds {} leaves",
                self.start,
                self.start + self.len,
                network.n_leaves
            )));
        }
        Ok(())
    }
}

struct FlowNetwork {
    head: Vec<usize>,
    cap: Vec<u32>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        Self { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Arc pair `a→b` with capacity `c_ab` and `b→a` with `c_ba`.
    fn add(&mut self, a: usize, b: usize, c_ab: u32, c_ba: u32) {
        self.adj[a].push(self.head.len());
        self.head.push(b);
        self.cap.push(c_ab);
        self.adj[b].push(self.head.len());
        self.head.push(a);
        self.cap.push(c_ba);
    }

    /// Dinic's algorithm.
    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.adj.len();
        let mut flow = 0u64;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &e in &self.adj[v] {
                    let u = self.head[e];
                    if self.cap[e] > 0 && level[u] == usize::MAX {
                        level[u] = level[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
            if level[t] == usize::MAX {
                return flow;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, u32::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                flow += pushed as u64;
            }
        }
    }

    fn augment(&mut self, v: usize, t: usize, limit: u32, level: &[usize], next: &mut [usize]) -> u32 {
        if v == t {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let e = self.adj[v][next[v]];
            let u = self.head[e];
            if self.cap[e] > 0 && level[u] == level[v] + 1 {
                let got = self.augment(u, t, limit.min(self.cap[e]), level, next);
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            next[v] += 1;
        }
        0
    }
}

/// Minimum number of bonds (the top leg included) whose removal separates the
/// interval's leaves from the remaining leaves and the top of the network.
pub fn minimal_cut(network: &MeraNetwork, interval: LeafInterval) -> Result<usize> {
    interval.check(network)?;
    const INF: u32 = u32::MAX / 4;
    let n = network.n_sites();
    let (source, sink) = (n, n + 1);
    let mut g = FlowNetwork::new(n + 2);
    for &(a, b) in &network.bonds {
        g.add(a, b, 1, 1);
    }
    g.add(network.top, sink, 1, 0);
    for site in network.sites.iter().filter(|s| s.kind == SiteKind::Leaf) {
        if interval.contains(site.position) {
            g.add(source, site.id, INF, 0);
        } else {
            g.add(site.id, sink, INF, 0);
        }
    }
    Ok(g.max_flow(source, sink) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_leaf_network_matches_hand_count() {
        // layer 1: 2 disentanglers on wires (1,2), (3,0); 2 isometries on (0,1), (2,3)
        // layer 2: no disentangler at width 2; 1 isometry
        let net = build_mera(4).unwrap();
        assert_eq!(net.n_sites(), 9);
        assert_eq!(net.bonds.len(), 10);
        assert_eq!(net.n_layers(), 2);
        assert_eq!(net.layers[0].disentanglers.len(), 2);
        assert!(net.layers[1].disentanglers.is_empty());
        assert_eq!(net.sites[net.top].kind, SiteKind::Isometry);
    }

    #[test]
    fn layer_structure() {
        let net = build_mera(8).unwrap();
        assert_eq!(net.n_layers(), 3);
        let widths: Vec<_> = net.layers.iter().map(|l| l.width_in).collect();
        assert_eq!(widths, vec![8, 4, 2]);
        assert!(net.is_connected());
        let mut prev = 0;
        for n in [4, 8, 16, 32, 64] {
            let s = build_mera(n).unwrap().n_sites();
            assert_eq!(s, 3 * n - 3);
            assert!(s > prev);
            prev = s;
        }
        assert!(build_mera(6).is_err());
        assert!(build_mera(2).is_err());
    }

    #[test]
    fn every_non_top_site_bonds_upward() {
        let net = build_mera(16).unwrap();
        let adj = net.adjacency();
        for s in &net.sites {
            if s.id == net.top {
                continue;
            }
            let up = adj[s.id].iter().any(|&u| {
                let o = &net.sites[u];
                o.layer > s.layer || (o.layer == s.layer && o.kind == SiteKind::Isometry && s.kind == SiteKind::Disentangler)
            });
            assert!(up, "site {} has no upward bond", s.id);
        }
    }

    #[test]
    fn degenerate_network() {
        let h = classicalize(&MeraNetwork::single_site());
        assert_eq!(h.area(), 1);
        assert_eq!(h.entropy_bits(), 1.0);
    }

    #[test]
    fn events_and_information() {
        let h = classicalize(&build_mera(4).unwrap());
        assert!(readout_spin_events(&h, 0, 1).is_empty());
        let ev = readout_spin_events(&h, 20, 1);
        assert_eq!(ev[9].site, 0);
        assert_eq!(ev[10].site, 1);
        assert_eq!(events_for_information(3.75).unwrap(), (3, 0.75));
        assert!(events_for_information(-1.0).is_err());
        let mut buf = Vec::new();
        write_events_csv(&ev[..2], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("event,site,spin\n0,0,"));
    }

    #[test]
    fn interval_validation() {
        let net = build_mera(8).unwrap();
        assert!(minimal_cut(&net, LeafInterval::new(0, 0)).is_err());
        assert!(minimal_cut(&net, LeafInterval::new(6, 4)).is_err());
        assert_eq!(minimal_cut(&net, LeafInterval::new(0, 8)).unwrap(), 1);
        assert_eq!(minimal_cut(&net, LeafInterval::new(3, 1)).unwrap(), 1);
    }
}

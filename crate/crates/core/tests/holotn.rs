use wickledger::euclidean::{euclidean_action, information, sample_path, EuclideanParams};
use wickledger::holotn::{
    build_mera, classicalize, events_for_information, minimal_cut, readout_spin_events, write_events_csv,
    LeafInterval, MeraNetwork, SiteKind,
};
use wickledger::qstate::{shannon_entropy, EntropyUnit};
use wickledger::stats::linear_fit;

/// Shannon entropy of the joint distribution over all 2^A spin configurations.
fn joint_entropy_bits(n_sites: usize) -> f64 {
    let p = 0.5f64.powi(n_sites as i32);
    let probs = vec![p; 1 << n_sites];
    shannon_entropy(&probs, EntropyUnit::Bits).unwrap()
}

/// Exhaustive min-cut: every assignment of interior sites to the interval side
/// or the far side, counting crossing bonds plus the top leg.
fn brute_force_cut(net: &MeraNetwork, interval: LeafInterval) -> usize {
    let interior: Vec<usize> = net.sites.iter().filter(|s| s.kind != SiteKind::Leaf).map(|s| s.id).collect();
    let mut side = vec![false; net.n_sites()];
    for s in net.sites.iter().filter(|s| s.kind == SiteKind::Leaf) {
        side[s.id] = interval.contains(s.position);
    }
    let mut best = usize::MAX;
    for mask in 0u32..(1 << interior.len()) {
        for (k, &id) in interior.iter().enumerate() {
            side[id] = mask >> k & 1 == 1;
        }
        let crossing = net.bonds.iter().filter(|&&(a, b)| side[a] != side[b]).count();
        best = best.min(crossing + side[net.top] as usize);
    }
    best
}

#[test]
fn entropy_equals_area() {
    for n in [4, 8, 16, 64] {
        let net = build_mera(n).unwrap();
        let h = classicalize(&net);
        assert_eq!(h.area(), net.sites.len());
        assert_eq!(h.entropy_bits(), h.area() as f64);
    }
    let tiny = classicalize(&build_mera(4).unwrap());
    assert!(tiny.area() <= 20);
    assert!((joint_entropy_bits(tiny.area()) - tiny.entropy_bits()).abs() < 1e-9);
    let single = classicalize(&MeraNetwork::single_site());
    assert_eq!(single.entropy_bits(), 1.0);
}

#[test]
fn max_flow_matches_exhaustive_cut() {
    let net = build_mera(8).unwrap();
    for start in 0..8 {
        for len in 1..=8 - start {
            let interval = LeafInterval::new(start, len);
            assert_eq!(minimal_cut(&net, interval).unwrap(), brute_force_cut(&net, interval), "{interval:?}");
        }
    }
    let small = build_mera(4).unwrap();
    for start in 0..4 {
        for len in 1..=4 - start {
            let interval = LeafInterval::new(start, len);
            assert_eq!(minimal_cut(&small, interval).unwrap(), brute_force_cut(&small, interval));
        }
    }
}

#[test]
fn cuts_are_reflection_symmetric() {
    for n in [8, 16, 64] {
        let net = build_mera(n).unwrap();
        for start in 0..n {
            for len in 1..=n - start {
                let a = minimal_cut(&net, LeafInterval::new(start, len)).unwrap();
                let b = minimal_cut(&net, LeafInterval::new(n - start - len, len)).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn cuts_grow_under_inclusion_up_to_half_the_boundary() {
    for n in [8, 16] {
        let net = build_mera(n).unwrap();
        let cut = |s, l| minimal_cut(&net, LeafInterval::new(s, l)).unwrap();
        for s in 0..n {
            for l in 1..=(n / 2).min(n - s) {
                for s2 in s..s + l {
                    for l2 in 1..=s + l - s2 {
                        assert!(cut(s2, l2) <= cut(s, l), "[{s2},+{l2}) ⊂ [{s},+{l})");
                    }
                }
            }
        }
    }
    let net = build_mera(64).unwrap();
    let chain: Vec<usize> = [1, 2, 4, 8, 16, 32].iter().map(|&l| minimal_cut(&net, LeafInterval::new(0, l)).unwrap()).collect();
    assert!(chain.windows(2).all(|w| w[0] <= w[1]), "{chain:?}");
}

#[test]
fn cut_grows_logarithmically() {
    let net = build_mera(64).unwrap();
    let lens = [2usize, 4, 8, 16];
    let x: Vec<f64> = lens.iter().map(|&l| (l as f64).log2()).collect();
    let y: Vec<f64> = lens.iter().map(|&l| minimal_cut(&net, LeafInterval::new(0, l)).unwrap() as f64).collect();
    let fit = linear_fit(&x, &y).unwrap();
    assert!(fit.r_squared > 0.99, "{fit:?}");
    assert!(fit.slope > 0.0);
}

#[test]
fn bad_intervals_are_rejected() {
    let net = build_mera(8).unwrap();
    assert!(minimal_cut(&net, LeafInterval::new(0, 0)).is_err());
    assert!(minimal_cut(&net, LeafInterval::new(5, 4)).is_err());
}

#[test]
fn spin_events_are_fair_and_cycle_sites() {
    let h = classicalize(&build_mera(64).unwrap());
    let events = readout_spin_events(&h, 100_000, 12);
    let up = events.iter().filter(|e| e.spin == 1).count() as f64 / events.len() as f64;
    assert!((up - 0.5).abs() < 0.01, "up fraction {up}");
    assert!(events.iter().all(|e| e.spin == 1 || e.spin == -1));
    for e in events.iter().take(500) {
        assert_eq!(e.site, e.index % h.area());
    }
    assert_eq!(events, readout_spin_events(&h, 100_000, 12));

    let mut csv = Vec::new();
    write_events_csv(&events[..3], &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("event,site,spin"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn path_information_sets_event_count() {
    let path = sample_path(400, 0.01, &EuclideanParams::default(), 31).unwrap();
    let readout = information(euclidean_action(&path), path.hbar()).unwrap();
    let (n_events, remainder) = events_for_information(readout.bits).unwrap();
    assert_eq!(n_events, readout.bits.floor() as usize);
    assert!((0.0..1.0).contains(&remainder));
    assert!((n_events as f64 + remainder - readout.bits).abs() < 1e-9);

    let h = classicalize(&build_mera(16).unwrap());
    let events = readout_spin_events(&h, n_events, 4);
    // each fair spin carries one bit
    let per_event = shannon_entropy(&[0.5, 0.5], EntropyUnit::Bits).unwrap();
    assert_eq!(events.len() as f64 * per_event, n_events as f64);
    assert!(events_for_information(-1.0).is_err());
}

#[test]
fn network_json_roundtrip() {
    let net = build_mera(16).unwrap();
    let json = net.to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["sites"].as_array().unwrap().len(), 45);
    let back: MeraNetwork = serde_json::from_str(&json).unwrap();
    assert_eq!(back, net);
    assert_eq!(json, build_mera(16).unwrap().to_json().unwrap());
}

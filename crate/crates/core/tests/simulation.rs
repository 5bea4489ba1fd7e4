use proptest::prelude::*;
use uavbeacon_core::sim::{
    run, run_replicas, Behavior, Horizon, Imperfections, SimConfig, SimError, Simulator, TbJitter, Track, Waypoint,
};
use uavbeacon_core::{LinkParams, ProtocolParams, SelectionProbs, SimMetrics, State, StateShares};

fn shares(b: f64, s: f64, n: f64) -> StateShares {
    StateShares::new(b, s, n).unwrap()
}

fn rich_config() -> SimConfig {
    let mut c = SimConfig::new(ProtocolParams::reference(), shares(0.4, 0.4, 0.2), 5)
        .with_horizon(Horizon::DurationMs(200_000.0))
        .with_seed(99);
    c.scan_channels = vec![1, 1, 2, 1, 3];
    c.tracks = vec![
        Track::Static([0.0, 0.0, 0.0]),
        Track::Static([300.0, 0.0, 0.0]),
        Track::Static([0.0, 1200.0, 0.0]),
        Track::Static([0.0, 0.0, 1700.0]),
        Track::Waypoints(vec![
            Waypoint { t_ms: 0.0, pos: [10.0, 0.0, 0.0] },
            Waypoint { t_ms: 200_000.0, pos: [2000.0, 0.0, 0.0] },
        ]),
    ];
    c.link = Some(LinkParams { shadowing_sigma: 3.0, ..Default::default() });
    c.imperfections = Imperfections {
        tb_jitter: TbJitter::measured(),
        proc_cost_per_msg: 0.5,
        tx_buffer_frames: Some(11),
    };
    c
}

fn assert_conserved(m: &SimMetrics) {
    assert_eq!(m.rx_count + m.losses.total(), m.potential_pairs(), "{:?}", m.losses);
    assert_eq!(m.losses.collision, m.collisions_observed);
    assert_eq!(m.rx_per_node.iter().sum::<u64>(), m.rx_count);
    assert_eq!(m.tx_per_channel.iter().sum::<u64>(), m.tx_count);
    assert_eq!(m.airtime_ticks.iter().sum::<u64>(), m.tx_count);
}

#[test]
fn stepping_matches_bulk_run() {
    let c = rich_config();
    let mut sim = Simulator::new(c.clone()).unwrap();
    while !sim.is_finished() {
        sim.step();
    }
    assert_eq!(sim.into_metrics(), run(&c).unwrap());
}

#[test]
fn same_seed_same_run() {
    let c = rich_config();
    assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    let other = run(&c.clone().with_seed(100)).unwrap();
    assert_ne!(other.receptions, run(&c).unwrap().receptions);
}

#[test]
fn replicas_are_reproducible_and_distinct() {
    let c = SimConfig::baseline().with_horizon(Horizon::Transitions(2_000));
    let a = run_replicas(&c, 4).unwrap();
    assert_eq!(a, run_replicas(&c, 4).unwrap());
    assert_ne!(a[0].receptions, a[1].receptions);
}

#[test]
fn rich_config_conserves_pairs() {
    let m = run(&rich_config()).unwrap();
    assert_conserved(&m);
    assert!(m.losses.out_of_range > 0);
    assert!(m.losses.channel_mismatch > 0);
    assert!(m.tx_dropped > 0);
}

#[test]
fn lone_node_hears_nothing() {
    let c = SimConfig::new(ProtocolParams::reference(), shares(0.5, 0.5, 0.0), 1)
        .with_horizon(Horizon::Transitions(10_000));
    let m = run(&c).unwrap();
    assert!(m.tx_count > 0);
    assert_eq!(m.rx_count, 0);
    assert_eq!(m.losses.total(), 0);
}

#[test]
fn only_listening_scanners_receive() {
    let mut c = SimConfig::new(ProtocolParams::reference(), shares(0.4, 0.4, 0.2), 6)
        .with_horizon(Horizon::DurationMs(100_000.0));
    c.imperfections.proc_cost_per_msg = 2.0;
    let mut sim = Simulator::new(c).unwrap();
    let mut received = 0;
    while !sim.is_finished() {
        let before = sim.nodes().to_vec();
        let out = sim.step();
        for tx in &out.transmissions {
            assert_eq!(before[tx.sender].state, State::Broadcast);
        }
        for rx in &out.receptions {
            assert!(before[rx.receiver].is_listening(), "{rx:?} {:?}", before[rx.receiver]);
            assert_eq!(before[rx.sender].state, State::Broadcast);
            assert_eq!(before[rx.receiver].scan_channel, rx.channel);
            received += 1;
        }
    }
    assert!(received > 1000);
    assert_conserved(sim.metrics());
}

#[test]
fn broadcast_visits_every_channel_once() {
    let c = SimConfig::new(ProtocolParams::reference(), shares(0.5, 0.5, 0.0), 1);
    let mut sim = Simulator::new(c).unwrap();
    sim.force_state(0, State::Broadcast);
    let mut seen = Vec::new();
    for t in 0..30u64 {
        for tx in sim.step().transmissions {
            seen.push((t, tx.channel));
        }
    }
    let offsets = [0, 2, 4, 6, 9, 11, 13, 16, 18, 20, 23, 25, 27];
    let expected: Vec<(u64, u32)> = offsets.iter().zip(1..=13).map(|(&t, c)| (t, c)).collect();
    assert_eq!(seen, expected);
}

#[test]
fn networking_is_silent_for_its_whole_length() {
    let c = SimConfig::new(ProtocolParams::reference(), shares(0.5, 0.5, 0.0), 2);
    let mut sim = Simulator::new(c).unwrap();
    sim.force_state(0, State::Networking);
    sim.force_state(1, State::Networking);
    for _ in 0..100 {
        assert_eq!(sim.nodes()[0].state, State::Networking);
        let out = sim.step();
        assert!(out.transmissions.is_empty());
        assert!(out.receptions.is_empty());
    }
    assert_ne!(sim.nodes()[0].state, State::Networking, "left after 100 ticks unless redrawn");
}

#[test]
fn scan_listens_then_goes_blind() {
    let p = ProtocolParams::new(1.0, 13, 30.0, 60.0, 5.0, 100.0).unwrap();
    let mut sim = Simulator::new(SimConfig::new(p, shares(0.5, 0.5, 0.0), 1)).unwrap();
    sim.force_state(0, State::Scan);
    for t in 0..65u64 {
        assert_eq!(sim.nodes()[0].state, State::Scan, "tick {t}");
        assert_eq!(sim.nodes()[0].is_listening(), t < 60, "tick {t}");
        sim.step();
    }
}

/// Chi-square test of next-state draws against the selection probabilities,
/// per origin state. 13.82 is the 0.999 quantile with two degrees of freedom.
#[test]
fn next_state_draws_follow_selection() {
    let rho = SelectionProbs::new(0.2, 0.5, 0.3).unwrap();
    let c = SimConfig::new(ProtocolParams::reference(), Behavior::Selection(rho), 10)
        .with_horizon(Horizon::Transitions(20_000))
        .with_seed(5);
    let mut cfg = c;
    cfg.record_receptions = false;
    let m = run(&cfg).unwrap();
    let total: u64 = m.transitions.iter().flatten().sum();
    assert!(total >= 100_000, "{total}");
    let probs = rho.as_array();
    for row in m.transitions {
        let n: u64 = row.iter().sum();
        let chi2: f64 = row
            .iter()
            .zip(probs)
            .map(|(&o, p)| {
                let e = n as f64 * p;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < 13.82, "chi2 {chi2} for {row:?}");
    }
}

#[test]
fn channels_share_airtime_evenly() {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(200_000));
    c.record_receptions = false;
    let m = run(&c).unwrap();
    let per = m.tx_count as f64 / 13.0;
    for &n in &m.tx_per_channel {
        assert!((n as f64 - per).abs() / per < 0.01, "{:?}", m.tx_per_channel);
    }
    let duty = m.tx_count as f64 / m.ticks_in(State::Broadcast) as f64;
    assert!((duty - 13.0 / 30.0).abs() < 0.01, "duty {duty}");
}

#[test]
fn time_shares_match_targets() {
    let target = shares(0.3, 0.5, 0.2);
    let mut c = SimConfig::new(ProtocolParams::reference(), target, 4).with_horizon(Horizon::Transitions(20_000));
    c.record_receptions = false;
    let runs = run_replicas(&c, 8).unwrap();
    let m = SimMetrics::merge(&runs).unwrap();
    for (got, want) in m.state_shares().iter().zip(target.as_array()) {
        assert!((got - want).abs() < 0.01, "{:?}", m.state_shares());
    }
}

#[test]
fn full_buffer_drops_trailing_channels() {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(20_000));
    c.imperfections.tx_buffer_frames = Some(5);
    let m = run(&c).unwrap();
    assert!(m.tx_per_channel[..5].iter().all(|&n| n > 0));
    assert!(m.tx_per_channel[5..].iter().all(|&n| n == 0));
    let ratio = m.tx_dropped as f64 / m.tx_count as f64;
    assert!((ratio - 8.0 / 5.0).abs() < 0.01, "ratio {ratio}");
    assert_conserved(&m);
}

#[test]
fn processing_cost_blinds_the_receiver() {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(50_000));
    let clean = run(&c).unwrap();
    assert_eq!(clean.losses.blind, 0);
    c.imperfections.proc_cost_per_msg = 3.0;
    let loaded = run(&c).unwrap();
    assert!(loaded.losses.blind > 0);
    assert!(loaded.state_shares()[1] > clean.state_shares()[1]);
    assert_conserved(&loaded);
}

#[test]
fn jitter_keeps_thirteen_beacons_per_broadcast() {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(50_000));
    c.imperfections.tb_jitter = TbJitter::measured();
    let m = run(&c).unwrap();
    let broadcasts: u64 = m.transitions.iter().map(|row| row[0]).sum();
    let per = m.tx_count as f64 / broadcasts as f64;
    assert!((per - 13.0).abs() < 0.01, "{per}");
    let mean_len = m.ticks_in(State::Broadcast) as f64 / broadcasts as f64;
    assert!((mean_len - 31.5).abs() < 0.2, "{mean_len}");
}

fn at_distance(d: f64) -> SimMetrics {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(20_000)).with_seed(3);
    c.tracks = vec![Track::Static([0.0; 3]), Track::Static([d, 0.0, 0.0])];
    c.link = Some(LinkParams::default());
    run(&c).unwrap()
}

#[test]
fn threshold_link_is_all_or_nothing() {
    let ideal = run(&SimConfig::baseline().with_horizon(Horizon::Transitions(20_000)).with_seed(3)).unwrap();
    for d in [10.0, 900.0] {
        let m = at_distance(d);
        assert_eq!(m.rx_count, ideal.rx_count, "{d} m");
        assert_eq!(m.losses.out_of_range, 0);
    }
    let far = at_distance(1600.0);
    assert_eq!(far.rx_count, 0);
    assert!(far.losses.out_of_range > 0);
    assert_eq!(far.losses.collision, 0);
    assert_conserved(&far);
    let near = at_distance(900.0).mean_rssi().unwrap();
    assert!((near + 85.4).abs() < 0.1, "{near}");
}

#[test]
fn receptions_stop_beyond_range() {
    let end = 400_000.0;
    let mut c = SimConfig::baseline().with_horizon(Horizon::DurationMs(end));
    c.tracks = vec![
        Track::Static([0.0; 3]),
        Track::Waypoints(vec![Waypoint { t_ms: 0.0, pos: [1.0, 0.0, 0.0] }, Waypoint { t_ms: end, pos: [3000.0, 0.0, 0.0] }]),
    ];
    let link = LinkParams::default();
    c.link = Some(link);
    let m = run(&c).unwrap();
    let last = m.receptions.last().unwrap().time_ms as f64;
    let expected = (link.max_range() - 1.0) / 2999.0 * end;
    assert!((last - expected).abs() < 100.0, "last {last}, expected {expected}");
}

#[test]
fn merge_rejects_mismatched_runs() {
    let a = run(&SimConfig::baseline().with_horizon(Horizon::Transitions(100))).unwrap();
    let c = SimConfig::new(ProtocolParams::reference(), shares(0.5, 0.5, 0.0), 3).with_horizon(Horizon::Transitions(100));
    let b = run(&c).unwrap();
    assert!(SimMetrics::merge(&[a.clone(), b]).is_none());
    assert!(SimMetrics::merge(&[]).is_none());
    let m = SimMetrics::merge(&[a.clone(), a.clone()]).unwrap();
    assert_eq!(m.rx_count, 2 * a.rx_count);
    assert_eq!(m.window_count(), 2 * a.window_count());
}

#[test]
fn invalid_configs_are_rejected() {
    let too_fast = ProtocolParams::new(0.5, 13, 10.0, 60.0, 0.0, 100.0).unwrap();
    let c = SimConfig::new(too_fast, shares(0.5, 0.5, 0.0), 2);
    assert!(matches!(run(&c), Err(SimError::InvalidConfig(_))));

    let mut c = SimConfig::baseline();
    c.scan_channels = vec![1, 14];
    assert!(matches!(run(&c), Err(SimError::InvalidConfig(_))));

    let mut c = SimConfig::baseline();
    c.imperfections.tb_jitter = TbJitter::Uniform { min_ms: 39.0, max_ms: 24.0 };
    assert!(matches!(run(&c), Err(SimError::InvalidConfig(_))));

    let mut c = SimConfig::baseline();
    c.overrides = vec![(2, Behavior::Shares(shares(1.0, 0.0, 0.0)))];
    assert!(matches!(run(&c), Err(SimError::InvalidConfig(_))));

    let c = SimConfig::new(ProtocolParams::reference(), shares(0.5, 0.5, 0.0), 0);
    assert!(matches!(run(&c), Err(SimError::InvalidConfig(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairs_are_conserved(
        n in 1usize..7,
        pb in 0.05f64..0.9,
        pn_frac in 0.0f64..0.5,
        channels in prop::collection::vec(1u32..4, 7),
        cost in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let pn = (1.0 - pb) * pn_frac;
        let s = shares(pb, 1.0 - pb - pn, pn);
        let mut c = SimConfig::new(ProtocolParams::reference(), s, n)
            .with_horizon(Horizon::DurationMs(20_000.0))
            .with_seed(seed);
        c.scan_channels = channels[..n].to_vec();
        c.imperfections.proc_cost_per_msg = cost;
        let m = run(&c).unwrap();
        assert_conserved(&m);
        prop_assert!(m.rx_count <= m.potential_pairs());
    }
}

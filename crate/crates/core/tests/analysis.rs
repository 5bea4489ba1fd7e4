use uavbeacon_core::model::{collision_probability, expected_successes};
use uavbeacon_core::sim::{run, Horizon, SimConfig, Track};
use uavbeacon_core::stats::{
    collision_cdf_grid, networking_tradeoff, saturation_sweep, summarize, throughput_pdf, throughput_vs_distance,
    window_counts,
};
use uavbeacon_core::{LinkParams, ProtocolParams, SelectionProbs, StateShares, StatsError, WindowSpec};

fn baseline(transitions: u64) -> SimConfig {
    let mut c = SimConfig::baseline().with_horizon(Horizon::Transitions(transitions));
    c.record_receptions = false;
    c
}

#[test]
fn baseline_pdf_peaks_at_eight() {
    let m = run(&baseline(100_000)).unwrap();
    let h = throughput_pdf(&m, &WindowSpec::default()).unwrap();
    assert_eq!(h.mode(), Some(8.0));
    let area: f64 = h.pdf().iter().sum();
    assert!((area - 1.0).abs() < 1e-9);
    assert_eq!(h.total() as usize, 2 * m.window_count());
}

#[test]
fn shorter_broadcast_moves_the_peak_up() {
    let p = ProtocolParams::new(1.0, 13, 15.0, 60.0, 0.0, 100.0).unwrap();
    let mut c = SimConfig::new(p, StateShares::new(0.5, 0.5, 0.0).unwrap(), 2).with_horizon(Horizon::Transitions(100_000));
    c.record_receptions = false;
    let mode = throughput_pdf(&run(&c).unwrap(), &WindowSpec::default()).unwrap().mode().unwrap();
    assert!((14.0..=18.0).contains(&mode), "mode {mode}");
}

#[test]
fn transmitters_alone_receive_nothing() {
    let c = SimConfig::new(ProtocolParams::reference(), SelectionProbs::new(1.0, 0.0, 0.0).unwrap(), 3)
        .with_horizon(Horizon::DurationMs(50_000.0));
    let h = throughput_pdf(&run(&c).unwrap(), &WindowSpec::default()).unwrap();
    assert_eq!(h.counts, vec![150]);
    assert_eq!(h.pdf(), vec![1.0]);
}

#[test]
fn rewindowing_uses_the_reception_log() {
    let m = run(&SimConfig::baseline().with_horizon(Horizon::DurationMs(100_000.0))).unwrap();
    let fine = window_counts(&m, &WindowSpec::new(500.0).unwrap()).unwrap();
    assert_eq!(fine.len(), 400);
    assert_eq!(fine.iter().sum::<u64>(), m.rx_count);

    let quiet = run(&baseline(1_000)).unwrap();
    assert!(matches!(window_counts(&quiet, &WindowSpec::new(500.0).unwrap()), Err(StatsError::InvalidInput(_))));
}

fn tradeoff_configs(p_n: &[f64]) -> Vec<SimConfig> {
    p_n.iter()
        .map(|&v| {
            let mut c = SimConfig::new(ProtocolParams::reference(), StateShares::balanced(v).unwrap(), 2)
                .with_horizon(Horizon::DurationMs(400_000.0))
                .with_seed(11);
            c.record_receptions = false;
            c
        })
        .collect()
}

#[test]
fn networking_trades_off_against_beacons() {
    let r = networking_tradeoff(&tradeoff_configs(&[0.0, 0.25, 0.5, 0.75, 1.0]), 4).unwrap();
    assert_eq!(r.parameter, "p_n");
    let means: Vec<f64> = r.points.iter().map(|p| p.mean).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
    assert!((means[0] - 8.2).abs() < 0.5, "{means:?}");
    let last = r.points.last().unwrap();
    assert_eq!(last.mean, 0.0);
    assert_eq!(last.p_zero, 1.0);
    assert!((last.networking_rate - 10.0).abs() < 0.01, "{}", last.networking_rate);
    assert_eq!(r.points[0].networking_rate, 0.0);
}

#[test]
fn tradeoff_rejects_configs_differing_elsewhere() {
    let mut configs = tradeoff_configs(&[0.0, 0.5]);
    configs[1].n_nodes = 3;
    assert!(matches!(networking_tradeoff(&configs, 1), Err(StatsError::InvalidInput(_))));
    assert!(matches!(networking_tradeoff(&[], 1), Err(StatsError::EmptyData)));
}

#[test]
fn distance_table_follows_the_threshold() {
    let link = LinkParams::default();
    let ideal = run(&baseline(50_000).with_seed(2)).unwrap().mean_throughput();
    let runs: Vec<(f64, _)> = [10.0, 900.0, 1600.0]
        .iter()
        .map(|&d| {
            let mut c = baseline(50_000).with_seed(2);
            c.tracks = vec![Track::Static([0.0; 3]), Track::Static([0.0, 0.0, d])];
            c.link = Some(link);
            (d, run(&c).unwrap())
        })
        .collect();
    let rows = throughput_vs_distance(&runs, &link).unwrap();
    assert!((rows[0].mean_throughput - ideal).abs() / ideal < 0.05);
    assert!((rows[1].mean_throughput - ideal).abs() / ideal < 0.05);
    assert!((rows[1].mean_rssi_dbm.unwrap() + 85.4).abs() < 0.1);
    assert!((rows[1].model_rssi_dbm + 85.4).abs() < 0.1);
    assert_eq!(rows[2].mean_throughput, 0.0);
    assert_eq!(rows[2].mean_rssi_dbm, None);
}

#[test]
fn single_drone_row_never_collides() {
    let g = collision_cdf_grid(&[1, 4], &[0.0, 0.5, 1.0], &ProtocolParams::reference(), 20_000, 1).unwrap();
    assert_eq!(g.analytic[0], vec![0.0; 3]);
    assert_eq!(g.simulated[0], vec![0.0; 3]);
    assert_eq!(g.simulated[1][0], 0.0);
}

#[test]
fn analytic_surface_is_monotone() {
    let ks: Vec<u32> = (0..12).map(|i| 1 + 9 * i).collect();
    let pbs: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let p = ProtocolParams::reference();
    for i in 0..ks.len() {
        for j in 0..pbs.len() {
            let pb = pbs[j] * p.t_beacon / p.t_b;
            let v = collision_probability(pb, ks[i]).unwrap();
            if i > 0 {
                assert!(v >= collision_probability(pb, ks[i - 1]).unwrap());
            }
            if j > 0 {
                assert!(v >= collision_probability(pbs[j - 1] * p.t_beacon / p.t_b, ks[i]).unwrap());
            }
        }
    }
}

#[test]
fn summary_pools_replicas() {
    let runs: Vec<_> = (0..3).map(|s| run(&baseline(5_000).with_seed(s)).unwrap()).collect();
    let pt = summarize(1.0, &runs, &WindowSpec::default()).unwrap();
    let windows: usize = runs.iter().map(|m| m.window_count() * 2).sum();
    assert_eq!(pt.histogram.total() as usize, windows);
    let expected = expected_successes(
        &StateShares::new(0.5, 0.5, 0.0).unwrap(),
        &ProtocolParams::reference(),
        &WindowSpec::default(),
        2,
    )
    .unwrap();
    assert!((pt.mean_link - expected).abs() / expected < 0.1, "{} vs {expected}", pt.mean_link);
}

#[test]
fn saturation_input_checks() {
    assert!(matches!(saturation_sweep(&[], 60.0, 1.0, 1000.0, 0), Err(StatsError::EmptyData)));
    assert!(saturation_sweep(&[250.0], 60.0, 1.0, 1000.0, 0).is_err());
    assert!(saturation_sweep(&[0.0], 60.0, 1.0, 1000.0, 0).is_err());
}

#[test]
fn without_processing_cost_reception_is_linear() {
    let pts = saturation_sweep(&[20.0, 100.0, 200.0], 60.0, 0.0, 1_000_000.0, 3).unwrap();
    for p in &pts {
        assert!((p.received - p.sent).abs() < 1e-9, "{p:?}");
        assert!((p.sent - p.offered).abs() / p.offered < 0.03, "{p:?}");
    }
}

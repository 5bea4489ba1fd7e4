//! Closed-form probabilistic model of the broadcast/scan/networking protocol.
//!
//! A node repeatedly picks one of three states, independently of the state it
//! just left, and stays in it for a fixed duration. Selection probabilities
//! (`rho`) and long-run time shares (`P`) differ because the durations differ;
//! this module converts between the two and derives the beacon, collision and
//! throughput figures that follow from them.
//!
//! All durations are milliseconds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for simplex and timing identities.
pub const SIMPLEX_TOL: f64 = 1e-12;

const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::InvalidParameters(msg.into())
}

/// The three radio states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Broadcast,
    Scan,
    Networking,
}

impl State {
    pub const ALL: [State; 3] = [State::Broadcast, State::Scan, State::Networking];

    pub fn index(self) -> usize {
        match self {
            State::Broadcast => 0,
            State::Scan => 1,
            State::Networking => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            State::Broadcast => "broadcast",
            State::Scan => "scan",
            State::Networking => "networking",
        }
    }
}

/// Timing constants of the protocol.
///
/// `t_b = n_channels * (t_beacon + t_switch)` and `t_s = t_rx + t_comp_base`
/// must hold; use [`ProtocolParams::new`] to derive `t_switch` and `t_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Airtime of a single beacon.
    pub t_beacon: f64,
    /// Channel change overhead between two beacons of one broadcast event.
    pub t_switch: f64,
    /// Channels covered by one broadcast event.
    pub n_channels: u32,
    /// Broadcast event duration.
    pub t_b: f64,
    /// Active listening time of a scan.
    pub t_rx: f64,
    /// Processing time appended to a scan at low traffic.
    pub t_comp_base: f64,
    /// Scan event duration.
    pub t_s: f64,
    /// Networking event duration.
    pub t_n: f64,
}

impl ProtocolParams {
    /// Builds a parameter set, deriving `t_switch` from the broadcast duration
    /// and `t_s` from the scan decomposition.
    pub fn new(
        t_beacon: f64,
        n_channels: u32,
        t_b: f64,
        t_rx: f64,
        t_comp_base: f64,
        t_n: f64,
    ) -> Result<Self, ModelError> {
        if n_channels == 0 {
            return Err(invalid("n_channels must be positive"));
        }
        let p = ProtocolParams {
            t_beacon,
            t_switch: t_b / f64::from(n_channels) - t_beacon,
            n_channels,
            t_b,
            t_rx,
            t_comp_base,
            t_s: t_rx + t_comp_base,
            t_n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Measured timings of the reference hardware: 1 ms beacons, 30 ms
    /// broadcasts over 13 channels, 60 ms scans and 100 ms networking.
    pub fn reference() -> Self {
        ProtocolParams::new(1.0, 13, 30.0, 60.0, 0.0, 100.0).expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("t_beacon", self.t_beacon),
            ("t_b", self.t_b),
            ("t_rx", self.t_rx),
            ("t_s", self.t_s),
            ("t_n", self.t_n),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be a positive duration, got {v}")));
            }
        }
        // A tiny negative switch time is rounding noise from the derivation.
        if !(self.t_switch.is_finite() && self.t_switch >= -IDENTITY_TOL) {
            return Err(invalid(format!(
                "t_switch must be >= 0, got {} (t_b too short for {} beacons)",
                self.t_switch, self.n_channels
            )));
        }
        if !(self.t_comp_base.is_finite() && self.t_comp_base >= 0.0) {
            return Err(invalid(format!("t_comp_base must be >= 0, got {}", self.t_comp_base)));
        }
        if self.n_channels == 0 {
            return Err(invalid("n_channels must be positive"));
        }
        let tb = f64::from(self.n_channels) * (self.t_beacon + self.t_switch);
        if (tb - self.t_b).abs() > IDENTITY_TOL * self.t_b.max(1.0) {
            return Err(invalid(format!(
                "t_b = {} does not equal n_channels * (t_beacon + t_switch) = {tb}",
                self.t_b
            )));
        }
        if (self.t_rx + self.t_comp_base - self.t_s).abs() > IDENTITY_TOL * self.t_s.max(1.0) {
            return Err(invalid(format!(
                "t_s = {} does not equal t_rx + t_comp_base = {}",
                self.t_s,
                self.t_rx + self.t_comp_base
            )));
        }
        Ok(())
    }

    /// Duration of an event in the given state.
    pub fn duration(&self, state: State) -> f64 {
        match state {
            State::Broadcast => self.t_b,
            State::Scan => self.t_s,
            State::Networking => self.t_n,
        }
    }

    /// Spacing between consecutive beacon starts within a broadcast event.
    pub fn beacon_slot(&self) -> f64 {
        self.t_beacon + self.t_switch
    }
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self::reference()
    }
}

fn check_simplex(name: &str, v: [f64; 3]) -> Result<(), ModelError> {
    for x in v {
        if !x.is_finite() || !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&x) {
            return Err(invalid(format!("{name} component {x} outside [0, 1]")));
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Long-run share of time spent in each state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateShares {
    pub p_b: f64,
    pub p_s: f64,
    pub p_n: f64,
}

impl StateShares {
    pub fn new(p_b: f64, p_s: f64, p_n: f64) -> Result<Self, ModelError> {
        let s = StateShares { p_b, p_s, p_n };
        s.validate()?;
        Ok(s)
    }

    /// Equal broadcast and scan shares, the rest spent networking.
    pub fn balanced(p_n: f64) -> Result<Self, ModelError> {
        let half = (1.0 - p_n) / 2.0;
        Self::new(half, half, p_n)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_simplex("state shares", self.as_array())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_b, self.p_s, self.p_n]
    }

    pub fn get(&self, state: State) -> f64 {
        self.as_array()[state.index()]
    }
}

/// Probability of picking each state when the previous event completes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionProbs {
    pub rho_b: f64,
    pub rho_s: f64,
    pub rho_n: f64,
}

impl SelectionProbs {
    pub fn new(rho_b: f64, rho_s: f64, rho_n: f64) -> Result<Self, ModelError> {
        let s = SelectionProbs { rho_b, rho_s, rho_n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_simplex("selection probabilities", self.as_array())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rho_b, self.rho_s, self.rho_n]
    }

    pub fn get(&self, state: State) -> f64 {
        self.as_array()[state.index()]
    }
}

/// Observation window over which throughput is counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub t_w: f64,
}

impl WindowSpec {
    pub fn new(t_w: f64) -> Result<Self, ModelError> {
        if !(t_w.is_finite() && t_w > 0.0) {
            return Err(invalid(format!("window must be positive, got {t_w}")));
        }
        Ok(WindowSpec { t_w })
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { t_w: 1000.0 }
    }
}

/// Time shares implied by the selection probabilities: each state's share is
/// proportional to `rho_x * T_x`.
pub fn steady_state_shares(rho: &SelectionProbs, p: &ProtocolParams) -> Result<StateShares, ModelError> {
    rho.validate()?;
    p.validate()?;
    let weights = State::ALL.map(|s| rho.get(s) * p.duration(s));
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("all selected states have zero duration"));
    }
    Ok(StateShares {
        p_b: weights[0] / total,
        p_s: weights[1] / total,
        p_n: weights[2] / total,
    })
}

/// Inverse of [`steady_state_shares`]: `rho_x` proportional to `P_x / T_x`.
pub fn selection_probs(shares: &StateShares, p: &ProtocolParams) -> Result<SelectionProbs, ModelError> {
    shares.validate()?;
    p.validate()?;
    let mut weights = [0.0; 3];
    for s in State::ALL {
        let share = shares.get(s);
        let t = p.duration(s);
        if share > 0.0 && t <= 0.0 {
            return Err(invalid(format!("{} share is nonzero but its duration is zero", s.label())));
        }
        weights[s.index()] = if share > 0.0 { share / t } else { 0.0 };
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("state shares are all zero"));
    }
    Ok(SelectionProbs {
        rho_b: weights[0] / total,
        rho_s: weights[1] / total,
        rho_n: weights[2] / total,
    })
}

/// Probability of catching a node mid-beacon on one particular channel.
pub fn beacon_probability(shares: &StateShares, p: &ProtocolParams) -> f64 {
    (shares.p_b * p.t_beacon / p.t_b).clamp(0.0, 1.0)
}

/// Probability that at least one of the other `k - 1` nodes transmits while a
/// given beacon is on the air.
pub fn collision_probability(p_beacon: f64, k: u32) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p_beacon) {
        return Err(invalid(format!("beacon probability {p_beacon} outside [0, 1]")));
    }
    Ok(1.0 - (1.0 - p_beacon).powi(k as i32 - 1))
}

/// Probability that a listening node receives an uncollided beacon.
pub fn success_probability(shares: &StateShares, p: &ProtocolParams, k: u32) -> Result<f64, ModelError> {
    let collision = collision_probability(beacon_probability(shares, p), k)?;
    Ok(shares.p_s * shares.p_b * (1.0 - collision))
}

/// Average number of events of `state` started within one window.
pub fn expected_events(shares: &StateShares, p: &ProtocolParams, w: &WindowSpec, state: State) -> f64 {
    shares.get(state) * w.t_w / p.duration(state)
}

/// Average number of successful broadcasts per window between one sender and
/// one receiver.
pub fn expected_successes(
    shares: &StateShares,
    p: &ProtocolParams,
    w: &WindowSpec,
    k: u32,
) -> Result<f64, ModelError> {
    Ok(success_probability(shares, p, k)? * w.t_w / p.t_b)
}

/// Exponential inter-arrival rate (1/ms) for equal broadcast and scan shares
/// without networking.
pub fn interarrival_rate(p: &ProtocolParams) -> f64 {
    1.0 / (2.0 * p.t_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(t_b: f64, t_s: f64, t_n: f64) -> ProtocolParams {
        ProtocolParams::new(1.0, 13, t_b, t_s, 0.0, t_n).unwrap()
    }

    #[test]
    fn reference_identities() {
        let p = ProtocolParams::reference();
        assert_abs_diff_eq!(p.t_switch, 30.0 / 13.0 - 1.0, epsilon = 1e-12);
        assert_eq!(p.t_s, 60.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_inconsistent_timing() {
        let mut p = ProtocolParams::reference();
        p.t_s = 61.0;
        assert!(p.validate().is_err());
        let mut p = ProtocolParams::reference();
        p.t_switch = 0.5;
        assert!(p.validate().is_err());
        assert!(ProtocolParams::new(1.0, 13, 12.0, 60.0, 0.0, 100.0).is_err());
        assert!(ProtocolParams::new(1.0, 0, 30.0, 60.0, 0.0, 100.0).is_err());
        assert!(ProtocolParams::new(1.0, 13, 30.0, 60.0, -1.0, 100.0).is_err());
    }

    #[test]
    fn simplex_is_not_renormalized() {
        assert!(StateShares::new(0.5, 0.5, 1e-11).is_err());
        assert!(StateShares::new(0.5, 0.5, 1e-13).is_ok());
        assert!(SelectionProbs::new(1.2, -0.2, 0.0).is_err());
    }

    #[test]
    fn shares_worked_example() {
        let p = params(30.0, 60.0, 100.0);
        let rho = SelectionProbs::new(2.0 / 3.0, 1.0 / 3.0, 0.0).unwrap();
        let s = steady_state_shares(&rho, &p).unwrap();
        assert_abs_diff_eq!(s.p_b, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_s, 0.5, epsilon = 1e-12);
        assert_eq!(s.p_n, 0.0);
    }

    #[test]
    fn shares_single_state() {
        let p = params(30.0, 60.0, 100.0);
        let s = steady_state_shares(&SelectionProbs::new(1.0, 0.0, 0.0).unwrap(), &p).unwrap();
        assert_eq!(s.as_array(), [1.0, 0.0, 0.0]);
    }

    /// Long Markov-chain run of the semi-Markov process, timing every state.
    fn monte_carlo_shares(rho: &SelectionProbs, p: &ProtocolParams, transitions: usize, seed: u64) -> [f64; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut time = [0.0; 3];
        for _ in 0..transitions {
            let u: f64 = rng.gen();
            let s = if u < rho.rho_b {
                State::Broadcast
            } else if u < rho.rho_b + rho.rho_s {
                State::Scan
            } else {
                State::Networking
            };
            time[s.index()] += p.duration(s);
        }
        let total: f64 = time.iter().sum();
        time.map(|t| t / total)
    }

    #[test]
    fn shares_uniform_selection() {
        let p = params(30.0, 60.0, 100.0);
        let third = 1.0 / 3.0;
        let rho = SelectionProbs::new(third, third, 1.0 - 2.0 * third).unwrap();
        let s = steady_state_shares(&rho, &p).unwrap();
        assert_abs_diff_eq!(s.p_b, 30.0 / 190.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_s, 60.0 / 190.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_n, 100.0 / 190.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_b, 0.1579, epsilon = 1e-4);
        assert_abs_diff_eq!(s.p_n, 0.5263, epsilon = 1e-4);

        let mc = monte_carlo_shares(&rho, &p, 1_000_000, 7);
        for (a, b) in mc.iter().zip(s.as_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 3e-3);
        }
    }

    #[test]
    fn selection_worked_example() {
        let p = params(30.0, 60.0, 100.0);
        let rho = selection_probs(&StateShares::new(0.5, 0.5, 0.0).unwrap(), &p).unwrap();
        assert_abs_diff_eq!(rho.rho_b, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.rho_s, 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(rho.rho_n, 0.0);

        let rho = selection_probs(&StateShares::new(1.0, 0.0, 0.0).unwrap(), &p).unwrap();
        assert_eq!(rho.as_array(), [1.0, 0.0, 0.0]);

        let shares = StateShares::new(0.1579, 0.3158, 0.5263).unwrap();
        let rho = selection_probs(&shares, &p).unwrap();
        for r in rho.as_array() {
            assert_abs_diff_eq!(r, 1.0 / 3.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn beacon_probability_examples() {
        let p = params(30.0, 60.0, 100.0);
        let s = StateShares::new(0.5, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(beacon_probability(&s, &p), 1.0 / 60.0, epsilon = 1e-15);
        let idle = StateShares::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(beacon_probability(&idle, &p), 0.0);
        let saturated = ProtocolParams::new(1.0, 1, 1.0, 60.0, 0.0, 100.0).unwrap();
        let all_b = StateShares::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(beacon_probability(&all_b, &saturated), 1.0);
    }

    #[test]
    fn collision_examples() {
        assert_eq!(collision_probability(0.7, 1).unwrap(), 0.0);
        assert_abs_diff_eq!(collision_probability(1.0 / 60.0, 2).unwrap(), 1.0 / 60.0, epsilon = 1e-15);
        let c100 = collision_probability(1.0 / 60.0, 100).unwrap();
        assert_abs_diff_eq!(c100, 1.0 - (59.0f64 / 60.0).powi(99), epsilon = 1e-15);
        assert_abs_diff_eq!(c100, 0.8106, epsilon = 1e-4);
        assert!(matches!(collision_probability(0.1, 0), Err(ModelError::InvalidParameters(_))));
    }

    /// Brute force: draw k-1 Bernoulli transmitters and count "at least one".
    #[test]
    fn collision_matches_bernoulli_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0111DE);
        let samples = 1_000_000u32;
        for k in [1u32, 2, 5, 10, 50, 100] {
            for pb in [0.001, 0.01, 0.1, 0.5] {
                let mut hits = 0u32;
                for _ in 0..samples {
                    if (1..k).any(|_| rng.gen::<f64>() < pb) {
                        hits += 1;
                    }
                }
                let est = f64::from(hits) / f64::from(samples);
                let exact = collision_probability(pb, k).unwrap();
                let se = (exact * (1.0 - exact) / f64::from(samples)).sqrt();
                assert!(
                    (est - exact).abs() <= 3.0 * se + 1e-12,
                    "k={k} p={pb}: mc {est} vs {exact} (se {se})"
                );
            }
        }
    }

    #[test]
    fn success_examples() {
        let p = ProtocolParams::reference();
        let s = StateShares::new(0.5, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(success_probability(&s, &p, 2).unwrap(), 0.25 * 59.0 / 60.0, epsilon = 1e-15);
        assert_abs_diff_eq!(success_probability(&s, &p, 1).unwrap(), 0.25, epsilon = 1e-15);
        let deaf = StateShares::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(success_probability(&deaf, &p, 5).unwrap(), 0.0);
        assert!(success_probability(&s, &p, 0).is_err());
    }

    #[test]
    fn event_counts() {
        let p = ProtocolParams::reference();
        let w = WindowSpec::default();
        let s = StateShares::new(0.5, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(expected_events(&s, &p, &w, State::Broadcast), 50.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(expected_events(&s, &p, &w, State::Scan), 25.0 / 3.0, epsilon = 1e-12);
        assert_eq!(expected_events(&s, &p, &w, State::Networking), 0.0);
    }

    #[test]
    fn success_counts() {
        let p = ProtocolParams::reference();
        let w = WindowSpec::default();
        let s = StateShares::new(0.5, 0.5, 0.0).unwrap();
        let two = expected_successes(&s, &p, &w, 2).unwrap();
        assert_abs_diff_eq!(two, 25.0 / 3.0 * 59.0 / 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(two, 8.19, epsilon = 0.005);
        assert_abs_diff_eq!(expected_successes(&s, &p, &w, 1).unwrap(), 25.0 / 3.0, epsilon = 1e-12);
        let silent = StateShares::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(expected_successes(&silent, &p, &w, 2).unwrap(), 0.0);
    }

    #[test]
    fn interarrival_examples() {
        let p = ProtocolParams::reference();
        assert_abs_diff_eq!(interarrival_rate(&p), 0.008333, epsilon = 1e-6);
        let slow = ProtocolParams::new(1.0, 13, 30.0, 120.0, 0.0, 100.0).unwrap();
        assert_abs_diff_eq!(interarrival_rate(&slow), 0.0041667, epsilon = 1e-7);
        let glacial = ProtocolParams::new(1.0, 13, 30.0, 1e15, 0.0, 100.0).unwrap();
        assert!(interarrival_rate(&glacial) < 1e-15);
    }

    #[test]
    fn degenerate_shares() {
        let p = ProtocolParams::reference();
        assert!(selection_probs(&StateShares { p_b: 0.0, p_s: 0.0, p_n: 0.0 }, &p).is_err());
    }

    fn simplex() -> impl Strategy<Value = [f64; 3]> {
        (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c)| a + b + c > 1e-3)
            .prop_map(|(a, b, c)| {
                let t = a + b + c;
                let (a, b) = (a / t, b / t);
                [a, b, 1.0 - a - b]
            })
    }

    fn protocol() -> impl Strategy<Value = ProtocolParams> {
        (0.1f64..2.0, 1u32..14, 0.0f64..3.0, 1.0f64..200.0, 0.0f64..20.0, 1.0f64..300.0).prop_map(
            |(t_beacon, n_ch, sw, t_rx, comp, t_n)| {
                let t_b = f64::from(n_ch) * (t_beacon + sw);
                ProtocolParams::new(t_beacon, n_ch, t_b, t_rx, comp, t_n).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn selection_round_trip(v in simplex(), p in protocol()) {
            let rho = SelectionProbs::new(v[0], v[1], v[2]).unwrap();
            let shares = steady_state_shares(&rho, &p).unwrap();
            let back = selection_probs(&shares, &p).unwrap();
            for (a, b) in back.as_array().iter().zip(rho.as_array()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let shares2 = steady_state_shares(&selection_probs(&shares, &p).unwrap(), &p).unwrap();
            for (a, b) in shares2.as_array().iter().zip(shares.as_array()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn equal_durations_collapse_weighting(v in simplex(), d in 1.0f64..200.0) {
            let p = ProtocolParams::new(d / 13.0, 13, d, d, 0.0, d).unwrap();
            let rho = SelectionProbs::new(v[0], v[1], v[2]).unwrap();
            let shares = steady_state_shares(&rho, &p).unwrap();
            for (a, b) in shares.as_array().iter().zip(rho.as_array()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn collision_is_monotone(p1 in 0.0f64..1.0, p2 in 0.0f64..1.0, k1 in 1u32..200, k2 in 1u32..200) {
            let (lo_p, hi_p) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let (lo_k, hi_k) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
            let c = |p, k| collision_probability(p, k).unwrap();
            prop_assert!(c(lo_p, lo_k) <= c(hi_p, lo_k) + 1e-15);
            prop_assert!(c(lo_p, lo_k) <= c(lo_p, hi_k) + 1e-15);
            prop_assert_eq!(c(hi_p, 1), 0.0);
        }

        #[test]
        fn probabilities_in_unit_interval(v in simplex(), p in protocol(), k in 1u32..150) {
            let shares = StateShares::new(v[0], v[1], v[2]).unwrap();
            let pb = beacon_probability(&shares, &p);
            prop_assert!((0.0..=1.0).contains(&pb));
            let pc = collision_probability(pb, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&pc));
            let ps = success_probability(&shares, &p, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&ps));
            let w = WindowSpec::default();
            let succ = expected_successes(&shares, &p, &w, k).unwrap();
            prop_assert!(succ <= expected_events(&shares, &p, &w, State::Broadcast) + 1e-12);
        }
    }
}

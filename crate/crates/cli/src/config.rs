//! Experiment configuration file.
//!
//! A single TOML file with optional sections; anything left out falls back to
//! the reference hardware profile, so an empty file (or no file) reproduces
//! the two-node baseline.
//!
//! ```toml
//! kind = "simulate"          # optional; must match the subcommand when set
//! seed = 7
//! format = "csv"             # csv | json
//! out_dir = "results"
//!
//! [protocol]                 # t_beacon, n_channels, t_b, t_rx, t_comp_base, t_n (ms)
//! t_b = 30.0
//!
//! [shares]                   # target time shares; or [selection] with rho_b, rho_s, rho_n
//! p_b = 0.5
//! p_s = 0.5
//! p_n = 0.0
//!
//! [sim]
//! n_nodes = 2
//! transitions = 1000000      # or duration_ms
//! window_ms = 1000.0
//! scan_channels = []         # one 1-based channel per node; empty means channel 1
//! spacing_m = 100.0          # nodes on a line; or positions = [[x, y, z], ...]
//! record_receptions = true
//!
//! [link]                     # presence enables the path-loss model
//! sensitivity = -90.0
//!
//! [imperfections]
//! tb_jitter_ms = [24.0, 39.0]
//! proc_cost_per_msg = 1.0
//! tx_buffer_frames = 8
//!
//! [analyze]
//! k = [1, 2, 5, 10, 100]
//!
//! [sweep]
//! axis = "t_s"               # t_s | t_b | p_n | n_nodes | distance | offered_load
//! values = [30.0, 60.0, 120.0]
//! replicas = 1
//!
//! [grid]
//! k = [1, 10, 19]
//! p_b = [0.0, 0.5, 1.0]
//! budget = 1000000
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use uavbeacon_core::sim::{Horizon, Imperfections, SimConfig, TbJitter, Track};
use uavbeacon_core::{Behavior, LinkParams, ProtocolParams, SelectionProbs, StateShares, WindowSpec};

use crate::error::CliError;
use crate::output::{Format, DEFAULT_OUT_DIR, OUT_ENV};

pub const DEFAULT_TRANSITIONS: u64 = 1_000_000;

/// Processing cost per received message used by the saturation sweep when the
/// config does not set one. A calibration placeholder, not a measurement.
pub const DEFAULT_PROC_COST_MS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Analyze,
    Simulate,
    Sweep,
    Grid,
    FitPathloss,
    Codec,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Analyze => "analyze",
            Kind::Simulate => "simulate",
            Kind::Sweep => "sweep",
            Kind::Grid => "grid",
            Kind::FitPathloss => "fit-pathloss",
            Kind::Codec => "codec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    #[value(name = "t_s")]
    TS,
    #[value(name = "t_b")]
    TB,
    #[value(name = "p_n")]
    PN,
    #[value(name = "n_nodes")]
    NNodes,
    #[value(name = "distance")]
    Distance,
    #[value(name = "offered_load")]
    OfferedLoad,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::TS => "t_s",
            Axis::TB => "t_b",
            Axis::PN => "p_n",
            Axis::NNodes => "n_nodes",
            Axis::Distance => "distance",
            Axis::OfferedLoad => "offered_load",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Axis::TS => vec![30.0, 60.0, 120.0],
            Axis::TB => vec![15.0, 30.0, 60.0],
            Axis::PN => vec![0.0, 0.25, 0.5],
            Axis::NNodes => vec![2.0, 5.0, 10.0],
            Axis::Distance => vec![10.0, 300.0, 600.0, 900.0, 1200.0, 1400.0, 1600.0],
            Axis::OfferedLoad => vec![10.0, 25.0, 50.0, 75.0, 100.0, 150.0, 200.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out_dir: Option<PathBuf>,
    pub protocol: ProtocolSection,
    pub shares: Option<StateShares>,
    pub selection: Option<SelectionProbs>,
    pub sim: SimSection,
    pub link: Option<LinkParams>,
    pub imperfections: ImperfectionsSection,
    pub analyze: AnalyzeSection,
    pub sweep: SweepSection,
    pub grid: GridSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub t_beacon: f64,
    pub n_channels: u32,
    pub t_b: f64,
    pub t_rx: f64,
    pub t_comp_base: f64,
    pub t_n: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolParams::reference();
        ProtocolSection {
            t_beacon: p.t_beacon,
            n_channels: p.n_channels,
            t_b: p.t_b,
            t_rx: p.t_rx,
            t_comp_base: p.t_comp_base,
            t_n: p.t_n,
        }
    }
}

impl ProtocolSection {
    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        Ok(ProtocolParams::new(self.t_beacon, self.n_channels, self.t_b, self.t_rx, self.t_comp_base, self.t_n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub n_nodes: usize,
    pub transitions: Option<u64>,
    pub duration_ms: Option<f64>,
    pub window_ms: f64,
    pub scan_channels: Vec<u32>,
    pub spacing_m: Option<f64>,
    pub positions: Vec<[f64; 3]>,
    pub record_receptions: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            n_nodes: 2,
            transitions: None,
            duration_ms: None,
            window_ms: WindowSpec::default().t_w,
            scan_channels: Vec::new(),
            spacing_m: None,
            positions: Vec::new(),
            record_receptions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImperfectionsSection {
    /// `[min, max]` bounds of a uniform broadcast duration, ms.
    pub tb_jitter_ms: Option<[f64; 2]>,
    pub proc_cost_per_msg: Option<f64>,
    pub tx_buffer_frames: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    pub k: Vec<u32>,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        AnalyzeSection { k: vec![1, 2, 5, 10, 100] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub values: Vec<f64>,
    pub replicas: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axis: None, values: Vec::new(), replicas: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub k: Vec<u32>,
    pub p_b: Vec<f64>,
    /// Simulated transitions per grid point.
    pub budget: u64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            k: (0..12).map(|i| 1 + 9 * i).collect(),
            p_b: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            budget: DEFAULT_TRANSITIONS,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub transitions: Option<u64>,
    pub duration_ms: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config file. Unknown keys and type errors are reported with
    /// their location.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&text).map_err(|message| CliError::Config { path: path.to_path_buf(), message })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Loads `path` if given, else the defaults, and checks `kind` against the
    /// running command.
    pub fn for_command(path: Option<&Path>, command: Kind) -> Result<Self, CliError> {
        let cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(kind) = cfg.kind {
            if kind != command {
                return Err(CliError::Config {
                    path: path.map(Path::to_path_buf).unwrap_or_default(),
                    message: format!("config is for `{}` but the command is `{}`", kind.name(), command.name()),
                });
            }
        }
        Ok(cfg)
    }

    pub fn seed(&self, ov: &Overrides) -> u64 {
        ov.seed.or(self.seed).unwrap_or(0)
    }

    pub fn format(&self, ov: &Overrides) -> Format {
        ov.format.or(self.format).unwrap_or_default()
    }

    /// Flag, then config file, then the environment, then a fixed default.
    pub fn out_dir(&self, ov: &Overrides) -> PathBuf {
        ov.out
            .clone()
            .or_else(|| self.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn behavior(&self) -> Result<Behavior, CliError> {
        match (self.shares, self.selection) {
            (Some(_), Some(_)) => Err(CliError::Input("set either [shares] or [selection], not both".into())),
            (Some(s), None) => {
                s.validate()?;
                Ok(Behavior::Shares(s))
            }
            (None, Some(r)) => {
                r.validate()?;
                Ok(Behavior::Selection(r))
            }
            (None, None) => Ok(Behavior::Shares(StateShares::new(0.5, 0.5, 0.0)?)),
        }
    }

    pub fn horizon(&self, ov: &Overrides) -> Result<Horizon, CliError> {
        match (ov.transitions, ov.duration_ms) {
            (Some(_), Some(_)) => return Err(CliError::Input("give --transitions or --duration-ms, not both".into())),
            (Some(n), None) => return Ok(Horizon::Transitions(n)),
            (None, Some(d)) => return Ok(Horizon::DurationMs(d)),
            (None, None) => {}
        }
        match (self.sim.transitions, self.sim.duration_ms) {
            (Some(_), Some(_)) => Err(CliError::Input("[sim] sets both transitions and duration_ms".into())),
            (Some(n), None) => Ok(Horizon::Transitions(n)),
            (None, Some(d)) => Ok(Horizon::DurationMs(d)),
            (None, None) => Ok(Horizon::Transitions(DEFAULT_TRANSITIONS)),
        }
    }

    pub fn imperfections(&self) -> Imperfections {
        let imp = &self.imperfections;
        Imperfections {
            tb_jitter: imp
                .tb_jitter_ms
                .map_or(TbJitter::Off, |[min_ms, max_ms]| TbJitter::Uniform { min_ms, max_ms }),
            proc_cost_per_msg: imp.proc_cost_per_msg.unwrap_or(0.0),
            tx_buffer_frames: imp.tx_buffer_frames,
        }
    }

    fn tracks(&self, n: usize) -> Result<Vec<Track>, CliError> {
        match (self.sim.spacing_m, self.sim.positions.is_empty()) {
            (Some(_), false) => Err(CliError::Input("[sim] sets both spacing_m and positions".into())),
            (Some(s), true) => {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(CliError::Input(format!("spacing_m must be >= 0, got {s}")));
                }
                Ok((0..n).map(|i| Track::Static([s * i as f64, 0.0, 0.0])).collect())
            }
            (None, false) => Ok(self.sim.positions.iter().map(|p| Track::Static(*p)).collect()),
            (None, true) => Ok(Vec::new()),
        }
    }

    pub fn sim_config(&self, ov: &Overrides) -> Result<SimConfig, CliError> {
        let n = ov.nodes.unwrap_or(self.sim.n_nodes);
        let mut c = SimConfig::new(self.protocol.params()?, self.behavior()?, n);
        c.scan_channels = self.sim.scan_channels.clone();
        c.tracks = self.tracks(n)?;
        c.link = self.link;
        c.horizon = self.horizon(ov)?;
        c.seed = self.seed(ov);
        c.imperfections = self.imperfections();
        c.window = WindowSpec::new(self.sim.window_ms)?;
        c.record_receptions = self.sim.record_receptions;
        c.validate()?;
        Ok(c)
    }
}

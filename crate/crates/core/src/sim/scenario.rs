use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{QLearningConfig, StructuredConfig};
use crate::error::{Error, Result};
use crate::node::{check_stochastic, NodeConfig};

/// The shipped default scenario.
pub const DEFAULT_SCENARIO: &str = include_str!("../../../../scenarios/default.toml");

/// Ground-truth overrides starting at `start_frame` and holding until the
/// next segment. Unset fields fall back to the node configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSegment {
    pub start_frame: u64,
    pub app_transition: Option<Vec<Vec<f64>>>,
    pub app_packet_prob: Option<Vec<f64>>,
    pub connect_time: Option<f64>,
}

/// True environment parameters in force during one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub app_transition: Vec<Vec<f64>>,
    pub app_packet_prob: Vec<f64>,
    pub connect_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSettings {
    pub duration_frames: u64,
    /// Frames excluded from latency and energy metrics.
    pub warmup_frames: u64,
    pub seed: u64,
    /// Each connect lasts `T_C * (1 + jitter * u)` with `u` uniform in [-1, 1].
    pub connect_jitter: f64,
    pub schedule: Vec<ScheduleSegment>,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        Self { duration_frames: 36_000, warmup_frames: 0, seed: 1, connect_jitter: 0.25, schedule: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSettings {
    pub nq: usize,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        Self { nq: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub r2: Vec<f64>,
    /// Thresholds to sweep; empty means 1..=capacity.
    pub nq: Vec<usize>,
    pub seeds: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { r2: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 100.0, 1000.0], nq: Vec::new(), seeds: 5 }
    }
}

/// Everything a scenario file can hold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub node: NodeConfig,
    pub scenario: ScenarioSettings,
    pub structured: StructuredConfig,
    pub qlearning: QLearningConfig,
    pub threshold: ThresholdSettings,
    pub sweep: SweepSettings,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.scenario().and_then(|s| s.validate())?;
        Ok(file)
    }

    pub fn default_scenario() -> Self {
        Self::parse(DEFAULT_SCENARIO).expect("shipped scenario parses")
    }

    /// Loads a file, or the shipped scenario for the name `default`.
    pub fn load(path: &str) -> Result<Self> {
        if path == "default" {
            return Ok(Self::default_scenario());
        }
        let text = std::fs::read_to_string(Path::new(path))?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.node.clone(), self.scenario.clone())
    }

    pub fn thresholds(&self) -> Vec<usize> {
        if self.sweep.nq.is_empty() {
            (1..=self.node.capacity()).collect()
        } else {
            self.sweep.nq.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub node: NodeConfig,
    pub duration_frames: u64,
    pub warmup_frames: u64,
    pub rng_seed: u64,
    pub connect_jitter: f64,
    pub schedule: Vec<ScheduleSegment>,
}

impl Scenario {
    pub fn new(node: NodeConfig, settings: ScenarioSettings) -> Result<Self> {
        let s = Self {
            node,
            duration_frames: settings.duration_frames,
            warmup_frames: settings.warmup_frames,
            rng_seed: settings.seed,
            connect_jitter: settings.connect_jitter,
            schedule: settings.schedule,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { rng_seed: seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.node.validate()?;
        if self.duration_frames == 0 {
            return Err(Error::Config("duration_frames must be positive".into()));
        }
        if self.warmup_frames >= self.duration_frames {
            return Err(Error::Config("warmup_frames must be shorter than the run".into()));
        }
        if !(0.0..1.0).contains(&self.connect_jitter) {
            return Err(Error::Config("connect_jitter must lie in [0, 1)".into()));
        }
        if let Some(first) = self.schedule.first() {
            if first.start_frame != 0 {
                return Err(Error::Config("the first schedule segment must start at frame 0".into()));
            }
        }
        for pair in self.schedule.windows(2) {
            if pair[1].start_frame <= pair[0].start_frame {
                return Err(Error::Config("schedule segments must start at increasing frames".into()));
            }
        }
        for seg in &self.schedule {
            let env = self.resolve(seg);
            check_stochastic(&env.app_transition, self.node.n_app_modes, "schedule app_transition")?;
            if env.app_packet_prob.len() != self.node.n_app_modes
                || env.app_packet_prob.iter().any(|p| !(0.0..=1.0).contains(p))
            {
                return Err(Error::Config("schedule app_packet_prob must hold one probability per mode".into()));
            }
            if !(env.connect_time >= self.node.frame_period) {
                return Err(Error::Config("schedule connect_time must be at least one frame".into()));
            }
        }
        Ok(())
    }

    fn resolve(&self, seg: &ScheduleSegment) -> Environment {
        Environment {
            app_transition: seg.app_transition.clone().unwrap_or_else(|| self.node.app_transition.clone()),
            app_packet_prob: seg.app_packet_prob.clone().unwrap_or_else(|| self.node.app_packet_prob.clone()),
            connect_time: seg.connect_time.unwrap_or(self.node.connect_time),
        }
    }

    /// Resolved environments with the frame each one starts at.
    pub fn environments(&self) -> Vec<(u64, Environment)> {
        if self.schedule.is_empty() {
            return vec![(0, self.resolve(&ScheduleSegment::default()))];
        }
        self.schedule.iter().map(|seg| (seg.start_frame, self.resolve(seg))).collect()
    }
}

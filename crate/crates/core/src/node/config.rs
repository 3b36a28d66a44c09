use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::ROW_SUM_TOLERANCE;

use super::ModemState;

/// Linear reward weights: current (A), packets transmitted, packets dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { r1: -10.0, r2: 10.0, r3: -100.0 }
    }
}

/// Average modem current per coarse state, in milliamperes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModemCurrents {
    pub off_ma: f64,
    pub connecting_ma: f64,
    pub connected_ma: f64,
}

impl Default for ModemCurrents {
    fn default() -> Self {
        // 162.5 mA at 4.0 V is the 650 mW active draw.
        Self { off_ma: 0.0, connecting_ma: 120.0, connected_ma: 162.5 }
    }
}

impl ModemCurrents {
    pub fn milliamps(&self, m: ModemState) -> f64 {
        match m {
            ModemState::Off => self.off_ma,
            ModemState::Connecting => self.connecting_ma,
            ModemState::Connected => self.connected_ma,
        }
    }
}

/// Design-time description of the sensor node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeConfig {
    pub n_app_modes: usize,
    /// Queue occupancies 0..queue_states, so the capacity is one less.
    pub queue_states: usize,
    /// Nominal mode-to-mode transition probabilities per frame.
    pub app_transition: Vec<Vec<f64>>,
    /// Probability that a mode produces a packet in one frame.
    pub app_packet_prob: Vec<f64>,
    /// Control frame length in seconds.
    pub frame_period: f64,
    /// Nominal connect time in seconds.
    pub connect_time: f64,
    pub voltage: f64,
    pub currents: ModemCurrents,
    pub tx_per_frame: usize,
    /// Fixed transaction energy (J).
    pub energy_c1: f64,
    /// Incremental energy per additional packet (J).
    pub energy_c2: f64,
    pub reward: RewardWeights,
    /// Multiplier on the current term of the reward, which is in amperes.
    pub current_scale: f64,
}

impl Default for NodeConfig {
    fn default() -> Self {
        Self {
            n_app_modes: 2,
            queue_states: 11,
            app_transition: vec![vec![0.999, 0.001], vec![0.005, 0.995]],
            app_packet_prob: vec![0.0, 0.15],
            frame_period: 0.1,
            connect_time: 2.0,
            voltage: 4.0,
            currents: ModemCurrents::default(),
            tx_per_frame: 2,
            energy_c1: 6.62,
            energy_c2: 1.55,
            reward: RewardWeights::default(),
            current_scale: 0.8,
        }
    }
}

impl NodeConfig {
    pub fn capacity(&self) -> usize {
        self.queue_states - 1
    }

    pub fn n_states(&self) -> usize {
        self.n_app_modes * self.queue_states * super::N_MODEM_STATES
    }

    /// Current used in the reward, scaled amperes.
    pub fn reward_current(&self, m: ModemState) -> f64 {
        self.currents.milliamps(m) * 1e-3 * self.current_scale
    }

    /// Energy drawn in one frame spent in `m`, in joules.
    pub fn frame_energy(&self, m: ModemState) -> f64 {
        self.voltage * self.currents.milliamps(m) * 1e-3 * self.frame_period
    }

    pub fn with_r2(&self, r2: f64) -> Self {
        let mut c = self.clone();
        c.reward.r2 = r2;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_app_modes == 0 {
            return bad("n_app_modes must be at least 1".into());
        }
        if self.queue_states < 2 {
            return bad("queue_states must be at least 2 (capacity >= 1)".into());
        }
        check_stochastic(&self.app_transition, self.n_app_modes, "app_transition")?;
        if self.app_packet_prob.len() != self.n_app_modes {
            return bad(format!(
                "app_packet_prob has {} entries, expected {}",
                self.app_packet_prob.len(),
                self.n_app_modes
            ));
        }
        if self.app_packet_prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("app_packet_prob entries must lie in [0, 1]".into());
        }
        if !(self.frame_period > 0.0) {
            return bad("frame_period must be positive".into());
        }
        if !(self.connect_time >= self.frame_period) {
            return bad("connect_time must be at least one frame".into());
        }
        if self.tx_per_frame == 0 {
            return bad("tx_per_frame must be at least 1".into());
        }
        let c = &self.currents;
        if [c.off_ma, c.connecting_ma, c.connected_ma, self.voltage, self.energy_c1, self.energy_c2]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad("currents, voltage and energy constants must be non-negative".into());
        }
        if !self.current_scale.is_finite() {
            return bad("current_scale must be finite".into());
        }
        Ok(())
    }
}

pub(crate) fn check_stochastic(m: &[Vec<f64>], n: usize, what: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::Config(format!("{what} must be {n}x{n}")));
    }
    for (i, row) in m.iter().enumerate() {
        if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config(format!("{what} row {i} has entries outside [0, 1]")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Config(format!("{what} row {i} sums to {sum}")));
        }
    }
    Ok(())
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::node::{rho_from_connect_time, NodeConfig, NodeState};

/// Exponential smoothing: `estimate (1 - alpha) + observation alpha`.
pub fn td_update(estimate: f64, observation: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Contract(format!("learning rate {alpha} outside (0, 1]")));
    }
    Ok(estimate * (1.0 - alpha) + observation * alpha)
}

/// The runtime-estimated part of the node model: mode transition
/// probabilities and the modem connect time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterEstimates {
    pub sigma_hat: Vec<Vec<f64>>,
    pub connect_time_hat: f64,
    pub learning_rate: f64,
    /// Rate for the connect time; connects are rare compared to frames.
    pub connect_learning_rate: f64,
    frame_period: f64,
}

impl ParameterEstimates {
    /// Starts from the design-time values in `config`.
    pub fn from_config(config: &NodeConfig, learning_rate: f64) -> Result<Self> {
        Self::new(config.app_transition.clone(), config.connect_time, config.frame_period, learning_rate, learning_rate)
    }

    pub fn new(
        sigma_hat: Vec<Vec<f64>>,
        connect_time_hat: f64,
        frame_period: f64,
        learning_rate: f64,
        connect_learning_rate: f64,
    ) -> Result<Self> {
        td_update(0.0, 0.0, learning_rate)?;
        td_update(0.0, 0.0, connect_learning_rate)?;
        crate::node::app_stm(&sigma_hat)?;
        rho_from_connect_time(connect_time_hat, frame_period)?;
        Ok(Self { sigma_hat, connect_time_hat, learning_rate, connect_learning_rate, frame_period })
    }

    /// `|Theta|`: every mode transition probability plus the connect time.
    pub fn parameter_count(n_app_modes: usize) -> usize {
        n_app_modes * n_app_modes + 1
    }

    pub fn frame_period(&self) -> f64 {
        self.frame_period
    }

    pub fn rho(&self) -> f64 {
        rho_from_connect_time(self.connect_time_hat, self.frame_period).expect("connect time kept >= one frame")
    }

    /// Folds in one observed frame. The row of `sigma_hat` for the previous
    /// mode moves toward the one-hot observed next mode and is renormalized;
    /// a completed connect (in seconds) updates the connect time.
    pub fn observe_transition(&mut self, prev: &NodeState, next: &NodeState, connect_completed: Option<f64>) {
        if let Some(row) = self.sigma_hat.get_mut(prev.app_mode) {
            if next.app_mode < row.len() {
                let alpha = self.learning_rate;
                for (j, p) in row.iter_mut().enumerate() {
                    let seen = if j == next.app_mode { 1.0 } else { 0.0 };
                    *p = *p * (1.0 - alpha) + seen * alpha;
                }
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        if let Some(t) = connect_completed {
            if t.is_finite() {
                let alpha = self.connect_learning_rate;
                let updated = self.connect_time_hat * (1.0 - alpha) + t * alpha;
                self.connect_time_hat = updated.max(self.frame_period);
            }
        }
    }
}

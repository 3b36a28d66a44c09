//! Average MCU power of a controller: periodic solve energy amortized over
//! the update period, per-frame control energy, and a sleep floor.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sleep floor inferred as the Q-learning average power minus its
/// per-frame control power (78.8 uW - 70.6 uW).
pub const FITTED_SLEEP_POWER: f64 = 8.2e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerModel {
    /// Energy of one control iteration (J).
    pub frame_cost_control: f64,
    /// Energy of one policy solve (J); zero for controllers without a solver.
    pub solver_cost: f64,
    /// Watts.
    pub sleep_power: f64,
    /// Seconds between solves.
    pub update_period: f64,
    /// Seconds between control iterations.
    pub frame_period: f64,
}

impl PowerModel {
    /// Dense value iteration, measured costs.
    pub fn value_iteration(update_period: f64) -> Self {
        Self::measured(117e-9, 1.67, update_period)
    }

    /// Sparse value iteration, measured costs.
    pub fn sparse_value_iteration(update_period: f64) -> Self {
        Self::measured(117e-9, 187e-3, update_period)
    }

    pub fn q_learning() -> Self {
        Self::measured(7.06e-6, 0.0, 3600.0)
    }

    fn measured(frame_cost_control: f64, solver_cost: f64, update_period: f64) -> Self {
        Self { frame_cost_control, solver_cost, sleep_power: FITTED_SLEEP_POWER, update_period, frame_period: 0.1 }
    }

    pub fn with_period(self, update_period: f64) -> Self {
        Self { update_period, ..self }
    }

    fn check(&self) -> Result<()> {
        let fields = [self.frame_cost_control, self.solver_cost, self.sleep_power];
        if fields.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Contract("power model costs must be non-negative".into()));
        }
        if !(self.frame_period > 0.0) {
            return Err(Error::Contract("frame period must be positive".into()));
        }
        Ok(())
    }
}

/// `solver_cost / update_period + frame_cost_control / frame_period + sleep`.
pub fn average_power(model: &PowerModel) -> Result<f64> {
    model.check()?;
    let solve = if model.solver_cost > 0.0 {
        if !(model.update_period > 0.0) {
            return Err(Error::Contract(format!("update period {} must be positive", model.update_period)));
        }
        model.solver_cost / model.update_period
    } else {
        0.0
    };
    Ok(solve + model.frame_cost_control / model.frame_period + model.sleep_power)
}

/// Update period at which both models draw the same average power, if any.
pub fn crossover_period(a: &PowerModel, b: &PowerModel) -> Option<f64> {
    let solver_gap = a.solver_cost - b.solver_cost;
    if solver_gap == 0.0 {
        return None;
    }
    let per_frame = (b.frame_cost_control / b.frame_period - a.frame_cost_control / a.frame_period)
        + (b.sleep_power - a.sleep_power);
    let t = solver_gap / per_frame;
    (t.is_finite() && t > 0.0).then_some(t)
}

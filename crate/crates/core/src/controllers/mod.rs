//! Modem controllers: structured learning (estimated model plus periodic
//! sparse value iteration), tabular Q-learning, and a queue-threshold rule.

mod estimates;
mod qlearning;
mod structured;
mod threshold;

pub use estimates::{td_update, ParameterEstimates};
pub use qlearning::{QFunction, QLearningConfig, QLearningController};
pub use structured::{build_spec, StructuredConfig, StructuredController};
pub use threshold::{threshold_step, ThresholdController};

use serde::{Deserialize, Serialize};

use crate::node::{Action, NodeState, RewardInputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Structured,
    #[serde(rename = "ql")]
    QLearning,
    Threshold,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Threshold, Method::Structured, Method::QLearning];

    /// Series label used in sweep output.
    pub fn series(self) -> &'static str {
        match self {
            Method::Structured => "mdp",
            Method::QLearning => "ql",
            Method::Threshold => "on-off",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Structured => "structured",
            Method::QLearning => "ql",
            Method::Threshold => "threshold",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "mdp" => Ok(Method::Structured),
            "ql" | "q-learning" | "qlearning" => Ok(Method::QLearning),
            "threshold" | "on-off" => Ok(Method::Threshold),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub explored: bool,
    /// Frames since the policy in use was computed.
    pub policy_age: u64,
    /// The last solve failed and an older policy is still in use.
    pub stale_policy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControllerDecision {
    pub action: Action,
    pub diagnostics: Diagnostics,
}

impl ControllerDecision {
    pub fn plain(action: Action) -> Self {
        Self { action, diagnostics: Diagnostics::default() }
    }
}

/// What happened during one frame, reported back to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    pub frame: u64,
    pub prev: NodeState,
    pub action: Action,
    pub inputs: RewardInputs,
    pub next: NodeState,
}

/// Compute spent by a controller, for power accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ComputeStats {
    pub control_iterations: u64,
    pub solves: u64,
    pub solver_iterations: u64,
    pub solver_macs: u64,
    pub failed_solves: u64,
}

pub trait Controller {
    fn method(&self) -> Method;

    /// Chooses the action for the frame starting in `state`.
    fn decide(&mut self, frame: u64, state: &NodeState) -> ControllerDecision;

    /// Called once the frame has been simulated.
    fn feedback(&mut self, _outcome: &FrameOutcome) {}

    fn compute_stats(&self) -> ComputeStats;
}

/// Number of quantities learned online. Q-learning learns one value per
/// state-action pair; structured learning learns only the estimated
/// transition parameters.
pub fn learnable_parameter_count(method: Method, n_states: usize, n_actions: usize, theta_size: usize) -> usize {
    match method {
        Method::QLearning => n_states * n_actions,
        Method::Structured => theta_size,
        Method::Threshold => 0,
    }
}

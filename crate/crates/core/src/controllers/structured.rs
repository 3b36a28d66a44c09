use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{MdpSpec, Policy, DEFAULT_DISCOUNT, DEFAULT_TOLERANCE};
use crate::node::{assemble_stm, reward_vector, Action, ModemState, NodeConfig, NodeState, StateSpace};
use crate::svi::{svi_solve, SolveResult};

use super::{ComputeStats, Controller, ControllerDecision, Diagnostics, Method, ParameterEstimates};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructuredConfig {
    pub discount: f64,
    pub tolerance: f64,
    /// Learning rate for the mode transition estimates.
    pub alpha: f64,
    /// Learning rate for the connect time estimate.
    pub connect_alpha: f64,
    /// Frames between policy re-solves.
    pub solve_period: u64,
}

impl Default for StructuredConfig {
    fn default() -> Self {
        Self {
            discount: DEFAULT_DISCOUNT,
            tolerance: DEFAULT_TOLERANCE,
            alpha: 0.1,
            connect_alpha: 0.1,
            solve_period: 36_000,
        }
    }
}

/// Builds the MDP from the node configuration and current estimates.
pub fn build_spec(node: &NodeConfig, est: &ParameterEstimates, cfg: &StructuredConfig) -> Result<MdpSpec> {
    let transitions = assemble_stm(node, est)?;
    let rewards = reward_vector(node, est)?;
    MdpSpec::new(rewards, transitions, cfg.discount, cfg.tolerance)
}

/// Learns the mode transition and connect time parameters online and looks
/// actions up in a policy re-solved every `solve_period` frames.
#[derive(Debug, Clone)]
pub struct StructuredController {
    node: NodeConfig,
    cfg: StructuredConfig,
    space: StateSpace,
    estimates: ParameterEstimates,
    policy: Policy,
    policy_frame: Option<u64>,
    stale: bool,
    last_state: Option<NodeState>,
    connecting_frames: u64,
    last_solve: Option<SolveResult>,
    stats: ComputeStats,
}

impl StructuredController {
    pub fn new(node: NodeConfig, cfg: StructuredConfig) -> Result<Self> {
        node.validate()?;
        let estimates = ParameterEstimates::new(
            node.app_transition.clone(),
            node.connect_time,
            node.frame_period,
            cfg.alpha,
            cfg.connect_alpha,
        )?;
        // Validate the solver settings up front.
        build_spec(&node, &estimates, &cfg)?;
        let space = StateSpace::of(&node);
        Ok(Self {
            policy: Policy::uniform(space.len(), Action::Off.index()),
            node,
            cfg,
            space,
            estimates,
            policy_frame: None,
            stale: false,
            last_state: None,
            connecting_frames: 0,
            last_solve: None,
            stats: ComputeStats::default(),
        })
    }

    pub fn estimates(&self) -> &ParameterEstimates {
        &self.estimates
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn last_solve(&self) -> Option<&SolveResult> {
        self.last_solve.as_ref()
    }

    /// Solves with the current estimates and swaps the policy in. On
    /// failure the previous policy stays and is flagged stale.
    pub fn resolve(&mut self, frame: u64) -> Result<()> {
        let outcome = build_spec(&self.node, &self.estimates, &self.cfg).and_then(|spec| svi_solve(&spec));
        self.stats.solves += 1;
        match outcome {
            Ok(result) => {
                self.stats.solver_iterations += result.iterations as u64;
                self.stats.solver_macs += result.kernel_op_count;
                self.policy = result.policy.clone();
                self.policy_frame = Some(frame);
                self.stale = false;
                self.last_solve = Some(result);
                Ok(())
            }
            Err(e) => {
                self.stats.failed_solves += 1;
                self.stale = true;
                Err(e)
            }
        }
    }

    fn ingest(&mut self, state: &NodeState) {
        let Some(prev) = self.last_state else {
            return;
        };
        let mut completed = None;
        if prev.modem == ModemState::Connecting {
            self.connecting_frames += 1;
            match state.modem {
                ModemState::Connected => {
                    completed = Some(self.connecting_frames as f64 * self.node.frame_period);
                    self.connecting_frames = 0;
                }
                ModemState::Off => self.connecting_frames = 0,
                ModemState::Connecting => {}
            }
        }
        self.estimates.observe_transition(&prev, state, completed);
    }
}

impl Controller for StructuredController {
    fn method(&self) -> Method {
        Method::Structured
    }

    fn decide(&mut self, frame: u64, state: &NodeState) -> ControllerDecision {
        self.ingest(state);
        self.last_state = Some(*state);
        self.stats.control_iterations += 1;
        if frame.is_multiple_of(self.cfg.solve_period.max(1)) {
            // A failed solve keeps the previous policy, flagged stale.
            let _ = self.resolve(frame);
        }
        let action = match self.space.encode(state) {
            Ok(i) => Action::from_index(self.policy.action(i)).unwrap_or(Action::Off),
            Err(_) => Action::Off,
        };
        ControllerDecision {
            action,
            diagnostics: Diagnostics {
                explored: false,
                policy_age: self.policy_frame.map_or(frame, |f| frame - f),
                stale_policy: self.stale,
            },
        }
    }

    fn compute_stats(&self) -> ComputeStats {
        self.stats
    }
}

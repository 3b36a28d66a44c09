use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::node::{reward, Action, NodeConfig, NodeState, StateSpace, N_ACTIONS};

use super::{ComputeStats, Controller, ControllerDecision, Diagnostics, FrameOutcome, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    pub alpha: f64,
    pub discount: f64,
    pub epsilon: f64,
    /// Multiplied into epsilon after every frame; 1 disables decay.
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self { alpha: 0.1, discount: crate::mdp::DEFAULT_DISCOUNT, epsilon: 0.05, epsilon_decay: 1.0, epsilon_min: 0.0 }
    }
}

/// Tabular action values, action-major like the rest of the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    pub n_states: usize,
    pub table: Vec<f64>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl QFunction {
    pub fn new(n_states: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Contract(format!("learning rate {alpha} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Contract(format!("exploration rate {epsilon} outside [0, 1]")));
        }
        Ok(Self { n_states, table: vec![0.0; n_states * N_ACTIONS], alpha, epsilon })
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.table[action * self.n_states + state]
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, state: usize) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..N_ACTIONS {
            let q = self.get(state, a);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }

    /// One temporal-difference update of `Q(prev, action)` followed by an
    /// epsilon-greedy choice in `next`.
    pub fn q_step<R: Rng>(
        &mut self,
        prev: usize,
        action: usize,
        reward: f64,
        next: usize,
        discount: f64,
        rng: &mut R,
    ) -> ControllerDecision {
        let (_, best_next) = self.greedy(next);
        let cell = &mut self.table[action * self.n_states + prev];
        *cell += self.alpha * (reward + discount * best_next - *cell);
        self.choose(next, rng)
    }

    pub fn choose<R: Rng>(&self, state: usize, rng: &mut R) -> ControllerDecision {
        let explored = self.epsilon > 0.0 && rng.gen::<f64>() < self.epsilon;
        let a = if explored { rng.gen_range(0..N_ACTIONS) } else { self.greedy(state).0 };
        ControllerDecision {
            action: Action::from_index(a).expect("action index in range"),
            diagnostics: Diagnostics { explored, ..Diagnostics::default() },
        }
    }
}

/// Model-free baseline: learns the action values from the observed
/// per-frame reward.
#[derive(Debug, Clone)]
pub struct QLearningController {
    node: NodeConfig,
    cfg: QLearningConfig,
    space: StateSpace,
    q: QFunction,
    rng: ChaCha8Rng,
    pending: Option<(usize, ControllerDecision)>,
    stats: ComputeStats,
}

impl QLearningController {
    pub fn new(node: NodeConfig, cfg: QLearningConfig, seed: u64) -> Result<Self> {
        node.validate()?;
        if !(cfg.discount > 0.0 && cfg.discount < 1.0) {
            return Err(Error::Contract(format!("discount {} outside (0, 1)", cfg.discount)));
        }
        let space = StateSpace::of(&node);
        let q = QFunction::new(space.len(), cfg.alpha, cfg.epsilon)?;
        Ok(Self {
            node,
            cfg,
            space,
            q,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: None,
            stats: ComputeStats::default(),
        })
    }

    pub fn q_function(&self) -> &QFunction {
        &self.q
    }
}

impl Controller for QLearningController {
    fn method(&self) -> Method {
        Method::QLearning
    }

    fn decide(&mut self, _frame: u64, state: &NodeState) -> ControllerDecision {
        self.stats.control_iterations += 1;
        let idx = self.space.encode(state).unwrap_or(0);
        match self.pending.take() {
            Some((s, d)) if s == idx => d,
            _ => self.q.choose(idx, &mut self.rng),
        }
    }

    fn feedback(&mut self, o: &FrameOutcome) {
        let (Ok(prev), Ok(next)) = (self.space.encode(&o.prev), self.space.encode(&o.next)) else {
            return;
        };
        let r = reward(&o.inputs, &self.node.reward);
        let d = self.q.q_step(prev, o.action.index(), r, next, self.cfg.discount, &mut self.rng);
        self.pending = Some((next, d));
        if self.cfg.epsilon_decay < 1.0 {
            self.q.epsilon = (self.q.epsilon * self.cfg.epsilon_decay).max(self.cfg.epsilon_min);
        }
    }

    fn compute_stats(&self) -> ComputeStats {
        self.stats
    }
}

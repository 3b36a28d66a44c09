//! The LTE-M sensor node: a multi-mode sensing application feeding a
//! bounded packet queue, drained by a modem that is switched on and off.
//!
//! The joint state is `(app mode, queue length, modem state)`. Its
//! transition model factors into an application term, a queue term
//! conditioned on whether the modem is connected next frame, and a modem
//! term in which `Connecting` is a transition state left with probability
//! `rho` per frame.

mod config;
mod model;

pub use config::{ModemCurrents, NodeConfig, RewardWeights};
pub(crate) use config::check_stochastic;
pub use model::{
    app_stm, assemble_stm, energy_per_transaction, modem_stm, queue_outcomes, queue_stm, reward,
    reward_vector, rho_from_connect_time, ModemStm, QueueOutcome, RewardInputs,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_MODEM_STATES: usize = 3;
pub const N_ACTIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModemState {
    Off = 0,
    Connecting = 1,
    Connected = 2,
}

impl ModemState {
    pub const ALL: [ModemState; N_MODEM_STATES] = [ModemState::Off, ModemState::Connecting, ModemState::Connected];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Off = 0,
    On = 1,
}

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [Action::Off, Action::On];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeState {
    pub app_mode: usize,
    pub queue_len: usize,
    pub modem: ModemState,
}

/// Sizes of the factored state space and the flat encoding
/// `app * N_SQ * N_SM + queue * N_SM + modem`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    pub n_app_modes: usize,
    pub queue_states: usize,
}

impl StateSpace {
    pub fn of(config: &NodeConfig) -> Self {
        Self { n_app_modes: config.n_app_modes, queue_states: config.queue_states }
    }

    pub fn len(&self) -> usize {
        self.n_app_modes * self.queue_states * N_MODEM_STATES
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, s: &NodeState) -> Result<usize> {
        if s.app_mode >= self.n_app_modes || s.queue_len >= self.queue_states {
            return Err(Error::Contract(format!("{s:?} outside the state space")));
        }
        Ok((s.app_mode * self.queue_states + s.queue_len) * N_MODEM_STATES + s.modem.index())
    }

    pub fn decode(&self, index: usize) -> Result<NodeState> {
        if index >= self.len() {
            return Err(Error::Contract(format!("state index {index} >= {}", self.len())));
        }
        let modem = ModemState::from_index(index % N_MODEM_STATES).expect("modulo keeps index in range");
        let rest = index / N_MODEM_STATES;
        Ok(NodeState { app_mode: rest / self.queue_states, queue_len: rest % self.queue_states, modem })
    }

    pub fn states(&self) -> impl Iterator<Item = NodeState> + '_ {
        (0..self.len()).map(|i| self.decode(i).expect("index in range"))
    }
}

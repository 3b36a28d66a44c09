use crate::node::{Action, ModemState, NodeState};

use super::{ComputeStats, Controller, ControllerDecision, Method};

/// Power the modem once `nq` packets are queued and keep it on until the
/// queue is empty.
pub fn threshold_step(queue_len: usize, modem: ModemState, nq: usize) -> ControllerDecision {
    let on = queue_len >= nq || (modem != ModemState::Off && queue_len > 0);
    ControllerDecision::plain(if on { Action::On } else { Action::Off })
}

#[derive(Debug, Clone)]
pub struct ThresholdController {
    nq: usize,
    stats: ComputeStats,
}

impl ThresholdController {
    pub fn new(nq: usize) -> Self {
        Self { nq: nq.max(1), stats: ComputeStats::default() }
    }

    pub fn threshold(&self) -> usize {
        self.nq
    }
}

impl Controller for ThresholdController {
    fn method(&self) -> Method {
        Method::Threshold
    }

    fn decide(&mut self, _frame: u64, state: &NodeState) -> ControllerDecision {
        self.stats.control_iterations += 1;
        threshold_step(state.queue_len, state.modem, self.nq)
    }

    fn compute_stats(&self) -> ComputeStats {
        self.stats
    }
}

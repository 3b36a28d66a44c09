use serde::Serialize;

use crate::controllers::ParameterEstimates;
use crate::error::{Error, Result};
use crate::mdp::StackedTransitionMatrix;

use super::{check_stochastic, Action, ModemState, NodeConfig, RewardWeights, StateSpace, N_ACTIONS, N_MODEM_STATES};

/// Per-frame exit probability of the connecting transition state:
/// `1 / floor(T_C / T_F)`.
pub fn rho_from_connect_time(connect_time: f64, frame_period: f64) -> Result<f64> {
    if !(frame_period > 0.0) || !connect_time.is_finite() {
        return Err(Error::Contract(format!("bad timing T_C={connect_time}, T_F={frame_period}")));
    }
    let frames = (connect_time / frame_period + 1e-9).floor();
    if frames < 1.0 {
        return Err(Error::Contract(format!(
            "connect time {connect_time} s is shorter than one {frame_period} s frame"
        )));
    }
    Ok(1.0 / frames)
}

/// Modem transition matrices indexed `[action][from][to]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModemStm(pub [[[f64; N_MODEM_STATES]; N_MODEM_STATES]; N_ACTIONS]);

impl ModemStm {
    pub fn prob(&self, action: Action, from: ModemState, to: ModemState) -> f64 {
        self.0[action.index()][from.index()][to.index()]
    }

    pub fn row(&self, action: Action, from: ModemState) -> &[f64; N_MODEM_STATES] {
        &self.0[action.index()][from.index()]
    }
}

/// `off` tears the modem down in one frame from anywhere. `on` powers it
/// up, then leaves `Connecting` with probability `rho` each frame.
pub fn modem_stm(rho: f64) -> Result<ModemStm> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Contract(format!("rho {rho} outside (0, 1]")));
    }
    let off = [[1.0, 0.0, 0.0]; N_MODEM_STATES];
    let on = [[0.0, 1.0, 0.0], [0.0, 1.0 - rho, rho], [0.0, 0.0, 1.0]];
    Ok(ModemStm([off, on]))
}

/// The application factor `p(s_a' | s_a)`. It does not depend on the action.
pub fn app_stm(sigma: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_stochastic(sigma, sigma.len(), "app transition")?;
    Ok(sigma.to_vec())
}

/// One branch of the queue update within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueOutcome {
    pub next: usize,
    pub prob: f64,
    pub transmitted: usize,
    pub dropped: usize,
}

/// Queue update for one frame: at most one arrival with probability
/// `arrival_prob`; if the modem is connected this frame up to `tx` packets
/// (including the new one) leave; anything beyond `capacity` is dropped.
pub fn queue_outcomes(
    arrival_prob: f64,
    queue_len: usize,
    capacity: usize,
    tx: usize,
    connected: bool,
) -> Vec<QueueOutcome> {
    let branch = |arrivals: usize, prob: f64| {
        let total = queue_len + arrivals;
        let transmitted = if connected { total.min(tx) } else { 0 };
        let remaining = total - transmitted;
        let dropped = remaining.saturating_sub(capacity);
        QueueOutcome { next: remaining - dropped, prob, transmitted, dropped }
    };
    let mut out = Vec::with_capacity(2);
    if arrival_prob > 0.0 {
        out.push(branch(1, arrival_prob));
    }
    if arrival_prob < 1.0 {
        out.push(branch(0, 1.0 - arrival_prob));
    }
    out
}

/// Queue factor for one application mode, given whether the modem will be
/// connected during the frame. The action reaches the queue only through
/// the next modem state.
pub fn queue_stm(config: &NodeConfig, app_mode: usize, modem_next: ModemState) -> Result<Vec<Vec<f64>>> {
    let p = *config
        .app_packet_prob
        .get(app_mode)
        .ok_or_else(|| Error::Contract(format!("app mode {app_mode} out of range")))?;
    let n = config.queue_states;
    let connected = modem_next == ModemState::Connected;
    let mut m = vec![vec![0.0; n]; n];
    for (q, row) in m.iter_mut().enumerate() {
        for o in queue_outcomes(p, q, config.capacity(), config.tx_per_frame, connected) {
            row[o.next] += o.prob;
        }
    }
    Ok(m)
}

fn check_estimates(config: &NodeConfig, est: &ParameterEstimates) -> Result<f64> {
    if est.sigma_hat.len() != config.n_app_modes {
        return Err(Error::DimensionMismatch { expected: config.n_app_modes, found: est.sigma_hat.len() });
    }
    app_stm(&est.sigma_hat)?;
    rho_from_connect_time(est.connect_time_hat, config.frame_period)
}

/// Stacked transition matrix of the whole node as the product of the
/// application, queue and modem factors.
pub fn assemble_stm(config: &NodeConfig, est: &ParameterEstimates) -> Result<StackedTransitionMatrix> {
    config.validate()?;
    let rho = check_estimates(config, est)?;
    let modem = modem_stm(rho)?;
    let space = StateSpace::of(config);
    let mut m = StackedTransitionMatrix::zeros(space.len(), N_ACTIONS)?;
    for action in Action::ALL {
        for s in space.states() {
            let from = space.encode(&s)?;
            let arrival = config.app_packet_prob[s.app_mode];
            for m_next in ModemState::ALL {
                let pm = modem.prob(action, s.modem, m_next);
                if pm == 0.0 {
                    continue;
                }
                let connected = m_next == ModemState::Connected;
                for o in queue_outcomes(arrival, s.queue_len, config.capacity(), config.tx_per_frame, connected) {
                    for (a_next, &pa) in est.sigma_hat[s.app_mode].iter().enumerate() {
                        if pa == 0.0 {
                            continue;
                        }
                        let to = space.encode(&super::NodeState {
                            app_mode: a_next,
                            queue_len: o.next,
                            modem: m_next,
                        })?;
                        let cell = m.get(from, action.index(), to);
                        m.set(from, action.index(), to, cell + pa * o.prob * pm);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Modem energy of one connection that carried `n_packets`:
/// `c1 + c2 (n - 1)` joules.
pub fn energy_per_transaction(n_packets: usize, c1: f64, c2: f64) -> Result<f64> {
    if n_packets < 1 {
        return Err(Error::Contract("a transaction carries at least one packet".into()));
    }
    Ok(c1 + c2 * (n_packets - 1) as f64)
}

/// Quantities the reward is computed from. `current` is in reward units
/// (amperes times the configured scale); counts may be expectations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RewardInputs {
    pub current: f64,
    pub packets_tx: f64,
    pub packets_dropped: f64,
}

pub fn reward(inputs: &RewardInputs, w: &RewardWeights) -> f64 {
    w.r1 * inputs.current + w.r2 * inputs.packets_tx + w.r3 * inputs.packets_dropped
}

/// Expected reward for every `(state, action)`, action-major. Current is
/// that of the modem state reached; transmissions and drops are averaged
/// over the arrival.
pub fn reward_vector(config: &NodeConfig, est: &ParameterEstimates) -> Result<Vec<f64>> {
    config.validate()?;
    let rho = check_estimates(config, est)?;
    let modem = modem_stm(rho)?;
    let space = StateSpace::of(config);
    let ns = space.len();
    let mut r = vec![0.0; ns * N_ACTIONS];
    for action in Action::ALL {
        for s in space.states() {
            let idx = space.encode(&s)?;
            let mut inputs = RewardInputs::default();
            for m_next in ModemState::ALL {
                let pm = modem.prob(action, s.modem, m_next);
                if pm == 0.0 {
                    continue;
                }
                inputs.current += pm * config.reward_current(m_next);
                let connected = m_next == ModemState::Connected;
                let arrival = config.app_packet_prob[s.app_mode];
                for o in queue_outcomes(arrival, s.queue_len, config.capacity(), config.tx_per_frame, connected) {
                    inputs.packets_tx += pm * o.prob * o.transmitted as f64;
                    inputs.packets_dropped += pm * o.prob * o.dropped as f64;
                }
            }
            r[action.index() * ns + idx] = reward(&inputs, &config.reward);
        }
    }
    Ok(r)
}

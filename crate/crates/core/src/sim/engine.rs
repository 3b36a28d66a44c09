use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controllers::{ComputeStats, Controller, FrameOutcome};
use crate::error::Result;
use crate::node::{energy_per_transaction, reward, Action, ModemState, NodeState, RewardInputs};

use super::scenario::{Environment, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    /// Mean enqueue-to-transmit time of packets sent after warm-up (s).
    pub avg_latency: f64,
    /// Modem energy per packet sent after warm-up (mJ).
    pub energy_per_packet: f64,
    pub packets_generated: u64,
    pub packets_transmitted: u64,
    pub packets_dropped: u64,
    pub queue_initial: u64,
    pub queue_final: u64,
    pub reward_total: f64,
    pub measured_transmitted: u64,
    pub measured_dropped: u64,
    pub measured_energy_j: f64,
    pub connections: u64,
    pub frames_connected: u64,
    pub compute: ComputeStats,
}

impl SimMetrics {
    /// `generated == transmitted + dropped + (final - initial)`.
    pub fn conserves_packets(&self) -> bool {
        self.packets_generated + self.queue_initial
            == self.packets_transmitted + self.packets_dropped + self.queue_final
    }
}

#[derive(Debug, Default)]
struct Connection {
    reached_connected: bool,
    packets: usize,
    connecting_energy: f64,
}

struct Accumulator {
    warmup: u64,
    latency_sum: f64,
    energy: f64,
    transmitted: u64,
    dropped: u64,
}

impl Accumulator {
    fn energy(&mut self, frame: u64, joules: f64) {
        if frame >= self.warmup {
            self.energy += joules;
        }
    }
}

/// Frames one connect attempt takes, at least one.
fn sample_connect_frames(rng: &mut ChaCha8Rng, connect_time: f64, frame_period: f64, jitter: f64) -> u64 {
    let u: f64 = if jitter > 0.0 { rng.gen_range(-1.0..=1.0) } else { 0.0 };
    ((connect_time * (1.0 + jitter * u) / frame_period).round() as u64).max(1)
}

/// Runs the node for `scenario.duration_frames` frames under `controller`.
///
/// In every frame the controller sees the state, the modem reacts to the
/// action, at most one packet arrives according to the current mode, the
/// queue drains if the modem is connected, and the mode moves on.
pub fn simulate(scenario: &Scenario, controller: &mut dyn Controller) -> Result<SimMetrics> {
    scenario.validate()?;
    let node = &scenario.node;
    let capacity = node.capacity();
    let environments = scenario.environments();
    // Separate streams keep arrivals and mode changes identical across
    // controllers for the same seed.
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let mut connect_rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    connect_rng.set_stream(1);

    let mut app_mode = 0usize;
    let mut modem = ModemState::Off;
    let mut connect_remaining = 0u64;
    let mut queue: VecDeque<u64> = VecDeque::with_capacity(capacity + 1);
    let mut connection: Option<Connection> = None;

    let mut generated = 0u64;
    let mut transmitted_total = 0u64;
    let mut dropped_total = 0u64;
    let mut reward_total = 0.0;
    let mut connections = 0u64;
    let mut frames_connected = 0u64;
    let mut acc =
        Accumulator { warmup: scenario.warmup_frames, latency_sum: 0.0, energy: 0.0, transmitted: 0, dropped: 0 };

    let close = |conn: Connection, frame: u64, acc: &mut Accumulator| {
        let joules = if conn.reached_connected {
            energy_per_transaction(conn.packets.max(1), node.energy_c1, node.energy_c2)
                .expect("at least one packet")
        } else {
            conn.connecting_energy
        };
        acc.energy(frame, joules);
    };

    let mut segment = 0usize;
    for frame in 0..scenario.duration_frames {
        while segment + 1 < environments.len() && environments[segment + 1].0 <= frame {
            segment += 1;
        }
        let env: &Environment = &environments[segment].1;
        let state = NodeState { app_mode, queue_len: queue.len(), modem };
        let decision = controller.decide(frame, &state);

        let next_modem = match (decision.action, modem) {
            (Action::Off, ModemState::Off) => ModemState::Off,
            (Action::Off, _) => {
                if let Some(conn) = connection.take() {
                    close(conn, frame, &mut acc);
                }
                ModemState::Off
            }
            (Action::On, ModemState::Off) => {
                connections += 1;
                connection = Some(Connection::default());
                connect_remaining =
                    sample_connect_frames(&mut connect_rng, env.connect_time, node.frame_period, scenario.connect_jitter);
                ModemState::Connecting
            }
            (Action::On, ModemState::Connecting) => {
                connect_remaining = connect_remaining.saturating_sub(1);
                if connect_remaining == 0 {
                    ModemState::Connected
                } else {
                    ModemState::Connecting
                }
            }
            (Action::On, ModemState::Connected) => ModemState::Connected,
        };

        if rng.gen::<f64>() < env.app_packet_prob[app_mode] {
            generated += 1;
            queue.push_back(frame);
        }
        let mut sent = 0usize;
        if next_modem == ModemState::Connected {
            frames_connected += 1;
            while sent < node.tx_per_frame {
                let Some(enqueued) = queue.pop_front() else { break };
                sent += 1;
                if frame >= acc.warmup {
                    acc.latency_sum += (frame - enqueued + 1) as f64 * node.frame_period;
                    acc.transmitted += 1;
                }
            }
        }
        let mut dropped = 0usize;
        while queue.len() > capacity {
            queue.pop_back();
            dropped += 1;
        }
        transmitted_total += sent as u64;
        dropped_total += dropped as u64;
        if frame >= acc.warmup {
            acc.dropped += dropped as u64;
        }

        if let Some(conn) = connection.as_mut() {
            match next_modem {
                ModemState::Connected => {
                    conn.reached_connected = true;
                    conn.packets += sent;
                    if sent == 0 {
                        acc.energy(frame, node.frame_energy(ModemState::Connected));
                    }
                }
                ModemState::Connecting => conn.connecting_energy += node.frame_energy(ModemState::Connecting),
                ModemState::Off => {}
            }
        }

        let row = &env.app_transition[app_mode];
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut next_mode = row.len() - 1;
        for (j, p) in row.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                next_mode = j;
                break;
            }
        }

        let inputs = RewardInputs {
            current: node.reward_current(next_modem),
            packets_tx: sent as f64,
            packets_dropped: dropped as f64,
        };
        reward_total += reward(&inputs, &node.reward);
        modem = next_modem;
        app_mode = next_mode;
        let next = NodeState { app_mode, queue_len: queue.len(), modem };
        controller.feedback(&FrameOutcome { frame, prev: state, action: decision.action, inputs, next });
    }
    if let Some(conn) = connection.take() {
        close(conn, scenario.duration_frames, &mut acc);
    }

    let avg_latency = if acc.transmitted > 0 { acc.latency_sum / acc.transmitted as f64 } else { 0.0 };
    let energy_per_packet = if acc.transmitted > 0 { acc.energy * 1e3 / acc.transmitted as f64 } else { 0.0 };
    Ok(SimMetrics {
        avg_latency,
        energy_per_packet,
        packets_generated: generated,
        packets_transmitted: transmitted_total,
        packets_dropped: dropped_total,
        queue_initial: 0,
        queue_final: queue.len() as u64,
        reward_total,
        measured_transmitted: acc.transmitted,
        measured_dropped: acc.dropped,
        measured_energy_j: acc.energy,
        connections,
        frames_connected,
        compute: controller.compute_stats(),
    })
}

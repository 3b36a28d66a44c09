//! Finite MDP description and the dense value-iteration reference solver.
//!
//! Per-state/action vectors (rewards, Q-values) and the rows of the stacked
//! transition matrix share one flattening: action-major, so row
//! `action * n_states + state` belongs to `(state, action)`. This matches a
//! vertical concatenation of the per-action transition matrices.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Row sums of a stochastic matrix must be within this distance of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Solvers give up after this many sweeps.
pub const MAX_ITERATIONS: usize = 1_000_000;

pub const DEFAULT_DISCOUNT: f64 = 0.95;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Row index of `(state, action)` in a stacked, action-major layout.
pub fn flat_index(state: usize, action: usize, n_states: usize, n_actions: usize) -> Result<usize> {
    if state >= n_states || action >= n_actions {
        return Err(Error::Contract(format!(
            "(state {state}, action {action}) outside a {n_states}x{n_actions} grid"
        )));
    }
    Ok(action * n_states + state)
}

/// The `(N_S * N_A) x N_S` matrix holding `p(s' | s, a)` in row
/// `flat_index(s, a)`. Stored dense, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedTransitionMatrix {
    n_states: usize,
    n_actions: usize,
    data: Vec<f64>,
}

impl StackedTransitionMatrix {
    /// Wraps row-major data. Only the shape is checked here; stochasticity
    /// is reported by [`validate`].
    pub fn new(n_states: usize, n_actions: usize, data: Vec<f64>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Contract("transition matrix needs at least one state and action".into()));
        }
        let expected = n_states * n_actions * n_states;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        Ok(Self { n_states, n_actions, data })
    }

    pub fn zeros(n_states: usize, n_actions: usize) -> Result<Self> {
        Self::new(n_states, n_actions, vec![0.0; n_states * n_actions * n_states])
    }

    /// Builds the stacked matrix from one `N_S x N_S` matrix per action.
    pub fn from_blocks(blocks: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n_actions = blocks.len();
        let n_states = blocks.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_actions * n_states * n_states);
        for block in blocks {
            if block.len() != n_states {
                return Err(Error::DimensionMismatch { expected: n_states, found: block.len() });
            }
            for row in block {
                if row.len() != n_states {
                    return Err(Error::DimensionMismatch { expected: n_states, found: row.len() });
                }
                data.extend_from_slice(row);
            }
        }
        Self::new(n_states, n_actions, data)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_rows(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn n_cols(&self) -> usize {
        self.n_states
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_states..(row + 1) * self.n_states]
    }

    pub fn get(&self, state: usize, action: usize, next: usize) -> f64 {
        self.data[(action * self.n_states + state) * self.n_states + next]
    }

    pub fn set(&mut self, state: usize, action: usize, next: usize, p: f64) {
        let n = self.n_states;
        self.data[(action * n + state) * n + next] = p;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_states)
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueFunction(pub Vec<f64>);

impl ValueFunction {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Policy(pub Vec<usize>);

impl Policy {
    pub fn uniform(n_states: usize, action: usize) -> Self {
        Policy(vec![action; n_states])
    }

    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of states assigned each action.
    pub fn histogram(&self, n_actions: usize) -> Vec<usize> {
        let mut counts = vec![0; n_actions];
        for &a in &self.0 {
            if a < n_actions {
                counts[a] += 1;
            }
        }
        counts
    }
}

/// A discounted MDP ready to be solved.
#[derive(Debug, Clone)]
pub struct MdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// Action-major, length `n_states * n_actions`.
    pub rewards: Vec<f64>,
    pub transitions: StackedTransitionMatrix,
    pub discount: f64,
    pub tolerance: f64,
}

impl MdpSpec {
    pub fn new(
        rewards: Vec<f64>,
        transitions: StackedTransitionMatrix,
        discount: f64,
        tolerance: f64,
    ) -> Result<Self> {
        let n_states = transitions.n_states();
        let n_actions = transitions.n_actions();
        if rewards.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch { expected: n_states * n_actions, found: rewards.len() });
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::Contract(format!("discount {discount} outside (0, 1)")));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Contract(format!("tolerance {tolerance} must be positive")));
        }
        Ok(Self { n_states, n_actions, rewards, transitions, discount, tolerance })
    }

    /// Upper bound on `|V|` for any policy: `max|R| / (1 - beta)`.
    pub fn value_bound(&self) -> f64 {
        let r_max = self.rewards.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        r_max / (1.0 - self.discount)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { row: usize, sum: f64 },
    Negative { row: usize, col: usize, value: f64 },
    AboveOne { row: usize, col: usize, value: f64 },
    NotFinite { row: usize, col: usize },
    NonFiniteReward { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::Negative { row, col, value } => write!(f, "entry ({row}, {col}) is negative: {value}"),
            Violation::AboveOne { row, col, value } => write!(f, "entry ({row}, {col}) exceeds 1: {value}"),
            Violation::NotFinite { row, col } => write!(f, "entry ({row}, {col}) is not finite"),
            Violation::NonFiniteReward { index } => write!(f, "reward {index} is not finite"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations.iter().map(ToString::to_string).collect()))
        }
    }
}

/// Checks every transition row for stochasticity. Rows are never
/// renormalized.
pub fn validate_transitions(m: &StackedTransitionMatrix) -> ValidationReport {
    let mut violations = Vec::new();
    for (row, entries) in m.rows().enumerate() {
        let mut finite = true;
        for (col, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                finite = false;
                violations.push(Violation::NotFinite { row, col });
            } else if value < 0.0 {
                violations.push(Violation::Negative { row, col, value });
            } else if value > 1.0 {
                violations.push(Violation::AboveOne { row, col, value });
            }
        }
        if finite {
            let sum: f64 = entries.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSum { row, sum });
            }
        }
    }
    ValidationReport { violations }
}

pub fn validate(spec: &MdpSpec) -> ValidationReport {
    let mut report = validate_transitions(&spec.transitions);
    for (index, r) in spec.rewards.iter().enumerate() {
        if !r.is_finite() {
            report.violations.push(Violation::NonFiniteReward { index });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub value: ValueFunction,
    pub policy: Policy,
    pub iterations: usize,
    pub final_delta: f64,
}

/// Plain Bellman backups over the dense stacked matrix, starting from
/// `V = 0`. Stops once the sup-norm change drops below the tolerance.
pub fn dense_value_iteration(spec: &MdpSpec) -> Result<DenseSolution> {
    validate(spec).into_result()?;
    let (ns, na) = (spec.n_states, spec.n_actions);
    let mut value = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    let mut policy = vec![0usize; ns];
    for iteration in 1..=MAX_ITERATIONS {
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut best_action = 0;
            for a in 0..na {
                let row = spec.transitions.row(a * ns + s);
                let mut expected = 0.0;
                for (p, v) in row.iter().zip(&value) {
                    expected += p * v;
                }
                let q = spec.rewards[a * ns + s] + spec.discount * expected;
                if q > best {
                    best = q;
                    best_action = a;
                }
            }
            next[s] = best;
            policy[s] = best_action;
        }
        let delta = next.iter().zip(&value).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut value, &mut next);
        if delta < spec.tolerance {
            return Ok(DenseSolution {
                value: ValueFunction(value),
                policy: Policy(policy),
                iterations: iteration,
                final_delta: delta,
            });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
}

/// Iteration bound `ceil(log(tau (1 - beta) / v_max) / log beta)`.
pub fn iteration_bound(spec: &MdpSpec) -> usize {
    let v_max = spec.value_bound();
    if v_max == 0.0 {
        return 1;
    }
    let n = ((spec.tolerance * (1.0 - spec.discount) / v_max).ln() / spec.discount.ln()).ceil();
    n.max(1.0) as usize
}

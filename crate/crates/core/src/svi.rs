//! Sparse value iteration.
//!
//! The stacked transition matrix is compressed once into CSR; each sweep is
//! then a sparse matrix-vector product, a scaled add of the rewards, a
//! strided max over actions and a sup-norm convergence check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{validate, MdpSpec, Policy, ValueFunction, MAX_ITERATIONS};
use crate::sparse::{inf_norm_diff, max_reduce_into, saxpy_into, to_sparse, CsrMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub value: ValueFunction,
    pub policy: Policy,
    pub iterations: usize,
    pub final_delta: f64,
    /// Multiply-accumulates spent in the sparse products.
    pub kernel_op_count: u64,
    pub n_states: usize,
    pub n_actions: usize,
    pub k_nz: usize,
    /// Sup-norm change after each sweep.
    #[serde(skip)]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveCost {
    pub dense_macs: u64,
    pub sparse_macs: u64,
    pub ratio: f64,
}

impl SolveResult {
    /// Multiply-accumulate totals for this solve against the same number of
    /// dense sweeps.
    pub fn cost(&self) -> SolveCost {
        let iterations = self.iterations as u64;
        let dense_macs = iterations * (self.n_states * self.n_states * self.n_actions) as u64;
        let sparse_macs = iterations * self.k_nz as u64;
        let ratio = if sparse_macs == 0 { f64::INFINITY } else { dense_macs as f64 / sparse_macs as f64 };
        SolveCost { dense_macs, sparse_macs, ratio }
    }
}

/// A spec compressed for repeated solving.
#[derive(Debug, Clone)]
pub struct SparseMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: CsrMatrix,
    pub rewards: Vec<f64>,
    pub discount: f64,
    pub tolerance: f64,
}

impl SparseMdp {
    pub fn from_spec(spec: &MdpSpec) -> Result<Self> {
        validate(spec).into_result()?;
        let coo = to_sparse(&spec.transitions);
        Ok(Self {
            n_states: spec.n_states,
            n_actions: spec.n_actions,
            transitions: CsrMatrix::from_coo(&coo),
            rewards: spec.rewards.clone(),
            discount: spec.discount,
            tolerance: spec.tolerance,
        })
    }

    pub fn solve(&self) -> Result<SolveResult> {
        let (ns, na) = (self.n_states, self.n_actions);
        let k_nz = self.transitions.nnz();
        let mut previous = vec![0.0; ns];
        let mut value = vec![0.0; ns];
        let mut policy = vec![0usize; ns];
        let mut t = vec![0.0; ns * na];
        let mut q = vec![0.0; ns * na];
        let mut deltas = Vec::new();
        for iteration in 1..=MAX_ITERATIONS {
            self.transitions.mul_vec_into(&previous, &mut t)?;
            saxpy_into(self.discount, &t, &self.rewards, &mut q)?;
            max_reduce_into(&q, ns, na, &mut value, &mut policy)?;
            let delta = inf_norm_diff(&value, &previous)?;
            deltas.push(delta);
            if delta < self.tolerance {
                return Ok(SolveResult {
                    value: ValueFunction(value),
                    policy: Policy(policy),
                    iterations: iteration,
                    final_delta: delta,
                    kernel_op_count: iteration as u64 * k_nz as u64,
                    n_states: ns,
                    n_actions: na,
                    k_nz,
                    deltas,
                });
            }
            std::mem::swap(&mut previous, &mut value);
        }
        Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
    }
}

pub fn svi_solve(spec: &MdpSpec) -> Result<SolveResult> {
    SparseMdp::from_spec(spec)?.solve()
}

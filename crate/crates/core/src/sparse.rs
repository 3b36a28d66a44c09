//! COO and CSR forms of the stacked transition matrix, the handful of
//! vector kernels sparse value iteration needs, and storage accounting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{Policy, StackedTransitionMatrix, ValueFunction};

/// Bytes per stored value in the storage model (single precision).
pub const VALUE_BYTES: usize = 4;

/// Coordinate-format sparse matrix. Entries are kept in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_idx: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CooMatrix {
    /// Collects the non-zero entries of a dense row-major matrix.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch { expected: n_rows * n_cols, found: data.len() });
        }
        let k_nz = data.iter().filter(|&&v| v != 0.0).count();
        let mut coo = CooMatrix {
            n_rows,
            n_cols,
            row_idx: Vec::with_capacity(k_nz),
            col_idx: Vec::with_capacity(k_nz),
            values: Vec::with_capacity(k_nz),
        };
        for (i, &z) in data.iter().enumerate() {
            if z != 0.0 {
                coo.row_idx.push(i / n_cols);
                coo.col_idx.push(i % n_cols);
                coo.values.push(z);
            }
        }
        Ok(coo)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for ((&r, &c), &v) in self.row_idx.iter().zip(&self.col_idx).zip(&self.values) {
            out[r * self.n_cols + c] = v;
        }
        out
    }
}

pub fn to_sparse(m: &StackedTransitionMatrix) -> CooMatrix {
    CooMatrix::from_dense(m.n_rows(), m.n_cols(), m.as_slice()).expect("stacked matrix shape is consistent")
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Converts from COO. Input order does not matter; entries of each row
    /// come out sorted by column.
    pub fn from_coo(coo: &CooMatrix) -> Self {
        let mut row_ptr = vec![0usize; coo.n_rows + 1];
        for &r in &coo.row_idx {
            row_ptr[r + 1] += 1;
        }
        for r in 0..coo.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut order: Vec<usize> = (0..coo.nnz()).collect();
        order.sort_by_key(|&k| (coo.row_idx[k], coo.col_idx[k]));
        let col_idx = order.iter().map(|&k| coo.col_idx[k]).collect();
        let values = order.iter().map(|&k| coo.values[k]).collect();
        CsrMatrix { n_rows: coo.n_rows, n_cols: coo.n_cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[r * self.n_cols + self.col_idx[k]] = self.values[k];
            }
        }
        out
    }

    /// `y = M v` into a caller-provided buffer.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: v.len() });
        }
        if out.len() != self.n_rows {
            return Err(Error::DimensionMismatch { expected: self.n_rows, found: out.len() });
        }
        for (r, y) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            *y = acc;
        }
        Ok(())
    }
}

pub fn sparse_mult(m: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; m.n_rows];
    m.mul_vec_into(v, &mut out)?;
    Ok(out)
}

/// `r + beta * t`.
pub fn saxpy(beta: f64, t: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; r.len()];
    saxpy_into(beta, t, r, &mut out)?;
    Ok(out)
}

pub fn saxpy_into(beta: f64, t: &[f64], r: &[f64], out: &mut [f64]) -> Result<()> {
    if t.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), found: t.len() });
    }
    if out.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), found: out.len() });
    }
    for ((o, &ti), &ri) in out.iter_mut().zip(t).zip(r) {
        *o = ri + beta * ti;
    }
    Ok(())
}

/// Per-state maximum of an action-major Q vector. Ties go to the lowest
/// action index.
pub fn max_reduce(q: &[f64], n_states: usize, n_actions: usize) -> Result<(ValueFunction, Policy)> {
    let mut value = vec![0.0; n_states];
    let mut policy = vec![0usize; n_states];
    max_reduce_into(q, n_states, n_actions, &mut value, &mut policy)?;
    Ok((ValueFunction(value), Policy(policy)))
}

pub fn max_reduce_into(
    q: &[f64],
    n_states: usize,
    n_actions: usize,
    value: &mut [f64],
    policy: &mut [usize],
) -> Result<()> {
    if q.len() != n_states * n_actions {
        return Err(Error::DimensionMismatch { expected: n_states * n_actions, found: q.len() });
    }
    if value.len() != n_states || policy.len() != n_states {
        return Err(Error::DimensionMismatch { expected: n_states, found: value.len().min(policy.len()) });
    }
    for s in 0..n_states {
        let mut best = f64::NEG_INFINITY;
        let mut best_action = 0;
        for a in 0..n_actions {
            let candidate = q[a * n_states + s];
            if candidate > best {
                best = candidate;
                best_action = a;
            }
        }
        value[s] = best;
        policy[s] = best_action;
    }
    Ok(())
}

/// `max_i |a_i - b_i|`.
pub fn inf_norm_diff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Whole bytes needed for an index that takes one of `n` values. Never
/// less than one byte.
pub fn index_bytes(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let bits = (n as f64).log2();
    ((bits / 8.0).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageReport {
    pub n_states: usize,
    pub n_actions: usize,
    pub k_nz: usize,
    pub dense_bytes: usize,
    pub sparse_bytes: usize,
    pub qfunction_bytes: usize,
    pub sparsity: f64,
}

/// Storage of the transition model as dense single-precision matrices,
/// as coordinate-format sparse matrices, and of a tabular Q-function.
pub fn storage_report(n_states: usize, n_actions: usize, k_nz: usize) -> StorageReport {
    let rows = n_states * n_actions;
    let entry_bytes = index_bytes(rows) + index_bytes(n_states) + VALUE_BYTES;
    let cells = rows * n_states;
    let sparsity = if cells == 0 { 0.0 } else { 1.0 - k_nz as f64 / cells as f64 };
    StorageReport {
        n_states,
        n_actions,
        k_nz,
        dense_bytes: VALUE_BYTES * n_states * n_states * n_actions,
        sparse_bytes: k_nz * entry_bytes,
        qfunction_bytes: VALUE_BYTES * n_states * n_actions,
        sparsity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_dense(n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 1.0;
        }
        d
    }

    #[test]
    fn identity_to_coo_and_csr() {
        let coo = CooMatrix::from_dense(3, 3, &identity_dense(3)).unwrap();
        assert_eq!(coo.nnz(), 3);
        assert!(coo.values.iter().all(|&v| v == 1.0));
        let csr = CsrMatrix::from_coo(&coo);
        assert_eq!(csr.row_ptr, vec![0, 1, 2, 3]);
        assert_eq!(csr.to_dense(), identity_dense(3));
    }

    #[test]
    fn all_zero_matrix_has_no_entries() {
        let coo = CooMatrix::from_dense(2, 2, &[0.0; 4]).unwrap();
        assert_eq!(coo.nnz(), 0);
        let csr = CsrMatrix::from_coo(&coo);
        assert_eq!(csr.row_ptr, vec![0, 0, 0]);
        assert_eq!(sparse_mult(&csr, &[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_row() {
        let coo = CooMatrix::from_dense(1, 3, &[0.0, 5.0, 0.0]).unwrap();
        let csr = CsrMatrix::from_coo(&coo);
        assert_eq!(csr.row_ptr, vec![0, 1]);
        assert_eq!(csr.col_idx, vec![1]);
    }

    #[test]
    fn csr_sorts_unordered_coo() {
        let coo = CooMatrix {
            n_rows: 2,
            n_cols: 3,
            row_idx: vec![1, 0, 1, 0],
            col_idx: vec![2, 1, 0, 0],
            values: vec![4.0, 2.0, 3.0, 1.0],
        };
        let csr = CsrMatrix::from_coo(&coo);
        assert_eq!(csr.row_ptr, vec![0, 2, 4]);
        assert_eq!(csr.col_idx, vec![0, 1, 0, 2]);
        assert_eq!(csr.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(csr.to_dense(), coo.to_dense());
    }

    #[test]
    fn identity_mult() {
        let csr = CsrMatrix::from_coo(&CooMatrix::from_dense(3, 3, &identity_dense(3)).unwrap());
        assert_eq!(sparse_mult(&csr, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(sparse_mult(&csr, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn saxpy_examples() {
        assert_eq!(saxpy(0.0, &[7.0, 8.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(saxpy(1.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(saxpy(0.9, &[10.0, 0.0], &[1.0, 2.0]).unwrap(), vec![1.0 + 0.9 * 10.0, 2.0]);
        assert!(saxpy(1.0, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn max_reduce_examples() {
        let (v, p) = max_reduce(&[3.0, 5.0], 1, 2).unwrap();
        assert_eq!(v.0, vec![5.0]);
        assert_eq!(p.0, vec![1]);
        let (v, p) = max_reduce(&[4.0, 4.0], 1, 2).unwrap();
        assert_eq!(v.0, vec![4.0]);
        assert_eq!(p.0, vec![0]);
        assert!(max_reduce(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn max_reduce_strides_by_state() {
        // states 0..3, actions 0..2, action-major
        let q = [1.0, 9.0, 2.0, 3.0, 0.0, 2.0];
        let (v, p) = max_reduce(&q, 3, 2).unwrap();
        assert_eq!(v.0, vec![3.0, 9.0, 2.0]);
        assert_eq!(p.0, vec![1, 0, 0]);
    }

    #[test]
    fn inf_norm_examples() {
        assert_eq!(inf_norm_diff(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(inf_norm_diff(&[1.0, 5.0], &[2.0, 2.0]).unwrap(), 3.0);
        assert!(inf_norm_diff(&[1.0], &[]).is_err());
    }

    #[test]
    fn index_width() {
        assert_eq!(index_bytes(1), 1);
        assert_eq!(index_bytes(2), 1);
        assert_eq!(index_bytes(256), 1);
        assert_eq!(index_bytes(257), 2);
        assert_eq!(index_bytes(132), 1);
        assert_eq!(index_bytes(65_536), 2);
        assert_eq!(index_bytes(65_537), 3);
    }

    #[test]
    fn storage_case_study() {
        let r = storage_report(66, 2, 444);
        assert_eq!(r.dense_bytes, 34_848);
        assert_eq!(r.sparse_bytes, 2_664);
        assert_eq!(r.qfunction_bytes, 528);
        assert!((r.sparsity - (1.0 - 444.0 / (132.0 * 66.0))).abs() < 1e-15);
        assert!((r.sparsity - 0.949).abs() < 5e-4);
    }

    #[test]
    fn storage_degenerate() {
        let r = storage_report(1, 1, 1);
        assert_eq!((r.dense_bytes, r.qfunction_bytes, r.sparse_bytes), (4, 4, 6));
    }
}

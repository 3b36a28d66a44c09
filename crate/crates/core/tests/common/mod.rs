#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmm::mdp::{MdpSpec, StackedTransitionMatrix};

/// Row-stochastic stacked matrix whose rows keep roughly `1 - sparsity` of
/// their entries.
pub fn random_stm(rng: &mut ChaCha8Rng, ns: usize, na: usize, sparsity: f64) -> StackedTransitionMatrix {
    let keep = (((1.0 - sparsity) * ns as f64).round() as usize).clamp(1, ns);
    let mut data = vec![0.0; ns * na * ns];
    for row in data.chunks_mut(ns) {
        let mut cols: Vec<usize> = (0..ns).collect();
        for i in 0..keep {
            let j = rng.gen_range(i..ns);
            cols.swap(i, j);
        }
        let weights: Vec<f64> = (0..keep).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for (c, w) in cols[..keep].iter().zip(&weights) {
            row[*c] = w / total;
        }
    }
    StackedTransitionMatrix::new(ns, na, data).unwrap()
}

pub fn random_mdp(seed: u64, ns: usize, na: usize, sparsity: f64, discount: f64) -> MdpSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stm = random_stm(&mut rng, ns, na, sparsity);
    let rewards = (0..ns * na).map(|_| rng.gen_range(-10.0..10.0)).collect();
    MdpSpec::new(rewards, stm, discount, 1e-9).unwrap()
}

/// Value iteration written against nested vectors, independent of the
/// crate's solvers.
pub fn reference_values(p: &[Vec<Vec<f64>>], r: &[Vec<f64>], beta: f64, tol: f64) -> (Vec<f64>, Vec<usize>) {
    let ns = r.len();
    let mut v = vec![0.0; ns];
    loop {
        let mut next = vec![f64::NEG_INFINITY; ns];
        let mut pol = vec![0; ns];
        for s in 0..ns {
            for a in 0..r[s].len() {
                let q = r[s][a] + beta * p[s][a].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
                if q > next[s] {
                    next[s] = q;
                    pol[s] = a;
                }
            }
        }
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < tol {
            return (v, pol);
        }
    }
}

pub fn nested(spec: &MdpSpec) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>) {
    let (ns, na) = (spec.n_states, spec.n_actions);
    let p = (0..ns).map(|s| (0..na).map(|a| spec.transitions.row(a * ns + s).to_vec()).collect()).collect();
    let r = (0..ns).map(|s| (0..na).map(|a| spec.rewards[a * ns + s]).collect()).collect();
    (p, r)
}

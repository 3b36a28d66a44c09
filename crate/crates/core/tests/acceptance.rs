mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmm::controllers::{build_spec, learnable_parameter_count, Method, ParameterEstimates};
use cmm::mdp::dense_value_iteration;
use cmm::node::{assemble_stm, energy_per_transaction, modem_stm, Action, ModemState, NodeConfig, NodeState};
use cmm::sim::{
    average_power, crossover_period, default_values, pareto_sweep, seed_list, PowerModel, ScenarioFile, SweepPoint,
    FITTED_SLEEP_POWER,
};
use cmm::sparse::storage_report;
use cmm::svi::svi_solve;
use common::random_mdp;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn storage() -> Outcome {
    let start = Instant::now();
    let r = storage_report(66, 2, 444);
    let elapsed = start.elapsed();
    let pass = r.dense_bytes == 34_848
        && r.sparse_bytes == 2_664
        && r.qfunction_bytes == 528
        && elapsed < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "dense {} B, sparse {} B, q-function {} B in {:?}",
            r.dense_bytes, r.sparse_bytes, r.qfunction_bytes, elapsed
        ),
    )
}

fn sparsity() -> Outcome {
    let start = Instant::now();
    let file = ScenarioFile::default_scenario();
    let est = ParameterEstimates::from_config(&file.node, file.structured.alpha).unwrap();
    let stm = assemble_stm(&file.node, &est).unwrap();
    let nnz = stm.count_nonzero();
    let sparsity = 1.0 - nnz as f64 / stm.as_slice().len() as f64;
    let elapsed = start.elapsed();
    let pass = sparsity >= 0.90 && nnz == 444 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("k_nz {nnz}, sparsity {sparsity:.4} in {elapsed:?}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut specs = Vec::new();
    for _ in 0..250 {
        let ns = rng.gen_range(1..=50);
        let na = rng.gen_range(1..=4);
        let sparsity = rng.gen_range(0.5..0.99);
        let discount = rng.gen_range(0.5..0.97);
        specs.push(random_mdp(rng.gen(), ns, na, sparsity, discount));
    }
    let file = ScenarioFile::default_scenario();
    let est = ParameterEstimates::from_config(&file.node, file.structured.alpha).unwrap();
    specs.push(build_spec(&file.node, &est, &file.structured).unwrap());

    let mut policy_mismatches = 0;
    let mut worst = 0.0f64;
    for spec in &specs {
        let sparse = svi_solve(spec).unwrap();
        let dense = dense_value_iteration(spec).unwrap();
        if sparse.policy != dense.policy {
            policy_mismatches += 1;
        }
        for (a, b) in sparse.value.0.iter().zip(&dense.value.0) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = policy_mismatches == 0 && worst <= 1e-9 && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{} MDPs, {policy_mismatches} policy mismatches, max value gap {worst:.3e} in {elapsed:?}",
            specs.len()
        ),
    )
}

fn energy_model() -> Outcome {
    let node = NodeConfig::default();
    let e = |n| energy_per_transaction(n, node.energy_c1, node.energy_c2).unwrap();
    let affine = (1..100).all(|n| e(n) == 6.62 + 1.55 * (n as f64 - 1.0));
    let worst = (1..100).map(|n| (e(n + 1) - e(n) - 1.55).abs() / (f64::EPSILON * e(n + 1))).fold(0.0, f64::max);
    let pass = e(1) == 6.62 && affine && worst <= 1.0;
    outcome(pass, format!("E(1) = {} J, E(n) = 6.62 + 1.55 (n - 1) exact for n < 100, slope error {worst:.2} ulp", e(1)))
}

fn crossover() -> Outcome {
    let t = crossover_period(&PowerModel::sparse_value_iteration(3600.0), &PowerModel::q_learning());
    let pass = t.is_some_and(|t| (t - 2694.0).abs() <= 60.0);
    outcome(pass, format!("svi vs ql crossover {t:?} s"))
}

fn average_power_model() -> Outcome {
    let ql = average_power(&PowerModel::q_learning()).unwrap();
    let svi = average_power(&PowerModel::sparse_value_iteration(3600.0)).unwrap();
    let ql_ok = (ql - 78.8e-6).abs() <= 1e-12 * 78.8e-6;
    let svi_ok = (svi / 69.8e-6 - 1.0).abs() <= 0.25;
    let pass = PowerModel::q_learning().sleep_power == FITTED_SLEEP_POWER && ql_ok && svi_ok;
    outcome(pass, format!("ql {:.4} uW, svi at 1 h {:.2} uW vs 69.8 uW", ql * 1e6, svi * 1e6))
}

fn connecting_dwell() -> Outcome {
    let start = Instant::now();
    let node = NodeConfig::default();
    let est = ParameterEstimates::from_config(&node, 0.1).unwrap();
    let stm = assemble_stm(&node, &est).unwrap();
    let space = cmm::node::StateSpace::of(&node);
    let from = space.encode(&NodeState { app_mode: 0, queue_len: 0, modem: ModemState::Connecting }).unwrap();
    // Probability of leaving Connecting under `on`, summed over the full model.
    let leave: f64 = space
        .states()
        .filter(|s| s.modem != ModemState::Connecting)
        .map(|s| stm.get(from, Action::On.index(), space.encode(&s).unwrap()))
        .sum();
    let modem = modem_stm(est.rho()).unwrap();
    let factor_ok = (leave - modem.prob(Action::On, ModemState::Connecting, ModemState::Connected)).abs() < 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples = 1_000_000u64;
    let mut frames = 0u64;
    for _ in 0..samples {
        loop {
            frames += 1;
            if rng.gen::<f64>() < leave {
                break;
            }
        }
    }
    let mean = frames as f64 / samples as f64;
    let expected = (node.connect_time / node.frame_period).floor();
    let elapsed = start.elapsed();
    let pass = factor_ok && (mean / expected - 1.0).abs() <= 0.02 && elapsed < Duration::from_secs(30);
    outcome(pass, format!("mean dwell {mean:.3} frames vs {expected} over {samples} samples in {elapsed:?}"))
}

fn sweeps(file: &ScenarioFile) -> (Vec<SweepPoint>, Vec<SweepPoint>, Vec<SweepPoint>) {
    let seeds = seed_list(file, file.sweep.seeds.max(5));
    let run = |m| pareto_sweep(file, m, &default_values(file, m), &seeds).unwrap();
    (run(Method::Threshold), run(Method::Structured), run(Method::QLearning))
}

fn fig_reproduction(file: &ScenarioFile, th: &[SweepPoint], sl: &[SweepPoint], ql: &[SweepPoint]) -> Outcome {
    let active = |p: &&SweepPoint| p.mean_transmitted > 0.0;
    let sl: Vec<&SweepPoint> = sl.iter().filter(active).collect();
    let ql: Vec<&SweepPoint> = ql.iter().filter(active).collect();

    let undominated: Vec<f64> = th
        .iter()
        .filter(active)
        .filter(|t| {
            !sl.iter().any(|s| {
                s.mean_latency < t.mean_latency
                    && s.mean_energy_per_packet < t.mean_energy_per_packet
                    && s.mean_transmitted >= t.mean_transmitted
            })
        })
        .map(|t| t.value)
        .collect();
    let dominance = undominated.is_empty();

    let mut ratios = Vec::new();
    for q in &ql {
        for s in &sl {
            if (s.mean_latency / q.mean_latency - 1.0).abs() <= 0.2 {
                ratios.push(s.mean_energy_per_packet / q.mean_energy_per_packet);
            }
        }
    }
    let warmed = file.scenario.warmup_frames >= 2 * file.structured.solve_period;
    let saving = warmed && !ratios.is_empty() && ratios.iter().all(|r| *r <= 0.95);
    let worst = ratios.iter().cloned().fold(f64::NAN, f64::max);
    outcome(
        dominance && saving,
        format!(
            "(a) undominated thresholds {undominated:?}; (b) {} matched pairs, worst energy ratio {worst:.3}",
            ratios.len()
        ),
    )
}

fn invariants(file: &ScenarioFile, sweeps: [&[SweepPoint]; 3]) -> Outcome {
    let start = Instant::now();
    let runs: Vec<_> = sweeps.iter().flat_map(|s| s.iter()).flat_map(|p| p.runs.iter()).collect();
    let conserved = runs.iter().all(|m| m.conserves_packets());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut stochastic = true;
    for r2 in &file.sweep.r2 {
        let node = file.node.with_r2(*r2);
        let est = ParameterEstimates::from_config(&node, file.structured.alpha).unwrap();
        stochastic &= assemble_stm(&node, &est).unwrap().rows().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
    let node = &file.node;
    let mut est = ParameterEstimates::from_config(node, 0.05).unwrap();
    let modes = node.n_app_modes;
    let state = |m, modem| NodeState { app_mode: m, queue_len: 0, modem };
    for k in 0..100_000 {
        let connect = if rng.gen_bool(0.02) { Some(rng.gen_range(0.0..8.0)) } else { None };
        est.observe_transition(
            &state(rng.gen_range(0..modes), ModemState::Off),
            &state(rng.gen_range(0..modes), ModemState::Off),
            connect,
        );
        if k % 10_000 == 0 {
            stochastic &= assemble_stm(node, &est).unwrap().rows().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
    let sigma_ok = est.sigma_hat.iter().all(|row| {
        (row.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && row.iter().all(|p| (0.0..=1.0).contains(p))
    }) && est.connect_time_hat >= node.frame_period;

    let seeds = seed_list(file, 2);
    let values = [6.0, 10.0];
    let mut deterministic = true;
    for m in [Method::Structured, Method::QLearning] {
        let a = pareto_sweep(file, m, &values, &seeds).unwrap();
        let b = pareto_sweep(file, m, &values, &seeds).unwrap();
        for (x, y) in a.iter().zip(&b) {
            deterministic &= format!("{:?}", x.runs) == format!("{:?}", y.runs);
        }
    }
    let elapsed = start.elapsed();
    let pass = conserved && stochastic && sigma_ok && deterministic && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "conservation over {} runs {conserved}, row sums {stochastic}, sigma fuzz {sigma_ok}, determinism {deterministic} in {elapsed:?}",
            runs.len()
        ),
    )
}

fn parameter_counts() -> Outcome {
    let node = NodeConfig::default();
    let theta = ParameterEstimates::parameter_count(node.n_app_modes);
    let ql = learnable_parameter_count(Method::QLearning, node.n_states(), 2, theta);
    let sl = learnable_parameter_count(Method::Structured, node.n_states(), 2, theta);
    outcome(ql == 132 && sl == 5, format!("q-learning {ql}, structured {sl}"))
}

fn main() -> ExitCode {
    let file = ScenarioFile::default_scenario();
    let sweep_start = Instant::now();
    let (th, sl, ql) = sweeps(&file);
    let sweep_time = sweep_start.elapsed();

    let mut results = vec![
        (1, "storage accounting", storage()),
        (2, "case-study sparsity", sparsity()),
        (3, "sparse solver matches dense oracle", oracle_equivalence()),
        (4, "transaction energy", energy_model()),
        (5, "update-period crossover", crossover()),
        (6, "average power", average_power_model()),
        (7, "connecting dwell time", connecting_dwell()),
    ];
    let mut fig = fig_reproduction(&file, &th, &sl, &ql);
    fig.pass &= sweep_time < Duration::from_secs(600);
    fig.detail.push_str(&format!(" in {sweep_time:?}"));
    results.push((8, "latency-energy trade-off", fig));
    results.push((9, "invariant suites", invariants(&file, [&th, &sl, &ql])));
    results.push((10, "learnable parameter counts", parameter_counts()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

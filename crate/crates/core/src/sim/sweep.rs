use rayon::prelude::*;
use serde::Serialize;

use crate::controllers::{Controller, Method, QLearningController, StructuredController, ThresholdController};
use crate::error::{Error, Result};

use super::engine::{simulate, SimMetrics};
use super::scenario::ScenarioFile;

/// Seed-averaged result of one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub series: &'static str,
    pub method: Method,
    /// `r2` for the MDP controllers, `nq` for the threshold rule.
    pub parameter: &'static str,
    pub value: f64,
    pub seeds: usize,
    pub mean_latency: f64,
    pub mean_energy_per_packet: f64,
    pub mean_dropped: f64,
    pub mean_transmitted: f64,
    #[serde(skip)]
    pub runs: Vec<SimMetrics>,
}

fn controller_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03
}

/// A controller for `method` with its sweep parameter set to `value`.
pub fn build_controller(file: &ScenarioFile, method: Method, value: f64, seed: u64) -> Result<Box<dyn Controller + Send>> {
    Ok(match method {
        Method::Structured => Box::new(StructuredController::new(file.node.with_r2(value), file.structured)?),
        Method::QLearning => {
            Box::new(QLearningController::new(file.node.with_r2(value), file.qlearning, controller_seed(seed))?)
        }
        Method::Threshold => {
            if !(value >= 1.0) || value.fract() != 0.0 {
                return Err(Error::Config(format!("threshold {value} must be a positive integer")));
            }
            Box::new(ThresholdController::new(value as usize))
        }
    })
}

/// Default sweep values for a method: the `r2` list for MDP controllers,
/// the thresholds for the fixed rule.
pub fn default_values(file: &ScenarioFile, method: Method) -> Vec<f64> {
    match method {
        Method::Threshold => file.thresholds().into_iter().map(|n| n as f64).collect(),
        _ => file.sweep.r2.clone(),
    }
}

pub fn seed_list(file: &ScenarioFile, n: usize) -> Vec<u64> {
    (0..n.max(1) as u64).map(|k| file.scenario.seed + k).collect()
}

/// One seed-averaged point per sweep value, in the order given. Runs are
/// independent and execute in parallel.
pub fn pareto_sweep(file: &ScenarioFile, method: Method, values: &[f64], seeds: &[u64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::Config("a sweep needs at least one value and one seed".into()));
    }
    let base = file.scenario()?;
    let jobs: Vec<(usize, u64)> = (0..values.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let runs: Vec<Result<(usize, SimMetrics)>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let mut controller = build_controller(file, method, values[i], seed)?;
            simulate(&base.with_seed(seed), controller.as_mut()).map(|m| (i, m))
        })
        .collect();
    let mut grouped: Vec<Vec<SimMetrics>> = vec![Vec::new(); values.len()];
    for run in runs {
        let (i, m) = run?;
        grouped[i].push(m);
    }
    Ok(values
        .iter()
        .zip(grouped)
        .map(|(&value, runs)| {
            let n = runs.len() as f64;
            let mean = |f: fn(&SimMetrics) -> f64| runs.iter().map(f).sum::<f64>() / n;
            SweepPoint {
                series: method.series(),
                method,
                parameter: if method == Method::Threshold { "nq" } else { "r2" },
                value,
                seeds: runs.len(),
                mean_latency: mean(|m| m.avg_latency),
                mean_energy_per_packet: mean(|m| m.energy_per_packet),
                mean_dropped: mean(|m| m.measured_dropped as f64),
                mean_transmitted: mean(|m| m.measured_transmitted as f64),
                runs,
            }
        })
        .collect())
}

/// Points of `front` with strictly lower latency and energy than `target`.
pub fn dominators<'a>(front: &'a [SweepPoint], target: &SweepPoint) -> Vec<&'a SweepPoint> {
    front
        .iter()
        .filter(|p| {
            p.mean_latency < target.mean_latency && p.mean_energy_per_packet < target.mean_energy_per_packet
        })
        .collect()
}

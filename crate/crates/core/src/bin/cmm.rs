use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cmm::controllers::{build_spec, Method, ParameterEstimates};
use cmm::error::Error;
use cmm::node::{assemble_stm, Action, StateSpace};
use cmm::sim::output::{
    format_sig, write_json, write_metrics_csv, write_power_csv, write_storage_csv, write_sweep_csv, PowerRow,
};
use cmm::sim::{
    average_power, build_controller, crossover_period, default_values, pareto_sweep, seed_list, simulate, PowerModel,
    ScenarioFile, SimMetrics,
};
use cmm::sparse::storage_report;
use cmm::svi::svi_solve;

#[derive(Parser)]
#[command(name = "cmm", version, about = "Compact MDP power management toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the node MDP once and summarize the policy.
    Solve(Common),
    /// Run one simulation per selected controller.
    Simulate(Common),
    /// Latency versus energy sweep, averaged over seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Seeds per sweep point; defaults to the scenario file.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Dense, sparse and Q-function storage of the node MDP.
    Storage {
        #[command(flatten)]
        common: Common,
        /// Queue sizes (states per mode) to report instead of the configured one.
        #[arg(long, value_delimiter = ',')]
        queue_states: Vec<usize>,
    },
    /// Average MCU power against the policy update period.
    Power {
        #[command(flatten)]
        common: Common,
        /// Update periods in seconds.
        #[arg(long, value_delimiter = ',', default_values_t = vec![600.0, 1800.0, 3600.0, 7200.0, 14400.0, 28800.0, 86400.0])]
        periods: Vec<f64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    All,
    Structured,
    Ql,
    Threshold,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::All => Method::ALL.to_vec(),
            MethodArg::Structured => vec![Method::Structured],
            MethodArg::Ql => vec![Method::QLearning],
            MethodArg::Threshold => vec![Method::Threshold],
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file, or `default` for the shipped scenario.
    #[arg(long, default_value = "default")]
    config: String,
    /// First simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Discount factor for both learning controllers.
    #[arg(long)]
    beta: Option<f64>,
    /// Solver convergence tolerance.
    #[arg(long)]
    tau: Option<f64>,
    /// Learning rate for both learning controllers.
    #[arg(long)]
    alpha: Option<f64>,
    /// Initial Q-learning exploration rate.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Frames between policy solves.
    #[arg(long)]
    solve_period: Option<u64>,
    /// Sweep (or single) values of the transmission reward weight.
    #[arg(long, value_delimiter = ',')]
    r2: Vec<f64>,
    /// Sweep (or single) queue thresholds.
    #[arg(long, value_delimiter = ',')]
    nq: Vec<usize>,
}

enum Failure {
    Usage(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Common {
    fn load(&self) -> std::result::Result<ScenarioFile, Failure> {
        let mut f = ScenarioFile::load(&self.config)
            .map_err(|e| Failure::Usage(format!("cannot load config '{}': {e}", self.config)))?;
        if let Some(seed) = self.seed {
            f.scenario.seed = seed;
        }
        if let Some(b) = self.beta {
            f.structured.discount = b;
            f.qlearning.discount = b;
        }
        if let Some(t) = self.tau {
            f.structured.tolerance = t;
        }
        if let Some(a) = self.alpha {
            f.structured.alpha = a;
            f.qlearning.alpha = a;
        }
        if let Some(e) = self.epsilon {
            f.qlearning.epsilon = e;
        }
        if let Some(p) = self.solve_period {
            f.structured.solve_period = p;
        }
        if let [r2] = self.r2[..] {
            f.node.reward.r2 = r2;
        }
        if let [nq] = self.nq[..] {
            f.threshold.nq = nq;
        }
        f.scenario()?;
        Ok(f)
    }

    fn values(&self, file: &ScenarioFile, method: Method) -> Vec<f64> {
        match method {
            Method::Threshold if !self.nq.is_empty() => self.nq.iter().map(|&n| n as f64).collect(),
            Method::Structured | Method::QLearning if !self.r2.is_empty() => self.r2.clone(),
            _ => default_values(file, method),
        }
    }

    fn single_value(file: &ScenarioFile, method: Method) -> f64 {
        match method {
            Method::Threshold => file.threshold.nq as f64,
            _ => file.node.reward.r2,
        }
    }

    fn csv_sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit_json<T: Serialize + ?Sized>(&self, value: &T) -> std::result::Result<(), Failure> {
        if let Some(p) = &self.json {
            write_json(File::create(p)?, value)?;
        }
        Ok(())
    }
}

fn solve(c: &Common) -> std::result::Result<(), Failure> {
    let f = c.load()?;
    let est = ParameterEstimates::new(
        f.node.app_transition.clone(),
        f.node.connect_time,
        f.node.frame_period,
        f.structured.alpha,
        f.structured.connect_alpha,
    )?;
    let spec = build_spec(&f.node, &est, &f.structured)?;
    let result = svi_solve(&spec)?;
    let space = StateSpace::of(&f.node);
    let on = result.policy.0.iter().filter(|&&a| a == Action::On.index()).count();
    println!("states {}  actions {}  k_nz {}", result.n_states, result.n_actions, result.k_nz);
    println!("iterations {}", result.iterations);
    println!("final_delta {}", format_sig(result.final_delta));
    println!("policy on in {on} of {} states", space.len());
    for mode in 0..f.node.n_app_modes {
        for modem in cmm::node::ModemState::ALL {
            let row: String = (0..f.node.queue_states)
                .map(|q| {
                    let s = cmm::node::NodeState { app_mode: mode, queue_len: q, modem };
                    let i = space.encode(&s).expect("state in range");
                    if result.policy.action(i) == Action::On.index() { '1' } else { '0' }
                })
                .collect();
            println!("  mode {mode} {modem:<10?} q=0.. {row}");
        }
    }
    if let Some(p) = &c.out {
        let mut w = csv::Writer::from_path(p).map_err(Error::from)?;
        w.write_record(["state", "app_mode", "queue_len", "modem", "action", "value"]).map_err(Error::from)?;
        for (i, s) in space.states().enumerate() {
            w.write_record([
                i.to_string(),
                s.app_mode.to_string(),
                s.queue_len.to_string(),
                format!("{:?}", s.modem).to_lowercase(),
                result.policy.action(i).to_string(),
                format_sig(result.value.0[i]),
            ])
            .map_err(Error::from)?;
        }
        w.flush()?;
    }
    c.emit_json(&result)
}

fn simulate_cmd(c: &Common) -> std::result::Result<(), Failure> {
    let f = c.load()?;
    let scenario = f.scenario()?;
    let mut runs: Vec<(Method, SimMetrics)> = Vec::new();
    for method in c.method.methods() {
        let mut controller = build_controller(&f, method, Common::single_value(&f, method), scenario.rng_seed)?;
        runs.push((method, simulate(&scenario, controller.as_mut())?));
    }
    let rows: Vec<(&str, u64, &SimMetrics)> = runs.iter().map(|(m, s)| (m.series(), scenario.rng_seed, s)).collect();
    write_metrics_csv(c.csv_sink()?, &rows)?;
    let json: Vec<_> = runs.iter().map(|(m, s)| serde_json::json!({ "series": m.series(), "metrics": s })).collect();
    c.emit_json(&json)
}

fn sweep_cmd(c: &Common, seeds: Option<usize>) -> std::result::Result<(), Failure> {
    let f = c.load()?;
    let seeds = seed_list(&f, seeds.unwrap_or(f.sweep.seeds));
    let mut points = Vec::new();
    for method in c.method.methods() {
        points.extend(pareto_sweep(&f, method, &c.values(&f, method), &seeds)?);
    }
    write_sweep_csv(c.csv_sink()?, &points)?;
    c.emit_json(&points)
}

fn storage_cmd(c: &Common, queue_states: &[usize]) -> std::result::Result<(), Failure> {
    let f = c.load()?;
    let sizes = if queue_states.is_empty() { vec![f.node.queue_states] } else { queue_states.to_vec() };
    let mut reports = Vec::new();
    for q in sizes {
        let node = cmm::node::NodeConfig { queue_states: q, ..f.node.clone() };
        node.validate()?;
        let est = ParameterEstimates::from_config(&node, f.structured.alpha)?;
        let stm = assemble_stm(&node, &est)?;
        reports.push(storage_report(stm.n_states(), stm.n_actions(), stm.count_nonzero()));
    }
    write_storage_csv(c.csv_sink()?, &reports)?;
    c.emit_json(&reports)
}

fn power_cmd(c: &Common, periods: &[f64]) -> std::result::Result<(), Failure> {
    let models = [
        ("vi", PowerModel::value_iteration(3600.0)),
        ("svi", PowerModel::sparse_value_iteration(3600.0)),
        ("ql", PowerModel::q_learning()),
    ];
    let mut rows = Vec::new();
    for &t in periods {
        for (name, m) in models {
            rows.push(PowerRow {
                method: name.into(),
                update_period_s: t,
                average_power_w: average_power(&m.with_period(t))?,
            });
        }
    }
    for (name, m) in &models[..2] {
        match crossover_period(m, &models[2].1) {
            Some(t) => eprintln!("{name} vs ql crossover {} s ({} min)", format_sig(t), format_sig(t / 60.0)),
            None => eprintln!("{name} vs ql: no crossover"),
        }
    }
    write_power_csv(c.csv_sink()?, &rows)?;
    c.emit_json(&rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(c) => solve(c),
        Command::Simulate(c) => simulate_cmd(c),
        Command::Sweep { common, seeds } => sweep_cmd(common, *seeds),
        Command::Storage { common, queue_states } => storage_cmd(common, queue_states),
        Command::Power { common, periods } => power_cmd(common, periods),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

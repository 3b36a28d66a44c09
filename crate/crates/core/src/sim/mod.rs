//! Frame-level simulation of the sensor node, controller sweeps, power
//! accounting and CSV output.

mod engine;
pub mod output;
pub mod power;
mod scenario;
mod sweep;

pub use engine::{simulate, SimMetrics};
pub use power::{average_power, crossover_period, PowerModel, FITTED_SLEEP_POWER};
pub use scenario::{
    Environment, Scenario, ScenarioFile, ScenarioSettings, ScheduleSegment, SweepSettings, ThresholdSettings,
    DEFAULT_SCENARIO,
};
pub use sweep::{build_controller, default_values, dominators, pareto_sweep, seed_list, SweepPoint};

//! CSV and JSON writers. Every CSV has a header row and a fixed column
//! order; reals carry six significant digits.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::sparse::StorageReport;

use super::engine::SimMetrics;
use super::sweep::SweepPoint;

/// `%g`-style formatting with six significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "series",
    "method",
    "parameter",
    "value",
    "seeds",
    "avg_latency_s",
    "energy_per_packet_mj",
    "packets_dropped",
    "packets_transmitted",
];

pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for p in points {
        w.write_record([
            p.series.to_string(),
            p.method.to_string(),
            p.parameter.to_string(),
            format_sig(p.value),
            p.seeds.to_string(),
            format_sig(p.mean_latency),
            format_sig(p.mean_energy_per_packet),
            format_sig(p.mean_dropped),
            format_sig(p.mean_transmitted),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const METRICS_COLUMNS: [&str; 12] = [
    "series",
    "seed",
    "avg_latency_s",
    "energy_per_packet_mj",
    "packets_generated",
    "packets_transmitted",
    "packets_dropped",
    "queue_final",
    "reward_total",
    "connections",
    "solves",
    "control_iterations",
];

pub fn write_metrics_csv<W: Write>(out: W, rows: &[(&str, u64, &SimMetrics)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_COLUMNS)?;
    for (series, seed, m) in rows {
        w.write_record([
            series.to_string(),
            seed.to_string(),
            format_sig(m.avg_latency),
            format_sig(m.energy_per_packet),
            m.packets_generated.to_string(),
            m.packets_transmitted.to_string(),
            m.packets_dropped.to_string(),
            m.queue_final.to_string(),
            format_sig(m.reward_total),
            m.connections.to_string(),
            m.compute.solves.to_string(),
            m.compute.control_iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const STORAGE_COLUMNS: [&str; 7] =
    ["n_states", "n_actions", "k_nz", "dense_bytes", "sparse_bytes", "qfunction_bytes", "sparsity"];

pub fn write_storage_csv<W: Write>(out: W, reports: &[StorageReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STORAGE_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.n_states.to_string(),
            r.n_actions.to_string(),
            r.k_nz.to_string(),
            r.dense_bytes.to_string(),
            r.sparse_bytes.to_string(),
            r.qfunction_bytes.to_string(),
            format_sig(r.sparsity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub method: String,
    pub update_period_s: f64,
    pub average_power_w: f64,
}

pub const POWER_COLUMNS: [&str; 3] = ["method", "update_period_s", "average_power_w"];

pub fn write_power_csv<W: Write>(out: W, rows: &[PowerRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POWER_COLUMNS)?;
    for r in rows {
        w.write_record([r.method.clone(), format_sig(r.update_period_s), format_sig(r.average_power_w)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(|e| crate::error::Error::Config(e.to_string()))
}

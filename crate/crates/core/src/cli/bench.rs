//! Runtime measurements over generated workspaces.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generator::{gen_env, GeneratorConfig, Setting, MEAN_VERTICES};
use crate::allocation::{extract_itineraries, min_sweep_dag};
use crate::decomposition::gen_bou_decomp;
use crate::error::{Error, Result};
use crate::geometry::SweepSchedule;
use crate::sensing::Sensing;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRecord {
    pub vertex_total: usize,
    pub decomposition_millis: f64,
    pub flow_millis: f64,
    pub total_millis: f64,
    pub robot_count: u64,
    pub setting: Setting,
    pub seed: u64,
}

/// Parses `1e3..1e5` (every power of ten in range), `1e3,5e3` or a single
/// number.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 1.0)
            .ok_or_else(|| Error::Contract(format!("bad size '{t}'")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        let mut out = Vec::new();
        let mut v = a;
        while v <= b * (1.0 + 1e-9) {
            out.push(v.round() as usize);
            v *= 10.0;
        }
        return Ok(out);
    }
    s.split(',').map(|t| num(t).map(|v| v.round() as usize)).collect()
}

/// Generates one instance near `vertices` total vertices and times the
/// pipeline on it.
pub fn bench_one(
    setting: Setting,
    vertices: usize,
    seed: u64,
    sched: &SweepSchedule,
    sensing: &Sensing,
) -> Result<BenchRecord> {
    let obstacles = ((vertices as f64 - 4.0) / MEAN_VERTICES).round().max(0.0) as usize;
    let env = gen_env(&GeneratorConfig::new(setting, obstacles, seed))?;
    let start = Instant::now();
    let dag = gen_bou_decomp(&env, sched)?;
    let decomposed = Instant::now();
    let adag = min_sweep_dag(dag, sensing)?;
    let flowed = Instant::now();
    extract_itineraries(&adag)?;
    let done = Instant::now();
    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
    Ok(BenchRecord {
        vertex_total: env.vertex_count(),
        decomposition_millis: ms(start, decomposed),
        flow_millis: ms(decomposed, flowed),
        total_millis: ms(start, done),
        robot_count: adag.total,
        setting,
        seed,
    })
}

pub fn run_bench(
    settings: &[Setting],
    sizes: &[usize],
    seeds: u64,
    sched: &SweepSchedule,
    sensing: &Sensing,
) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &n in sizes {
        for &s in settings {
            for seed in 0..seeds {
                out.push(bench_one(s, n, seed, sched, sensing)?);
            }
        }
    }
    out.sort_by_key(|r| r.vertex_total);
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    wr.flush()?;
    Ok(())
}

/// Least-squares slope of `ln(total time)` against `ln(vertices)`.
pub fn loglog_slope(records: &[BenchRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.total_millis > 0.0)
        .map(|r| ((r.vertex_total as f64).ln(), r.total_millis.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

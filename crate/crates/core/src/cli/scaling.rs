//! The `scaling` workflow: wall time of the federation as the client count
//! grows with a fixed amount of data per client.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::federation::Federation;

pub const SCALING_CSV: &str = "scaling.csv";
pub const SCALING_ROUNDS_CSV: &str = "scaling_rounds.csv";
pub const SCALING_JSON: &str = "scaling.json";

#[derive(Debug, Clone, Serialize)]
pub struct HostInfo {
    pub os: &'static str,
    pub arch: &'static str,
    pub available_parallelism: usize,
    pub threads: usize,
}

impl HostInfo {
    pub fn current(threads: usize) -> Self {
        Self {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threads,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub clients: usize,
    pub samples: usize,
    pub round_ms: Vec<f64>,
    pub total_ms: f64,
    pub mean_round_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub host: HostInfo,
    pub rounds: usize,
    pub samples_per_client: usize,
    pub rows: Vec<ScalingRow>,
    /// Total time at the largest count over total time at the smallest.
    pub ratio: f64,
    pub threshold: f64,
    pub within_threshold: bool,
}

impl ScalingReport {
    pub fn artifacts(&self) -> Result<Vec<(PathBuf, Vec<u8>)>> {
        let err = |e: csv::Error| Error::Data(format!("scaling report: {e}"));
        let mut table = csv::Writer::from_writer(Vec::new());
        table
            .write_record(["clients", "samples", "rounds", "total_ms", "mean_round_ms"])
            .map_err(err)?;
        let mut per_round = csv::Writer::from_writer(Vec::new());
        per_round.write_record(["clients", "round", "duration_ms"]).map_err(err)?;
        for r in &self.rows {
            table
                .write_record([
                    r.clients.to_string(),
                    r.samples.to_string(),
                    self.rounds.to_string(),
                    format!("{:.3}", r.total_ms),
                    format!("{:.3}", r.mean_round_ms),
                ])
                .map_err(err)?;
            for (i, ms) in r.round_ms.iter().enumerate() {
                per_round
                    .write_record([r.clients.to_string(), (i + 1).to_string(), format!("{ms:.3}")])
                    .map_err(err)?;
            }
        }
        let into = |w: csv::Writer<Vec<u8>>| w.into_inner().map_err(|e| Error::Data(format!("scaling report: {e}")));
        let mut json = serde_json::to_vec_pretty(self).map_err(|e| Error::Data(format!("scaling report: {e}")))?;
        json.push(b'\n');
        Ok(vec![
            (PathBuf::from(SCALING_CSV), into(table)?),
            (PathBuf::from(SCALING_ROUNDS_CSV), into(per_round)?),
            (PathBuf::from(SCALING_JSON), json),
        ])
    }

    pub fn print_table(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            out,
            "host: {} {}, {} cores, {} threads",
            self.host.os, self.host.arch, self.host.available_parallelism, self.host.threads
        )?;
        writeln!(out, "{:>8} {:>8} {:>12} {:>14}", "clients", "samples", "total_ms", "mean_round_ms")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:>8} {:>8} {:>12.1} {:>14.1}",
                r.clients, r.samples, r.total_ms, r.mean_round_ms
            )?;
        }
        let (lo, hi) = (self.rows.first(), self.rows.last());
        if let (Some(lo), Some(hi)) = (lo, hi) {
            writeln!(
                out,
                "time({})/time({}) = {:.3} (threshold {}): {}",
                hi.clients,
                lo.clients,
                self.ratio,
                self.threshold,
                if self.within_threshold { "within" } else { "exceeded" }
            )?;
        }
        Ok(())
    }
}

/// Runs `scaling.rounds` rounds for every client count. Counts are processed
/// in ascending order; the ratio compares the largest to the smallest.
pub fn run_scaling(cfg: &ExperimentConfig, threads: usize) -> Result<ScalingReport> {
    cfg.validate()?;
    let splits = cfg.load_splits()?;
    let mut counts = cfg.scaling.client_counts.clone();
    counts.sort_unstable();
    counts.dedup();
    let pools = counts
        .iter()
        .map(|&k| cfg.scaling_pool(k, &splits))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(counts.len());
    for (&k, pool) in counts.iter().zip(&pools) {
        let mut fc = cfg.federation_config();
        fc.num_clients = k;
        fc.rounds = cfg.scaling.rounds;
        let mut fed = Federation::setup(fc, pool, splits.test.clone(), None)?.with_threads(threads)?;
        let round_ms = (1..=cfg.scaling.rounds)
            .map(|r| fed.run_round(r).map(|rec| rec.duration_ms))
            .collect::<Result<Vec<_>>>()?;
        let total_ms: f64 = round_ms.iter().sum();
        rows.push(ScalingRow {
            clients: k,
            samples: pool.len(),
            mean_round_ms: total_ms / round_ms.len() as f64,
            total_ms,
            round_ms,
        });
    }
    let ratio = match (rows.first(), rows.last()) {
        (Some(lo), Some(hi)) if lo.total_ms > 0.0 => hi.total_ms / lo.total_ms,
        _ => f64::NAN,
    };
    Ok(ScalingReport {
        host: HostInfo::current(threads),
        rounds: cfg.scaling.rounds,
        samples_per_client: cfg.scaling.samples_per_client,
        rows,
        ratio,
        threshold: cfg.scaling.threshold,
        within_threshold: ratio < cfg.scaling.threshold,
    })
}

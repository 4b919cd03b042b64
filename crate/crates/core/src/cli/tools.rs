//! Standalone utilities: evidence fusion, pipeline latency and scoring of
//! prediction files.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::{combine_all, combine_joint, decide_max_belief, format_mass, read_mass_file, MassFunction};
use crate::latency::{load_pipeline_file, total_time, LatencyBreakdown};
use crate::metrics::{confusion_from_predictions, macro_report, write_metrics_csv, MetricReport};

fn io_out(e: std::io::Error) -> Error {
    Error::io(Path::new("<stdout>"), e)
}

/// Combines every source of every file, in order. `joint` normalizes once
/// over the l-ary intersection instead of folding pairwise.
pub fn cmd_fuse(files: &[&Path], joint: bool, out: &mut dyn Write) -> Result<()> {
    if files.is_empty() {
        return Err(Error::Config("fuse needs at least one mass file".into()));
    }
    let mut masses: Vec<MassFunction> = Vec::new();
    let mut names = Vec::new();
    for path in files {
        let file = read_mass_file(path)?;
        if let Some(first) = masses.first() {
            if first.frame() != &file.frame {
                return Err(Error::Evidence(format!(
                    "{}: frame {:?} differs from {:?}",
                    path.display(),
                    file.frame.labels(),
                    first.frame().labels()
                )));
            }
        }
        for (name, m) in file.sources {
            names.push(name);
            masses.push(m);
        }
    }
    let result = if joint { combine_joint(&masses) } else { combine_all(&masses) }?;
    let decision = decide_max_belief(&result);
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "frame: {}", result.combined.frame().labels().join(" "))?;
        writeln!(out, "sources: {}", names.join(" "))?;
        writeln!(out, "combined: {}", format_mass(&result.combined))?;
        writeln!(out, "conflict: {}", result.conflict)?;
        writeln!(out, "decision: {} (belief {})", decision.label, decision.belief)
    };
    w(out).map_err(io_out)
}

pub fn latency_report(path: &Path) -> Result<LatencyBreakdown> {
    let file = load_pipeline_file(path)?;
    total_time(&file.pipeline, &file.links)
}

pub fn cmd_latency(path: &Path, out: &mut dyn Write) -> Result<()> {
    let b = latency_report(path)?;
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            out,
            "{:<20} {:<14} {:>12} {:>12} {:>12}",
            "node", "stage", "transfer_ms", "exec_ms", "response_ms"
        )?;
        for n in &b.nodes {
            writeln!(
                out,
                "{:<20} {:<14} {:>12.3} {:>12.3} {:>12.3}",
                n.name,
                n.stage.to_string(),
                n.transfer.as_ms(),
                n.exec.as_ms(),
                n.response.as_ms()
            )?;
        }
        writeln!(out)?;
        writeln!(out, "preprocessing_ms {:.3}", b.stages.preprocessing.as_ms())?;
        writeln!(out, "processing_ms    {:.3}", b.stages.processing.as_ms())?;
        writeln!(out, "fusion_ms        {:.3}", b.stages.fusion.as_ms())?;
        if b.stages.other.0 > 0 {
            writeln!(out, "other_ms         {:.3}", b.stages.other.as_ms())?;
        }
        writeln!(out, "total_ms         {:.3}", b.total.as_ms())
    };
    w(out).map_err(io_out)
}

/// Reads a prediction file: a `true,predicted` header, then one row of
/// integer class indices per sample.
pub fn read_predictions(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "true" || &headers[1] != "predicted" {
        return Err(Error::parse(path, 1, "expected header 'true,predicted'"));
    }
    let (mut truth, mut predicted) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let field = |j: usize| {
            record[j]
                .parse::<usize>()
                .map_err(|_| Error::parse(path, line, format!("'{}' is not a class index", &record[j])))
        };
        truth.push(field(0)?);
        predicted.push(field(1)?);
    }
    if truth.is_empty() {
        return Err(Error::parse(path, 0, "no predictions"));
    }
    Ok((truth, predicted))
}

/// Scores a prediction file. The class count defaults to one more than the
/// largest index seen.
pub fn score_predictions(path: &Path, classes: Option<usize>) -> Result<MetricReport> {
    let (truth, predicted) = read_predictions(path)?;
    let seen = truth.iter().chain(&predicted).max().map_or(0, |m| m + 1);
    let n = classes.unwrap_or(seen.max(2));
    macro_report(&confusion_from_predictions(&truth, &predicted, n)?)
}

pub fn cmd_metrics(path: &Path, classes: Option<usize>, out: &mut dyn Write) -> Result<Vec<u8>> {
    let report = score_predictions(path, classes)?;
    let names: Vec<String> = (0..report.per_class.len()).map(|c| c.to_string()).collect();
    let mut csv = Vec::new();
    write_metrics_csv(&report, &names, &mut csv)?;
    out.write_all(&csv).map_err(io_out)?;
    Ok(csv)
}

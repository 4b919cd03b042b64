//! The `federate` workflow: federation, optional baselines, evidence fusion
//! over the final global models, and the report artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Splits};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::federation::{
    centralized_train, write_round_log, Federation, FederationRun, GlobalModel,
};
use crate::fusion::{combine_all, decide_max_belief, mass_from_probs, FrameOfDiscernment, MassFunction};
use crate::metrics::{confusion_from_predictions, macro_report, write_metrics_csv, MetricReport};
use crate::nn::{encode_checkpoint, evaluate, init_model, predict_proba};
use crate::seed;

pub const ROUND_LOG_FILE: &str = "rounds.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub models: Vec<ModelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fusion: Option<FusionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centralized: Option<Vec<BaselineSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub classes: Vec<String>,
    pub dim: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub client_samples: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionSummary {
    pub models: Vec<String>,
    pub mean_conflict: f64,
    pub max_conflict: f64,
    /// Test samples whose evidence was totally conflicting. Their decision
    /// falls back to the argmax of the summed probabilities.
    pub total_conflict_samples: usize,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub name: String,
    pub epochs: usize,
    pub test_loss: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferSummary {
    pub target_accuracy: f64,
    pub source_samples: usize,
    pub models: Vec<TransferModelSummary>,
}

/// Rounds needed to reach the target test accuracy; `None` if never reached.
#[derive(Debug, Clone, Serialize)]
pub struct TransferModelSummary {
    pub name: String,
    pub rounds_transfer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds_random: Option<Option<usize>>,
}

/// Everything a `federate` run produces, held in memory until written.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub summary: Summary,
    pub run: FederationRun,
    pub artifacts: Vec<(PathBuf, Vec<u8>)>,
}

impl Experiment {
    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts
            .iter()
            .find(|(p, _)| p == Path::new(name))
            .map(|(_, b)| b.as_slice())
    }
}

fn checkpoint_name(model: &str, round: Option<usize>) -> PathBuf {
    match round {
        Some(r) => PathBuf::from(format!("checkpoints/{model}_round{r:03}.fmw")),
        None => PathBuf::from(format!("checkpoints/{model}.fmw")),
    }
}

fn run_rounds(
    mut fed: Federation,
    checkpoint_every: usize,
    checkpoints: &mut Vec<(PathBuf, Vec<u8>)>,
) -> Result<FederationRun> {
    let initial = fed.evaluate_globals()?;
    let mut history = Vec::with_capacity(fed.config().rounds);
    for round in 1..=fed.config().rounds {
        history.push(fed.run_round(round)?);
        if checkpoint_every > 0 && round % checkpoint_every == 0 {
            for g in fed.globals() {
                checkpoints.push((checkpoint_name(&g.name, Some(round)), encode_checkpoint(&g.weights)));
            }
        }
    }
    Ok(FederationRun {
        globals: fed.into_globals(),
        initial,
        history,
    })
}

fn report_for(truth: &[usize], predicted: &[usize], classes: usize) -> Result<MetricReport> {
    macro_report(&confusion_from_predictions(truth, predicted, classes)?)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
        .0
}

/// Frame over the dataset's classes. Class names that are not valid frame
/// labels are replaced by their index.
fn class_frame(ds: &LabeledDataset) -> Result<FrameOfDiscernment> {
    FrameOfDiscernment::new(ds.class_names().iter().cloned())
        .or_else(|_| FrameOfDiscernment::new((0..ds.num_classes()).map(|c| format!("c{c}"))))
}

/// Per-sample Dempster fusion of the listed models' predicted probabilities,
/// followed by a max-belief decision.
pub fn fuse_models(
    globals: &[GlobalModel],
    names: &[String],
    test: &LabeledDataset,
) -> Result<(Vec<usize>, FusionSummary)> {
    let frame = class_frame(test)?;
    let probs: Vec<Vec<Vec<f64>>> = names
        .iter()
        .map(|n| {
            let g = globals
                .iter()
                .find(|g| &g.name == n)
                .ok_or_else(|| Error::Config(format!("unknown model '{n}'")))?;
            predict_proba(&g.weights, &g.spec, test)
        })
        .collect::<Result<_>>()?;
    let mut predicted = Vec::with_capacity(test.len());
    let (mut sum_k, mut max_k, mut total_conflict) = (0.0, 0.0f64, 0);
    for i in 0..test.len() {
        let masses = probs
            .iter()
            .map(|p| mass_from_probs(&frame, &p[i]))
            .collect::<Result<Vec<MassFunction>>>()?;
        match combine_all(&masses) {
            Ok(r) => {
                sum_k += r.conflict;
                max_k = max_k.max(r.conflict);
                predicted.push(decide_max_belief(&r).class_index);
            }
            Err(Error::TotalConflict { .. }) => {
                total_conflict += 1;
                max_k = 1.0;
                let summed: Vec<f64> = (0..frame.len()).map(|c| probs.iter().map(|p| p[i][c]).sum()).collect();
                predicted.push(argmax(&summed));
            }
            Err(e) => return Err(e),
        }
    }
    let decided = test.len() - total_conflict;
    let metrics = report_for(test.labels(), &predicted, test.num_classes())?;
    Ok((
        predicted,
        FusionSummary {
            models: names.to_vec(),
            mean_conflict: if decided > 0 { sum_k / decided as f64 } else { 0.0 },
            max_conflict: max_k,
            total_conflict_samples: total_conflict,
            metrics,
        },
    ))
}

fn csv_bytes(report: &MetricReport, classes: &[String]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_metrics_csv(report, classes, &mut buf)?;
    Ok(buf)
}

/// Runs the whole experiment in memory. Nothing touches the file system
/// apart from reading the configured datasets.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Experiment> {
    cfg.validate()?;
    let Splits { train, val, test } = cfg.load_splits()?;
    let source = cfg.load_transfer_source()?;
    let fed_cfg = cfg.federation_config();
    let mut artifacts = Vec::new();

    let transfer_cfg = cfg.transfer_train_config();
    let fed = match &source {
        Some(src) => {
            let mut c = fed_cfg.clone();
            c.models = cfg.models_for_transfer();
            Federation::setup(c, &train, test.clone(), Some((src, &transfer_cfg)))?
        }
        None => Federation::setup(fed_cfg.clone(), &train, test.clone(), None)?,
    };
    let client_samples = fed.clients().iter().map(|c| c.samples()).collect();
    let run = run_rounds(fed.with_threads(threads)?, cfg.output.checkpoint_every, &mut artifacts)?;

    let class_names = train.class_names().to_vec();
    let mut models = Vec::new();
    for g in &run.globals {
        let t = evaluate(&g.weights, &g.spec, &test)?;
        let v = if val.is_empty() {
            t
        } else {
            evaluate(&g.weights, &g.spec, &val)?
        };
        let predicted: Vec<usize> = predict_proba(&g.weights, &g.spec, &test)?
            .iter()
            .map(|p| argmax(p))
            .collect();
        let metrics = report_for(test.labels(), &predicted, test.num_classes())?;
        artifacts.push((PathBuf::from(format!("metrics/{}.csv", g.name)), csv_bytes(&metrics, &class_names)?));
        artifacts.push((checkpoint_name(&g.name, None), encode_checkpoint(&g.weights)));
        models.push(ModelSummary {
            name: g.name.clone(),
            test_loss: t.loss,
            test_accuracy: t.accuracy,
            val_accuracy: v.accuracy,
            metrics,
        });
    }

    let fusion = if cfg.fusion.enabled {
        let (_, summary) = fuse_models(&run.globals, &cfg.fused_models(), &test)?;
        artifacts.push((PathBuf::from("metrics/fused.csv"), csv_bytes(&summary.metrics, &class_names)?));
        Some(summary)
    } else {
        None
    };

    let centralized = if cfg.centralized.enabled {
        let epochs = fed_cfg.rounds * fed_cfg.train.epochs;
        let mut rows = Vec::new();
        for (i, m) in fed_cfg.models.iter().enumerate() {
            let init = init_model(&m.spec, seed::derive(fed_cfg.seed, &[seed::TAG_INIT, i as u64]))?;
            let c = centralized_train(&init, &m.name, &m.spec, &train, &test, &fed_cfg.train, epochs)?;
            let e = evaluate(&c.weights, &m.spec, &test)?;
            rows.push(BaselineSummary {
                name: m.name.clone(),
                epochs,
                test_loss: e.loss,
                test_accuracy: e.accuracy,
            });
        }
        Some(rows)
    } else {
        None
    };

    let transfer = match &source {
        Some(src) => {
            let target = cfg.transfer.target_accuracy;
            let random = if cfg.transfer.compare_random {
                let fed = Federation::setup(fed_cfg.clone(), &train, test.clone(), None)?.with_threads(threads)?;
                Some(run_rounds(fed, 0, &mut Vec::new())?)
            } else {
                None
            };
            Some(TransferSummary {
                target_accuracy: target,
                source_samples: src.len(),
                models: run
                    .globals
                    .iter()
                    .map(|g| TransferModelSummary {
                        name: g.name.clone(),
                        rounds_transfer: run.rounds_to_accuracy(&g.name, target),
                        rounds_random: random.as_ref().map(|r| r.rounds_to_accuracy(&g.name, target)),
                    })
                    .collect(),
            })
        }
        None => None,
    };

    let mut log = Vec::new();
    write_round_log(&run.initial, &run.history, cfg.output.record_wall_time, &mut log)?;
    artifacts.push((PathBuf::from(ROUND_LOG_FILE), log));

    let summary = Summary {
        config: cfg.clone(),
        data: DataSummary {
            classes: class_names,
            dim: train.dim(),
            train: train.len(),
            val: val.len(),
            test: test.len(),
            client_samples,
        },
        models,
        fusion,
        centralized,
        transfer,
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| Error::Data(format!("summary: {e}")))?;
    json.push(b'\n');
    artifacts.push((PathBuf::from(SUMMARY_FILE), json));
    Ok(Experiment {
        summary,
        run,
        artifacts,
    })
}

/// Writes artifacts below `dir`, creating directories as needed.
pub fn write_artifacts(dir: &Path, artifacts: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    for (rel, bytes) in artifacts {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

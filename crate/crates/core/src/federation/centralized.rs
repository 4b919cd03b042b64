use std::time::Instant;

use super::round::{local_train_config, ClientRoundEntry, GlobalEval, RoundRecord};
use crate::data::LabeledDataset;
use crate::error::Result;
use crate::nn::{evaluate, train_local, MlpSpec, TrainConfig, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedRun {
    pub weights: WeightVector,
    pub history: Vec<RoundRecord>,
}

/// Single-site baseline on the pooled dataset.
///
/// Training proceeds in chunks of `cfg.epochs` epochs (the last chunk may be
/// shorter), each a fresh [`train_local`] call seeded exactly like client 0
/// in the matching round. With the same starting weights, a one-client
/// federation of R rounds and `centralized_train` with `R * cfg.epochs`
/// epochs therefore produce bit-identical weights. One record is emitted per
/// chunk, in the federation's schema, under `model_name`.
pub fn centralized_train(
    init: &WeightVector,
    model_name: &str,
    spec: &MlpSpec,
    data: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &TrainConfig,
    total_epochs: usize,
) -> Result<CentralizedRun> {
    cfg.validate()?;
    let mut weights = init.clone();
    let mut history = Vec::new();
    let chunk = cfg.epochs.max(1);
    let mut done = 0;
    let mut round = 0;
    while done < total_epochs {
        round += 1;
        let start = Instant::now();
        let epochs = chunk.min(total_epochs - done);
        let round_cfg = TrainConfig {
            epochs,
            ..local_train_config(cfg, 0, round)
        };
        let (next, train_loss) = train_local(&weights, spec, data, &round_cfg, 0)?;
        weights = next;
        done += epochs;
        let local = evaluate(&weights, spec, data)?;
        let global = evaluate(&weights, spec, test)?;
        history.push(RoundRecord {
            round,
            clients: vec![ClientRoundEntry {
                client_id: 0,
                model: model_name.to_string(),
                train_loss,
                eval_loss: local.loss,
                eval_accuracy: local.accuracy,
            }],
            globals: vec![GlobalEval {
                model: model_name.to_string(),
                eval_loss: global.loss,
                eval_accuracy: global.accuracy,
            }],
            duration_ms: start.elapsed().as_secs_f64() * 1000.0,
        });
    }
    Ok(CentralizedRun { weights, history })
}

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::{init_model, train_local, MlpSpec, TrainConfig, WeightVector};
use crate::seed;

const SOURCE_STREAM: u64 = 1;
const HEAD_STREAM: u64 = 2;

/// Pretrains `spec`'s architecture on a source task and returns starting
/// weights for the target task.
///
/// The source model has `spec`'s layers with the output width set to the
/// source class count. When the class counts agree the whole trained model
/// is returned; otherwise layers from `spec.head_start` up are freshly
/// initialized for the target and only the backbone below is kept.
pub fn transfer_init(source: &LabeledDataset, spec: &MlpSpec, cfg: &TrainConfig) -> Result<WeightVector> {
    spec.validate()?;
    if source.dim() != spec.input_dim() {
        return Err(Error::Config(format!(
            "source task has {} features, model expects {}",
            source.dim(),
            spec.input_dim()
        )));
    }
    let source_spec = spec.with_classes(source.num_classes());
    let start = init_model(&source_spec, seed::derive(cfg.seed, &[seed::TAG_INIT, SOURCE_STREAM]))?;
    let (trained, _) = train_local(&start, &source_spec, source, cfg, 0)?;
    if source.num_classes() == spec.num_classes() {
        return Ok(trained);
    }
    let mut target = init_model(spec, seed::derive(cfg.seed, &[seed::TAG_INIT, HEAD_STREAM]))?;
    for layer in 0..spec.head_start {
        target.copy_layer_from(&trained, layer);
    }
    Ok(target)
}

use std::collections::BTreeMap;

use crate::data::LabeledDataset;
use crate::nn::WeightVector;

/// One federation participant and its private partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub client_id: u32,
    pub partition: LabeledDataset,
    /// Latest local copy of each model, keyed by model name.
    pub local_weights: BTreeMap<String, WeightVector>,
}

impl ClientState {
    pub fn new(client_id: u32, partition: LabeledDataset) -> Self {
        Self {
            client_id,
            partition,
            local_weights: BTreeMap::new(),
        }
    }

    /// `d_k`, the number of local samples.
    pub fn samples(&self) -> usize {
        self.partition.len()
    }
}

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::client::ClientState;
use super::config::FederationConfig;
use super::fedavg::{fed_avg, ClientUpdate};
use super::transfer::transfer_init;
use crate::data::{partition_clients, LabeledDataset, PartitionPlan};
use crate::error::{Error, Result};
use crate::nn::{evaluate, init_model, train_local, MlpSpec, TrainConfig, WeightVector};
use crate::seed;

/// Server-side copy of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub name: String,
    pub spec: MlpSpec,
    pub weights: WeightVector,
    /// Layers below this index are frozen during local training.
    pub frozen_below: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientRoundEntry {
    pub client_id: u32,
    pub model: String,
    pub train_loss: f64,
    pub eval_loss: f64,
    pub eval_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalEval {
    pub model: String,
    pub eval_loss: f64,
    pub eval_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// One entry per selected client per model, ordered by client then model.
    pub clients: Vec<ClientRoundEntry>,
    pub globals: Vec<GlobalEval>,
    /// Wall-clock duration of the round. Not reproducible across runs.
    pub duration_ms: f64,
}

/// Training configuration a client uses in a given round. The shuffle seed
/// depends only on the base seed, the client id and the round.
pub fn local_train_config(base: &TrainConfig, client_id: u32, round: usize) -> TrainConfig {
    TrainConfig {
        seed: seed::derive(base.seed, &[seed::TAG_LOCAL, client_id as u64, round as u64]),
        ..base.clone()
    }
}

/// Deterministic random choice of `count` clients out of `num_clients` for
/// `round`. Returns positions in client-id order, ascending.
pub fn select_clients(seed: u64, round: usize, num_clients: usize, count: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..num_clients as u32).collect();
    if count < num_clients {
        ids.shuffle(&mut seed::rng(seed, &[seed::TAG_SELECT, round as u64]));
        ids.truncate(count);
        ids.sort_unstable();
    }
    ids
}

/// Output of a complete federation.
#[derive(Debug, Clone, PartialEq)]
pub struct FederationRun {
    pub globals: Vec<GlobalModel>,
    /// Global models evaluated before the first round.
    pub initial: Vec<GlobalEval>,
    pub history: Vec<RoundRecord>,
}

impl FederationRun {
    /// First round whose global accuracy for `model` reaches `threshold`;
    /// 0 if the initial models already do.
    pub fn rounds_to_accuracy(&self, model: &str, threshold: f64) -> Option<usize> {
        let hit = |evals: &[GlobalEval]| evals.iter().any(|g| g.model == model && g.eval_accuracy >= threshold);
        if hit(&self.initial) {
            return Some(0);
        }
        self.history.iter().find(|r| hit(&r.globals)).map(|r| r.round)
    }
}

/// Server plus simulated clients.
pub struct Federation {
    config: FederationConfig,
    clients: Vec<ClientState>,
    globals: Vec<GlobalModel>,
    test: LabeledDataset,
    pool: Option<rayon::ThreadPool>,
}

impl Federation {
    /// Partitions `train` across clients and initializes every model. With a
    /// transfer source, each model starts from [`transfer_init`] and freezes
    /// the layers below its `head_start`; otherwise weights are random and
    /// every layer trains.
    pub fn setup(
        config: FederationConfig,
        train: &LabeledDataset,
        test: LabeledDataset,
        transfer: Option<(&LabeledDataset, &TrainConfig)>,
    ) -> Result<Self> {
        config.validate()?;
        for m in &config.models {
            if m.spec.input_dim() != train.dim() || m.spec.num_classes() != train.num_classes() {
                return Err(Error::Config(format!(
                    "model '{}' expects {} features and {} classes, data has {} and {}",
                    m.name,
                    m.spec.input_dim(),
                    m.spec.num_classes(),
                    train.dim(),
                    train.num_classes()
                )));
            }
        }
        if test.is_empty() || test.dim() != train.dim() {
            return Err(Error::Config("held-out set must be non-empty and match the training dimension".into()));
        }
        let parts = partition_clients(
            train,
            &PartitionPlan {
                scheme: config.partition,
                clients: config.num_clients,
                seed: config.seed,
            },
        )?;
        let clients = parts
            .into_iter()
            .enumerate()
            .map(|(k, p)| ClientState::new(k as u32, p))
            .collect();
        let globals = config
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (weights, frozen_below) = match transfer {
                    Some((source, source_cfg)) => (transfer_init(source, &m.spec, source_cfg)?, m.spec.head_start),
                    None => (init_model(&m.spec, seed::derive(config.seed, &[seed::TAG_INIT, i as u64]))?, 0),
                };
                Ok(GlobalModel {
                    name: m.name.clone(),
                    spec: m.spec.clone(),
                    weights,
                    frozen_below,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(config, clients, globals, test)
    }

    /// Assembles a federation from explicit parts.
    pub fn new(
        config: FederationConfig,
        mut clients: Vec<ClientState>,
        globals: Vec<GlobalModel>,
        test: LabeledDataset,
    ) -> Result<Self> {
        config.validate()?;
        if clients.len() != config.num_clients {
            return Err(Error::Config(format!(
                "{} clients supplied for num_clients = {}",
                clients.len(),
                config.num_clients
            )));
        }
        if let Some(c) = clients.iter().find(|c| c.samples() == 0) {
            return Err(Error::Config(format!("client {} has no data", c.client_id)));
        }
        clients.sort_by_key(|c| c.client_id);
        if clients.windows(2).any(|w| w[0].client_id == w[1].client_id) {
            return Err(Error::Config("client ids must be unique".into()));
        }
        for g in &globals {
            g.weights.check_spec(&g.spec)?;
        }
        for c in &mut clients {
            for g in &globals {
                c.local_weights.insert(g.name.clone(), g.weights.clone());
            }
        }
        Ok(Self {
            config,
            clients,
            globals,
            test,
            pool: None,
        })
    }

    /// Trains up to `threads` clients concurrently. Results do not depend on
    /// the thread count.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        self.pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(self)
    }

    pub fn config(&self) -> &FederationConfig {
        &self.config
    }

    pub fn clients(&self) -> &[ClientState] {
        &self.clients
    }

    pub fn globals(&self) -> &[GlobalModel] {
        &self.globals
    }

    pub fn test_set(&self) -> &LabeledDataset {
        &self.test
    }

    pub fn into_globals(self) -> Vec<GlobalModel> {
        self.globals
    }

    pub fn evaluate_globals(&self) -> Result<Vec<GlobalEval>> {
        self.globals
            .iter()
            .map(|g| {
                let e = evaluate(&g.weights, &g.spec, &self.test)?;
                Ok(GlobalEval {
                    model: g.name.clone(),
                    eval_loss: e.loss,
                    eval_accuracy: e.accuracy,
                })
            })
            .collect()
    }

    fn train_client(&self, client: &ClientState, round: usize) -> Result<Vec<(ClientUpdate, ClientRoundEntry)>> {
        let cfg = local_train_config(&self.config.train, client.client_id, round);
        self.globals
            .iter()
            .map(|g| {
                let (weights, train_loss) = train_local(&g.weights, &g.spec, &client.partition, &cfg, g.frozen_below)?;
                let e = evaluate(&weights, &g.spec, &client.partition)?;
                Ok((
                    ClientUpdate {
                        client_id: client.client_id,
                        weights,
                        samples: client.samples(),
                    },
                    ClientRoundEntry {
                        client_id: client.client_id,
                        model: g.name.clone(),
                        train_loss,
                        eval_loss: e.loss,
                        eval_accuracy: e.accuracy,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|source| Error::Client {
                client_id: client.client_id,
                round,
                source: Box::new(source),
            })
    }

    /// One communication round: the selected clients train every model from
    /// the current global weights, the server averages each model's updates
    /// with FedAvg, and all clients replace their local copies with the new
    /// globals. A failing client aborts the round and leaves the federation
    /// unchanged.
    pub fn run_round(&mut self, round: usize) -> Result<RoundRecord> {
        let start = Instant::now();
        let ids = select_clients(
            self.config.seed,
            round,
            self.config.num_clients,
            self.config.selected_per_round(),
        );
        let selected: Vec<&ClientState> = ids.iter().map(|&id| &self.clients[id as usize]).collect();

        let results: Vec<Result<Vec<(ClientUpdate, ClientRoundEntry)>>> = match &self.pool {
            Some(pool) => pool.install(|| selected.par_iter().map(|c| self.train_client(c, round)).collect()),
            None => selected.iter().map(|c| self.train_client(c, round)).collect(),
        };
        let per_client = results.into_iter().collect::<Result<Vec<_>>>()?;

        let mut new_globals = Vec::with_capacity(self.globals.len());
        for m in 0..self.globals.len() {
            let updates: Vec<ClientUpdate> = per_client.iter().map(|c| c[m].0.clone()).collect();
            new_globals.push(fed_avg(&updates)?);
        }
        for (g, w) in self.globals.iter_mut().zip(new_globals) {
            g.weights = w;
        }
        for c in &mut self.clients {
            for g in &self.globals {
                c.local_weights.insert(g.name.clone(), g.weights.clone());
            }
        }

        let globals = self.evaluate_globals()?;
        let clients = per_client.into_iter().flatten().map(|(_, e)| e).collect();
        Ok(RoundRecord {
            round,
            clients,
            globals,
            duration_ms: start.elapsed().as_secs_f64() * 1000.0,
        })
    }

    /// Runs rounds `1..=config.rounds`.
    pub fn run(mut self) -> Result<FederationRun> {
        let initial = self.evaluate_globals()?;
        let mut history = Vec::with_capacity(self.config.rounds);
        for round in 1..=self.config.rounds {
            history.push(self.run_round(round)?);
        }
        Ok(FederationRun {
            globals: self.globals,
            initial,
            history,
        })
    }
}

/// Partition, initialize and run a plain (non-transfer) federation.
pub fn run_federation(
    config: &FederationConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
    threads: usize,
) -> Result<FederationRun> {
    Federation::setup(config.clone(), train, test.clone(), None)?
        .with_threads(threads)?
        .run()
}

//! Federated training: client state, FedAvg aggregation, the round protocol,
//! transfer-learning initialization and the centralized baseline.

mod centralized;
mod client;
mod config;
mod fedavg;
mod log;
mod objective;
mod round;
mod transfer;

pub use centralized::{centralized_train, CentralizedRun};
pub use client::ClientState;
pub use config::{FederationConfig, ModelConfig};
pub use fedavg::{fed_avg, fed_avg_weighted, ClientUpdate};
pub use log::{write_round_log, ROUND_LOG_HEADER};
pub use objective::federated_objective;
pub use round::{
    local_train_config, run_federation, select_clients, ClientRoundEntry, Federation, FederationRun, GlobalEval,
    GlobalModel, RoundRecord,
};
pub use transfer::transfer_init;

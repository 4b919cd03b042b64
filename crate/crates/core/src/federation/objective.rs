use super::client::ClientState;
use crate::error::{Error, Result};
use crate::nn::{evaluate, MlpSpec, WeightVector};

/// Federated objective `f(w) = sum_k (d_k / D) F_k(w)`, where `F_k` is the
/// mean loss of `w` on client `k`'s partition.
pub fn federated_objective(w: &WeightVector, spec: &MlpSpec, clients: &[ClientState]) -> Result<f64> {
    if clients.is_empty() {
        return Err(Error::Protocol("objective over zero clients".into()));
    }
    let total: usize = clients.iter().map(ClientState::samples).sum();
    clients.iter().try_fold(0.0, |acc, c| {
        let local = evaluate(w, spec, &c.partition)?.loss;
        Ok(acc + c.samples() as f64 / total as f64 * local)
    })
}

use std::io::Write;

use super::round::{GlobalEval, RoundRecord};
use crate::error::{Error, Result};

pub const ROUND_LOG_HEADER: [&str; 7] = [
    "round",
    "model",
    "client_id",
    "train_loss",
    "eval_loss",
    "eval_accuracy",
    "duration_ms",
];

/// Writes the per-round CSV log. Round 0 holds the initial global
/// evaluation. Global rows use `client_id = global` and leave `train_loss`
/// blank. `duration_ms` is blank unless `with_timing` is set, so that logs of
/// identical runs are byte-identical.
pub fn write_round_log<W: Write>(
    initial: &[GlobalEval],
    history: &[RoundRecord],
    with_timing: bool,
    out: W,
) -> Result<()> {
    let err = |e: csv::Error| Error::Data(format!("writing round log: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROUND_LOG_HEADER).map_err(err)?;
    let global_row = |w: &mut csv::Writer<W>, round: usize, g: &GlobalEval, duration: &str| {
        w.write_record([
            &round.to_string(),
            g.model.as_str(),
            "global",
            "",
            &g.eval_loss.to_string(),
            &g.eval_accuracy.to_string(),
            duration,
        ])
    };
    for g in initial {
        global_row(&mut w, 0, g, "").map_err(err)?;
    }
    for r in history {
        let duration = if with_timing {
            format!("{:.3}", r.duration_ms)
        } else {
            String::new()
        };
        for c in &r.clients {
            w.write_record([
                &r.round.to_string(),
                c.model.as_str(),
                &c.client_id.to_string(),
                &c.train_loss.to_string(),
                &c.eval_loss.to_string(),
                &c.eval_accuracy.to_string(),
                &duration,
            ])
            .map_err(err)?;
        }
        for g in &r.globals {
            global_row(&mut w, r.round, g, &duration).map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Data(format!("writing round log: {e}")))
}

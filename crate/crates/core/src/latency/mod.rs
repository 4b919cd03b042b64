//! Response-time model for linear microservice pipelines placed across edge
//! sites and the cloud.
//!
//! Units: transfer sizes in Mbit, bandwidths in Mbit/s, times in
//! milliseconds at the API. Internally every duration is an integral number
//! of microseconds so that per-stage and total sums agree exactly.

mod model;
mod pipeline_file;

pub use model::{
    response_time, total_time, trans_time, LatencyBreakdown, LinkTable, MicroserviceNode, Micros, NodeTiming,
    PipelineSpec, Placement, Stage, StageTimes,
};
pub use pipeline_file::{load_pipeline_file, parse_pipeline_text, PipelineFile};

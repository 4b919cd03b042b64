//! TOML pipeline descriptions.
//!
//! ```toml
//! gateway = "gw"                 # relay for edge -> cloud transfers
//! parallel_processing = false
//!
//! [[node]]
//! name = "preprocess"
//! placement = "edge:1"           # "cloud", "edge:<site>" or any other name
//! exec_ms = 3000
//! stage = "preprocessing"        # preprocessing | processing | fusion | other
//! input_mbits = 0                # data received from the previous node
//!
//! [[link]]
//! from = "edge:1"
//! to = "gw"
//! bw_mbits = 100
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::model::{LinkTable, MicroserviceNode, Micros, PipelineSpec, Placement, Stage};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    gateway: Option<String>,
    #[serde(default)]
    parallel_processing: bool,
    #[serde(default)]
    node: Vec<RawNode>,
    #[serde(default)]
    link: Vec<RawLink>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    placement: String,
    exec_ms: f64,
    stage: Stage,
    #[serde(default)]
    input_mbits: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    from: String,
    to: String,
    bw_mbits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFile {
    pub pipeline: PipelineSpec,
    pub links: LinkTable,
}

pub fn load_pipeline_file(path: &Path) -> Result<PipelineFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pipeline_text(&text, path)
}

pub fn parse_pipeline_text(text: &str, origin: &Path) -> Result<PipelineFile> {
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
        Error::parse(origin, line, e.message().to_string())
    })?;
    let gateway = raw.gateway.as_deref().map(str::parse).transpose()?;
    let mut links = LinkTable::new(gateway);
    for l in raw.link {
        links.insert(l.from.parse()?, l.to.parse()?, l.bw_mbits)?;
    }
    let nodes = raw
        .node
        .into_iter()
        .map(|n| {
            Ok(MicroserviceNode {
                placement: n.placement.parse::<Placement>()?,
                exec: Micros::from_ms(n.exec_ms)?,
                name: n.name,
                stage: n.stage,
                input_mbits: n.input_mbits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pipeline = PipelineSpec {
        nodes,
        parallel_processing: raw.parallel_processing,
    };
    pipeline.validate()?;
    Ok(PipelineFile { pipeline, links })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::total_time;

    const SAMPLE: &str = r#"
gateway = "gw"

[[node]]
name = "pre"
placement = "edge:1"
exec_ms = 3000
stage = "preprocessing"

[[node]]
name = "analytics"
placement = "cloud"
exec_ms = 9000
stage = "processing"
input_mbits = 8

[[link]]
from = "edge:1"
to = "gw"
bw_mbits = 4

[[link]]
from = "gw"
to = "cloud"
bw_mbits = 8
"#;

    #[test]
    fn parses_and_evaluates() {
        let f = parse_pipeline_text(SAMPLE, Path::new("p.toml")).unwrap();
        assert_eq!(f.pipeline.nodes.len(), 2);
        let b = total_time(&f.pipeline, &f.links).unwrap();
        assert_eq!(b.nodes[1].transfer.as_ms(), 3000.0);
        assert_eq!(b.total.as_ms(), 15000.0);
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new("p.toml");
        assert!(parse_pipeline_text("gateway = \"gw\"\n", p).is_err());
        let bad_stage = SAMPLE.replace("\"processing\"", "\"thinking\"");
        assert!(matches!(parse_pipeline_text(&bad_stage, p), Err(Error::Parse { .. })));
        let bad_bw = SAMPLE.replace("bw_mbits = 8", "bw_mbits = 0");
        assert!(parse_pipeline_text(&bad_bw, p).is_err());
        let negative = SAMPLE.replace("exec_ms = 3000", "exec_ms = -3");
        assert!(parse_pipeline_text(&negative, p).is_err());
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Duration in whole microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Micros(pub u64);

impl Micros {
    pub fn from_ms(ms: f64) -> Result<Self> {
        if !(ms >= 0.0 && ms.is_finite()) {
            return Err(Error::Config(format!("duration {ms} ms must be finite and non-negative")));
        }
        Ok(Micros((ms * 1000.0).round() as u64))
    }

    /// Time to push `size_mbits` through a `bw_mbits` Mbit/s link.
    pub fn transfer(size_mbits: f64, bw_mbits: f64) -> Self {
        Micros((size_mbits / bw_mbits * 1e6).round() as u64)
    }

    pub fn as_ms(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl std::ops::Add for Micros {
    type Output = Micros;
    fn add(self, rhs: Micros) -> Micros {
        Micros(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Micros {
    fn sum<I: Iterator<Item = Micros>>(iter: I) -> Micros {
        Micros(iter.map(|m| m.0).sum())
    }
}

/// Where a microservice runs: `cloud`, `edge:<site>`, or any other named
/// node such as a gateway.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Placement {
    Cloud,
    Edge(String),
    Other(String),
}

impl Placement {
    pub fn is_edge(&self) -> bool {
        matches!(self, Placement::Edge(_))
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            _ if s.is_empty() => Err(Error::Config("empty placement".into())),
            _ if s == "cloud" => Ok(Placement::Cloud),
            Some(("edge", site)) if !site.is_empty() => Ok(Placement::Edge(site.to_string())),
            Some(_) => Err(Error::Config(format!("malformed placement '{s}'"))),
            None => Ok(Placement::Other(s.to_string())),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Cloud => f.write_str("cloud"),
            Placement::Edge(site) => write!(f, "edge:{site}"),
            Placement::Other(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Preprocessing,
    Processing,
    Fusion,
    Other,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Preprocessing => "preprocessing",
            Stage::Processing => "processing",
            Stage::Fusion => "fusion",
            Stage::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroserviceNode {
    pub name: String,
    pub placement: Placement,
    pub exec: Micros,
    pub stage: Stage,
    /// Data received from the preceding node, in Mbit.
    pub input_mbits: f64,
}

/// Link bandwidths keyed by ordered placement pair. A link declared only as
/// `a -> b` also serves `b -> a`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkTable {
    bandwidth: BTreeMap<(Placement, Placement), f64>,
    pub gateway: Option<Placement>,
}

impl LinkTable {
    pub fn new(gateway: Option<Placement>) -> Self {
        Self {
            bandwidth: BTreeMap::new(),
            gateway,
        }
    }

    pub fn insert(&mut self, from: Placement, to: Placement, bw_mbits: f64) -> Result<()> {
        if !(bw_mbits > 0.0 && bw_mbits.is_finite()) {
            return Err(Error::Config(format!(
                "bandwidth of link {from} -> {to} must be positive, got {bw_mbits}"
            )));
        }
        self.bandwidth.insert((from, to), bw_mbits);
        Ok(())
    }

    pub fn bandwidth(&self, from: &Placement, to: &Placement) -> Result<f64> {
        self.bandwidth
            .get(&(from.clone(), to.clone()))
            .or_else(|| self.bandwidth.get(&(to.clone(), from.clone())))
            .copied()
            .ok_or_else(|| Error::Config(format!("no bandwidth for link {from} -> {to}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub nodes: Vec<MicroserviceNode>,
    /// Run consecutive processing-stage nodes side by side: each receives its
    /// input from the node before the group, and the group costs its slowest
    /// member.
    pub parallel_processing: bool,
}

impl PipelineSpec {
    pub fn sequential(nodes: Vec<MicroserviceNode>) -> Self {
        Self {
            nodes,
            parallel_processing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Config("a pipeline needs at least one microservice".into()));
        }
        for n in &self.nodes {
            if !(n.input_mbits >= 0.0 && n.input_mbits.is_finite()) {
                return Err(Error::Config(format!(
                    "transfer size into '{}' must be non-negative, got {}",
                    n.name, n.input_mbits
                )));
            }
        }
        Ok(())
    }
}

/// Transfer time between two microservices: zero when co-located, two hops
/// through the gateway from an edge site to the cloud, and a direct hop
/// otherwise.
pub fn trans_time(
    from: &MicroserviceNode,
    to: &MicroserviceNode,
    size_mbits: f64,
    links: &LinkTable,
) -> Result<Micros> {
    if !(size_mbits >= 0.0 && size_mbits.is_finite()) {
        return Err(Error::Config(format!("transfer size must be non-negative, got {size_mbits}")));
    }
    let (a, b) = (&from.placement, &to.placement);
    if a == b {
        return Ok(Micros(0));
    }
    if a.is_edge() && *b == Placement::Cloud {
        let gw = links
            .gateway
            .as_ref()
            .ok_or_else(|| Error::Config(format!("edge -> cloud transfer {a} -> {b} needs a gateway")))?;
        let first = Micros::transfer(size_mbits, links.bandwidth(a, gw)?);
        let second = Micros::transfer(size_mbits, links.bandwidth(gw, b)?);
        return Ok(first + second);
    }
    Ok(Micros::transfer(size_mbits, links.bandwidth(a, b)?))
}

/// Transfer from the predecessor (if any) plus execution time.
pub fn response_time(
    node: &MicroserviceNode,
    predecessor: Option<&MicroserviceNode>,
    size_mbits: f64,
    links: &LinkTable,
) -> Result<Micros> {
    let transfer = match predecessor {
        Some(p) => trans_time(p, node, size_mbits, links)?,
        None => Micros(0),
    };
    Ok(transfer + node.exec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTiming {
    pub name: String,
    pub stage: Stage,
    pub transfer: Micros,
    pub exec: Micros,
    pub response: Micros,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageTimes {
    pub preprocessing: Micros,
    pub processing: Micros,
    pub fusion: Micros,
    pub other: Micros,
}

impl StageTimes {
    fn add(&mut self, stage: Stage, t: Micros) {
        let slot = match stage {
            Stage::Preprocessing => &mut self.preprocessing,
            Stage::Processing => &mut self.processing,
            Stage::Fusion => &mut self.fusion,
            Stage::Other => &mut self.other,
        };
        *slot = *slot + t;
    }

    pub fn total(&self) -> Micros {
        self.preprocessing + self.processing + self.fusion + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyBreakdown {
    pub nodes: Vec<NodeTiming>,
    pub stages: StageTimes,
    pub total: Micros,
}

/// End-to-end time of a pipeline as the sum of its microservices' response
/// times (or of parallel-group maxima when enabled).
pub fn total_time(pipeline: &PipelineSpec, links: &LinkTable) -> Result<LatencyBreakdown> {
    pipeline.validate()?;
    let nodes = &pipeline.nodes;
    let mut timings = Vec::with_capacity(nodes.len());
    let mut stages = StageTimes::default();
    let mut total = Micros(0);

    // Nodes feeding the next one; more than one after a parallel group.
    let mut feeders: Vec<&MicroserviceNode> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let group_end = if pipeline.parallel_processing && nodes[i].stage == Stage::Processing {
            nodes[i..]
                .iter()
                .position(|n| n.stage != Stage::Processing)
                .map_or(nodes.len(), |p| i + p)
        } else {
            i + 1
        };
        let mut slowest = Micros(0);
        for node in &nodes[i..group_end] {
            let mut transfer = Micros(0);
            for f in &feeders {
                transfer = transfer.max(trans_time(f, node, node.input_mbits, links)?);
            }
            let response = transfer + node.exec;
            slowest = slowest.max(response);
            timings.push(NodeTiming {
                name: node.name.clone(),
                stage: node.stage,
                transfer,
                exec: node.exec,
                response,
            });
            if group_end - i == 1 {
                stages.add(node.stage, response);
            }
        }
        if group_end - i > 1 {
            stages.add(Stage::Processing, slowest);
        }
        total = total + slowest;
        feeders = nodes[i..group_end].iter().collect();
        i = group_end;
    }
    debug_assert_eq!(total, stages.total());
    Ok(LatencyBreakdown {
        nodes: timings,
        stages,
        total,
    })
}

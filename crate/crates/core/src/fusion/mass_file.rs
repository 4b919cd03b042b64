//! Text format for evidence sources.
//!
//! ```text
//! # comments and blank lines are ignored
//! frame: A B C                 labels separated by spaces or commas; required, first
//! resnet   A=0.6 B=0.3 A+B=0.1
//! vacuous  *=1
//! ```
//!
//! Each record is a source name followed by `subset=mass` pairs. Subsets are
//! label lists joined by `+`; `*` is the whole frame. A record's masses must
//! sum to 1.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::frame::FrameOfDiscernment;
use super::mass::MassFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MassFile {
    pub frame: FrameOfDiscernment,
    pub sources: Vec<(String, MassFunction)>,
}

pub fn read_mass_file(path: &Path) -> Result<MassFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mass_text(&text, path)
}

pub fn parse_mass_text(text: &str, origin: &Path) -> Result<MassFile> {
    let err = |line: usize, msg: String| Error::parse(PathBuf::from(origin), line, msg);
    let mut frame: Option<FrameOfDiscernment> = None;
    let mut sources = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("frame:") {
            if frame.is_some() {
                return Err(err(line_no, "frame declared twice".into()));
            }
            let labels = rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
            frame = Some(FrameOfDiscernment::new(labels).map_err(|e| err(line_no, e.to_string()))?);
            continue;
        }
        let frame = frame
            .as_ref()
            .ok_or_else(|| err(line_no, "record before the frame declaration".into()))?;
        let mut tokens = line.split_whitespace();
        let name = tokens.next().expect("non-empty line");
        let mut entries = Vec::new();
        for tok in tokens {
            let (set, value) = tok
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected subset=mass, found '{tok}'")))?;
            let subset = frame.parse_subset(set).map_err(|e| err(line_no, e.to_string()))?;
            let mass: f64 = value
                .parse()
                .map_err(|_| err(line_no, format!("'{value}' is not a number")))?;
            entries.push((subset, mass));
        }
        if entries.is_empty() {
            return Err(err(line_no, format!("source '{name}' assigns no mass")));
        }
        let m = MassFunction::new(frame.clone(), entries).map_err(|e| err(line_no, e.to_string()))?;
        sources.push((name.to_string(), m));
    }

    let frame = frame.ok_or_else(|| err(0, "missing 'frame:' declaration".into()))?;
    if sources.is_empty() {
        return Err(err(0, "no evidence records".into()));
    }
    Ok(MassFile { frame, sources })
}

/// One `subset=mass` pair per focal element, in bitmask order.
pub fn format_mass(m: &MassFunction) -> String {
    let mut out = String::new();
    for (i, (set, v)) in m.focal_elements().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}={}", m.frame().display_subset(set), v);
    }
    out
}

//! Text feature files.
//!
//! ```text
//! # classes: benign,adware,trojan      optional; fixes class names and count
//! label,f0,f1,f2                       optional header (first data line only)
//! 0,0.25,-1.5,3
//! 2,0.5,0.0,1e-3
//! ```
//!
//! Fields are comma separated and trimmed. Blank lines and other `#` lines
//! are ignored. The first field is a non-negative integer label; the rest are
//! real features, and every row must have as many as the first. Without a
//! `# classes:` directive the class count is one more than the largest label.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};

const CLASSES_DIRECTIVE: &str = "# classes:";

pub fn load_feature_file(path: &Path) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_text(&text, path)
}

/// Parses feature-file text; `origin` only labels error messages.
pub fn parse_feature_text(text: &str, origin: &Path) -> Result<LabeledDataset> {
    let mut declared: Option<Vec<String>> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;
    let mut seen_data = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(CLASSES_DIRECTIVE) {
            if seen_data || declared.is_some() {
                return Err(Error::parse(origin, line_no, "class directive must precede all rows"));
            }
            let names: Vec<String> = rest.split(',').map(|s| s.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(Error::parse(origin, line_no, "empty class name"));
            }
            declared = Some(names);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let first_row = !seen_data;
        seen_data = true;
        let label = match fields[0].parse::<usize>() {
            Ok(l) => l,
            Err(_) if first_row && fields[0].parse::<f64>().is_err() && !fields[0].starts_with('-') => {
                // header line
                continue;
            }
            Err(_) => {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("label '{}' is not a non-negative integer", fields[0]),
                ))
            }
        };
        if let Some(names) = &declared {
            if label >= names.len() {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("unknown label {label}: only {} classes declared", names.len()),
                ));
            }
        }
        let expected = *dim.get_or_insert(fields.len() - 1);
        if expected == 0 {
            return Err(Error::parse(origin, line_no, "row has no features"));
        }
        if fields.len() - 1 != expected {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected {expected} features, found {}", fields.len() - 1),
            ));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(origin, line_no, format!("'{f}' is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(origin, line_no, format!("'{f}' is not finite")));
            }
            features.push(v);
        }
        labels.push(label);
    }

    let names = match declared {
        Some(names) => names,
        None => {
            let n = labels.iter().max().map_or(1, |m| m + 1);
            (0..n).map(|c| format!("class_{c}")).collect()
        }
    };
    LabeledDataset::new(features, dim.unwrap_or(0), labels, names)
}

/// Writes `ds` with a class directive and header. Features are written at
/// single precision.
pub fn write_feature_file(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut out = String::new();
    out.push_str(CLASSES_DIRECTIVE);
    out.push(' ');
    out.push_str(&ds.class_names().join(","));
    out.push('\n');
    out.push_str("label");
    for j in 0..ds.dim() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for i in 0..ds.len() {
        out.push_str(&ds.label(i).to_string());
        for v in ds.features(i) {
            out.push_str(&format!(",{}", *v as f32));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

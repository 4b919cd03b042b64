use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_FRAME: usize = 20;

/// A subset of the frame as a bitmask; bit `i` is the `i`-th label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    /// Index of the single element, if this is a singleton.
    pub fn singleton_index(self) -> Option<usize> {
        (self.len() == 1).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }
}

/// Ordered, distinct class labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameOfDiscernment {
    labels: Vec<String>,
}

impl FrameOfDiscernment {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME {
            return Err(Error::Evidence(format!(
                "a frame needs between 1 and {MAX_FRAME} labels, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(['+', '=', ',', '*']) || l.chars().any(char::is_whitespace) {
                return Err(Error::Evidence(format!("invalid frame label '{l}'")));
            }
            if labels[..i].contains(l) {
                return Err(Error::Evidence(format!("duplicate frame label '{l}'")));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The whole frame, Ω.
    pub fn omega(&self) -> Subset {
        Subset(((1u64 << self.len()) - 1) as u32)
    }

    pub fn complement(&self, a: Subset) -> Subset {
        Subset(self.omega().0 & !a.0)
    }

    pub fn contains_subset(&self, a: Subset) -> bool {
        a.is_subset_of(self.omega())
    }

    /// Parses `A+B+C`; `*` denotes the whole frame.
    pub fn parse_subset(&self, text: &str) -> Result<Subset> {
        let text = text.trim();
        if text == "*" {
            return Ok(self.omega());
        }
        let mut set = Subset::EMPTY;
        for part in text.split('+') {
            let i = self
                .index_of(part.trim())
                .ok_or_else(|| Error::Evidence(format!("'{}' is not a frame label", part.trim())))?;
            set = Subset(set.0 | (1 << i));
        }
        Ok(set)
    }

    pub fn display_subset(&self, a: Subset) -> SubsetDisplay<'_> {
        SubsetDisplay { frame: self, set: a }
    }
}

pub struct SubsetDisplay<'a> {
    frame: &'a FrameOfDiscernment,
    set: Subset,
}

impl fmt::Display for SubsetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.set.is_empty() {
            return f.write_str("{}");
        }
        let names: Vec<&str> = self.set.members().map(|i| self.frame.label(i)).collect();
        f.write_str(&names.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_validation() {
        assert!(FrameOfDiscernment::new(Vec::<String>::new()).is_err());
        assert!(FrameOfDiscernment::new(["a", "a"]).is_err());
        assert!(FrameOfDiscernment::new(["a+b"]).is_err());
        assert!(FrameOfDiscernment::new((0..21).map(|i| format!("c{i}"))).is_err());
        let full = FrameOfDiscernment::new((0..20).map(|i| format!("c{i}"))).unwrap();
        assert_eq!(full.omega().len(), 20);
    }

    #[test]
    fn subset_parsing_and_display() {
        let frame = FrameOfDiscernment::new(["A", "B", "C"]).unwrap();
        let ab = frame.parse_subset("A+B").unwrap();
        assert_eq!(ab, Subset(0b011));
        assert_eq!(frame.parse_subset("*").unwrap(), frame.omega());
        assert_eq!(frame.complement(ab), Subset::singleton(2));
        assert_eq!(frame.display_subset(ab).to_string(), "A+B");
        assert!(frame.parse_subset("A+D").is_err());
        assert_eq!(Subset::singleton(2).singleton_index(), Some(2));
        assert_eq!(ab.singleton_index(), None);
    }
}

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A source position range. Lines and columns are 1-based; the end position
/// is exclusive. Byte offsets index into the text that was tokenized.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub file: Arc<Path>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub start_byte: usize,
    pub end_byte: usize,
}

impl Span {
    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &Span) -> Span {
        let start = if self.start_byte <= other.start_byte {
            self
        } else {
            other
        };
        let end = if self.end_byte >= other.end_byte {
            self
        } else {
            other
        };
        Span {
            file: start.file.clone(),
            start_line: start.start_line,
            start_col: start.start_col,
            end_line: end.end_line,
            end_col: end.end_col,
            start_byte: start.start_byte,
            end_byte: end.end_byte,
        }
    }

    /// Zero-width span at the start of `self`.
    pub fn start_point(&self) -> Span {
        Span {
            end_line: self.start_line,
            end_col: self.start_col,
            end_byte: self.start_byte,
            ..self.clone()
        }
    }

    /// Zero-width span at the end of `self`.
    pub fn end_point(&self) -> Span {
        Span {
            start_line: self.end_line,
            start_col: self.end_col,
            start_byte: self.end_byte,
            ..self.clone()
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.file == other.file
            && self.start_byte <= other.start_byte
            && other.end_byte <= self.end_byte
    }

    pub fn is_empty(&self) -> bool {
        self.start_byte == self.end_byte
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            self.file.display(),
            self.start_line,
            self.start_col
        )
    }
}

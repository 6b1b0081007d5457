//! Plain-text word embedding files: one `word v1 v2 ... vd` entry per line.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding file has no entries")]
    Empty,
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse value {value:?}")]
    BadValue { line: usize, value: String },
}

#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    unk: Vec<f64>,
}

impl EmbeddingTable {
    /// Parse a GloVe-style text file. The dimension is inferred from the
    /// first entry; duplicate words keep their first occurrence. The
    /// unknown-word vector is the componentwise mean of all stored vectors.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dim = 0usize;
        let mut entries: HashMap<String, Vec<f64>> = HashMap::new();
        let mut sum: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let mut parts = raw.split_whitespace();
            let word = parts.next().expect("non-empty line has a first field");
            let values: Vec<&str> = parts.collect();
            if dim == 0 {
                if values.is_empty() {
                    return Err(EmbeddingError::DimensionMismatch {
                        line,
                        expected: 1,
                        found: 0,
                    });
                }
                dim = values.len();
                sum = vec![0.0; dim];
            }
            if values.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line,
                    expected: dim,
                    found: values.len(),
                });
            }
            if entries.contains_key(word) {
                continue;
            }
            let mut vector = Vec::with_capacity(dim);
            for v in values {
                let parsed: f64 = v.parse().map_err(|_| EmbeddingError::BadValue {
                    line,
                    value: v.to_string(),
                })?;
                vector.push(parsed);
            }
            for (s, v) in sum.iter_mut().zip(&vector) {
                *s += v;
            }
            count += 1;
            entries.insert(word.to_string(), vector);
        }
        if count == 0 {
            return Err(EmbeddingError::Empty);
        }
        let unk = sum.into_iter().map(|s| s / count as f64).collect();
        Ok(EmbeddingTable { dim, entries, unk })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(|v| v.as_slice())
    }

    /// Vector for `word`, falling back to the unknown-word vector.
    pub fn lookup(&self, word: &str) -> &[f64] {
        self.get(word).unwrap_or(&self.unk)
    }

    pub fn unk_vector(&self) -> &[f64] {
        &self.unk
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_dimension_from_first_line() {
        let t = EmbeddingTable::parse("cat 1 2 3\ndog 4 5 6\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("cat").unwrap(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn unknown_word_gets_mean_vector() {
        let t = EmbeddingTable::parse("cat 1 2 3\ndog 3 4 5\n").unwrap();
        assert_eq!(t.lookup("fish"), &[2.0, 3.0, 4.0]);
        assert_eq!(t.unk_vector(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn inconsistent_dimension_names_line() {
        let err = EmbeddingTable::parse("cat 1 2 3\ndog 4 5 6 7\n").unwrap_err();
        match err {
            EmbeddingError::DimensionMismatch { line: 2, expected: 3, found: 4 } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            EmbeddingTable::parse(""),
            Err(EmbeddingError::Empty)
        ));
    }

    #[test]
    fn duplicates_keep_first() {
        let t = EmbeddingTable::parse("cat 1 1\ncat 9 9\n").unwrap();
        assert_eq!(t.get("cat").unwrap(), &[1.0, 1.0]);
        // The duplicate line does not contribute to the mean either.
        assert_eq!(t.unk_vector(), &[1.0, 1.0]);
    }
}

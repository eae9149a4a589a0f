//! Catalog of best-known makespan bounds per instance.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Environment variable naming the default bounds catalog file.
pub const BOUNDS_PATH_ENV: &str = "JOBSHOP_BOUNDS";

/// Best-known lower and upper bound of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsEntry {
    pub instance: String,
    pub lb: u64,
    pub ub: u64,
}

impl BoundsEntry {
    /// The instance is solved: optimum proven equal to both bounds.
    pub fn optimal(&self) -> bool {
        self.lb == self.ub
    }
}

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("cannot read bounds catalog {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed bounds row (expected 'instance,lb,ub')")]
    Malformed { path: PathBuf, line: usize },
    #[error("{path}:{line}: lb {lb} exceeds ub {ub}")]
    Inverted {
        path: PathBuf,
        line: usize,
        lb: u64,
        ub: u64,
    },
}

/// Instance-name-keyed bounds, case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct BoundsCatalog {
    entries: HashMap<String, BoundsEntry>,
}

impl BoundsCatalog {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Loads a CSV catalog: `#` comments, an optional `instance,lb,ub`
    /// header, then one row per instance.
    pub fn load(path: &Path) -> Result<Self, BoundsError> {
        let text = std::fs::read_to_string(path).map_err(|source| BoundsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, BoundsError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields == ["instance", "lb", "ub"] {
                continue;
            }
            let malformed = || BoundsError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
            };
            let [instance, lb, ub] = fields[..] else {
                return Err(malformed());
            };
            if instance.is_empty() {
                return Err(malformed());
            }
            let lb: u64 = lb.parse().map_err(|_| malformed())?;
            let ub: u64 = ub.parse().map_err(|_| malformed())?;
            if lb > ub {
                return Err(BoundsError::Inverted {
                    path: path.to_path_buf(),
                    line: line_no,
                    lb,
                    ub,
                });
            }
            entries.insert(
                instance.to_ascii_lowercase(),
                BoundsEntry {
                    instance: instance.to_string(),
                    lb,
                    ub,
                },
            );
        }
        Ok(BoundsCatalog { entries })
    }

    pub fn get(&self, instance: &str) -> Option<&BoundsEntry> {
        self.entries.get(&instance.to_ascii_lowercase())
    }

    /// Lowercased instance names, in no particular order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<BoundsCatalog, BoundsError> {
        BoundsCatalog::parse(text, Path::new("test.csv"))
    }

    #[test]
    fn parses_rows_and_ignores_comments_and_header() {
        let cat = parse("# snapshot\ninstance,lb,ub\nft06,55,55\nswv15,2885,2886\n").unwrap();
        assert_eq!(cat.len(), 2);
        let ft06 = cat.get("FT06").unwrap();
        assert_eq!((ft06.lb, ft06.ub), (55, 55));
        assert!(ft06.optimal());
        let swv15 = cat.get("swv15").unwrap();
        assert!(!swv15.optimal());
        assert!(cat.get("ta99").is_none());
    }

    #[test]
    fn rejects_inverted_bounds() {
        let err = parse("ft06,56,55\n").unwrap_err();
        assert!(matches!(err, BoundsError::Inverted { lb: 56, ub: 55, .. }));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(
            parse("ft06,55\n").unwrap_err(),
            BoundsError::Malformed { line: 1, .. }
        ));
        assert!(matches!(
            parse("ft06,55,x\n").unwrap_err(),
            BoundsError::Malformed { line: 1, .. }
        ));
    }
}

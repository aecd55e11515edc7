//! The golden corpus: one directory per worked example holding
//! `spec.toml`, `f1.expr`, `f2.expr` and `expected.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigDoc, ConfigError};
use crate::verify::{Verdict, VerificationReport, Verifier, Witness};

/// Built-in examples in run order.
pub const CORPUS_ORDER: [&str; 6] = ["example-1-1", "c3-sine-1", "c3-sine-2", "quadratic", "exp-1111", "example-1-2-a"];

macro_rules! embedded {
    ($name:literal) => {
        CorpusEntry {
            name: $name.to_string(),
            spec: include_str!(concat!("../corpus/", $name, "/spec.toml")).to_string(),
            f1: include_str!(concat!("../corpus/", $name, "/f1.expr")).trim().to_string(),
            f2: include_str!(concat!("../corpus/", $name, "/f2.expr")).trim().to_string(),
            expected: include_str!(concat!("../corpus/", $name, "/expected.json")).to_string(),
        }
    };
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{name}: {source}")]
    Config { name: String, source: Box<ConfigError> },
    #[error("{name}: {message}")]
    Invalid { name: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub spec: String,
    pub f1: String,
    pub f2: String,
    /// The expected report as JSON text.
    pub expected: String,
}

/// Outcome of one entry: the report and whether it matches `expected.json`.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusOutcome {
    pub name: String,
    pub matches_expected: bool,
    pub report: VerificationReport,
}

impl CorpusOutcome {
    /// Passing means an exact identity-zero verdict that matches the golden file.
    pub fn passed(&self) -> bool {
        self.matches_expected && self.report.verdict == Verdict::IdentityZero
    }
}

pub fn builtin() -> Vec<CorpusEntry> {
    vec![
        embedded!("example-1-1"),
        embedded!("c3-sine-1"),
        embedded!("c3-sine-2"),
        embedded!("quadratic"),
        embedded!("exp-1111"),
        embedded!("example-1-2-a"),
    ]
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads every subdirectory of `dir`, in name order.
pub fn load_dir(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut names: Vec<_> = fs::read_dir(dir)
        .map_err(|source| CorpusError::Io {
            path: dir.display().to_string(),
            source,
        })?
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let base = dir.join(&name);
            Ok(CorpusEntry {
                spec: read(&base.join("spec.toml"))?,
                f1: read(&base.join("f1.expr"))?.trim().to_string(),
                f2: read(&base.join("f2.expr"))?.trim().to_string(),
                expected: read(&base.join("expected.json"))?,
                name,
            })
        })
        .collect()
}

/// Writes entries in the directory layout [`load_dir`] reads.
pub fn write_dir(dir: &Path, entries: &[CorpusEntry]) -> Result<(), CorpusError> {
    for e in entries {
        let base = dir.join(&e.name);
        let io = |source| CorpusError::Io {
            path: base.display().to_string(),
            source,
        };
        fs::create_dir_all(&base).map_err(io)?;
        for (file, body) in [
            ("spec.toml", e.spec.clone()),
            ("f1.expr", format!("{}\n", e.f1)),
            ("f2.expr", format!("{}\n", e.f2)),
            ("expected.json", e.expected.clone()),
        ] {
            fs::write(base.join(file), body).map_err(io)?;
        }
    }
    Ok(())
}

/// Verifies one entry's expressions against its system and, when the spec
/// names a family, checks the family's constraints as well.
pub fn run_entry(entry: &CorpusEntry) -> Result<CorpusOutcome, CorpusError> {
    let config = |source| CorpusError::Config {
        name: entry.name.clone(),
        source: Box::new(source),
    };
    let doc = ConfigDoc::from_toml(&entry.spec).map_err(config)?;
    let registry = doc.registry().map_err(config)?;
    let system = doc.system().map_err(config)?;
    let f1 = doc.expr("f1", &entry.f1, &registry).map_err(config)?;
    let f2 = doc.expr("f2", &entry.f2, &registry).map_err(config)?;
    let verifier = Verifier::new(registry.clone());
    let mut report = verifier.verify_system(&system, &f1, &f2).map_err(|e| CorpusError::Invalid {
        name: entry.name.clone(),
        message: e.to_string(),
    })?;
    if doc.family.is_some() {
        if let Err(e) = doc.build(&registry) {
            // the expressions may still verify; a broken constraint is a failure all the same
            report.verdict = Verdict::Nonzero;
            report.witness = Some(Witness {
                equation: None,
                point: None,
                term: Some(e.to_string()),
                value: None,
            });
        }
    }
    let expected: VerificationReport = serde_json::from_str(&entry.expected).map_err(|e| CorpusError::Invalid {
        name: entry.name.clone(),
        message: format!("expected.json: {e}"),
    })?;
    Ok(CorpusOutcome {
        name: entry.name.clone(),
        matches_expected: expected.verdict == report.verdict && expected.mode == report.mode,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_order_matches_names() {
        let names: Vec<String> = builtin().into_iter().map(|e| e.name).collect();
        assert_eq!(names, CORPUS_ORDER);
    }

    #[test]
    fn every_builtin_entry_verifies_exactly() {
        for entry in builtin() {
            let out = run_entry(&entry).unwrap();
            assert!(out.passed(), "{}: {}", entry.name, out.report.to_json());
        }
    }

    #[test]
    fn broken_shift_fails() {
        let mut entry = builtin().remove(0);
        entry.spec = entry.spec.replace("\"2*pi\", \"0\"", "\"1/2*pi\", \"0\"");
        let out = run_entry(&entry).unwrap();
        assert!(!out.passed());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_dir(dir.path(), &builtin()).unwrap();
        let mut loaded = load_dir(dir.path()).unwrap();
        let mut want = builtin();
        loaded.sort_by(|a, b| a.name.cmp(&b.name));
        want.sort_by(|a, b| a.name.cmp(&b.name));
        assert_eq!(loaded, want);
    }
}

//! Corpus file formats: JSONL paragraphs, raw ingest blocks, split manifests.

use super::{CorpusError, Paragraph};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Writes one JSON object per line: {id, domain, sentences}.
pub fn write_corpus(path: &Path, paragraphs: &[Paragraph]) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for p in paragraphs {
        serde_json::to_writer(&mut w, p).map_err(|e| CorpusError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a JSONL paragraph corpus.
pub fn read_corpus(path: &Path) -> Result<Vec<Paragraph>, CorpusError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Paragraph = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(p);
    }
    Ok(out)
}

/// Reads a raw ingest file: paragraphs as blank-line-separated blocks of
/// sentence lines. Returns one raw sentence list per paragraph.
pub fn read_raw_paragraphs(path: &Path) -> Result<Vec<Vec<String>>, CorpusError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut paragraphs = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }
    Ok(paragraphs)
}

/// Records which paragraph ids landed in which split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn new(seed: u64, train: &[Paragraph], valid: &[Paragraph], test: &[Paragraph]) -> Self {
        let ids = |ps: &[Paragraph]| ps.iter().map(|p| p.id.clone()).collect();
        SplitManifest {
            seed,
            train: ids(train),
            valid: ids(valid),
            test: ids(test),
        }
    }
}

pub fn write_split_manifest(path: &Path, manifest: &SplitManifest) -> Result<(), CorpusError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_split_manifest(path: &Path) -> Result<SplitManifest, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        line: 0,
        msg: e.to_string(),
    })
}

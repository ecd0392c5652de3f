//! Discourse file formats: tree records and projected label files.

use super::bracket::{parse_tree_file, render_tree};
use super::{DiscourseError, LabelSeq, RstTree};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Reads a tree file: one `id TAB bracketed-tree` record per line.
pub fn read_tree_records(path: &Path) -> Result<Vec<(String, RstTree)>, DiscourseError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| DiscourseError::Parse {
            pos: 0,
            msg: format!("line {}: expected id TAB tree", i + 1),
        })?;
        let tree = parse_tree_file(text).map_err(|e| DiscourseError::Parse {
            pos: 0,
            msg: format!("line {}: {e}", i + 1),
        })?;
        out.push((id.to_string(), tree));
    }
    Ok(out)
}

pub fn write_tree_records(
    path: &Path,
    records: &[(String, RstTree)],
) -> Result<(), DiscourseError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for (id, tree) in records {
        writeln!(w, "{id}\t{}", render_tree(tree))?;
    }
    w.flush()?;
    Ok(())
}

/// Projected CRF supervision for one paragraph: label ids per sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledParagraph {
    pub id: String,
    pub labels: Vec<LabelSeq>,
}

pub fn write_labels(path: &Path, labeled: &[LabeledParagraph]) -> Result<(), DiscourseError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for l in labeled {
        serde_json::to_writer(&mut w, l).map_err(|e| DiscourseError::Parse {
            pos: 0,
            msg: e.to_string(),
        })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<LabeledParagraph>, DiscourseError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| DiscourseError::Parse {
                pos: 0,
                msg: format!("line {}: {e}", i + 1),
            })?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::stub::stub_parse;
    use super::*;
    use crate::corpus::{Domain, Paragraph};

    fn para(n: usize) -> Paragraph {
        Paragraph {
            id: format!("p{n}"),
            domain: Domain::Synthetic,
            sentences: (0..n).map(|i| vec![format!("w{i}"); 6]).collect(),
        }
    }

    #[test]
    fn tree_records_round_trip() {
        let records: Vec<(String, RstTree)> = (4..=6)
            .map(|n| (format!("p{n}"), stub_parse(&para(n), n as u64)))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trees.tsv");
        write_tree_records(&path, &records).unwrap();
        assert_eq!(read_tree_records(&path).unwrap(), records);
    }

    #[test]
    fn missing_tab_is_reported_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trees.tsv");
        std::fs::write(&path, "no-tab-here\n").unwrap();
        let err = read_tree_records(&path).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn labels_round_trip() {
        let labeled = vec![LabeledParagraph {
            id: "p0".into(),
            labels: vec![vec![0, 0, 2, 0], vec![1, 0, 0]],
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        write_labels(&path, &labeled).unwrap();
        assert_eq!(read_labels(&path).unwrap(), labeled);
    }
}

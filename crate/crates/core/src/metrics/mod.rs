//! Scoring of bridging generations against references, with aggregate
//! breakdowns by domain and by original paragraph length.
//!
//! Each example is scored as one concatenated middle segment; aggregates
//! are unweighted means of per-example scores. Reports serialize to JSON
//! plus a flat CSV twin for plotting.

mod meteor;
mod report;
mod stem;
mod ve;

pub use meteor::meteor;
pub use report::{read_report, write_report, write_report_csv};
pub use stem::stem;
pub use ve::{vector_extrema, VeMode};

use crate::bridging::{BridgingExample, GeneratedBridge};
use crate::corpus::{EmbeddingTable, Vocab};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Errors from scoring and report I/O.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("nothing to score: no examples")]
    NoData,
    #[error("generation ids do not match example ids: {}", offenders.join(", "))]
    IdMismatch { offenders: Vec<String> },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad report file: {0}")]
    Parse(String),
}

/// Both metrics for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub id: String,
    pub domain: String,
    /// Original paragraph length in sentences.
    pub length: usize,
    pub meteor: f64,
    pub ve: f64,
}

/// Unweighted mean scores over one group of examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub meteor: f64,
    pub ve: f64,
}

impl Aggregate {
    fn over<'a>(scores: impl Iterator<Item = &'a ExampleScore>) -> Aggregate {
        let (mut count, mut meteor, mut ve) = (0, 0.0, 0.0);
        for s in scores {
            count += 1;
            meteor += s.meteor;
            ve += s.ve;
        }
        Aggregate {
            count,
            meteor: meteor / count as f64,
            ve: ve / count as f64,
        }
    }
}

/// Scores for a whole run: per example plus domain and length breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub overall: Aggregate,
    pub by_domain: BTreeMap<String, Aggregate>,
    pub by_length: BTreeMap<usize, Aggregate>,
    pub per_example: Vec<ExampleScore>,
}

/// Pairs generations with examples by id and scores every example.
///
/// Hypothesis and reference are each scored as one concatenated token
/// sequence over the middle sentences. Ids must match one-to-one; any
/// missing, unknown, or duplicated id fails the whole run.
pub fn score_run<F: Scalar>(
    generations: &[GeneratedBridge],
    examples: &[BridgingExample],
    vocab: &Vocab,
    table: &EmbeddingTable<F>,
    mode: VeMode,
) -> Result<MetricReport, MetricsError> {
    let mut by_id: HashMap<&str, &GeneratedBridge> = HashMap::new();
    let mut offenders: Vec<String> = Vec::new();
    for g in generations {
        if by_id.insert(&g.id, g).is_some() {
            offenders.push(format!("{} (duplicated)", g.id));
        }
    }
    for ex in examples {
        if !by_id.contains_key(ex.id.as_str()) {
            offenders.push(format!("{} (no generation)", ex.id));
        }
    }
    let known: std::collections::HashSet<&str> =
        examples.iter().map(|e| e.id.as_str()).collect();
    for g in generations {
        if !known.contains(g.id.as_str()) {
            offenders.push(format!("{} (no example)", g.id));
        }
    }
    if !offenders.is_empty() {
        offenders.sort();
        offenders.dedup();
        return Err(MetricsError::IdMismatch { offenders });
    }
    if examples.is_empty() {
        return Err(MetricsError::NoData);
    }

    let per_example: Vec<ExampleScore> = examples
        .iter()
        .map(|ex| {
            let hypothesis: Vec<String> = by_id[ex.id.as_str()].hypothesis.concat();
            let reference: Vec<String> = ex.middle_ref.concat();
            ExampleScore {
                id: ex.id.clone(),
                domain: ex.domain.to_string(),
                length: ex.paragraph_len(),
                meteor: meteor(&hypothesis, &reference),
                ve: vector_extrema(&hypothesis, &reference, vocab, table, mode),
            }
        })
        .collect();

    let mut domains: BTreeMap<String, Vec<&ExampleScore>> = BTreeMap::new();
    let mut lengths: BTreeMap<usize, Vec<&ExampleScore>> = BTreeMap::new();
    for s in &per_example {
        domains.entry(s.domain.clone()).or_default().push(s);
        lengths.entry(s.length).or_default().push(s);
    }
    Ok(MetricReport {
        overall: Aggregate::over(per_example.iter()),
        by_domain: domains
            .into_iter()
            .map(|(k, v)| (k, Aggregate::over(v.into_iter())))
            .collect(),
        by_length: lengths
            .into_iter()
            .map(|(k, v)| (k, Aggregate::over(v.into_iter())))
            .collect(),
        per_example,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridging::make_examples;
    use crate::corpus::{build_vocab, Domain, Paragraph, RESERVED};

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn paragraph(id: &str, domain: Domain, n: usize) -> Paragraph {
        Paragraph {
            id: id.to_string(),
            domain,
            sentences: (0..n)
                .map(|i| words(&format!("w{i} x{i} y{i} z{i} q{i}")))
                .collect(),
        }
    }

    fn fixture() -> (Vec<Paragraph>, Vocab, EmbeddingTable<f64>) {
        let paragraphs = vec![
            paragraph("a", Domain::Papers, 4),
            paragraph("b", Domain::Papers, 5),
            paragraph("c", Domain::Scifi, 6),
            paragraph("d", Domain::Fantasy, 7),
        ];
        let vocab = build_vocab(&paragraphs, 500).unwrap();
        let table = EmbeddingTable::random(&vocab, 8, 11);
        (paragraphs, vocab, table)
    }

    fn echo(examples: &[crate::bridging::BridgingExample]) -> Vec<GeneratedBridge> {
        examples
            .iter()
            .map(|ex| GeneratedBridge {
                id: ex.id.clone(),
                hypothesis: ex.middle_ref.clone(),
            })
            .collect()
    }

    #[test]
    fn echoed_references_score_near_perfect() {
        let (paragraphs, vocab, table) = fixture();
        let examples = make_examples(&paragraphs);
        let report =
            score_run(&echo(&examples), &examples, &vocab, &table, VeMode::Avg).unwrap();
        for s in &report.per_example {
            let m = examples
                .iter()
                .find(|e| e.id == s.id)
                .map(|e| e.middle_ref.concat().len())
                .unwrap() as f64;
            let ideal = 1.0 - 0.5 / m.powi(3);
            assert!(s.meteor >= 0.999 * ideal, "{}: {}", s.id, s.meteor);
            assert!((s.ve - 1.0).abs() < 1e-9, "{}: {}", s.id, s.ve);
        }
    }

    #[test]
    fn aggregates_are_means_of_their_members() {
        let (paragraphs, vocab, table) = fixture();
        let examples = make_examples(&paragraphs);
        let mut generations = echo(&examples);
        // Corrupt one hypothesis so scores differ across examples.
        generations[2].hypothesis[0] = words("nope nada zip");
        let report = score_run(&generations, &examples, &vocab, &table, VeMode::Avg).unwrap();

        let mean = |ids: &[&str], f: &dyn Fn(&ExampleScore) -> f64| {
            let picked: Vec<f64> = report
                .per_example
                .iter()
                .filter(|s| ids.contains(&s.id.as_str()))
                .map(f)
                .collect();
            picked.iter().sum::<f64>() / picked.len() as f64
        };
        let all: Vec<&str> = examples.iter().map(|e| e.id.as_str()).collect();
        assert!((report.overall.meteor - mean(&all, &|s| s.meteor)).abs() < 1e-9);
        assert!((report.overall.ve - mean(&all, &|s| s.ve)).abs() < 1e-9);
        assert_eq!(report.overall.count, 4);

        let papers = &report.by_domain["papers"];
        assert_eq!(papers.count, 2);
        assert!((papers.meteor - mean(&["a", "b"], &|s| s.meteor)).abs() < 1e-9);
        for (len, id) in [(4, "a"), (5, "b"), (6, "c"), (7, "d")] {
            let bucket = &report.by_length[&len];
            assert_eq!(bucket.count, 1);
            assert!((bucket.meteor - mean(&[id], &|s| s.meteor)).abs() < 1e-9);
            assert!((bucket.ve - mean(&[id], &|s| s.ve)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_example_aggregate_equals_its_score() {
        let (paragraphs, vocab, table) = fixture();
        let examples = make_examples(&paragraphs[..1]);
        let report =
            score_run(&echo(&examples), &examples, &vocab, &table, VeMode::Avg).unwrap();
        let only = &report.per_example[0];
        assert_eq!(report.overall.meteor, only.meteor);
        assert_eq!(report.overall.ve, only.ve);
    }

    #[test]
    fn id_mismatches_list_every_offender() {
        let (paragraphs, vocab, table) = fixture();
        let examples = make_examples(&paragraphs);
        let mut generations = echo(&examples);
        generations[0].id = "ghost".into(); // "a" now missing, "ghost" unknown
        generations.push(generations[1].clone()); // "b" duplicated
        match score_run(&generations, &examples, &vocab, &table, VeMode::Avg) {
            Err(MetricsError::IdMismatch { offenders }) => {
                assert_eq!(
                    offenders,
                    vec!["a (no generation)", "b (duplicated)", "ghost (no example)"]
                );
            }
            other => panic!("expected id mismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_run_is_rejected() {
        let (_, vocab, table) = fixture();
        assert!(matches!(
            score_run::<f64>(&[], &[], &vocab, &table, VeMode::Avg),
            Err(MetricsError::NoData)
        ));
    }

    #[test]
    fn reserved_tokens_never_reach_scores() {
        // A hypothesis containing reserved token strings scores them as OOV.
        let (paragraphs, vocab, table) = fixture();
        let examples = make_examples(&paragraphs[..1]);
        let mut generations = echo(&examples);
        generations[0].hypothesis[0] = RESERVED.iter().map(|t| t.to_string()).collect();
        let report = score_run(&generations, &examples, &vocab, &table, VeMode::Avg).unwrap();
        assert!(report.per_example[0].meteor < 1.0);
        assert!(report.per_example[0].ve < 1.0);
    }
}

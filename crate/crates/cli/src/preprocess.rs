//! Raw-text ingestion: filter, split, and build the vocabulary.

use crate::error::CliError;
use crate::manifest::RunManifest;
use paraflow_core::corpus::{
    build_vocab, filter_paragraph, read_raw_paragraphs, split_corpus, write_corpus,
    write_split_manifest, DefaultTokenizer, Domain, Paragraph, RejectReason, SplitManifest,
    SplitSpec,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct PreprocessArgs {
    /// Raw ingest file: blank-line-separated blocks of sentence lines.
    #[arg(long)]
    pub raw: PathBuf,
    /// Directory for corpus.jsonl, vocab.json, splits.json, rejects.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Domain tag recorded on every accepted paragraph.
    #[arg(long, default_value = "synthetic")]
    pub domain: Domain,
    /// Seed for the split shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum vocabulary size (reserved tokens excluded).
    #[arg(long, default_value_t = 50_000)]
    pub max_vocab: usize,
}

/// Per-rule rejection counts alongside the totals.
#[derive(Debug, Serialize)]
struct RejectLog {
    total: usize,
    kept: usize,
    rejected: usize,
    by_rule: BTreeMap<&'static str, usize>,
}

pub fn run(args: &PreprocessArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let blocks = read_raw_paragraphs(&args.raw)?;
    let tokenizer = DefaultTokenizer;

    let mut kept: Vec<Paragraph> = Vec::new();
    let mut by_rule: BTreeMap<&'static str, usize> =
        RejectReason::CODES.iter().map(|code| (*code, 0)).collect();
    for (idx, raw) in blocks.iter().enumerate() {
        let id = format!("{}-{idx:05}", args.domain);
        match filter_paragraph(id, args.domain, raw, &tokenizer) {
            Ok(p) => kept.push(p),
            Err(reason) => *by_rule.get_mut(reason.code()).expect("known code") += 1,
        }
    }
    let log = RejectLog {
        total: blocks.len(),
        kept: kept.len(),
        rejected: blocks.len() - kept.len(),
        by_rule,
    };

    let corpus_path = args.out_dir.join("corpus.jsonl");
    let rejects_path = args.out_dir.join("rejects.json");
    write_corpus(&corpus_path, &kept)?;
    std::fs::write(&rejects_path, serde_json::to_string_pretty(&log).expect("log serializes"))?;

    let mut manifest = RunManifest::begin("preprocess", args.seed);
    manifest.input("raw", &args.raw);
    manifest.output("corpus", &corpus_path).output("rejects", &rejects_path);

    if kept.is_empty() {
        eprintln!("warning: no paragraphs survived filtering; skipping vocab and splits");
        manifest.seal(&args.out_dir, &BTreeMap::new())?;
        println!("kept 0 of {} paragraphs", log.total);
        return Ok(());
    }

    // Below the splitter's minimum everything goes to train so the corpus
    // stays usable; the vocabulary is always built from the train side only.
    let (train, valid, test) = if kept.len() < 20 {
        eprintln!(
            "warning: {} paragraphs is too few to split; assigning all to train",
            kept.len()
        );
        (kept.clone(), Vec::new(), Vec::new())
    } else {
        let spec = SplitSpec { seed: args.seed, ..SplitSpec::default() };
        split_corpus(&kept, &spec)?
    };
    let vocab = build_vocab(&train, args.max_vocab)?;

    let vocab_path = args.out_dir.join("vocab.json");
    let splits_path = args.out_dir.join("splits.json");
    vocab.save(&vocab_path)?;
    write_split_manifest(&splits_path, &SplitManifest::new(args.seed, &train, &valid, &test))?;
    manifest.output("vocab", &vocab_path).output("splits", &splits_path);
    manifest.seal(&args.out_dir, &BTreeMap::new())?;

    println!(
        "kept {} of {} paragraphs (train {} / valid {} / test {}), vocab {} tokens",
        log.kept,
        log.total,
        train.len(),
        valid.len(),
        test.len(),
        vocab.len(),
    );
    Ok(())
}

//! Bundled synthetic corpus: templated paragraphs with cyclic flow
//! patterns, so the whole pipeline runs with zero external data.

use crate::error::CliError;
use crate::manifest::RunManifest;
use paraflow_core::corpus::{
    build_vocab, split_corpus, write_corpus, write_split_manifest, Domain, Paragraph,
    SplitManifest, SplitSpec,
};
use paraflow_core::discourse::{stub_parse, write_tree_records};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    /// Directory for corpus.jsonl, vocab.json, splits.json, trees.tsv.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// How many paragraphs to generate.
    #[arg(long, default_value_t = 20)]
    pub paragraphs: usize,
    /// Seed for the split shuffle and the stub discourse parses.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Deterministic template: paragraph `i` has `4 + i % 4` sentences of five
/// tokens each. Every sentence names its paragraph and position, then two
/// tokens that cycle at different periods, so each sentence is a pure
/// function of `(i, j)` and adjacent sentences always differ.
pub fn build_paragraphs(n: usize) -> Vec<Paragraph> {
    (0..n)
        .map(|i| {
            let len = 4 + i % 4;
            let sentences = (0..len)
                .map(|j| {
                    vec![
                        format!("p{i:02}"),
                        format!("s{j}"),
                        format!("flow{}", (i + j) % 5),
                        format!("cycle{}", (i + 2 * j) % 3),
                        "stop".to_string(),
                    ]
                })
                .collect();
            Paragraph {
                id: format!("synth-{i:04}"),
                domain: Domain::ALL[i % Domain::ALL.len()],
                sentences,
            }
        })
        .collect()
}

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let paragraphs = build_paragraphs(args.paragraphs);
    for p in &paragraphs {
        p.validate().expect("template satisfies paragraph invariants");
    }
    // The template universe is closed, so the vocabulary covers the whole
    // corpus rather than just the train split.
    let vocab = build_vocab(&paragraphs, 50_000)?;
    let spec = SplitSpec { seed: args.seed, ..SplitSpec::default() };
    let (train, valid, test) = split_corpus(&paragraphs, &spec)?;
    let trees: Vec<_> = paragraphs
        .iter()
        .map(|p| (p.id.clone(), stub_parse(p, args.seed)))
        .collect();

    let corpus_path = args.out_dir.join("corpus.jsonl");
    let vocab_path = args.out_dir.join("vocab.json");
    let splits_path = args.out_dir.join("splits.json");
    let trees_path = args.out_dir.join("trees.tsv");
    write_corpus(&corpus_path, &paragraphs)?;
    vocab.save(&vocab_path)?;
    write_split_manifest(&splits_path, &SplitManifest::new(args.seed, &train, &valid, &test))?;
    write_tree_records(&trees_path, &trees)?;

    let mut manifest = RunManifest::begin("synth", args.seed);
    manifest
        .output("corpus", &corpus_path)
        .output("vocab", &vocab_path)
        .output("splits", &splits_path)
        .output("trees", &trees_path);
    manifest.seal(&args.out_dir, &BTreeMap::new())?;

    println!(
        "wrote {} paragraphs (train {} / valid {} / test {}), vocab {} tokens, {} stub trees",
        paragraphs.len(),
        train.len(),
        valid.len(),
        test.len(),
        vocab.len(),
        paragraphs.len(),
    );
    Ok(())
}

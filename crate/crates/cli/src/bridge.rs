//! Bridging: build first/last examples for a split and fill the middles
//! with a trained checkpoint.

use crate::error::CliError;
use crate::manifest::{gather_input_stamps, RunManifest};
use paraflow_core::bridging::{make_examples, run_bridging, write_examples, write_generations};
use paraflow_core::corpus::{read_corpus, read_split_manifest, Paragraph, Vocab};
use paraflow_core::Model64;
use std::collections::HashMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum SplitName {
    Train,
    Valid,
    Test,
}

#[derive(clap::Args, Debug)]
pub struct BridgeArgs {
    /// Trained checkpoint to generate with.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Paragraph corpus (JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Split manifest.
    #[arg(long)]
    pub splits: PathBuf,
    /// Saved vocabulary file; must match the checkpoint.
    #[arg(long)]
    pub vocab_file: PathBuf,
    /// Which split to build examples from.
    #[arg(long, value_enum, default_value_t = SplitName::Test)]
    pub split: SplitName,
    /// Generation length cap; defaults to the checkpoint's sentence cap.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Directory for examples.jsonl and generations.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &BridgeArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let corpus = read_corpus(&args.corpus)?;
    let splits = read_split_manifest(&args.splits)?;
    let vocab = Vocab::load(&args.vocab_file)?;

    let ids = match args.split {
        SplitName::Train => &splits.train,
        SplitName::Valid => &splits.valid,
        SplitName::Test => &splits.test,
    };
    let by_id: HashMap<&str, &Paragraph> = corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    let selected: Vec<Paragraph> = ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|p| (*p).clone())
                .ok_or_else(|| CliError::Data(format!("split names unknown paragraph {id}")))
        })
        .collect::<Result<_, _>>()?;
    if selected.is_empty() {
        eprintln!("warning: selected split is empty; writing empty example and generation files");
    }

    let (model, _) = Model64::load(&args.checkpoint)?;
    let variant = model.config.variant;
    let max_len = args.max_len.unwrap_or(model.config.max_sentence_len);
    drop(model);

    let examples = make_examples(&selected);
    let generations = run_bridging::<f64>(&args.checkpoint, &vocab, None, &examples, max_len)?;

    let examples_path = args.out_dir.join("examples.jsonl");
    let generations_path = args.out_dir.join("generations.jsonl");
    write_examples(&examples_path, &examples)?;
    write_generations(&generations_path, &generations)?;

    let stamps = gather_input_stamps(&[
        ("checkpoint", &args.checkpoint),
        ("corpus", &args.corpus),
        ("splits", &args.splits),
        ("vocab", &args.vocab_file),
    ])?;
    // Both outputs carry the same run hash; eval checks they stayed paired.
    let mut manifest = RunManifest::begin("bridge", splits.seed);
    manifest
        .input("checkpoint", &args.checkpoint)
        .input("corpus", &args.corpus)
        .input("splits", &args.splits)
        .input("vocab", &args.vocab_file)
        .output("examples", &examples_path)
        .output("generations", &generations_path);
    manifest.seal(&args.out_dir, &stamps)?;

    let split_name = match args.split {
        SplitName::Train => "train",
        SplitName::Valid => "valid",
        SplitName::Test => "test",
    };
    println!(
        "bridged {} examples from the {split_name} split with {variant}",
        examples.len(),
    );
    Ok(())
}

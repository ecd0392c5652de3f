//! Scoring: compare generations against references and write the report.

use crate::error::CliError;
use crate::manifest::{gather_input_stamps, read_stamp, RunManifest};
use paraflow_core::bridging::{read_examples, read_generations};
use paraflow_core::corpus::{load_embeddings, Vocab};
use paraflow_core::metrics::{score_run, write_report, write_report_csv, VeMode};
use paraflow_core::EmbeddingTable64;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// Generated middles (JSONL, from bridge).
    #[arg(long)]
    pub generations: PathBuf,
    /// Bridging examples with references (JSONL, from bridge).
    #[arg(long)]
    pub examples: PathBuf,
    /// Saved vocabulary file.
    #[arg(long)]
    pub vocab_file: PathBuf,
    /// Optional embedding file for the similarity metric; otherwise a
    /// seeded random table is used.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embedding width when loading or generating the table.
    #[arg(long, default_value_t = 300)]
    pub embed_dim: usize,
    /// Similarity pooling: avg or extrema.
    #[arg(long, default_value_t = VeMode::Avg)]
    pub ve_mode: VeMode,
    /// Seed for randomly initialized embedding vectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.json and report.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Generations are only comparable to the examples file they were made
/// with; the stamps written by bridge prove the pairing.
fn check_pairing(args: &EvalArgs) -> Result<(), CliError> {
    match (read_stamp(&args.generations)?, read_stamp(&args.examples)?) {
        (Some(g), Some(e)) if g.manifest != e.manifest => Err(CliError::Data(format!(
            "manifest-hash mismatch between generations and examples: {} vs {}",
            g.manifest, e.manifest
        ))),
        (Some(_), Some(_)) => Ok(()),
        _ => {
            eprintln!("warning: missing stamp files; cannot verify the generations match the examples");
            Ok(())
        }
    }
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    check_pairing(args)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let examples = read_examples(&args.examples)?;
    let generations = read_generations(&args.generations)?;
    let vocab = Vocab::load(&args.vocab_file)?;
    let table: EmbeddingTable64 = match &args.embeddings {
        Some(path) => load_embeddings(path, &vocab, args.embed_dim, args.seed)?,
        None => EmbeddingTable64::random(&vocab, args.embed_dim, args.seed),
    };

    let report = score_run(&generations, &examples, &vocab, &table, args.ve_mode)?;

    let report_path = args.out_dir.join("report.json");
    let csv_path = args.out_dir.join("report.csv");
    write_report(&report_path, &report)?;
    write_report_csv(&csv_path, &report)?;

    let mut inputs = vec![
        ("generations", args.generations.as_path()),
        ("examples", args.examples.as_path()),
        ("vocab", args.vocab_file.as_path()),
    ];
    if let Some(path) = &args.embeddings {
        inputs.push(("embeddings", path.as_path()));
    }
    let stamps = gather_input_stamps(&inputs)?;
    let mut manifest = RunManifest::begin("eval", args.seed);
    for (name, path) in &inputs {
        manifest.input(name, path);
    }
    manifest.output("report", &report_path).output("report_csv", &csv_path);
    manifest.seal(&args.out_dir, &stamps)?;

    println!(
        "scored {} examples: meteor {:.4}, ve {:.4}",
        report.overall.count, report.overall.meteor, report.overall.ve,
    );
    Ok(())
}

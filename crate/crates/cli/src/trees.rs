//! Discourse ingestion: align parser output with the corpus, build the
//! relation inventory from the train split, and project token labels.

use crate::error::CliError;
use crate::manifest::{gather_input_stamps, RunManifest};
use paraflow_core::corpus::{read_corpus, read_split_manifest, Paragraph};
use paraflow_core::discourse::{
    build_inventory, flatten, project_labels, read_tree_records, write_labels, LabelMode,
    LabeledParagraph, RstTree,
};
use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct TreesArgs {
    /// Tree records: one "id<TAB>bracketed tree" line per paragraph.
    #[arg(long)]
    pub trees: PathBuf,
    /// Paragraph corpus the trees were parsed from.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Split manifest; the inventory is built from train-split trees only.
    #[arg(long)]
    pub splits: PathBuf,
    /// Directory for inventory.json and labels.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &TreesArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let paragraphs = read_corpus(&args.corpus)?;
    let splits = read_split_manifest(&args.splits)?;
    let records = read_tree_records(&args.trees)?;

    let by_id: HashMap<&str, &Paragraph> =
        paragraphs.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut trees: HashMap<&str, &RstTree> = HashMap::new();
    let mut orphans = 0usize;
    for (id, tree) in &records {
        if by_id.contains_key(id.as_str()) {
            trees.insert(id, tree);
        } else {
            orphans += 1;
        }
    }
    if orphans > 0 {
        eprintln!("warning: {orphans} tree records name paragraphs not in the corpus");
    }

    let train_ids: HashSet<&str> = splits.train.iter().map(String::as_str).collect();
    let train_trees: Vec<RstTree> = records
        .iter()
        .filter(|(id, _)| train_ids.contains(id.as_str()) && trees.contains_key(id.as_str()))
        .map(|(_, tree)| tree.clone())
        .collect();
    let inventory = build_inventory(&train_trees);

    // Paragraphs without a tree are dropped from the labeled set; with
    // discourse supervision requested they cannot be trained on.
    let mut labeled = Vec::new();
    let mut unparsed = 0usize;
    for p in &paragraphs {
        let Some(tree) = trees.get(p.id.as_str()) else {
            unparsed += 1;
            continue;
        };
        tree.check_alignment(p)?;
        let flat = flatten(tree)?;
        let mode = if train_ids.contains(p.id.as_str()) {
            LabelMode::Train
        } else {
            LabelMode::Eval
        };
        let labels = project_labels(p, tree, &flat, &inventory, mode)?;
        labeled.push(LabeledParagraph { id: p.id.clone(), labels });
    }
    if unparsed > 0 {
        eprintln!("warning: {unparsed} paragraphs have no tree record and were dropped");
    }

    let inventory_path = args.out_dir.join("inventory.json");
    let labels_path = args.out_dir.join("labels.jsonl");
    inventory.save(&inventory_path)?;
    write_labels(&labels_path, &labeled)?;

    let stamps = gather_input_stamps(&[
        ("trees", &args.trees),
        ("corpus", &args.corpus),
        ("splits", &args.splits),
    ])?;
    let mut manifest = RunManifest::begin("trees-ingest", splits.seed);
    manifest
        .input("trees", &args.trees)
        .input("corpus", &args.corpus)
        .input("splits", &args.splits)
        .output("inventory", &inventory_path)
        .output("labels", &labels_path);
    manifest.seal(&args.out_dir, &stamps)?;

    println!(
        "labeled {} of {} paragraphs; inventory holds {} relations",
        labeled.len(),
        paragraphs.len(),
        inventory.len(),
    );
    Ok(())
}

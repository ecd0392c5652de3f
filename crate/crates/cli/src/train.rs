//! Training: resolve the config, assemble split items, run the schedule,
//! and save the best checkpoint.

use crate::error::CliError;
use crate::manifest::{gather_input_stamps, RunManifest};
use paraflow_core::corpus::{
    load_embeddings, read_corpus, read_split_manifest, Paragraph, Vocab,
};
use paraflow_core::discourse::{read_labels, RelationInventory};
use paraflow_core::models::{train, ModelConfig, TrainSet, Variant};
use paraflow_core::seqmodel::cells::DeltaKind;
use paraflow_core::{EmbeddingTable64, Model64};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// Flat key=value config file; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Paragraph corpus (JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Split manifest naming train and valid paragraph ids.
    #[arg(long)]
    pub splits: PathBuf,
    /// Saved vocabulary file.
    #[arg(long)]
    pub vocab_file: PathBuf,
    /// Optional pretrained embeddings ("token v1 .. v_dim" lines).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Per-token label sequences (flow_disc only; from trees-ingest).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Relation inventory (flow_disc only; from trees-ingest).
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    /// Directory for checkpoint.json and epochs.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,

    // Config overrides, named exactly like the config fields.
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub max_sentence_len: Option<usize>,
    #[arg(long)]
    pub embed: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Weight of the labeling objective; 0.1 / 0.5 / 1.0 is the usual grid.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta_kind: Option<DeltaKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub crf_unary: Option<bool>,
    #[arg(long)]
    pub predicted_relations: Option<bool>,
}

impl TrainArgs {
    fn resolve_config(&self) -> Result<ModelConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => ModelConfig::from_kv_text(&std::fs::read_to_string(path)?)?,
            None => ModelConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(value) = self.$field.clone() { config.$field = value; })*
            };
        }
        apply!(
            variant, batch, max_sentence_len, embed, hidden, layers, clip, lr, lr_decay,
            vocab, alpha, delta_kind, seed, epochs, crf_unary, predicted_relations
        );
        config.validate()?;
        Ok(config)
    }
}

/// Picks the named paragraphs out of the corpus, erroring on unknown ids.
fn select<'a>(
    corpus: &'a [Paragraph],
    ids: &[String],
    split: &str,
) -> Result<Vec<&'a Paragraph>, CliError> {
    let by_id: HashMap<&str, &Paragraph> = corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    ids.iter()
        .map(|id| {
            by_id.get(id.as_str()).copied().ok_or_else(|| {
                CliError::Data(format!("{split} split names unknown paragraph {id}"))
            })
        })
        .collect()
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let config = args.resolve_config()?;
    let needs_labels = config.variant == Variant::FlowDisc;
    if needs_labels && (args.labels.is_none() || args.inventory.is_none()) {
        return Err(CliError::Data(
            "flow_disc needs --labels and --inventory (run trees-ingest first)".into(),
        ));
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let corpus = read_corpus(&args.corpus)?;
    let splits = read_split_manifest(&args.splits)?;
    let vocab = Vocab::load(&args.vocab_file)?;
    let mut train_paras = select(&corpus, &splits.train, "train")?;
    let mut valid_paras = select(&corpus, &splits.valid, "valid")?;

    let (label_map, n_labels) = if needs_labels {
        let rows = read_labels(args.labels.as_deref().expect("checked above"))?;
        let inventory = RelationInventory::load(args.inventory.as_deref().expect("checked above"))?;
        let map: HashMap<String, Vec<Vec<usize>>> =
            rows.into_iter().map(|r| (r.id, r.labels)).collect();
        // Paragraphs the parser missed cannot supply supervision; drop them.
        let keep = |ps: &mut Vec<&Paragraph>| {
            let before = ps.len();
            ps.retain(|p| map.contains_key(&p.id));
            before - ps.len()
        };
        let dropped = keep(&mut train_paras) + keep(&mut valid_paras);
        if dropped > 0 {
            eprintln!("warning: dropped {dropped} paragraphs without label annotations");
        }
        (Some(map), inventory.len())
    } else {
        (None, 0)
    };

    let table: Option<EmbeddingTable64> = match &args.embeddings {
        Some(path) => Some(load_embeddings(path, &vocab, config.embed, config.seed)?),
        None => None,
    };

    let owned = |ps: &[&Paragraph]| -> Vec<Paragraph> { ps.iter().map(|p| (*p).clone()).collect() };
    let train_set = TrainSet::prepare(
        config.variant,
        &owned(&train_paras),
        &vocab,
        label_map.as_ref(),
        config.max_sentence_len,
    )?;
    let valid_set = TrainSet::prepare(
        config.variant,
        &owned(&valid_paras),
        &vocab,
        label_map.as_ref(),
        config.max_sentence_len,
    )?;

    let mut model = Model64::new(config.clone(), vocab.len(), n_labels, table.as_ref())?;

    let epochs_path = args.out_dir.join("epochs.jsonl");
    let mut epochs_file = std::io::BufWriter::new(std::fs::File::create(&epochs_path)?);
    let outcome = train(&mut model, &train_set.items, &valid_set.items, |log| {
        let line = serde_json::to_string(log).expect("epoch log serializes");
        writeln!(epochs_file, "{line}").expect("epoch log writes");
        eprintln!(
            "epoch {:>3}  train {:.4}  valid {:.4}  lr {:.5}",
            log.epoch, log.train_nll, log.valid_nll, log.lr
        );
    })?;
    epochs_file.flush()?;
    drop(epochs_file);

    let checkpoint_path = args.out_dir.join("checkpoint.json");
    model.save(&checkpoint_path, &vocab.hash_hex())?;

    let mut inputs: Vec<(&str, &Path)> = vec![
        ("corpus", args.corpus.as_path()),
        ("splits", args.splits.as_path()),
        ("vocab", args.vocab_file.as_path()),
    ];
    for (name, path) in [
        ("embeddings", args.embeddings.as_deref()),
        ("labels", args.labels.as_deref()),
        ("inventory", args.inventory.as_deref()),
    ] {
        if let Some(path) = path {
            inputs.push((name, path));
        }
    }
    let stamps = gather_input_stamps(&inputs)?;
    let mut manifest = RunManifest::begin("train", config.seed);
    manifest.config = args.config.as_ref().map(|p| p.display().to_string());
    for (name, path) in &inputs {
        manifest.input(name, path);
    }
    manifest.output("checkpoint", &checkpoint_path).output("epochs", &epochs_path);
    manifest.seal(&args.out_dir, &stamps)?;

    match outcome.epochs.last() {
        Some(last) => println!(
            "trained {} for {} epochs; best valid nll {:.4} at epoch {}; final train ppl {:.4}",
            config.variant,
            outcome.epochs.len(),
            outcome.best_valid_nll,
            outcome.best_epoch,
            last.train_nll.exp(),
        ),
        None => println!("trained {} for 0 epochs; wrote the initialized checkpoint", config.variant),
    }
    Ok(())
}

//! Result tables: models × metrics per domain, the delta-kind ablation,
//! and length-bucket series for plotting.

use crate::error::CliError;
use crate::manifest::{gather_input_stamps, RunManifest};
use paraflow_core::metrics::{read_report, MetricReport};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct ReportArgs {
    /// Model run as name=report.json; repeatable.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Delta-kind run as name=report.json; repeatable.
    #[arg(long = "delta")]
    pub deltas: Vec<String>,
    /// Directory for the text tables and CSV series.
    #[arg(long)]
    pub out_dir: PathBuf,
}

struct Entry {
    name: String,
    path: PathBuf,
    report: MetricReport,
}

fn load_entries(specs: &[String], flag: &str) -> Result<Vec<Entry>, CliError> {
    specs
        .iter()
        .map(|spec| {
            let (name, path) = spec.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--{flag} wants name=path, got {spec:?}"))
            })?;
            let path = PathBuf::from(path);
            let report = read_report(&path)?;
            if report.per_example.is_empty() {
                return Err(CliError::Data(format!(
                    "no-data: report {name} ({}) holds no examples",
                    path.display()
                )));
            }
            Ok(Entry { name: name.to_string(), path, report })
        })
        .collect()
}

/// Fixed-width text table; the first column is left-aligned, the rest right.
fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for (cells, _) in std::iter::once((header, 0)).chain(rows.iter().map(|r| (&r[..], 1))) {
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<width$}", width = widths[0]);
            } else {
                let _ = write!(out, "  {cell:>width$}", width = widths[i]);
            }
        }
        out.push('\n');
    }
    out
}

/// One row per run: example count, overall metrics, then per-domain metrics.
fn scope_table(label: &str, entries: &[Entry]) -> (String, String) {
    let domains: BTreeSet<&String> =
        entries.iter().flat_map(|e| e.report.by_domain.keys()).collect();
    let mut header = vec![label.to_string(), "n".into(), "M:overall".into(), "VE:overall".into()];
    for d in &domains {
        header.push(format!("M:{d}"));
        header.push(format!("VE:{d}"));
    }
    let mut rows = Vec::new();
    let mut csv = format!("{label},scope,count,meteor,ve\n");
    for e in entries {
        let overall = &e.report.overall;
        let mut row = vec![
            e.name.clone(),
            overall.count.to_string(),
            format!("{:.4}", overall.meteor),
            format!("{:.4}", overall.ve),
        ];
        let _ = writeln!(
            csv,
            "{},overall,{},{},{}",
            e.name, overall.count, overall.meteor, overall.ve
        );
        for d in &domains {
            match e.report.by_domain.get(*d) {
                Some(agg) => {
                    row.push(format!("{:.4}", agg.meteor));
                    row.push(format!("{:.4}", agg.ve));
                    let _ = writeln!(csv, "{},{d},{},{},{}", e.name, agg.count, agg.meteor, agg.ve);
                }
                None => {
                    row.push("-".into());
                    row.push("-".into());
                }
            }
        }
        rows.push(row);
    }
    (render_table(&header, &rows), csv)
}

/// Length-bucket series over every run, one CSV row per (run, length).
fn length_csv(entries: &[&Entry]) -> String {
    let mut csv = String::from("name,length,count,meteor,ve\n");
    for e in entries {
        for (len, agg) in &e.report.by_length {
            let _ = writeln!(csv, "{},{len},{},{},{}", e.name, agg.count, agg.meteor, agg.ve);
        }
    }
    csv
}

pub fn run(args: &ReportArgs) -> Result<(), CliError> {
    let models = load_entries(&args.models, "model")?;
    let deltas = load_entries(&args.deltas, "delta")?;
    if models.is_empty() && deltas.is_empty() {
        return Err(CliError::Data(
            "no-data: pass at least one --model or --delta name=report.json".into(),
        ));
    }
    std::fs::create_dir_all(&args.out_dir)?;

    let mut outputs: Vec<(&str, PathBuf, String)> = Vec::new();
    if !models.is_empty() {
        let (table, csv) = scope_table("model", &models);
        print!("{table}");
        outputs.push(("models_txt", args.out_dir.join("models.txt"), table));
        outputs.push(("models_csv", args.out_dir.join("models.csv"), csv));
    }
    if !deltas.is_empty() {
        let (table, csv) = scope_table("delta", &deltas);
        print!("{table}");
        outputs.push(("deltas_txt", args.out_dir.join("deltas.txt"), table));
        outputs.push(("deltas_csv", args.out_dir.join("deltas.csv"), csv));
    }
    let all: Vec<&Entry> = models.iter().chain(deltas.iter()).collect();
    outputs.push(("lengths_csv", args.out_dir.join("lengths.csv"), length_csv(&all)));

    for (_, path, content) in &outputs {
        std::fs::write(path, content)?;
    }

    let named_inputs: Vec<(String, &Path)> = models
        .iter()
        .map(|e| (format!("model:{}", e.name), e.path.as_path()))
        .chain(deltas.iter().map(|e| (format!("delta:{}", e.name), e.path.as_path())))
        .collect();
    let borrowed: Vec<(&str, &Path)> =
        named_inputs.iter().map(|(n, p)| (n.as_str(), *p)).collect();
    let stamps = gather_input_stamps(&borrowed)?;
    let mut manifest = RunManifest::begin("report", 0);
    for (name, path) in &borrowed {
        manifest.input(name, path);
    }
    for (name, path, _) in &outputs {
        manifest.output(name, path);
    }
    manifest.seal(&args.out_dir, &stamps)?;

    println!(
        "reported {} model runs and {} delta runs to {}",
        models.len(),
        deltas.len(),
        args.out_dir.display(),
    );
    Ok(())
}

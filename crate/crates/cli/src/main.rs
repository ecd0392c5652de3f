//! `paraflow`: preprocess, train, bridge, and score paragraph-flow models.

mod bridge;
mod error;
mod eval;
mod manifest;
mod preprocess;
mod report;
mod synth;
mod train;
mod trees;

use clap::Parser;
use error::CliError;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "paraflow",
    version,
    about = "Paragraph-flow language modeling pipeline",
    after_help = "Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Generate the bundled synthetic corpus with stub discourse trees.
    Synth(synth::SynthArgs),
    /// Filter raw paragraphs, split them, and build the vocabulary.
    Preprocess(preprocess::PreprocessArgs),
    /// Ingest discourse trees into a relation inventory and token labels.
    TreesIngest(trees::TreesArgs),
    /// Train one model variant and save the best checkpoint.
    Train(Box<train::TrainArgs>),
    /// Build first/last examples and generate the middle sentences.
    Bridge(bridge::BridgeArgs),
    /// Score generations against references and write the report.
    Eval(eval::EvalArgs),
    /// Render result tables and plot series from saved reports.
    Report(report::ReportArgs),
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(args) => synth::run(args),
        Command::Preprocess(args) => preprocess::run(args),
        Command::TreesIngest(args) => trees::run(args),
        Command::Train(args) => train::run(args),
        Command::Bridge(args) => bridge::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Report(args) => report::run(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is
            // a usage error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

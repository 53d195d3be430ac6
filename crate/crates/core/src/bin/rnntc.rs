use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rnntc::cli::{
    cmd_compare, cmd_evaluate, cmd_predict, cmd_prepare, cmd_train, CliError, CsvColumns,
    DataSource, PredictInput, PrepareOptions, TrainOptions,
};
use rnntc::corpus::{Padding, Truncation, DEFAULT_LABEL_COLUMN, DEFAULT_NARRATIVE_COLUMN};
use rnntc::recurrent::CellKind;

#[derive(Parser)]
#[command(
    name = "rnntc",
    version,
    about = "Recurrent text classifier for occurrence narratives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cell {
    Srnn,
    Gru,
    Lstm,
    Blstm,
}

impl From<Cell> for CellKind {
    fn from(c: Cell) -> Self {
        match c {
            Cell::Srnn => CellKind::Srnn,
            Cell::Gru => CellKind::Gru,
            Cell::Lstm => CellKind::Lstm,
            Cell::Blstm => CellKind::Blstm,
        }
    }
}

#[derive(Args)]
struct Columns {
    #[arg(long, default_value = DEFAULT_NARRATIVE_COLUMN)]
    narrative_column: String,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label_column: String,
}

impl From<Columns> for CsvColumns {
    fn from(c: Columns) -> Self {
        CsvColumns {
            narrative: c.narrative_column,
            label: c.label_column,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Clean, encode and split a CSV (or the synthetic corpus) into a bundle directory.
    Prepare {
        #[arg(
            long,
            conflicts_with = "synthetic",
            required_unless_present = "synthetic"
        )]
        csv: Option<PathBuf>,
        #[arg(long)]
        synthetic: bool,
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        #[arg(long, env = "RNNTC_SEED", default_value_t = 0)]
        seed: u64,
        /// Sequence length (default 64 synthetic, 2000 CSV).
        #[arg(long)]
        seq_len: Option<usize>,
        /// Vocabulary size (default 500 synthetic, 100000 CSV).
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long)]
        post_padding: bool,
        #[arg(long)]
        keep_last: bool,
        /// Comma-separated class order (default None,Minor,Substantial,Destroyed).
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
        #[command(flatten)]
        columns: Columns,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train one cell kind on a bundle.
    Train {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum)]
        cell: Cell,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, env = "RNNTC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        embed_dim: Option<usize>,
        #[arg(long)]
        hidden_dim: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "32")]
        dense: Vec<usize>,
        /// Drop the GRU gate biases.
        #[arg(long)]
        strict_paper_gru_bias: bool,
        #[arg(long, short)]
        model: PathBuf,
        /// History CSV (default: <model>.history.csv).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Report, JSON report and confusion matrix on a bundle's test split or a labelled CSV.
    Evaluate {
        #[arg(long, short)]
        model: PathBuf,
        /// Bundle directory or CSV file.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        columns: Columns,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict classes for free text or a CSV column; prints one JSON object per input.
    Predict {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
        text: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_NARRATIVE_COLUMN)]
        narrative_column: String,
    },
    /// Compare models on a shared test split; prints CSV `model,precision,recall,f1,accuracy`.
    Compare {
        #[arg(long, short, required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        columns: Columns,
        /// Print the rounded table instead of CSV.
        #[arg(long)]
        table: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare {
            csv,
            synthetic,
            per_class,
            seed,
            seq_len,
            vocab,
            post_padding,
            keep_last,
            classes,
            columns,
            out,
        } => {
            let source = match (csv, synthetic) {
                (Some(path), _) => DataSource::Csv {
                    path,
                    narrative_column: columns.narrative_column,
                    label_column: columns.label_column,
                },
                (None, _) => DataSource::Synthetic { per_class },
            };
            let opts = PrepareOptions {
                source,
                seed,
                seq_len,
                max_vocab: vocab,
                padding: if post_padding {
                    Padding::Post
                } else {
                    Padding::Pre
                },
                truncation: if keep_last {
                    Truncation::KeepLast
                } else {
                    Truncation::KeepFirst
                },
                classes,
            };
            println!("{}", cmd_prepare(&opts, &out)?);
        }
        Command::Train {
            bundle,
            cell,
            epochs,
            batch_size,
            seed,
            embed_dim,
            hidden_dim,
            dense,
            strict_paper_gru_bias,
            model,
            history,
        } => {
            let history = history.unwrap_or_else(|| model.with_extension("history.csv"));
            let opts = TrainOptions {
                epochs,
                batch_size,
                seed,
                embed_dim,
                hidden_dim,
                dense_dims: dense,
                strict_paper_gru_bias,
                ..TrainOptions::new(bundle, cell.into(), model, history)
            };
            let summary = cmd_train(&opts)?;
            for r in &summary.history {
                println!(
                    "epoch {:>4}  train_loss {:.6}  val_loss {:.6}  val_accuracy {:.4}",
                    r.epoch, r.train_loss, r.val_loss, r.val_accuracy
                );
            }
            println!("final train accuracy {:.4}", summary.train_accuracy);
            println!("head input dim {}", summary.head_input_dim);
        }
        Command::Evaluate {
            model,
            data,
            columns,
            out,
        } => {
            let res = cmd_evaluate(&model, &data, &columns.into(), out.as_deref())?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", res.rendered.text);
            if out.is_none() {
                println!();
                print!("{}", res.confusion_csv);
            }
        }
        Command::Predict {
            model,
            text,
            csv,
            narrative_column,
        } => {
            let input = match csv {
                Some(path) => PredictInput::Csv {
                    path,
                    column: narrative_column,
                },
                None => PredictInput::Texts(text),
            };
            let (preds, warnings) = cmd_predict(&model, &input)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            for p in preds {
                println!(
                    "{}",
                    serde_json::to_string(&p).map_err(|e| CliError::Input(e.to_string()))?
                );
            }
        }
        Command::Compare {
            models,
            data,
            columns,
            table,
        } => {
            let out = cmd_compare(&models, &data, &columns.into())?;
            print!("{}", if table { out.table } else { out.csv });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use affect_trace::config::{Overrides, RunConfig};
use affect_trace::eval::FilterMode;
use affect_trace::io::Split;
use affect_trace::run::{self, InferInput};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "affect-trace", version, about = "Valence/arousal estimation from facial descriptor traces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for simulation, model initialisation and training.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        clips: Option<usize>,
    },
    /// Train the regressor on a dataset's train split.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Predict per-frame valence/arousal and uncertainty.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset directory or a single trace file.
        #[arg(long)]
        input: PathBuf,
        /// Restrict a dataset input to one split (train, val, test).
        #[arg(long, value_parser = parse_split)]
        split: Option<Split>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Score predictions against a dataset's labels.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        grid_res: Option<usize>,
        /// Comma-separated percentages, e.g. 25,50,75,100.
        #[arg(long, value_delimiter = ',')]
        leave_n: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_filter)]
        filter: Option<FilterMode>,
    },
}

fn parse_split(s: &str) -> Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "val" => Ok(Split::Val),
        "test" => Ok(Split::Test),
        _ => Err(format!("unknown split `{s}`")),
    }
}

fn parse_filter(s: &str) -> Result<FilterMode, String> {
    s.parse().map_err(|e: affect_trace::Error| e.to_string())
}

fn resolve(common: &Common, ov: Overrides) -> affect_trace::Result<RunConfig> {
    RunConfig::resolve(common.config.as_deref(), &Overrides { seed: common.seed, ..ov })
}

fn execute(cli: Cli) -> affect_trace::Result<()> {
    run::init_threads()?;
    match cli.cmd {
        Cmd::Simulate { common, clips } => {
            let cfg = resolve(&common, Overrides { clips, ..Default::default() })?;
            let s = run::cmd_simulate(&cfg, &common.out)?;
            println!("{s}");
        }
        Cmd::Train { common, data, epochs } => {
            let cfg = resolve(&common, Overrides { epochs, ..Default::default() })?;
            let r = run::cmd_train(&cfg, &data, &common.out)?;
            println!(
                "trained {} epochs: loss {:.4} -> {:.4}",
                r.epochs.len(),
                r.initial.loss,
                r.final_loss()
            );
        }
        Cmd::Infer { common, checkpoint, input, split, window } => {
            let cfg = resolve(&common, Overrides { window, ..Default::default() })?;
            let input = if input.is_dir() {
                InferInput::Dataset { dir: input, split }
            } else {
                InferInput::Trace(input)
            };
            let p = run::cmd_infer(&cfg, &checkpoint, &input, &common.out)?;
            let frames: usize = p.iter().map(|t| t.records.len()).sum();
            println!("{} clips, {frames} frames", p.len());
        }
        Cmd::Eval { common, data, predictions, grid_res, leave_n, filter } => {
            let cfg = resolve(&common, Overrides { grid_res, leave_n, filter, ..Default::default() })?;
            let r = run::cmd_eval(&cfg, &data, &predictions, &common.out)?;
            let o = r.overall;
            println!(
                "{} frames: CCC V {:.3} A {:.3}, MAE V {:.3} A {:.3}",
                o.n_frames, o.ccc_v, o.ccc_a, o.mae_v, o.mae_a
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(&e) as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfdh::formats::{read_codes, LabelFile};
use mfdh::pipeline::{self, RunConfig};
use mfdh::synth::SynthConfig;
use mfdh::{MfdhError, Modality, Model, Task};

#[derive(Parser)]
#[command(name = "mfdh", version, about = "Multi-view feature discrete hashing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn dictionaries, anchors and hash functions from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a descriptor file into a code file.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        descriptors: PathBuf,
        #[arg(long, default_value = "image")]
        modality: Modality,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank or radius-filter a code database for every query code.
    Search {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        mode: SearchMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// MAP and precision/recall curve for query codes against a database.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        task: Task,
        /// Ranking depth; 0 means the whole database.
        #[arg(long, default_value_t = 0)]
        top_r: usize,
        /// Metrics JSON; the curve goes next to it with a .tsv extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic paired dataset and a matching config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        query: Option<usize>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SearchMode {
    #[arg(long)]
    top_r: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfdh: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cmd: Cmd) -> mfdh::Result<()> {
    match cmd {
        Cmd::Train { config, seed, out } => {
            let (mut cfg, text) = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (path, report) = pipeline::run_train(&cfg, &text, out.as_deref())?;
            println!(
                "trained n={} D={} L={} in {} iterations ({:.2}s); objective {:.6e} -> {:.6e}",
                report.samples,
                report.feature_len,
                report.code_len,
                report.iterations,
                report.wall_time_secs,
                report.objective_trace.first().copied().unwrap_or(f64::NAN),
                report.objective_trace.last().copied().unwrap_or(f64::NAN),
            );
            println!("model written to {}", path.display());
        }
        Cmd::Encode {
            model,
            descriptors,
            modality,
            out,
        } => {
            let n = pipeline::run_encode(&model, &descriptors, modality, &out)?;
            println!("encoded {n} samples to {}", out.display());
        }
        Cmd::Search {
            queries,
            db,
            mode,
            out,
        } => {
            let q = read_codes(&queries)?;
            let d = read_codes(&db)?;
            std::fs::write(&out, pipeline::run_search(&q, &d, mode.top_r, mode.radius)?)?;
        }
        Cmd::Eval {
            model,
            queries,
            db,
            labels,
            task,
            top_r,
            out,
        } => {
            let model = Model::load(&model)?;
            let q = read_codes(&queries)?;
            let d = read_codes(&db)?;
            for idx in [&q, &d] {
                if idx.code_len() != model.code_len() {
                    return Err(MfdhError::DimensionMismatch {
                        context: "code length vs model",
                        expected: model.code_len(),
                        actual: idx.code_len(),
                    });
                }
            }
            let labels = LabelFile::read(&labels)?;
            let report = pipeline::evaluate(task, &q, &d, &labels, top_r, model.config_echo.clone())?;
            write_json(&out, &report)?;
            let curve = mfdh::PrCurve {
                points: report.pr_curve.clone(),
            };
            std::fs::write(out.with_extension("tsv"), curve.to_tsv())?;
            println!("{task} MAP@{} = {:.4}", report.top_r, report.map);
        }
        Cmd::Synth {
            out,
            seed,
            classes,
            train,
            query,
        } => {
            let d = SynthConfig::default();
            let cfg = SynthConfig {
                seed: seed.unwrap_or(d.seed),
                classes: classes.unwrap_or(d.classes),
                train: train.unwrap_or(d.train),
                query: query.unwrap_or(d.query),
                ..d
            };
            let config = pipeline::write_synthetic(&out, &cfg)?;
            println!("synthetic data written; config at {}", config.display());
        }
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> mfdh::Result<()> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, json + "\n")?;
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use entcat::datagen::{
    generate_dataset, read_csv, sample_vectors, split, write_csv, Histogram, SamplingMode,
};
use entcat::experiments::{
    export_report, fit_time_trend, run_hybrid, run_majorization_sweep, run_transfer,
    write_figure_csvs, HybridSpec, ReportFormat, Strategy, SweepSpec, TransferSpec,
};
use entcat::golden::run_checks;
use entcat::mlp::{
    balance, encode_dataset, evaluate, load_checkpoint, save_checkpoint, train, MlpModel,
    OptimizerKind, TrainConfig, TrainingProvenance,
};
use entcat::seed::derive_seed;
use entcat::{Error, Tolerance};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_ARGUMENT: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_MALFORMED: u8 = 4;

#[derive(Parser)]
#[command(name = "entcat", version, about = "Majorization oracles and learned classifiers for entanglement transformations")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially. Defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = "ENTCAT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an oracle-labelled dataset of vector pairs.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "paired")]
        mode: SamplingMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a classifier on a dataset file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "adam")]
        optimizer: OptimizerKind,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Subsample the majority class of the training split.
        #[arg(long)]
        balance: bool,
        /// Overrides the optimizer's default learning rate.
        #[arg(long)]
        lr: Option<f64>,
        /// Checkpoint path.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Per-epoch history CSV; defaults to the checkpoint path with a `.history.csv` extension.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Score a checkpoint on a dataset file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply majorization classifiers to self-catalysis pairs.
    Transfer {
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        base_dims: Vec<usize>,
        #[arg(long, default_value = "adam")]
        optimizer: OptimizerKind,
        /// Incomparable base pairs per evaluation set.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 8000)]
        train_size: usize,
        #[arg(long, default_value_t = 2000)]
        test_size: usize,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare exact-then-model and model-then-model higher-order pipelines.
    Hybrid {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value = "adam")]
        optimizer: OptimizerKind,
        #[arg(long, default_value_t = 8000)]
        train_size: usize,
        #[arg(long, default_value_t = 2000)]
        test_size: usize,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train across dimensions, optimizers and seeds.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9,10")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "adam,adadelta,adagrad,rmsprop,sgd")]
        optimizers: Vec<OptimizerKind>,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 8000)]
        train_size: usize,
        #[arg(long, default_value_t = 2000)]
        test_size: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value = "paired")]
        mode: SamplingMode,
        #[arg(long)]
        balance: bool,
        /// Use one million rows per run, split four to one.
        #[arg(long)]
        large: bool,
        #[arg(long)]
        lr: Option<f64>,
        /// Write each run's checkpoint and held-out rows here.
        #[arg(long)]
        artifacts: Option<PathBuf>,
        /// Write plot-ready CSVs and the timing trend here.
        #[arg(long)]
        figures: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of the entries of sampled vectors.
    Hist {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pinned reference checks.
    Verify {
        #[arg(long, hide = true, default_value_t = Tolerance::DEFAULT.eps())]
        eps: f64,
    },
}

enum Failure {
    Verify,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        e if e.is_malformed_data() => EXIT_MALFORMED,
        _ => EXIT_ARGUMENT,
    }
}

fn default_path(out_dir: &Path, name: String) -> Result<PathBuf, Error> {
    fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    Ok(out_dir.join(name))
}

fn report_name(stem: &str, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => format!("{stem}.json"),
        ReportFormat::Csv => format!("{stem}.csv"),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Gen {
            dim,
            n,
            seed,
            mode,
            out,
        } => {
            let ds = generate_dataset(dim, n, mode, seed)?;
            let path = match out {
                Some(p) => p,
                None => default_path(&out_dir, format!("dataset_d{dim}_s{seed}.csv"))?,
            };
            write_csv(&ds, &path)?;
            println!(
                "wrote {} rows (dim {dim}, comparable fraction {:.4}) to {}",
                ds.len(),
                ds.comparable_fraction(),
                path.display()
            );
        }
        Command::Train {
            data,
            optimizer,
            epochs,
            batch,
            seed,
            train_fraction,
            balance: balanced,
            lr,
            model,
            history,
        } => {
            let ds = read_csv(&data)?;
            let (train_rows, test_rows) = split(&ds, train_fraction, derive_seed(seed, &[1]))?;
            let mut train_set = encode_dataset(&train_rows);
            if balanced {
                train_set = balance(&train_set, derive_seed(seed, &[4]));
            }
            let test_set = encode_dataset(&test_rows);
            let init_seed = derive_seed(seed, &[2]);
            let mut net = MlpModel::build_default(ds.dim, init_seed)?;
            let cfg = TrainConfig {
                epochs,
                batch_size: batch,
                seed: derive_seed(seed, &[3]),
                shuffle_each_epoch: true,
                learning_rate: lr,
            };
            let outcome = train(&mut net, &train_set, &cfg, optimizer, Some(&test_set))?;
            let model_path = match model {
                Some(p) => p,
                None => default_path(&out_dir, "model.json".into())?,
            };
            let history_path = history.unwrap_or_else(|| model_path.with_extension("history.csv"));
            let provenance = TrainingProvenance {
                init_seed,
                optimizer,
                config: cfg,
                dataset_dim: ds.dim,
                dataset_seed: ds.seed,
            };
            save_checkpoint(&net, Some(provenance), &model_path)?;
            let mut csv = String::from("epoch,train_loss,test_accuracy\n");
            for h in &outcome.history {
                let acc = h.eval_accuracy.map(|a| a.to_string()).unwrap_or_default();
                csv.push_str(&format!("{},{},{acc}\n", h.epoch, h.train_loss));
            }
            write_text(&history_path, &csv)?;
            let last = outcome.history.last().and_then(|h| h.eval_accuracy);
            println!(
                "trained {optimizer} for {epochs} epochs in {:.2}s; test accuracy {}; checkpoint {}",
                outcome.duration.as_secs_f64(),
                last.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into()),
                model_path.display()
            );
        }
        Command::Eval {
            model,
            data,
            format,
            out,
        } => {
            let (net, _) = load_checkpoint(&model)?;
            let ds = read_csv(&data)?;
            let metrics = evaluate(&net, &encode_dataset(&ds))?;
            let text = match format {
                ReportFormat::Json => serde_json::to_string_pretty(&metrics).map_err(Error::from)?,
                ReportFormat::Csv => {
                    let c = metrics.confusion;
                    format!(
                        "accuracy,mean_loss,tp,fp,tn,fn,duration_s\n{},{},{},{},{},{},{}\n",
                        metrics.accuracy, metrics.mean_loss, c.tp, c.fp, c.tn, c.fn_, metrics.duration_s
                    )
                }
            };
            match out {
                Some(p) => write_text(&p, &text)?,
                None => println!("{text}"),
            }
        }
        Command::Transfer {
            base_dims,
            optimizer,
            n,
            train_size,
            test_size,
            epochs,
            batch,
            seeds,
            format,
            out,
        } => {
            let spec = TransferSpec {
                base_dims,
                optimizer,
                train_size,
                test_size,
                eval_size: n,
                epochs,
                batch_size: batch,
                seeds,
            };
            let report = run_transfer(&spec)?;
            let path = match out {
                Some(p) => p,
                None => default_path(&out_dir, report_name("transfer", format))?,
            };
            export_report(&report, &path, format)?;
            for s in &report.summaries {
                println!(
                    "base dim {}: native {:.4}, transfer {:.4}, delta {:+.4}",
                    s.base_dim, s.mean_native_accuracy, s.mean_transfer_accuracy, s.mean_delta
                );
            }
            println!("report: {}", path.display());
        }
        Command::Hybrid {
            n,
            optimizer,
            train_size,
            test_size,
            epochs,
            batch,
            seeds,
            format,
            out,
        } => {
            let spec = HybridSpec {
                n,
                optimizer,
                train_size,
                test_size,
                epochs,
                batch_size: batch,
                seeds,
            };
            let report = run_hybrid(&spec)?;
            let path = match out {
                Some(p) => p,
                None => default_path(&out_dir, report_name("hybrid", format))?,
            };
            export_report(&report, &path, format)?;
            for s in [Strategy::ExactThenModel, Strategy::ModelThenModel] {
                let acc = report.mean_accuracy_of(s).unwrap_or(f64::NAN);
                println!("{s}: end-to-end accuracy {acc:.4}");
            }
            println!("agreement rate {:.4}", report.mean_agreement_rate);
            println!("report: {}", path.display());
        }
        Command::Sweep {
            dims,
            optimizers,
            epochs,
            train_size,
            test_size,
            seeds,
            batch,
            mode,
            balance: balanced,
            large,
            lr,
            artifacts,
            figures,
            format,
            out,
        } => {
            let mut spec = SweepSpec {
                dims,
                optimizers,
                epochs,
                train_size,
                test_size,
                seeds,
                batch_size: batch,
                mode,
                balance: balanced,
                learning_rate: lr,
            };
            if large {
                spec = spec.large();
            }
            let report = run_majorization_sweep(&spec, artifacts.as_deref())?;
            let path = match out {
                Some(p) => p,
                None => default_path(&out_dir, report_name("sweep", format))?,
            };
            export_report(&report, &path, format)?;
            for &opt in &spec.optimizers {
                let accs: Vec<String> = report
                    .mean_final_accuracy_by_dim(opt)
                    .iter()
                    .map(|(d, a)| format!("d{d}={a:.3}"))
                    .collect();
                println!("{opt}: {}", accs.join(" "));
            }
            if let Some(dir) = figures {
                write_figure_csvs(&report, &dir)?;
                if let Ok(trends) = fit_time_trend(&report) {
                    let text = serde_json::to_string_pretty(&trends).map_err(Error::from)?;
                    write_text(&dir.join("trend.json"), &text)?;
                }
            }
            println!("report: {}", path.display());
        }
        Command::Hist {
            dim,
            n,
            bins,
            seed,
            out,
        } => {
            let vectors = sample_vectors(dim, n, seed)?;
            let hist = Histogram::from_values(
                vectors.iter().flat_map(|v| v.entries().iter().copied()),
                bins,
            )?;
            let path = match out {
                Some(p) => p,
                None => default_path(&out_dir, format!("hist_d{dim}.csv"))?,
            };
            hist.write_csv(&path)?;
            let modal = hist.modal_bin();
            println!(
                "{} entries; modal bin [{:.3}, {:.3}); wrote {}",
                hist.total(),
                hist.bin_edges[modal],
                hist.bin_edges[modal + 1],
                path.display()
            );
        }
        Command::Verify { eps } => {
            let tol = Tolerance::new(eps)?;
            let checks = run_checks(tol);
            for c in &checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark} {:<24} [{}] {}", c.name, c.anchor, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(Failure::Verify);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_ARGUMENT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ARGUMENT);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

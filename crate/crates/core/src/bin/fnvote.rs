use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fnvote::basis::{smooth_dataset, BasisSpec};
use fnvote::bench::{evaluate_accuracy, export_representations, run_benchmark, BenchConfig};
use fnvote::classifiers::{ModelKind, ModelSpec};
use fnvote::data::{load_ucr, Binarizer, Delimiter, LabeledDataset};
use fnvote::diversity::{diversity_matrix, Metric};
use fnvote::ensemble::{majority_vote, train_fvc, FvcConfig, FvcModel};
use fnvote::selection::{k_grid_for, select_k, GridScale};
use fnvote::{Error, Result};

#[derive(Parser)]
#[command(name = "fnvote", version, about = "Voting ensembles over B-spline representations of time series")]
struct Cli {
    /// Field separator of the input files.
    #[arg(long, global = true, value_enum, default_value_t = Sep::Auto)]
    delimiter: Sep,

    /// Keep all raw classes instead of binarizing the labels.
    #[arg(long, global = true)]
    multiclass: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sep {
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl From<Sep> for Delimiter {
    fn from(s: Sep) -> Self {
        match s {
            Sep::Auto => Delimiter::Auto,
            Sep::Tab => Delimiter::Tab,
            Sep::Comma => Delimiter::Comma,
            Sep::Whitespace => Delimiter::Whitespace,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit every training curve onto one basis and write the coefficients.
    Smooth {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long = "num-basis")]
        num_basis: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate the number of basis functions for one degree.
    SelectK {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        model: ModelKind,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "grid-scale", default_value = "length")]
        grid_scale: GridScale,
    },
    /// Train an ensemble and save it.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,9,11")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "grid-scale", default_value = "length")]
        grid_scale: GridScale,
        /// One learner per degree, overriding --model for the members.
        #[arg(long = "member-models", value_delimiter = ',')]
        member_models: Option<Vec<ModelKind>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write member and ensemble predictions for a test file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print member and ensemble accuracy on a test file.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Pairwise diversity of the members' test predictions.
    Diversity {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "jaccard")]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Export the fitted curves of one instance under each degree.
    ExportCurves {
        #[arg(long)]
        train: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,9,11")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        instance: usize,
        /// Basis size; the middle of the selection grid when omitted.
        #[arg(long = "num-basis")]
        num_basis: Option<usize>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn write(path: &Path, body: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Loads a training file and binarizes it unless `--multiclass` is set.
fn load_train(path: &Path, delim: Delimiter, multiclass: bool) -> Result<(LabeledDataset, Option<Binarizer>)> {
    let raw = load_ucr(path, delim)?;
    if multiclass {
        return Ok((raw, None));
    }
    let rule = Binarizer::fit(&raw.raw_labels())?;
    Ok((rule.apply(&raw), Some(rule)))
}

fn load_test(model: &FvcModel, path: &Path, delim: Delimiter) -> Result<LabeledDataset> {
    model.encode_test(&load_ucr(path, delim)?)
}

fn run(cli: Cli) -> Result<()> {
    let delim: Delimiter = cli.delimiter.into();
    match cli.command {
        Command::Smooth {
            train,
            degree,
            num_basis,
            out,
        } => {
            let (data, _) = load_train(&train, delim, cli.multiclass)?;
            let domain = data.domain().ok_or_else(|| Error::Data("empty training file".into()))?;
            let spec = BasisSpec::clamped_uniform(domain, num_basis, degree)?;
            let coefs = smooth_dataset(&data, &spec)?;

            let mut body = String::from("label");
            for k in 1..=num_basis {
                body.push_str(&format!(",c{k}"));
            }
            body.push('\n');
            for (row, label) in coefs.entries().rows().into_iter().zip(data.raw_labels()) {
                body.push_str(&label.to_string());
                for v in row {
                    body.push_str(&format!(",{v}"));
                }
                body.push('\n');
            }
            write(&out.join("coefficients.csv"), body)?;

            let mut diag = String::from("row,residual_norm,condition_flag\n");
            for (i, d) in coefs.diagnostics().iter().enumerate() {
                diag.push_str(&format!("{i},{},{}\n", d.residual_norm, d.condition_flag));
            }
            write(&out.join("diagnostics.csv"), diag)?;
            let knots: Vec<String> = spec.knots().iter().map(f64::to_string).collect();
            write(&out.join("knots.csv"), knots.join("\n") + "\n")?;
            println!("smoothed {} curves onto K = {num_basis}, degree {degree}", data.len());
        }
        Command::SelectK {
            train,
            degree,
            model,
            folds,
            seed,
            grid_scale,
        } => {
            let (data, _) = load_train(&train, delim, cli.multiclass)?;
            let grid = k_grid_for(&data, degree, grid_scale)?;
            let cv = select_k(&data, degree, &grid, folds, &ModelSpec::default_for(model), seed)?;
            println!("K,mean_cv_error");
            for (k, e) in cv.candidates.iter().zip(&cv.mean_errors) {
                println!("{k},{e:.6}");
            }
            println!("chosen K = {} ({} folds)", cv.chosen_k, cv.folds);
        }
        Command::Train {
            train,
            model,
            degrees,
            folds,
            seed,
            grid_scale,
            member_models,
            out,
        } => {
            let (data, rule) = load_train(&train, delim, cli.multiclass)?;
            let mut config = FvcConfig::new(ModelSpec::default_for(model));
            config.degrees = degrees;
            config.folds = folds;
            config.seed = seed;
            config.grid_scale = grid_scale;
            config.member_models = member_models.map(|kinds| kinds.into_iter().map(ModelSpec::default_for).collect());
            let mut fvc = train_fvc(&data, &config)?;
            if let Some(rule) = rule {
                fvc = fvc.with_binarizer(rule);
            }
            fvc.save(&out)?;
            for m in fvc.members() {
                println!("{}: K = {}", m.label(), m.spec.num_basis());
            }
            println!("model written to {}", out.display());
        }
        Command::Predict { model, test, out } => {
            let fvc = FvcModel::load(&model)?;
            let data = load_test(&fvc, &test, delim)?;
            let f = fvc.predict_matrix(&data)?;
            let vote = majority_vote(&f, fvc.num_classes())?;
            let mut body = String::from("row");
            for m in f.members() {
                body.push_str(&format!(",{m}"));
            }
            body.push_str(",FVC\n");
            for (i, row) in f.entries().rows().into_iter().enumerate() {
                body.push_str(&i.to_string());
                for v in row {
                    body.push_str(&format!(",{v}"));
                }
                body.push_str(&format!(",{}\n", vote[i]));
            }
            write(&out, body)?;
            println!("{} predictions written to {}", vote.len(), out.display());
        }
        Command::Evaluate { model, test } => {
            let fvc = FvcModel::load(&model)?;
            let data = load_test(&fvc, &test, delim)?;
            let f = fvc.predict_matrix(&data)?;
            for o in 0..f.num_members() {
                let acc = evaluate_accuracy(&f.column(o), data.labels())?;
                println!("{}: {acc:.4}", f.members()[o]);
            }
            let vote = majority_vote(&f, fvc.num_classes())?;
            println!("FVC: {:.4}", evaluate_accuracy(&vote, data.labels())?);
        }
        Command::Diversity {
            model,
            test,
            metric,
            out,
        } => {
            let fvc = FvcModel::load(&model)?;
            let data = load_test(&fvc, &test, delim)?;
            let d = diversity_matrix(&fvc.predict_matrix(&data)?, metric)?;
            write(&out, d.to_csv())?;
            println!("mean off-diagonal distance: {:.4}", d.mean_off_diagonal);
        }
        Command::Bench {
            config,
            out_dir,
            workers,
        } => {
            let mut cfg = BenchConfig::load(&config)?;
            if out_dir.is_some() {
                cfg.output_dir = out_dir;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            let report = run_benchmark(&cfg)?;
            print!("{}", report.accuracy_csv());
            let failed = report.runs.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} run(s) failed; see the report for details");
            }
        }
        Command::ExportCurves {
            train,
            degrees,
            instance,
            num_basis,
            out_dir,
        } => {
            let data = load_ucr(&train, delim)?;
            let files = export_representations(&data, &degrees, instance, num_basis, &out_dir)?;
            for f in files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}

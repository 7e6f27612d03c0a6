//! Batch benchmark runner.
//!
//! A run loads each dataset, binarizes the labels with a rule fitted on the
//! training split, trains one ensemble per requested model type and scores
//! every member and the vote on the test split. Results go to a JSON report
//! plus CSV tables of accuracies, prediction matrices and diversity
//! matrices.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{fit_coefficients, BasisSpec};
use crate::classifiers::{BoostParams, ForestParams, KnnParams, ModelKind, ModelSpec, TreeParams};
use crate::data::{class_balance, load_ucr, Binarizer, Delimiter, LabeledDataset};
use crate::diversity::{diversity_matrix, DiversityMatrix, Metric};
use crate::ensemble::{majority_vote, train_fvc, FvcConfig, PredictionMatrix, DEFAULT_DEGREES};
use crate::error::{Error, Result};
use crate::seed::derive_seed_str;
use crate::selection::{k_grid, GridScale};

pub const REPORT_FORMAT: &str = "fnvote-bench";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
}

/// Hyperparameters replacing the defaults of each learner.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub tree: Option<TreeParams>,
    pub knn: Option<KnnParams>,
    pub forest: Option<ForestParams>,
    pub boost: Option<BoostParams>,
}

impl Overrides {
    pub fn spec_for(&self, kind: ModelKind) -> ModelSpec {
        match kind {
            ModelKind::Tree => ModelSpec::Tree(self.tree.unwrap_or_default()),
            ModelKind::Knn => ModelSpec::Knn(self.knn.unwrap_or_default()),
            ModelKind::Forest => ModelSpec::Forest(self.forest.unwrap_or_default()),
            ModelKind::Boost => ModelSpec::Boost(self.boost.unwrap_or_default()),
        }
    }
}

fn default_degrees() -> Vec<usize> {
    DEFAULT_DEGREES.to_vec()
}

fn default_folds() -> usize {
    10
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetEntry>,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
    pub models: Vec<ModelKind>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid_scale: GridScale,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Size of the worker pool; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub overrides: Overrides,
}

impl BenchConfig {
    pub fn new(datasets: Vec<DatasetEntry>, models: Vec<ModelKind>) -> Self {
        Self {
            datasets,
            degrees: default_degrees(),
            models,
            folds: default_folds(),
            seed: default_seed(),
            grid_scale: GridScale::Length,
            output_dir: None,
            workers: None,
            overrides: Overrides::default(),
        }
    }

    /// Reads a JSON config. Relative dataset paths are taken relative to the
    /// directory holding the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: BenchConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut config.datasets {
            if d.train.is_relative() {
                d.train = base.join(&d.train);
            }
            if d.test.is_relative() {
                d.test = base.join(&d.test);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets listed".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no model types listed".into()));
        }
        if self.degrees.is_empty() {
            return Err(Error::Config("no degrees listed".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for kind in ModelKind::ALL {
            match self.overrides.spec_for(kind) {
                ModelSpec::Tree(p) => p.validate(),
                ModelSpec::Knn(p) => p.validate(),
                ModelSpec::Forest(p) => p.tree.validate(),
                ModelSpec::Boost(p) => p.validate(),
            }
            .map_err(|e| Error::Config(format!("{kind} overrides: {e}")))?;
        }
        Ok(())
    }

    /// Seed of the run for one dataset and model type.
    pub fn run_seed(&self, dataset: &str, kind: ModelKind) -> u64 {
        derive_seed_str(derive_seed_str(self.seed, dataset), kind.as_str())
    }
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn evaluate_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Data("accuracy of an empty prediction set".into()));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Results of one ensemble on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub model: ModelKind,
    pub seed: u64,
    /// Set when the run failed; the remaining result fields are then empty.
    pub error: Option<String>,
    pub hyperparameters: ModelSpec,
    pub binarizer: Option<Binarizer>,
    pub train_balance: Vec<f64>,
    pub test_balance: Vec<f64>,
    pub degrees: Vec<usize>,
    pub selected_k: Vec<usize>,
    pub cv_errors: Vec<Vec<f64>>,
    pub member_accuracy: Vec<f64>,
    pub fvc_accuracy: Option<f64>,
    pub diversity: Option<DiversityMatrix>,
    pub seconds: f64,
    #[serde(skip)]
    pub predictions: Option<PredictionMatrix>,
    #[serde(skip)]
    pub truth: Vec<usize>,
    #[serde(skip)]
    pub fvc_predictions: Vec<usize>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn file_stem(&self) -> String {
        let safe: String = self
            .dataset
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        format!("{safe}_{}", self.model)
    }

    /// Test labels, member predictions and the vote, one row per test curve.
    pub fn predictions_csv(&self) -> Option<String> {
        let f = self.predictions.as_ref()?;
        let mut out = String::from("truth");
        for m in f.members() {
            out.push(',');
            out.push_str(m);
        }
        out.push_str(",FVC\n");
        for (i, row) in f.entries().rows().into_iter().enumerate() {
            out.push_str(&self.truth[i].to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push(',');
            out.push_str(&self.fvc_predictions[i].to_string());
            out.push('\n');
        }
        Some(out)
    }
}

/// Settings that affect how a benchmark runs but not what it computes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub format: String,
    pub version: u32,
    /// The config that produced the report, without execution settings.
    pub config: BenchConfig,
    pub execution: Execution,
    pub runs: Vec<RunRecord>,
}

impl BenchReport {
    /// Copy with timing and execution settings cleared, for comparing runs.
    pub fn canonical(&self) -> Self {
        let mut out = self.clone();
        out.execution = Execution::default();
        for r in &mut out.runs {
            r.seconds = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("serializing report: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("reading report: {e}")))
    }

    pub fn run(&self, dataset: &str, model: ModelKind) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.dataset == dataset && r.model == model)
    }

    /// Table with columns `dataset, model, B<p>…, FVC`; failed runs leave
    /// the accuracy cells empty.
    pub fn accuracy_csv(&self) -> String {
        let mut out = String::from("dataset,model");
        for d in &self.config.degrees {
            out.push_str(&format!(",B{d}"));
        }
        out.push_str(",FVC\n");
        for r in &self.runs {
            out.push_str(&format!("{},{}", r.dataset, r.model));
            if r.is_ok() {
                for a in &r.member_accuracy {
                    out.push_str(&format!(",{a:.4}"));
                }
                out.push_str(&format!(",{:.4}", r.fvc_accuracy.unwrap_or(f64::NAN)));
            } else {
                for _ in 0..=self.config.degrees.len() {
                    out.push(',');
                }
            }
            out.push('\n');
        }
        out
    }

    /// Writes `report.json`, `accuracy.csv` and per-run prediction and
    /// diversity tables into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        put("report.json", self.to_json()?)?;
        put("accuracy.csv", self.accuracy_csv())?;
        for r in &self.runs {
            if let Some(csv) = r.predictions_csv() {
                put(&format!("{}_predictions.csv", r.file_stem()), csv)?;
            }
            if let Some(d) = &r.diversity {
                put(&format!("{}_diversity.csv", r.file_stem()), d.to_csv())?;
            }
        }
        Ok(())
    }
}

struct Prepared {
    train: LabeledDataset,
    test: LabeledDataset,
    rule: Binarizer,
}

fn prepare(entry: &DatasetEntry) -> Result<Prepared> {
    let train = load_ucr(&entry.train, Delimiter::Auto)?;
    let test = load_ucr(&entry.test, Delimiter::Auto)?;
    let rule = Binarizer::fit(&train.raw_labels())?;
    Ok(Prepared {
        train: rule.apply(&train),
        test: rule.apply(&test),
        rule,
    })
}

fn empty_record(config: &BenchConfig, name: &str, kind: ModelKind) -> RunRecord {
    RunRecord {
        dataset: name.to_string(),
        model: kind,
        seed: config.run_seed(name, kind),
        error: None,
        hyperparameters: config.overrides.spec_for(kind),
        binarizer: None,
        train_balance: Vec::new(),
        test_balance: Vec::new(),
        degrees: config.degrees.clone(),
        selected_k: Vec::new(),
        cv_errors: Vec::new(),
        member_accuracy: Vec::new(),
        fvc_accuracy: None,
        diversity: None,
        seconds: 0.0,
        predictions: None,
        truth: Vec::new(),
        fvc_predictions: Vec::new(),
    }
}

fn run_one(config: &BenchConfig, data: &Prepared, record: &mut RunRecord) -> Result<()> {
    record.binarizer = Some(data.rule.clone());
    record.train_balance = class_balance(&data.train)?;
    record.test_balance = class_balance(&data.test)?;

    let fvc = FvcConfig {
        degrees: config.degrees.clone(),
        model: record.hyperparameters.clone(),
        member_models: None,
        folds: config.folds,
        seed: record.seed,
        grid_scale: config.grid_scale,
        num_basis: None,
    };
    let model = train_fvc(&data.train, &fvc)?.with_binarizer(data.rule.clone());
    record.selected_k = model.selected_k();
    record.cv_errors = model
        .members()
        .iter()
        .map(|m| m.cv.as_ref().map(|c| c.mean_errors.clone()).unwrap_or_default())
        .collect();

    let f = model.predict_matrix(&data.test)?;
    let truth = data.test.labels().to_vec();
    record.member_accuracy = (0..f.num_members())
        .map(|o| evaluate_accuracy(&f.column(o), &truth))
        .collect::<Result<_>>()?;
    let vote = majority_vote(&f, model.num_classes())?;
    record.fvc_accuracy = Some(evaluate_accuracy(&vote, &truth)?);
    record.diversity = Some(diversity_matrix(&f, Metric::Jaccard)?);
    record.predictions = Some(f);
    record.truth = truth;
    record.fvc_predictions = vote;
    Ok(())
}

/// Runs every (dataset, model) pair. Failures of one pair are recorded in
/// its entry and do not stop the others; invalid configs abort up front.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Internal(format!("creating worker pool: {e}")))?;
    let started = Instant::now();

    let runs = pool.install(|| {
        let prepared: Vec<std::result::Result<Prepared, String>> = config
            .datasets
            .par_iter()
            .map(|d| prepare(d).map_err(|e| e.to_string()))
            .collect();
        let jobs: Vec<(usize, ModelKind)> = (0..config.datasets.len())
            .flat_map(|d| config.models.iter().map(move |&m| (d, m)))
            .collect();
        jobs.par_iter()
            .map(|&(d, kind)| {
                let name = &config.datasets[d].name;
                let mut record = empty_record(config, name, kind);
                let t0 = Instant::now();
                let outcome = match &prepared[d] {
                    Ok(data) => run_one(config, data, &mut record).map_err(|e| e.to_string()),
                    Err(msg) => Err(msg.clone()),
                };
                if let Err(msg) = outcome {
                    log::error!("{name} / {kind}: {msg}");
                    let mut failed = empty_record(config, name, kind);
                    failed.error = Some(msg);
                    record = failed;
                } else {
                    log::info!(
                        "{name} / {kind}: FVC accuracy {:.4}, K = {:?}",
                        record.fvc_accuracy.unwrap_or(f64::NAN),
                        record.selected_k
                    );
                }
                record.seconds = t0.elapsed().as_secs_f64();
                record
            })
            .collect::<Vec<_>>()
    });

    let mut echo = config.clone();
    echo.workers = None;
    echo.output_dir = None;
    let report = BenchReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        config: echo,
        execution: Execution {
            workers: config.workers,
            output_dir: config.output_dir.clone(),
            total_seconds: started.elapsed().as_secs_f64(),
        },
        runs,
    };
    if let Some(dir) = &config.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// Number of basis functions used for curve exports when none is given:
/// the middle candidate of the cross-validation grid.
pub fn default_export_k(series_length: usize, degree: usize) -> Result<usize> {
    let grid = k_grid(series_length, degree)?;
    let c = grid.candidates();
    Ok(c[(c.len() - 1) / 2])
}

/// Writes the raw points of one instance and its fitted curve under each
/// degree, sampled at `10·P` evenly spaced points. Returns the files in the
/// order raw, then one per degree.
pub fn export_representations(
    dataset: &LabeledDataset,
    degrees: &[usize],
    instance: usize,
    num_basis: Option<usize>,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    let series = dataset.series().get(instance).ok_or_else(|| {
        Error::Data(format!("instance {instance} out of range (dataset has {} rows)", dataset.len()))
    })?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut files = Vec::with_capacity(degrees.len() + 1);
    let raw_path = out_dir.join("raw.csv");
    let mut raw = String::from("t,value\n");
    for (t, y) in series.grid().iter().zip(series.values()) {
        raw.push_str(&format!("{t},{y}\n"));
    }
    fs::write(&raw_path, raw).map_err(|e| Error::io(&raw_path, e))?;
    files.push(raw_path);

    let (a, b) = series.domain();
    let p = series.len();
    let dense = 10 * p;
    let ts: Vec<f64> = (0..dense)
        .map(|i| if i + 1 == dense { b } else { a + (b - a) * i as f64 / (dense - 1) as f64 })
        .collect();
    for &degree in degrees {
        let k = match num_basis {
            Some(k) => k,
            None => default_export_k(p, degree)?,
        };
        let spec = BasisSpec::clamped_uniform((a, b), k, degree)?;
        let (coefs, _) = fit_coefficients(series, &spec)?;
        let mut body = String::from("t,value\n");
        for &t in &ts {
            body.push_str(&format!("{t},{}\n", spec.eval_spline(&coefs, t)?));
        }
        let path = out_dir.join(format!("curve_B{degree}.csv"));
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(evaluate_accuracy(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(evaluate_accuracy(&[0, 1], &[1, 0]).unwrap(), 0.0);
        assert_eq!(evaluate_accuracy(&[1, 1, 0, 1], &[1, 1, 0, 0]).unwrap(), 0.75);
        assert!(matches!(evaluate_accuracy(&[], &[]), Err(Error::Data(_))));
        assert!(matches!(evaluate_accuracy(&[1], &[1, 0]), Err(Error::Shape(_))));
    }

    #[test]
    fn config_rejects_unknown_keys_and_fills_defaults() {
        let ok = r#"{"datasets":[{"name":"a","train":"a.tsv","test":"b.tsv"}],"models":["tree"]}"#;
        let cfg: BenchConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.degrees, vec![3, 5, 7, 9, 11]);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.grid_scale, GridScale::Length);
        let bad = r#"{"datasets":[],"models":["tree"],"colour":1}"#;
        assert!(serde_json::from_str::<BenchConfig>(bad).is_err());
        let empty: BenchConfig = serde_json::from_str(r#"{"datasets":[],"models":["tree"]}"#).unwrap();
        assert!(matches!(empty.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn run_seeds_depend_on_dataset_and_model() {
        let cfg = BenchConfig::new(Vec::new(), vec![ModelKind::Tree]);
        assert_ne!(cfg.run_seed("a", ModelKind::Tree), cfg.run_seed("b", ModelKind::Tree));
        assert_ne!(cfg.run_seed("a", ModelKind::Tree), cfg.run_seed("a", ModelKind::Knn));
        assert_eq!(cfg.run_seed("a", ModelKind::Tree), cfg.run_seed("a", ModelKind::Tree));
    }

    #[test]
    fn export_k_is_middle_of_grid() {
        assert_eq!(default_export_k(500, 3).unwrap(), 125);
        assert_eq!(default_export_k(150, 11).unwrap(), 37);
    }
}

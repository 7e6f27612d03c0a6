//! The voting ensemble: one base model per B-spline degree, combined by
//! hard majority vote.
//!
//! Every member keeps its own basis. At prediction time each test curve is
//! smoothed once per member, the member predicts on those coefficients, and
//! the resulting `M × O` prediction matrix is reduced row by row.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{smooth_dataset, BasisSpec};
use crate::classifiers::{BaseModel, ModelSpec};
use crate::data::{Binarizer, LabeledDataset};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::selection::{k_grid_for, select_k, CvResult, GridScale};

pub const DEFAULT_DEGREES: [usize; 5] = [3, 5, 7, 9, 11];

pub const ARCHIVE_FORMAT: &str = "fnvote-fvc";
pub const ARCHIVE_VERSION: u32 = 1;

/// How to build an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvcConfig {
    pub degrees: Vec<usize>,
    /// Base learner shared by all members.
    pub model: ModelSpec,
    /// One learner per degree, overriding `model` when present.
    pub member_models: Option<Vec<ModelSpec>>,
    pub folds: usize,
    pub seed: u64,
    pub grid_scale: GridScale,
    /// Fixed `K` per degree; skips cross-validation when present.
    pub num_basis: Option<Vec<usize>>,
}

impl FvcConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            degrees: DEFAULT_DEGREES.to_vec(),
            model,
            member_models: None,
            folds: 10,
            seed: 42,
            grid_scale: GridScale::Length,
            num_basis: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::Config("an ensemble needs at least one degree".into()));
        }
        let o = self.degrees.len();
        if let Some(m) = &self.member_models {
            if m.len() != o {
                return Err(Error::Config(format!("{} member models for {o} degrees", m.len())));
            }
        }
        if let Some(k) = &self.num_basis {
            if k.len() != o {
                return Err(Error::Config(format!("{} fixed K values for {o} degrees", k.len())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub degree: usize,
    pub spec: BasisSpec,
    /// Cross-validation record; absent when `K` was fixed by the caller.
    pub cv: Option<CvResult>,
    pub model: BaseModel,
}

impl Member {
    /// Column label such as `B3`.
    pub fn label(&self) -> String {
        format!("B{}", self.degree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvcModel {
    format: String,
    version: u32,
    members: Vec<Member>,
    num_classes: usize,
    /// Raw label value of each class code.
    classes: Vec<i64>,
    series_length: usize,
    /// Rule that produced the training labels, re-applied to test files.
    binarizer: Option<Binarizer>,
}

/// Member predictions, one row per test curve and one column per member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMatrix {
    entries: Array2<usize>,
    members: Vec<String>,
}

impl PredictionMatrix {
    pub fn new(entries: Array2<usize>, members: Vec<String>) -> Result<Self> {
        if entries.ncols() != members.len() {
            return Err(Error::Shape(format!(
                "{} columns but {} member labels",
                entries.ncols(),
                members.len()
            )));
        }
        Ok(Self { entries, members })
    }

    /// Matrix with columns `B0, B1, …` for quick experiments.
    pub fn from_entries(entries: Array2<usize>) -> Self {
        let members = (0..entries.ncols()).map(|o| format!("B{o}")).collect();
        Self { entries, members }
    }

    pub fn entries(&self) -> &Array2<usize> {
        &self.entries
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn num_rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_members(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column(&self, o: usize) -> Vec<usize> {
        self.entries.column(o).to_vec()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.members.join(",");
        out.push('\n');
        for row in self.entries.rows() {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Winning label of one row of votes, lowest label on ties.
pub fn vote_row(votes: impl IntoIterator<Item = usize>, num_classes: usize) -> usize {
    let mut counts = vec![0usize; num_classes];
    for v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for u in 1..num_classes {
        if counts[u] > counts[best] {
            best = u;
        }
    }
    best
}

pub fn majority_vote(f: &PredictionMatrix, num_classes: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = f.entries.iter().find(|&&v| v >= num_classes) {
        return Err(Error::Label(format!("prediction {bad} outside 0..{num_classes}")));
    }
    Ok(f.entries
        .rows()
        .into_iter()
        .map(|row| vote_row(row.iter().copied(), num_classes))
        .collect())
}

/// Fits one member per degree. Each member draws its randomness from a
/// seed derived from `(config.seed, degree)`.
pub fn train_fvc(train: &LabeledDataset, config: &FvcConfig) -> Result<FvcModel> {
    config.validate()?;
    let series_length = train
        .series_length()
        .ok_or_else(|| Error::Data("cannot train on an empty dataset".into()))?;
    let domain = train.domain().expect("non-empty");
    let num_classes = train.num_classes();
    if train.class_counts().contains(&0) {
        return Err(Error::Data("every class must appear in the training set".into()));
    }

    let members = config
        .degrees
        .par_iter()
        .enumerate()
        .map(|(o, &degree)| {
            let seed = derive_seed(config.seed, degree as u64);
            let spec_model = config.member_models.as_ref().map_or(&config.model, |m| &m[o]);
            let model = spec_model.with_seed(seed);
            let build = || -> Result<Member> {
                let (k, cv) = match &config.num_basis {
                    Some(ks) => (ks[o], None),
                    None => {
                        let grid = k_grid_for(train, degree, config.grid_scale)?;
                        let cv = select_k(train, degree, &grid, config.folds, &model, seed)?;
                        (cv.chosen_k, Some(cv))
                    }
                };
                let spec = BasisSpec::clamped_uniform(domain, k, degree)?;
                let coefs = smooth_dataset(train, &spec)?;
                let fitted = model.fit(coefs.entries().view(), train.labels(), num_classes)?;
                log::info!("member B{degree}: K = {k}, model = {}", fitted.kind());
                Ok(Member {
                    degree,
                    spec,
                    cv,
                    model: fitted,
                })
            };
            build().map_err(|e| e.in_member(degree))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FvcModel {
        format: ARCHIVE_FORMAT.into(),
        version: ARCHIVE_VERSION,
        members,
        num_classes,
        classes: train.classes().to_vec(),
        series_length,
        binarizer: None,
    })
}

impl FvcModel {
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.degree).collect()
    }

    pub fn selected_k(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.spec.num_basis()).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn binarizer(&self) -> Option<&Binarizer> {
        self.binarizer.as_ref()
    }

    /// Records the rule used to binarize the training labels so that test
    /// files can be mapped the same way.
    pub fn with_binarizer(mut self, rule: Binarizer) -> Self {
        self.binarizer = Some(rule);
        self
    }

    /// Maps the raw labels of a freshly loaded test file onto this model's
    /// class codes.
    pub fn encode_test(&self, raw: &LabeledDataset) -> Result<LabeledDataset> {
        if let Some(rule) = &self.binarizer {
            return Ok(rule.apply(raw));
        }
        let labels = raw
            .raw_labels()
            .into_iter()
            .map(|r| {
                self.classes
                    .iter()
                    .position(|&c| c == r)
                    .ok_or_else(|| Error::Label(format!("test label {r} was not seen in training")))
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::with_classes(raw.series().to_vec(), labels, self.classes.clone())
    }

    /// Every member's predictions on `test`, each from its own smoothing.
    pub fn predict_matrix(&self, test: &LabeledDataset) -> Result<PredictionMatrix> {
        let labels: Vec<String> = self.members.iter().map(Member::label).collect();
        let m = test.len();
        if m == 0 {
            return PredictionMatrix::new(Array2::zeros((0, self.members.len())), labels);
        }
        if let Some(p) = test.series_length() {
            if p != self.series_length {
                return Err(Error::Shape(format!(
                    "test series have length {p}, model was trained on length {}",
                    self.series_length
                )));
            }
        }
        let columns = self
            .members
            .par_iter()
            .map(|member| {
                let coefs = smooth_dataset(test, &member.spec).map_err(|e| e.in_member(member.degree))?;
                member
                    .model
                    .predict(coefs.entries().view())
                    .map_err(|e| e.in_member(member.degree))
            })
            .collect::<Result<Vec<_>>>()?;
        let entries = Array2::from_shape_fn((m, columns.len()), |(i, o)| columns[o][i]);
        PredictionMatrix::new(entries, labels)
    }

    pub fn predict(&self, test: &LabeledDataset) -> Result<Vec<usize>> {
        majority_vote(&self.predict_matrix(test)?, self.num_classes)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Internal(format!("serializing model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Archive(format!("not a JSON document: {e}")))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(ARCHIVE_FORMAT) => {}
            other => {
                return Err(Error::Archive(format!(
                    "format tag {other:?}, expected {ARCHIVE_FORMAT:?}"
                )))
            }
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(ARCHIVE_VERSION) => {}
            other => {
                return Err(Error::Archive(format!(
                    "unsupported archive version {other:?}, expected {ARCHIVE_VERSION}"
                )))
            }
        }
        let model: FvcModel = serde_json::from_value(value).map_err(|e| Error::Archive(e.to_string()))?;
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Archive("archive holds no members".into()));
        }
        if self.classes.len() != self.num_classes {
            return Err(Error::Archive("class table does not match class count".into()));
        }
        for m in &self.members {
            let rebuilt = BasisSpec::from_knots(m.spec.degree(), m.spec.knots().to_vec())
                .map_err(|e| Error::Archive(format!("member B{}: {e}", m.degree)))?;
            if rebuilt != m.spec || m.spec.degree() != m.degree {
                return Err(Error::Archive(format!("member B{}: inconsistent basis", m.degree)));
            }
            if m.model.num_features() != m.spec.num_basis() {
                return Err(Error::Archive(format!(
                    "member B{}: model width {} differs from K = {}",
                    m.degree,
                    m.model.num_features(),
                    m.spec.num_basis()
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn predict_matrix(model: &FvcModel, test: &LabeledDataset) -> Result<PredictionMatrix> {
    model.predict_matrix(test)
}

pub fn fvc_predict(model: &FvcModel, test: &LabeledDataset) -> Result<Vec<usize>> {
    model.predict(test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::RawSeries;
    use crate::classifiers::ModelKind;
    use ndarray::array;

    fn toy(n: usize, p: usize) -> LabeledDataset {
        let series = (0..n)
            .map(|i| {
                let shift = if i % 2 == 0 { 0.0 } else { 1.5 };
                RawSeries::from_values((0..p).map(|t| shift + ((t * 7 + i * 3) % 5) as f64 * 0.1).collect()).unwrap()
            })
            .collect();
        LabeledDataset::new(series, (0..n).map(|i| i % 2).collect()).unwrap()
    }

    #[test]
    fn vote_examples() {
        let f = PredictionMatrix::from_entries(array![[1, 1, 0, 0, 1], [0, 0, 0, 0, 0]]);
        assert_eq!(majority_vote(&f, 2).unwrap(), vec![1, 0]);
        let f = PredictionMatrix::from_entries(array![[0, 0, 1, 1]]);
        assert_eq!(majority_vote(&f, 3).unwrap(), vec![0]);
        let f = PredictionMatrix::from_entries(array![[2, 1]]);
        assert!(matches!(majority_vote(&f, 2), Err(Error::Label(_))));
    }

    #[test]
    fn empty_test_set_gives_empty_matrix() {
        let train = toy(20, 30);
        let mut cfg = FvcConfig::new(ModelSpec::default_for(ModelKind::Tree));
        cfg.degrees = vec![3, 5];
        cfg.folds = 4;
        let model = train_fvc(&train, &cfg).unwrap();
        let f = model.predict_matrix(&LabeledDataset::empty()).unwrap();
        assert_eq!(f.entries().dim(), (0, 2));
        assert!(model.predict(&LabeledDataset::empty()).unwrap().is_empty());
    }

    #[test]
    fn single_member_matches_its_base_model() {
        let train = toy(20, 30);
        let mut cfg = FvcConfig::new(ModelSpec::default_for(ModelKind::Knn));
        cfg.degrees = vec![3];
        cfg.num_basis = Some(vec![6]);
        let model = train_fvc(&train, &cfg).unwrap();
        let coefs = smooth_dataset(&train, &model.members()[0].spec).unwrap();
        let base = model.members()[0].model.predict(coefs.entries().view()).unwrap();
        assert_eq!(model.predict(&train).unwrap(), base);
        assert!(model.members()[0].cv.is_none());
    }

    #[test]
    fn archive_round_trip_and_tag_checks() {
        let train = toy(16, 24);
        let mut cfg = FvcConfig::new(ModelSpec::default_for(ModelKind::Forest));
        cfg.degrees = vec![3, 5];
        cfg.num_basis = Some(vec![8, 10]);
        let model = train_fvc(&train, &cfg).unwrap();
        let json = model.to_json().unwrap();
        let back = FvcModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        let wrong_tag = json.replacen(ARCHIVE_FORMAT, "something-else", 1);
        assert!(matches!(FvcModel::from_json(&wrong_tag), Err(Error::Archive(_))));
        assert!(matches!(FvcModel::from_json("[1,2]"), Err(Error::Archive(_))));
    }

    #[test]
    fn mismatched_config_lengths_are_rejected() {
        let mut cfg = FvcConfig::new(ModelSpec::default_for(ModelKind::Tree));
        cfg.num_basis = Some(vec![6]);
        assert!(matches!(train_fvc(&toy(10, 20), &cfg), Err(Error::Config(_))));
        cfg.num_basis = None;
        cfg.degrees.clear();
        assert!(matches!(train_fvc(&toy(10, 20), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn member_errors_name_the_degree() {
        let mut cfg = FvcConfig::new(ModelSpec::default_for(ModelKind::Tree));
        cfg.degrees = vec![3, 11];
        cfg.num_basis = Some(vec![6, 6]);
        let err = train_fvc(&toy(10, 20), &cfg).unwrap_err();
        assert!(matches!(err, Error::Member { degree: 11, .. }), "{err}");
    }
}

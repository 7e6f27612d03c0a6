//! Voting ensembles over B-spline representations of time series.
//!
//! Each curve is smoothed by least squares onto clamped B-spline bases of
//! several degrees. A classifier is trained on the coefficients of each
//! basis and the members are combined by hard majority vote.
//!
//! ```no_run
//! use fnvote::classifiers::{ModelKind, ModelSpec};
//! use fnvote::data::{binarize, load_ucr, Delimiter};
//! use fnvote::ensemble::{train_fvc, FvcConfig};
//!
//! let train = binarize(&load_ucr("GunPoint_TRAIN.tsv", Delimiter::Auto)?)?;
//! let model = train_fvc(&train, &FvcConfig::new(ModelSpec::default_for(ModelKind::Tree)))?;
//! println!("selected K per degree: {:?}", model.selected_k());
//! # Ok::<(), fnvote::Error>(())
//! ```

pub mod basis;
pub mod bench;
pub mod classifiers;
pub mod data;
pub mod diversity;
pub mod ensemble;
pub mod error;
mod linfit;
pub mod seed;
pub mod selection;

pub use basis::{BasisSpec, CoefficientMatrix, FitDiagnostics, RawSeries};
pub use classifiers::{BaseModel, ModelKind, ModelSpec};
pub use data::LabeledDataset;
pub use diversity::DiversityMatrix;
pub use ensemble::{FvcConfig, FvcModel, PredictionMatrix};
pub use error::{Error, Result};

//! UCR-style labeled time-series datasets.
//!
//! Files hold one instance per line: the class label followed by the series
//! values, separated by tabs or commas (whitespace-separated files from
//! older archive releases are also accepted). Every series is placed on the
//! integer grid `0..P`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::RawSeries;
use crate::error::{Error, Result};

/// A set of curves with integer class codes `0..num_classes`.
///
/// `classes[code]` keeps the raw label value the code stands for, so a
/// dataset can be written back out with its original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    series: Vec<RawSeries>,
    labels: Vec<usize>,
    classes: Vec<i64>,
}

impl LabeledDataset {
    /// Dataset whose labels are already class codes; raw labels equal the codes.
    pub fn new(series: Vec<RawSeries>, labels: Vec<usize>) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let classes = (0..num_classes as i64).collect();
        Self::with_classes(series, labels, classes)
    }

    pub fn with_classes(series: Vec<RawSeries>, labels: Vec<usize>, classes: Vec<i64>) -> Result<Self> {
        if series.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::Label(format!(
                "label {l} outside 0..{}",
                classes.len()
            )));
        }
        Ok(Self {
            series,
            labels,
            classes,
        })
    }

    /// Encodes raw labels as codes in ascending order of raw value.
    pub fn from_raw(series: Vec<RawSeries>, raw_labels: &[i64]) -> Result<Self> {
        let classes: Vec<i64> = raw_labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let labels = raw_labels
            .iter()
            .map(|r| classes.binary_search(r).expect("label present"))
            .collect();
        Self::with_classes(series, labels, classes)
    }

    pub fn empty() -> Self {
        Self {
            series: Vec::new(),
            labels: Vec::new(),
            classes: Vec::new(),
        }
    }

    pub fn series(&self) -> &[RawSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn raw_labels(&self) -> Vec<i64> {
        self.labels.iter().map(|&l| self.classes[l]).collect()
    }

    /// Common series length, if the dataset is non-empty.
    pub fn series_length(&self) -> Option<usize> {
        self.series.first().map(RawSeries::len)
    }

    /// Union of the series domains.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.series.iter().map(RawSeries::domain).reduce(|(a0, b0), (a1, b1)| (a0.min(a1), b0.max(b1)))
    }

    /// Rows at `indices`, in that order, with the class table unchanged.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            series: indices.iter().map(|&i| self.series[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
        }
    }

    /// Instance counts per class code.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    /// Tab if the first line has one, else comma, else runs of whitespace.
    #[default]
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(first_line: &str) -> Self {
        if first_line.contains('\t') {
            Delimiter::Tab
        } else if first_line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self {
            Delimiter::Tab => Box::new(line.split('\t').map(str::trim)),
            Delimiter::Comma => Box::new(line.split(',').map(str::trim)),
            Delimiter::Whitespace | Delimiter::Auto => Box::new(line.split_whitespace()),
        }
    }

    fn as_char(self) -> char {
        match self {
            Delimiter::Comma => ',',
            Delimiter::Whitespace => ' ',
            Delimiter::Tab | Delimiter::Auto => '\t',
        }
    }
}

fn parse_label(token: &str) -> Option<i64> {
    if let Ok(v) = token.parse::<i64>() {
        return Some(v);
    }
    // older archive exports write labels as floats, e.g. "2.0000000e+00"
    let v: f64 = token.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

/// Parses UCR text from memory. `origin` only labels error messages.
pub fn parse_ucr(text: &str, delimiter: Delimiter, origin: &Path) -> Result<LabeledDataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::Data(format!("{}: file contains no instances", origin.display())));
    };
    let delim = match delimiter {
        Delimiter::Auto => Delimiter::detect(first),
        d => d,
    };

    let mut series = Vec::with_capacity(lines.len());
    let mut raw_labels = Vec::with_capacity(lines.len());
    let mut width = None;
    for (lineno, line) in lines {
        let mut tokens = delim.split(line);
        let label_tok = tokens.next().unwrap_or("");
        let label = parse_label(label_tok).ok_or_else(|| {
            let hint = if lineno == 1 { " (header lines are not supported)" } else { "" };
            parse_err(lineno, format!("invalid class label {label_tok:?}{hint}"))
        })?;
        let values = tokens
            .enumerate()
            .map(|(j, tok)| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(lineno, format!("non-numeric value {tok:?} in column {}", j + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(parse_err(
                    lineno,
                    format!("row has {} values, expected {w} as on the first row", values.len()),
                ))
            }
            _ => {}
        }
        let s = RawSeries::from_values(values).map_err(|e| parse_err(lineno, e.to_string()))?;
        series.push(s);
        raw_labels.push(label);
    }
    LabeledDataset::from_raw(series, &raw_labels)
}

pub fn load_ucr(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ucr(&text, delimiter, path)
}

/// Writes `dataset` in UCR layout with its raw labels. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_ucr(dataset: &LabeledDataset, path: impl AsRef<Path>, delimiter: Delimiter) -> Result<()> {
    let path = path.as_ref();
    let sep = delimiter.as_char();
    let mut out = String::new();
    for (s, raw) in dataset.series().iter().zip(dataset.raw_labels()) {
        write!(out, "{raw}").unwrap();
        for v in s.values() {
            write!(out, "{sep}{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Rule mapping raw labels onto the two classes `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Binarizer {
    /// Two raw labels: the smaller becomes 0, the larger 1.
    Order { negative: i64, positive: i64 },
    /// Raw 0 becomes 0, every other label 1.
    ZeroVsRest,
    /// Multi-class sets without a 0 label: `positive` becomes 1, the rest 0.
    /// With `positive` the second-smallest raw label this yields the class
    /// balances of the published UCR benchmark splits.
    OneVsRest { positive: i64 },
}

impl Binarizer {
    /// Chooses the rule from the distinct raw labels of a training set.
    pub fn fit(raw_classes: &[i64]) -> Result<Self> {
        let distinct: Vec<i64> = raw_classes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        match distinct.as_slice() {
            [] | [_] => Err(Error::Data(format!(
                "binarization needs at least two distinct labels, found {distinct:?}"
            ))),
            &[negative, positive] => Ok(Binarizer::Order { negative, positive }),
            d if d.contains(&0) => Ok(Binarizer::ZeroVsRest),
            d => Ok(Binarizer::OneVsRest { positive: d[1] }),
        }
    }

    pub fn map(&self, raw: i64) -> usize {
        match *self {
            Binarizer::Order { positive, .. } | Binarizer::OneVsRest { positive } => usize::from(raw == positive),
            Binarizer::ZeroVsRest => usize::from(raw != 0),
        }
    }

    /// Applies the rule; the result always has the class table `[0, 1]`.
    pub fn apply(&self, dataset: &LabeledDataset) -> LabeledDataset {
        let labels = dataset.raw_labels().into_iter().map(|r| self.map(r)).collect();
        LabeledDataset {
            series: dataset.series.clone(),
            labels,
            classes: vec![0, 1],
        }
    }
}

/// Two-class version of `dataset` using the rule fitted on its own labels.
pub fn binarize(dataset: &LabeledDataset) -> Result<LabeledDataset> {
    let present: Vec<i64> = dataset.raw_labels();
    let rule = Binarizer::fit(&present)?;
    let out = rule.apply(dataset);
    Ok(out)
}

/// Fraction of instances in each class, ordered by class code.
pub fn class_balance(dataset: &LabeledDataset) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::Data("class balance of an empty dataset".into()));
    }
    let n = dataset.len() as f64;
    Ok(dataset.class_counts().into_iter().map(|c| c as f64 / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        parse_ucr(text, Delimiter::Auto, Path::new("mem"))
    }

    fn toy(raw: &[i64]) -> LabeledDataset {
        let series = raw.iter().map(|_| RawSeries::from_values(vec![0.0, 1.0]).unwrap()).collect();
        LabeledDataset::from_raw(series, raw).unwrap()
    }

    #[test]
    fn parses_tab_line() {
        let ds = parse("2\t0.1\t0.2\t0.3\n").unwrap();
        assert_eq!(ds.raw_labels(), vec![2]);
        assert_eq!(ds.series()[0].values(), &[0.1, 0.2, 0.3]);
        assert_eq!(ds.series()[0].grid(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn parses_comma_and_float_labels() {
        let ds = parse("1.0000000e+00,1,2\n-1,3,4\n").unwrap();
        assert_eq!(ds.raw_labels(), vec![1, -1]);
        assert_eq!(ds.classes(), &[-1, 1]);
        assert_eq!(ds.labels(), &[1, 0]);
        let ws = parse("  2.0e+00  1.5  2.5\n 1 0 0\n").unwrap();
        assert_eq!(ws.raw_labels(), vec![2, 1]);
    }

    #[test]
    fn ragged_rows_name_the_line() {
        let err = parse("1\t1\t2\n0\t1\t2\n1\t3\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn header_and_garbage_rejected() {
        let err = parse("label,t0,t1\n1,2,3\n").unwrap_err();
        assert!(err.to_string().contains("header"));
        assert!(matches!(parse("1,2,x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("1.5,2,3\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse(""), Err(Error::Data(_))));
        assert!(matches!(parse("\n\n"), Err(Error::Data(_))));
    }

    #[test]
    fn binarize_non_zero_rule() {
        let b = binarize(&toy(&[0, 1, 2, 5])).unwrap();
        assert_eq!(b.labels(), &[0, 1, 1, 1]);
        assert_eq!(b.num_classes(), 2);
    }

    #[test]
    fn binarize_two_class_by_order() {
        let b = binarize(&toy(&[1, -1, -1, 1])).unwrap();
        assert_eq!(b.labels(), &[1, 0, 0, 1]);
    }

    #[test]
    fn binarize_multiclass_without_zero() {
        let b = binarize(&toy(&[1, 2, 3, 2, 1])).unwrap();
        assert_eq!(b.labels(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn binarize_single_class_fails() {
        assert!(matches!(binarize(&toy(&[7, 7])), Err(Error::Data(_))));
    }

    #[test]
    fn binarize_is_idempotent() {
        for raw in [&[0, 1, 2, 5][..], &[-1, 1, 1], &[3, 1, 2, 2]] {
            let once = binarize(&toy(raw)).unwrap();
            assert_eq!(binarize(&once).unwrap(), once);
        }
    }

    #[test]
    fn balance_sums_to_one() {
        let bal = class_balance(&toy(&[0, 1, 1, 0])).unwrap();
        assert_eq!(bal, vec![0.5, 0.5]);
        let bal = class_balance(&toy(&[0, 1, 2, 2, 2, 1, 0])).unwrap();
        assert!((bal.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(class_balance(&LabeledDataset::empty()).is_err());
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        let ds = parse("-1\t0.1\t-2.5e-7\t3.141592653589793\n1\t1e300\t0\t-0.3333333333333333\n").unwrap();
        write_ucr(&ds, &path, Delimiter::Tab).unwrap();
        let back = load_ucr(&path, Delimiter::Auto).unwrap();
        assert_eq!(back, ds);
    }
}

//! Clamped B-spline bases and least-squares smoothing of discrete curves.
//!
//! A [`BasisSpec`] fixes a degree `p`, a number of basis functions `K` and a
//! knot vector of length `K + p + 1` whose first and last `p + 1` entries sit
//! on the domain endpoints. Basis functions are evaluated with the
//! Cox-de Boor recursion in its triangular (non-recursive) form, so only the
//! `p + 1` functions that are non-zero at a point are ever computed.
//!
//! The half-open support intervals of the recursion leave the right endpoint
//! uncovered; here the final non-empty knot interval is treated as closed, so
//! the basis is a partition of unity on the whole closed domain `[a, b]` and
//! the last basis function equals 1 at `t = b`.
//!
//! Basis indices are zero-based throughout the API: `k` ranges over
//! `0..num_basis`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linfit::{BandCholesky, SymBand};

/// Ridge added to the normal equations when they are rank deficient.
pub const RIDGE_JITTER: f64 = 1e-10;

/// Relative pivot floor below which the Gram matrix is treated as singular.
const PIVOT_REL_TOL: f64 = 1e-12;

/// A discretely observed curve: values on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl RawSeries {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Shape(format!(
                "grid has {} points but series has {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::Data(format!(
                "a series needs at least 2 points, got {}",
                grid.len()
            )));
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Data("non-finite grid point".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data("grid must be strictly increasing".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at position {j}")));
        }
        Ok(Self { grid, values })
    }

    /// A series observed at the integer grid `0, 1, ..., P - 1`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let grid = (0..values.len()).map(|j| j as f64).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `[min(grid), max(grid)]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
}

/// Clamped-uniform knot vector: both endpoints repeated `degree + 1` times
/// and `num_basis - degree - 1` equally spaced interior knots.
pub fn make_knots(domain: (f64, f64), num_basis: usize, degree: usize) -> Result<Vec<f64>> {
    let (a, b) = domain;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidDomain { a, b });
    }
    if num_basis < degree + 1 {
        return Err(Error::InvalidSpec(format!(
            "num_basis {num_basis} is below degree + 1 = {}",
            degree + 1
        )));
    }
    let interior = num_basis - degree - 1;
    let mut knots = Vec::with_capacity(num_basis + degree + 1);
    knots.extend(std::iter::repeat_n(a, degree + 1));
    let step = (b - a) / (interior + 1) as f64;
    knots.extend((1..=interior).map(|j| a + step * j as f64));
    knots.extend(std::iter::repeat_n(b, degree + 1));
    Ok(knots)
}

/// A B-spline basis on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    degree: usize,
    num_basis: usize,
    knots: Vec<f64>,
    domain: (f64, f64),
}

impl BasisSpec {
    /// Basis with clamped uniform knots over `domain`.
    pub fn clamped_uniform(domain: (f64, f64), num_basis: usize, degree: usize) -> Result<Self> {
        let knots = make_knots(domain, num_basis, degree)?;
        Ok(Self {
            degree,
            num_basis,
            knots,
            domain,
        })
    }

    /// Basis from an explicit clamped knot vector. The domain is taken from
    /// the first and last knots.
    pub fn from_knots(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidSpec(format!(
                "a degree-{degree} basis needs at least {} knots, got {}",
                2 * (degree + 1),
                knots.len()
            )));
        }
        let a = knots[0];
        let b = knots[knots.len() - 1];
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidDomain { a, b });
        }
        let num_basis = knots.len() - degree - 1;
        let n = knots.len();
        if knots[..=degree].iter().any(|&t| t != a) || knots[n - degree - 1..].iter().any(|&t| t != b) {
            return Err(Error::InvalidSpec(format!(
                "knot vector is not clamped: endpoints must repeat {} times",
                degree + 1
            )));
        }
        let interior = &knots[degree + 1..n - degree - 1];
        if interior.iter().any(|&t| !(t > a && t < b)) {
            return Err(Error::InvalidSpec("interior knots must lie strictly inside the domain".into()));
        }
        if interior.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpec("knots must be non-decreasing".into()));
        }
        Ok(Self {
            degree,
            num_basis,
            knots,
            domain: (a, b),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain;
        if t >= a && t <= b {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, a, b })
        }
    }

    /// Index `i` of the knot interval `[knots[i], knots[i+1])` containing
    /// `t`, with `degree <= i < num_basis`. `t = b` maps to the last
    /// non-empty interval.
    fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.num_basis;
        if t >= self.knots[n] {
            return n - 1;
        }
        // largest i in [p, n-1] with knots[i] <= t
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Values of the `degree + 1` basis functions that can be non-zero at
    /// `t`, together with the index of the first one. Caller guarantees `t`
    /// lies in the domain.
    fn nonzero_basis(&self, t: f64, out: &mut [f64]) -> usize {
        let p = self.degree;
        let span = self.find_span(t);
        let knots = &self.knots;
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = t - knots[span + 1 - j];
            right[j] = knots[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
        span - p
    }

    /// `B_k(t)` for zero-based `k`.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        if k >= self.num_basis {
            return Err(Error::IndexOutOfRange {
                index: k,
                num_basis: self.num_basis,
            });
        }
        self.check_domain(t)?;
        let mut vals = vec![0.0; self.degree + 1];
        let first = self.nonzero_basis(t, &mut vals);
        Ok(if k >= first && k <= first + self.degree {
            vals[k - first]
        } else {
            0.0
        })
    }

    /// Dense `P × K` design matrix with entry `(j, k) = B_k(grid[j])`.
    pub fn basis_matrix(&self, grid: &[f64]) -> Result<Array2<f64>> {
        let rows = self.sparse_rows(grid)?;
        let mut m = Array2::zeros((grid.len(), self.num_basis));
        for (j, (first, vals)) in rows.iter().enumerate() {
            for (r, v) in vals.iter().enumerate() {
                m[[j, first + r]] = *v;
            }
        }
        Ok(m)
    }

    fn sparse_rows(&self, grid: &[f64]) -> Result<Vec<(usize, Vec<f64>)>> {
        grid.iter()
            .map(|&t| {
                self.check_domain(t)?;
                let mut vals = vec![0.0; self.degree + 1];
                let first = self.nonzero_basis(t, &mut vals);
                Ok((first, vals))
            })
            .collect()
    }

    /// `S(t) = Σ_k c_k B_k(t)`.
    pub fn eval_spline(&self, coefficients: &[f64], t: f64) -> Result<f64> {
        if coefficients.len() != self.num_basis {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                self.num_basis,
                coefficients.len()
            )));
        }
        self.check_domain(t)?;
        let mut vals = vec![0.0; self.degree + 1];
        let first = self.nonzero_basis(t, &mut vals);
        Ok(vals
            .iter()
            .enumerate()
            .map(|(r, v)| v * coefficients[first + r])
            .sum())
    }
}

pub fn bspline_eval(spec: &BasisSpec, k: usize, t: f64) -> Result<f64> {
    spec.eval(k, t)
}

pub fn basis_matrix(spec: &BasisSpec, grid: &[f64]) -> Result<Array2<f64>> {
    spec.basis_matrix(grid)
}

pub fn eval_spline(spec: &BasisSpec, coefficients: &[f64], t: f64) -> Result<f64> {
    spec.eval_spline(coefficients, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `‖y − Bc‖₂`.
    pub residual_norm: f64,
    /// Set when the normal equations needed ridge jitter.
    pub condition_flag: bool,
}

/// Least-squares smoother for one basis on one fixed grid.
///
/// The Gram matrix `BᵀB` depends only on the grid, so it is factored once
/// and reused for every curve sampled on that grid.
#[derive(Debug, Clone)]
pub struct Smoother {
    spec: BasisSpec,
    grid: Vec<f64>,
    rows: Vec<(usize, Vec<f64>)>,
    gram: SymBand,
    chol: BandCholesky,
    regularized: bool,
}

impl Smoother {
    pub fn new(spec: &BasisSpec, grid: &[f64]) -> Result<Self> {
        let rows = spec.sparse_rows(grid)?;
        let k = spec.num_basis;
        let mut gram = SymBand::zeros(k, spec.degree);
        for (first, vals) in &rows {
            for (r, vr) in vals.iter().enumerate() {
                for (s, vs) in vals.iter().enumerate().take(r + 1) {
                    gram.add_lower(first + r, first + s, vr * vs);
                }
            }
        }
        let direct = if grid.len() >= k {
            BandCholesky::factor(&gram, PIVOT_REL_TOL)
        } else {
            None
        };
        let (chol, regularized) = match direct {
            Some(c) => (c, false),
            None => {
                gram.add_diagonal(RIDGE_JITTER);
                let c = BandCholesky::factor(&gram, 0.0).ok_or_else(|| {
                    Error::Data("normal equations are singular even after ridge jitter".into())
                })?;
                (c, true)
            }
        };
        Ok(Self {
            spec: spec.clone(),
            grid: grid.to_vec(),
            rows,
            gram,
            chol,
            regularized,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Whether the normal equations on this grid were rank deficient.
    pub fn is_regularized(&self) -> bool {
        self.regularized
    }

    fn transpose_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.num_basis];
        for ((first, vals), yj) in self.rows.iter().zip(y) {
            for (r, v) in vals.iter().enumerate() {
                out[first + r] += v * yj;
            }
        }
        out
    }

    fn residual(&self, c: &[f64], y: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(y)
            .map(|((first, vals), yj)| {
                let fitted: f64 = vals.iter().enumerate().map(|(r, v)| v * c[first + r]).sum();
                (yj - fitted).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficients minimising `‖y − Bc‖²` for values sampled on this
    /// smoother's grid.
    pub fn fit(&self, values: &[f64]) -> Result<(Vec<f64>, FitDiagnostics)> {
        if values.len() != self.grid.len() {
            return Err(Error::Shape(format!(
                "smoother grid has {} points, series has {}",
                self.grid.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at position {j}")));
        }
        let rhs = self.transpose_mul(values);
        let mut c = self.chol.solve(&rhs);
        // one step of iterative refinement on the normal equations
        let gc = self.gram.mul_vec(&c);
        let r: Vec<f64> = rhs.iter().zip(&gc).map(|(a, b)| a - b).collect();
        let dc = self.chol.solve(&r);
        for (ci, di) in c.iter_mut().zip(&dc) {
            *ci += di;
        }
        let residual_norm = self.residual(&c, values);
        Ok((
            c,
            FitDiagnostics {
                residual_norm,
                condition_flag: self.regularized,
            },
        ))
    }
}

/// Fits one curve onto `spec` by least squares.
pub fn fit_coefficients(series: &RawSeries, spec: &BasisSpec) -> Result<(Vec<f64>, FitDiagnostics)> {
    Smoother::new(spec, series.grid())?.fit(series.values())
}

/// The `N × K` feature matrix of basis coefficients, one row per curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    entries: Array2<f64>,
    spec: BasisSpec,
    diagnostics: Vec<FitDiagnostics>,
}

impl CoefficientMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn diagnostics(&self) -> &[FitDiagnostics] {
        &self.diagnostics
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Smooths every curve of `dataset` onto `spec`. Curves sharing a grid
/// share one factorization.
pub fn smooth_dataset(dataset: &LabeledDataset, spec: &BasisSpec) -> Result<CoefficientMatrix> {
    let series = dataset.series();
    if series.is_empty() {
        return Err(Error::Data("cannot smooth an empty dataset".into()));
    }
    let len = series[0].len();
    if let Some(i) = series.iter().position(|s| s.len() != len) {
        return Err(Error::Shape(format!("series {i} has length {}, expected {len}", series[i].len())).at_row(i));
    }
    let shared = Smoother::new(spec, series[0].grid()).map_err(|e| e.at_row(0))?;
    let fits: Vec<(Vec<f64>, FitDiagnostics)> = series
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.grid() == shared.grid() {
                shared.fit(s.values())
            } else {
                fit_coefficients(s, spec)
            }
            .map_err(|e| e.at_row(i))
        })
        .collect::<Result<_>>()?;

    let k = spec.num_basis();
    let mut entries = Array2::zeros((series.len(), k));
    let mut diagnostics = Vec::with_capacity(series.len());
    for (i, (c, d)) in fits.into_iter().enumerate() {
        for (j, v) in c.into_iter().enumerate() {
            entries[[i, j]] = v;
        }
        diagnostics.push(d);
    }
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("smoothing produced non-finite coefficients".into()));
    }
    Ok(CoefficientMatrix {
        entries,
        spec: spec.clone(),
        diagnostics,
    })
}

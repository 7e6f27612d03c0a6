//! Banded symmetric positive-definite solver for the smoothing normal
//! equations.
//!
//! A B-spline basis of degree `p` has at most `p + 1` non-zero functions at
//! any point, so the Gram matrix `BᵀB` is banded with half-bandwidth `p`.
//! The Cholesky factor keeps the same band, which makes factorization
//! `O(K p²)` and each solve `O(K p)`.

/// Symmetric band matrix stored by lower diagonals: `band[i][d]` holds
/// entry `(i, i - d)` for `d <= bandwidth`.
#[derive(Debug, Clone)]
pub(crate) struct SymBand {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            band: vec![0.0; n * (bandwidth + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, d: usize) -> usize {
        i * (self.bandwidth + 1) + d
    }

    /// Adds `v` to entry `(i, j)` with `j <= i`.
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        let k = self.idx(i, i - j);
        self.band[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bandwidth {
            0.0
        } else {
            self.band[self.idx(i, i - j)]
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n)
            .map(|i| self.band[self.idx(i, 0)])
            .fold(0.0, f64::max)
    }

    pub fn add_diagonal(&mut self, lambda: f64) {
        for i in 0..self.n {
            let k = self.idx(i, 0);
            self.band[k] += lambda;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let hi = (i + self.bandwidth).min(self.n - 1);
            out[i] = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        out
    }
}

/// Lower-triangular band Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    factor: SymBand,
}

impl BandCholesky {
    /// Factors `a`. Returns `None` when a pivot falls to or below
    /// `rel_tol * max(diag(a))`, i.e. the matrix is numerically singular.
    pub fn factor(a: &SymBand, rel_tol: f64) -> Option<Self> {
        let n = a.n;
        let w = a.bandwidth;
        let floor = rel_tol * a.max_diagonal();
        let mut l = SymBand::zeros(n, w);
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(w));
                let mut s = a.get(i, j);
                for k in klo..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                let pos = l.idx(i, i - j);
                if i == j {
                    if !(s > floor) || !s.is_finite() {
                        return None;
                    }
                    l.band[pos] = s.sqrt();
                } else {
                    l.band[pos] = s / l.get(j, j);
                }
            }
        }
        Some(Self { factor: l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let n = l.n;
        let w = l.bandwidth;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let mut s = y[i];
            for k in lo..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let hi = (i + w).min(n - 1);
            let mut s = y[i];
            for k in (i + 1)..=hi {
                s -= l.get(k, i) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SymBand {
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.add_lower(i, i, 4.0);
            if i > 0 {
                a.add_lower(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = tridiag(6);
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let b = a.mul_vec(&x);
        let chol = BandCholesky::factor(&a, 1e-14).unwrap();
        let got = chol.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = SymBand::zeros(3, 1);
        a.add_lower(0, 0, 1.0);
        a.add_lower(1, 0, 1.0);
        a.add_lower(1, 1, 1.0);
        a.add_lower(2, 2, 1.0);
        assert!(BandCholesky::factor(&a, 1e-12).is_none());
        a.add_diagonal(1e-3);
        assert!(BandCholesky::factor(&a, 1e-12).is_some());
    }
}

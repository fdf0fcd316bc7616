//! Dense interval matrices (real and complex) used for the finite blocks of
//! sequence-space operators. Row-major storage; all products and sums are
//! rigorous enclosures.

use num_complex::Complex64;

use crate::interval::{CInterval, Interval, C_ZERO, ZERO};

/// Dense matrix of real intervals.
#[derive(Clone, Debug)]
pub struct RMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Interval>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::point(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RMat { rows, cols, data }
    }

    pub fn mul(&self, rhs: &RMat) -> RMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        RMat::from_fn(self.rows, rhs.cols, |i, j| {
            Interval::sum((0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]))
        })
    }

    pub fn add(&self, rhs: &RMat) -> RMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn scale(&self, s: Interval) -> RMat {
        RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    /// Right-multiplication by a diagonal matrix: column j scaled by d[j].
    pub fn scale_cols(&self, d: &[Interval]) -> RMat {
        assert_eq!(self.cols, d.len());
        RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    /// Left-multiplication by a diagonal matrix: row i scaled by d[i].
    pub fn scale_rows(&self, d: &[Interval]) -> RMat {
        assert_eq!(self.rows, d.len());
        RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[i])
    }

    pub fn mul_vec(&self, v: &[Interval]) -> Vec<Interval> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| Interval::sum((0..self.cols).map(|k| self[(i, k)] * v[k])))
            .collect()
    }

    /// max_j (1/w_col[j]) Σ_i w_row[i] |A_ij|, the ℓ¹-type weighted operator
    /// norm (upper bound).
    pub fn weighted_colsum_norm(&self, w_row: &[Interval], w_col: &[Interval]) -> Interval {
        assert_eq!(self.rows, w_row.len());
        assert_eq!(self.cols, w_col.len());
        let mut best = ZERO;
        for j in 0..self.cols {
            let s = Interval::sum((0..self.rows).map(|i| self[(i, j)].abs() * w_row[i]));
            let s = s / w_col[j];
            best = best.max_iv(s);
        }
        best
    }

    /// Entrywise upper bounds as plain numbers (for float-only surrogates).
    pub fn sup_entries(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.hi).collect()
    }
}

impl std::ops::Index<(usize, usize)> for RMat {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dense matrix of complex intervals.
#[derive(Clone, Debug)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<CInterval>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C_ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CInterval::point(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CInterval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Point matrix from row-major complex values.
    pub fn from_points(rows: usize, cols: usize, v: &[Complex64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        CMat { rows, cols, data: v.iter().map(|&z| CInterval::from_c64(z)).collect() }
    }

    pub fn mid_points(&self) -> Vec<Complex64> {
        self.data.iter().map(|z| z.mid_c64()).collect()
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        CMat::from_fn(self.rows, rhs.cols, |i, j| {
            CInterval::sum((0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]))
        })
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, s: CInterval) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn scale_cols(&self, d: &[CInterval]) -> CMat {
        assert_eq!(self.cols, d.len());
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn scale_rows(&self, d: &[CInterval]) -> CMat {
        assert_eq!(self.rows, d.len());
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[i])
    }

    pub fn mul_vec(&self, v: &[CInterval]) -> Vec<CInterval> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| CInterval::sum((0..self.cols).map(|k| self[(i, k)] * v[k])))
            .collect()
    }

    /// Entrywise |A_ij| enclosures.
    pub fn abs(&self) -> RMat {
        RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].abs())
    }

    /// Grow every entry by ±delta[(i,j)] (used to turn an approximate inverse
    /// into a certified enclosure).
    pub fn inflate(&self, delta: impl Fn(usize, usize) -> f64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| {
            let d = delta(i, j);
            debug_assert!(d >= 0.0);
            let pad = Interval::new(-d, d);
            CInterval::new(self[(i, j)].re + pad, self[(i, j)].im + pad)
        })
    }

    pub fn weighted_colsum_norm(&self, w_row: &[Interval], w_col: &[Interval]) -> Interval {
        self.abs().weighted_colsum_norm(w_row, w_col)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = CInterval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &CInterval {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CInterval {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

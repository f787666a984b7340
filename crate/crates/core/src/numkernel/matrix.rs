use std::ops::{Index, IndexMut};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Outer product `a b†`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, &ai) in a.iter().enumerate() {
            let row = &mut m.data[i * b.len()..(i + 1) * b.len()];
            for (r, &bj) in row.iter_mut().zip(b) {
                *r = ai * bj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = x;
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(&self.data, self.rows, self.cols, &other.data, other.cols, &mut out.data);
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product; row index of the result is `(i_self, i_other)` with `i_other` fastest.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(r, c);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.data[i1 * self.cols + j1];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..other.rows {
                    let dst = (i1 * other.rows + i2) * c + j1 * other.cols;
                    let src = &other.data[i2 * other.cols..(i2 + 1) * other.cols];
                    for (o, &b) in out.data[dst..dst + other.cols].iter_mut().zip(src) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |m_ij - conj(m_ji)|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// `max |u†u - I|`; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint().matmul(self).sub(&Self::identity(self.rows)).max_abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `out = a · b` on raw row-major buffers, `a` is `m × k`, `b` is `k × n`.
pub(crate) fn gemm(a: &[C64], m: usize, k: usize, b: &[C64], n: usize, out: &mut [C64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    out.fill(ZERO);
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for (l, &ail) in a[i * k..(i + 1) * k].iter().enumerate() {
            if ail == ZERO {
                continue;
            }
            let brow = &b[l * n..(l + 1) * n];
            for (o, &x) in orow.iter_mut().zip(brow) {
                *o += ail * x;
            }
        }
    }
}

/// `out = a · bᴴ`, `a` is `m × k`, `b` is `n × k`; the inner loop runs over contiguous rows.
pub(crate) fn gemm_adjoint_rhs(a: &[C64], m: usize, k: usize, b: &[C64], n: usize, out: &mut [C64]) {
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            let mut acc = ZERO;
            for (x, y) in arow.iter().zip(brow) {
                acc += x * y.conj();
            }
            out[i * n + j] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_vec(2, 2, vec![ZERO; 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        let bad = vec![ZERO, C64::new(f64::NAN, 0.0), ZERO, ZERO];
        assert_eq!(ComplexMatrix::from_vec(2, 2, bad), Err(Error::NonFinite(1)));
        assert!(ComplexMatrix::from_fn(1, 1, |_, _| C64::new(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn kron_matches_index_convention() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0)).unwrap();
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(0.0, (i * 3 + j) as f64)).unwrap();
        let k = a.kron(&b);
        for (i1, j1, i2, j2) in [(0, 1, 2, 0), (1, 0, 1, 2), (1, 1, 0, 0)] {
            assert_eq!(k[(i1 * 3 + i2, j1 * 3 + j2)], a[(i1, j1)] * b[(i2, j2)]);
        }
    }

    #[test]
    fn adjoint_product_helper_agrees_with_matmul() {
        let a = ComplexMatrix::from_fn(3, 4, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64)).unwrap();
        let b = ComplexMatrix::from_fn(2, 4, |i, j| C64::new(1.0 + j as f64, i as f64)).unwrap();
        let mut out = vec![ZERO; 6];
        gemm_adjoint_rhs(a.as_slice(), 3, 4, b.as_slice(), 2, &mut out);
        let expect = a.matmul(&b.adjoint());
        assert_eq!(out, expect.into_vec());
    }
}

//! Dense matrix primitives: storage, the observation mask, masked
//! projections, norms and a thresholded SVD.
//!
//! Matrices are stored column-major throughout the crate. The SVD is
//! delegated to `faer` (dense, sequential); every singular triplet is
//! computed and then filtered against the threshold.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::MatRef;

use crate::error::{invalid, Result, SpcpError};

/// Real dense matrix in column-major order.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        j * self.rows + i
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_shape(self, other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(SpcpError::DimensionMismatch {
                expected: (self.cols, rhs.cols),
                found: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }
}

macro_rules! elementwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&DenseMatrix> for &DenseMatrix {
            type Output = DenseMatrix;

            fn $method(self, rhs: &DenseMatrix) -> DenseMatrix {
                assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
                DenseMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
    };
}

elementwise_op!(Add, add, +);
elementwise_op!(Sub, sub, -);

impl AddAssign<&DenseMatrix> for DenseMatrix {
    fn add_assign(&mut self, rhs: &DenseMatrix) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&DenseMatrix> for DenseMatrix {
    fn sub_assign(&mut self, rhs: &DenseMatrix) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, alpha: f64) -> DenseMatrix {
        self.map(|x| alpha * x)
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;

    fn neg(self) -> DenseMatrix {
        self.map(|x| -x)
    }
}

pub(crate) fn ensure_same_shape(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(SpcpError::DimensionMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(())
}

/// Index set of observed entries.
///
/// Indices are zero-based, iterated in lexicographic `(row, col)` order,
/// and backed by a membership bitmap for O(1) lookups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    indices: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    member: Vec<bool>,
}

impl ObservationMask {
    pub fn new(rows: usize, cols: usize, mut indices: Vec<(usize, usize)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SpcpError::InvalidMask("dimensions must be positive".into()));
        }
        if indices.is_empty() {
            return Err(SpcpError::InvalidMask("at least one observed entry is required".into()));
        }
        indices.sort_unstable();
        let mut member = vec![false; rows * cols];
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(SpcpError::InvalidMask(format!("duplicate index {:?}", w[0])));
            }
        }
        let mut offsets = Vec::with_capacity(indices.len());
        for &(i, j) in &indices {
            if i >= rows || j >= cols {
                return Err(SpcpError::InvalidMask(format!(
                    "index ({i}, {j}) out of range for {rows}x{cols}"
                )));
            }
            let off = j * rows + i;
            member[off] = true;
            offsets.push(off);
        }
        Ok(Self {
            rows,
            cols,
            indices,
            offsets,
            member,
        })
    }

    /// Every entry observed.
    pub fn full(rows: usize, cols: usize) -> Self {
        let indices: Vec<_> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .collect();
        Self::new(rows, cols, indices).expect("full mask is valid")
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.rows * self.cols
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.rows && j < self.cols && self.member[j * self.rows + i]
    }

    pub fn sampling_ratio(&self) -> f64 {
        self.indices.len() as f64 / (self.rows * self.cols) as f64
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// Column-major storage offsets of the observed entries, in iteration order.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Column-major membership bitmap.
    pub fn bitmap(&self) -> &[bool] {
        &self.member
    }

    /// Values of `m` on the observed entries, in iteration order.
    pub fn gather(&self, m: &DenseMatrix) -> Result<Vec<f64>> {
        self.check(m)?;
        Ok(self.offsets.iter().map(|&o| m.data[o]).collect())
    }

    pub(crate) fn check(&self, m: &DenseMatrix) -> Result<()> {
        if m.shape() != self.shape() {
            return Err(SpcpError::DimensionMismatch {
                expected: self.shape(),
                found: m.shape(),
            });
        }
        Ok(())
    }
}

/// Keeps the entries of `m` on the mask and zeroes the rest.
pub fn project_omega(m: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    mask.check(m)?;
    let mut out = m.clone();
    for (x, &keep) in out.data.iter_mut().zip(&mask.member) {
        if !keep {
            *x = 0.0;
        }
    }
    Ok(out)
}

/// Keeps the entries of `m` off the mask and zeroes the rest.
pub fn project_omega_complement(m: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    mask.check(m)?;
    let mut out = m.clone();
    for (x, &obs) in out.data.iter_mut().zip(&mask.member) {
        if obs {
            *x = 0.0;
        }
    }
    Ok(out)
}

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn inner(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    ensure_same_shape(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn l1_norm(m: &DenseMatrix) -> f64 {
    m.data.iter().map(|x| x.abs()).sum()
}

/// All singular values of `m`, non-increasing.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(SpcpError::NonFinite("svd input"));
    }
    let mut s = m
        .as_faer()
        .singular_values()
        .map_err(|e| SpcpError::Svd(format!("{e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Singular triplets of a matrix whose singular values exceed a threshold.
#[derive(Clone, Debug)]
pub struct ThresholdedSvd {
    /// Left singular vectors, `m x r`.
    pub u: DenseMatrix,
    /// Singular values above `tau`, non-increasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `n x r`.
    pub v: DenseMatrix,
    pub tau: f64,
    /// Number of leading triplets the backend computed.
    pub count_computed: usize,
}

impl ThresholdedSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `sum_i (sigma_i - shift) u_i v_i^T` over the retained triplets.
    pub fn reconstruct_shifted(&self, shift: f64) -> DenseMatrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut out = DenseMatrix::zeros(m, n);
        for j in 0..n {
            let dst = &mut out.data[j * m..(j + 1) * m];
            for (k, &s) in self.sigma.iter().enumerate() {
                let coef = (s - shift) * self.v[(j, k)];
                if coef == 0.0 {
                    continue;
                }
                for (d, &u) in dst.iter_mut().zip(self.u.column(k)) {
                    *d += coef * u;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_shifted(0.0)
    }
}

/// Singular triplets of `m` with singular value strictly above `tau`.
///
/// Runs a full thin SVD and filters, so `count_computed == min(m, n)`.
pub fn svd_threshold(m: &DenseMatrix, tau: f64) -> Result<ThresholdedSvd> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid(format!("svd threshold must be finite and >= 0, got {tau}")));
    }
    if !m.is_finite() {
        return Err(SpcpError::NonFinite("svd input"));
    }
    let svd = m
        .as_faer()
        .thin_svd()
        .map_err(|e| SpcpError::Svd(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let full = s.nrows();
    let mut order: Vec<usize> = (0..full).filter(|&k| s[k] > tau).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));

    let (rows, cols) = m.shape();
    let (u_src, v_src) = (svd.U(), svd.V());
    let r = order.len();
    let u = DenseMatrix::from_fn(rows, r, |i, k| u_src[(i, order[k])]);
    let v = DenseMatrix::from_fn(cols, r, |i, k| v_src[(i, order[k])]);
    let sigma = order.iter().map(|&k| s[k]).collect();
    Ok(ThresholdedSvd {
        u,
        sigma,
        v,
        tau,
        count_computed: full,
    })
}

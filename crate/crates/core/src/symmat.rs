//! Dense real symmetric matrices and their spectra.
//!
//! Eigendecomposition uses cyclic Jacobi rotations. Results are sorted ascending and
//! each eigenvector column is normalized so that its largest-magnitude component is
//! positive (ties go to the lowest row index), which makes spectra bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;

use crate::rng;
use crate::{Error, Result};

/// Jacobi sweeps allowed before giving up.
pub const MAX_SWEEPS: usize = 30;

/// A rotation is applied when the off-diagonal entry exceeds this multiple of ‖M‖_F.
pub const ROTATION_THRESHOLD: f64 = 1e-14;

/// Orthogonality tolerance accepted by [`conjugate`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Square real matrix stored row-major. Used for eigenvector bases, orthogonal
/// conjugations and Hessians.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = check_square(rows)?;
        Ok(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    /// max |a_ij - b_ij|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    /// max |OᵀO - I|.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.transpose().matmul(self);
        gram.max_abs_diff(&Self::identity(self.n))
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..i).all(|j| self.data[i * n + j] == self.data[j * n + i]))
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SquareMatrix").field("n", &self.n).field("rows", &self.rows()).finish()
    }
}

/// Dense real symmetric matrix. Entries are finite and `a_ij == a_ji` bit for bit.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: SquareMatrix,
}

/// Outcome of symmetrizing raw input: the matrix plus the largest entry change.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrized {
    pub matrix: SymmetricMatrix,
    pub max_change: f64,
}

impl SymmetricMatrix {
    pub fn identity(n: usize) -> Self {
        Self { inner: SquareMatrix::identity(n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: SquareMatrix::zeros(n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut inner = SquareMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            inner.set(i, i, d);
        }
        Self { inner }
    }

    /// Symmetrizes a square matrix, `(A + Aᵀ)/2`.
    pub fn from_square(m: &SquareMatrix) -> Result<Self> {
        symmetrize_square(m.clone()).map(|s| s.matrix)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_square(&self) -> &SquareMatrix {
        &self.inner
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    /// `self + t * direction`.
    pub fn add_scaled(&self, direction: &Self, t: f64) -> Result<Self> {
        if self.n() != direction.n() {
            return Err(Error::DimensionMismatch { left: self.n(), right: direction.n() });
        }
        let data = self.inner.data.iter().zip(&direction.inner.data).map(|(a, b)| a + t * b).collect();
        Self::checked(SquareMatrix { n: self.n(), data })
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.n {
            inner.data[i * inner.n + i] += shift;
        }
        Self { inner }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let data = self.inner.data.iter().map(|a| a * factor).collect();
        Self { inner: SquareMatrix { n: self.n(), data } }
    }

    fn checked(inner: SquareMatrix) -> Result<Self> {
        check_finite(&inner)?;
        Ok(Self { inner })
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricMatrix").field("n", &self.n()).field("rows", &self.rows()).finish()
    }
}

/// Eigenvalues (ascending) and the orthogonal matrix of eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: SquareMatrix,
    gap: f64,
    source_norm: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &SquareMatrix {
        &self.eigenvectors
    }

    /// Smallest consecutive eigenvalue difference; `+∞` for `n = 1`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Frobenius norm of the decomposed matrix.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.n();
        let v = &self.eigenvectors;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| v.get(i, k) * self.eigenvalues[k] * v.get(j, k)).sum();
                out.set(i, j, s);
            }
        }
        symmetrize_square(out).expect("reconstruction of a finite spectrum is finite").matrix
    }

    /// Expresses a symmetric matrix in this eigenbasis, `Vᵀ A V`, re-symmetrized.
    pub fn to_eigenbasis(&self, a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if a.n() != self.n() {
            return Err(Error::DimensionMismatch { left: self.n(), right: a.n() });
        }
        let v = &self.eigenvectors;
        let rotated = v.transpose().matmul(a.as_square()).matmul(v);
        SymmetricMatrix::from_square(&rotated)
    }
}

/// `(raw + rawᵀ)/2`. Entries that are already symmetric are copied unchanged.
pub fn make_symmetric(raw: &[Vec<f64>]) -> Result<SymmetricMatrix> {
    make_symmetric_reporting(raw).map(|s| s.matrix)
}

/// Like [`make_symmetric`], also reporting the largest change made to any entry.
pub fn make_symmetric_reporting(raw: &[Vec<f64>]) -> Result<Symmetrized> {
    let m = SquareMatrix::from_rows(raw)?;
    symmetrize_square(m)
}

fn symmetrize_square(mut m: SquareMatrix) -> Result<Symmetrized> {
    check_finite(&m)?;
    let n = m.n;
    let mut max_change = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (m.get(i, j), m.get(j, i));
            if a != b {
                let avg = 0.5 * a + 0.5 * b;
                max_change = max_change.max((avg - a).abs()).max((avg - b).abs());
                m.set(i, j, avg);
                m.set(j, i, avg);
            }
        }
    }
    Ok(Symmetrized { matrix: SymmetricMatrix { inner: m }, max_change })
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), expected: n });
        }
    }
    Ok(n)
}

fn check_finite(m: &SquareMatrix) -> Result<()> {
    match m.data.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(Error::NonFinite { row: k / m.n, col: k % m.n }),
        None => Ok(()),
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eigendecompose(m: &SymmetricMatrix) -> Result<Spectrum> {
    let n = m.n();
    let source_norm = m.frobenius_norm();
    let threshold = ROTATION_THRESHOLD * source_norm;
    let mut a = m.inner.data.clone();
    let mut v = SquareMatrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if max_off_diagonal(&a, n) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p * n + q].abs() > threshold {
                    rotate(&mut a, &mut v.data, n, p, q);
                }
            }
        }
    }
    if !converged {
        let off_diagonal = max_off_diagonal(&a, n);
        if off_diagonal > threshold {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_diagonal });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal eigenvalues keep their index order
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 1..n {
            if v.get(i, k).abs() > v.get(pivot, k).abs() {
                pivot = i;
            }
        }
        let sign = if v.get(pivot, k) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, col, sign * v.get(i, k));
        }
    }
    let gap = gap_of(&eigenvalues);
    Ok(Spectrum { eigenvalues, eigenvectors: vectors, gap, source_norm })
}

fn max_off_diagonal(a: &[f64], n: usize) -> f64 {
    let mut off = 0.0_f64;
    for p in 0..n {
        for q in p + 1..n {
            off = off.max(a[p * n + q].abs());
        }
    }
    off
}

// One Jacobi rotation annihilating a[p][q]; accumulates the rotation into v.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
    let mut t = 1.0 / (theta.abs() + libm::hypot(theta, 1.0));
    if theta < 0.0 {
        t = -t;
    }
    let c = 1.0 / libm::hypot(t, 1.0);
    let s = t * c;

    a[p * n + p] -= t * apq;
    a[q * n + q] += t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[r * n + p] = new_rp;
        a[p * n + r] = new_rp;
        a[r * n + q] = new_rq;
        a[q * n + r] = new_rq;
    }
    for r in 0..n {
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = c * vrp - s * vrq;
        v[r * n + q] = s * vrp + c * vrq;
    }
}

/// `Oᵀ M O`, re-symmetrized.
pub fn conjugate(m: &SymmetricMatrix, o: &SquareMatrix) -> Result<SymmetricMatrix> {
    if m.n() != o.n() {
        return Err(Error::DimensionMismatch { left: m.n(), right: o.n() });
    }
    let deviation = o.orthogonality_defect();
    if deviation > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { deviation });
    }
    let rotated = o.transpose().matmul(m.as_square()).matmul(o);
    SymmetricMatrix::from_square(&rotated)
}

/// Seeded random symmetric matrix: i.i.d. standard normal entries, symmetrized, times `scale`.
pub fn random_symmetric(n: usize, seed: u64, scale: f64) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::TooSmall { what: "dimension", min: 1, got: 0 });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::NotPositive { what: "scale", value: scale });
    }
    let mut rng = rng::seeded(seed, rng::STREAM_SYMMETRIC);
    Ok(random_symmetric_from(&mut rng, n, scale))
}

pub(crate) fn random_symmetric_from(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymmetricMatrix {
    let raw: Vec<f64> = (0..n * n).map(|_| rng::normal(rng)).collect();
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, 0.5 * (raw[i * n + j] + raw[j * n + i]) * scale);
        }
    }
    SymmetricMatrix { inner: out }
}

/// Seeded Haar-distributed orthogonal matrix.
///
/// Columns of a standard Gaussian matrix are orthonormalized by Gram–Schmidt with one
/// re-orthogonalization pass. This is the QR factorization whose triangular factor has
/// a positive diagonal, which is what makes the distribution Haar.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<SquareMatrix> {
    if n == 0 {
        return Err(Error::TooSmall { what: "dimension", min: 1, got: 0 });
    }
    let mut rng = rng::seeded(seed, rng::STREAM_ORTHOGONAL);
    Ok(random_orthogonal_from(&mut rng, n))
}

pub(crate) fn random_orthogonal_from(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut c: Vec<f64> = (0..n).map(|_| rng::normal(rng)).collect();
        for _ in 0..2 {
            for prev in &cols {
                let dot: f64 = prev.iter().zip(&c).map(|(a, b)| a * b).sum();
                for (x, p) in c.iter_mut().zip(prev) {
                    *x -= dot * p;
                }
            }
        }
        let norm = frobenius(&c);
        // a numerically dependent draw is discarded; this has probability zero
        if norm > 1e-8 {
            c.iter_mut().for_each(|x| *x /= norm);
            cols.push(c);
        }
    }
    let mut o = SquareMatrix::zeros(n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            o.set(i, j, x);
        }
    }
    o
}

/// Smallest consecutive eigenvalue difference; `+∞` for a single eigenvalue.
pub fn spectral_gap(s: &Spectrum) -> f64 {
    s.gap
}

fn gap_of(sorted: &[f64]) -> f64 {
    sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub(crate) fn frobenius(xs: &[f64]) -> f64 {
    libm::sqrt(xs.iter().map(|x| x * x).sum())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

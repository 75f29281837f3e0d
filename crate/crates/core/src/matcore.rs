//! Dense complex matrix kernel.
//!
//! Row-major storage of `Complex64` entries plus the few factorizations the
//! estimators rely on: partially pivoted LU for inverses and solves, Householder
//! QR for orthonormal null bases, one-sided Jacobi for singular values and
//! cyclic Jacobi for Hermitian eigendecompositions. Everything is deterministic
//! and allocation-light; matrices here are at most a few dozen rows wide, while
//! sample batches may have 10^5 columns.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative pivot threshold below which LU reports a singular matrix.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-13;
/// Reciprocal condition estimate below which an inverse is flagged.
pub const ILL_CONDITIONED_RCOND: f64 = 1e-10;
/// Relative singular value below which a matrix counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !data.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Real-valued matrix from equally long rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| z * factor).collect(),
        )
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| z * factor).collect(),
        )
    }

    /// Rows `start..end` as a new matrix.
    pub fn rows_range(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows, "row range out of bounds");
        Self::from_raw(
            end - start,
            self.cols,
            self.data[start * self.cols..end * self.cols].to_vec(),
        )
    }

    /// Columns `start..end` as a new matrix.
    pub fn cols_range(&self, start: usize, end: usize) -> Self {
        assert!(
            start <= end && end <= self.cols,
            "column range out of bounds"
        );
        let mut data = Vec::with_capacity(self.rows * (end - start));
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..end]);
        }
        Self::from_raw(self.rows, end - start, data)
    }

    pub fn vstack(top: &Self, bottom: &Self) -> Result<Self> {
        if top.cols != bottom.cols {
            return Err(Error::dims(format!(
                "vstack of {}x{} over {}x{}",
                top.rows, top.cols, bottom.rows, bottom.cols
            )));
        }
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Ok(Self::from_raw(top.rows + bottom.rows, top.cols, data))
    }

    pub fn hstack(left: &Self, right: &Self) -> Result<Self> {
        if left.rows != right.rows {
            return Err(Error::dims(format!(
                "hstack of {}x{} beside {}x{}",
                left.rows, left.cols, right.rows, right.cols
            )));
        }
        let mut data = Vec::with_capacity(left.rows * (left.cols + right.cols));
        for i in 0..left.rows {
            data.extend_from_slice(left.row(i));
            data.extend_from_slice(right.row(i));
        }
        Ok(Self::from_raw(left.rows, left.cols + right.cols, data))
    }

    /// Matrix product, checking inner dimensions.
    pub fn try_dot(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.dot(rhs))
    }

    /// Matrix product. Panics on mismatched inner dimensions.
    pub fn dot(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "product of {}x{} and {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                axpy(out_row, a, rhs.row(k));
            }
        }
        out
    }

    /// `self · rhsᴴ`, computed as row-by-row inner products.
    pub fn mul_adjoint(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "mul_adjoint inner dimension");
        Self::from_fn(self.rows, rhs.rows, |i, j| {
            dot_conj(self.row(i), rhs.row(j))
        })
    }

    /// `self · selfᴴ`, Hermitian by construction.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot_conj(self.row(i), self.row(j));
                if i == j {
                    out[(i, i)] = C64::new(v.re, 0.0);
                } else {
                    out[(i, j)] = v;
                    out[(j, i)] = v.conj();
                }
            }
        }
        out
    }

    /// `(M + Mᴴ)/2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian_part of a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                C64::new(self[(i, i)].re, 0.0)
            } else {
                (self[(i, j)] + self[(j, i)].conj()) * 0.5
            }
        })
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        Self::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, " ")?;
            for z in self.row(i).iter().take(8) {
                write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.dot(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        self.data
            .iter_mut()
            .zip(&rhs.data)
            .for_each(|(a, &b)| *a += b);
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        self.data
            .iter_mut()
            .zip(&rhs.data)
            .for_each(|(a, &b)| *a -= b);
    }
}

/// `out += a · x`
fn axpy(out: &mut [C64], a: C64, x: &[C64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        o.re += a.re * v.re - a.im * v.im;
        o.im += a.re * v.im + a.im * v.re;
    }
}

/// `Σ x_k · conj(y_k)` with four interleaved accumulators.
fn dot_conj(x: &[C64], y: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let a = x[4 * c + l];
            let b = y[4 * c + l];
            re[l] += a.re * b.re + a.im * b.im;
            im[l] += a.im * b.re - a.re * b.im;
        }
    }
    let mut out = C64::new(
        (re[0] + re[1]) + (re[2] + re[3]),
        (im[0] + im[1]) + (im[2] + im[3]),
    );
    for k in 4 * chunks..x.len() {
        out += x[k] * y[k].conj();
    }
    out
}

pub fn frobenius_norm_sq(m: &CMatrix) -> f64 {
    m.frobenius_norm_sq()
}

/// `‖a − reference‖_F / ‖reference‖_F`, or the absolute norm when the
/// reference is zero.
pub fn relative_error(a: &CMatrix, reference: &CMatrix) -> f64 {
    let diff = (a - reference).frobenius_norm();
    let scale = reference.frobenius_norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Partially pivoted LU factorization `P·M = L·U`.
#[derive(Clone, Debug)]
pub struct LuFactor {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(format!(
                "LU of a non-square {}x{} matrix",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        // Pivots are judged against the largest entry of the input.
        let threshold = SINGULAR_PIVOT_TOL * m.max_abs();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::SingularMatrix { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv_pivot = lu[(k, k)].inv();
            for i in k + 1..n {
                let l = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solves `M·X = B` for `X`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.dim();
        if b.rows != n {
            return Err(Error::dims(format!(
                "solve with {n}x{n} system and {}x{} right-hand side",
                b.rows, b.cols
            )));
        }
        let r = b.cols;
        let mut x = CMatrix::zeros(n, r);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(i * r);
                axpy(&mut tail[..r], -l, &head[k * r..(k + 1) * r]);
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(k * r);
                axpy(&mut head[i * r..(i + 1) * r], -u, &tail[..r]);
            }
            let inv = self.lu[(i, i)].inv();
            x.row_mut(i).iter_mut().for_each(|z| *z *= inv);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.dim()))
            .expect("identity has matching dimension")
    }
}

/// An inverse together with its conditioning diagnostics.
#[derive(Clone, Debug)]
pub struct Inverse {
    pub matrix: CMatrix,
    /// `1 / (‖M‖₁ ‖M⁻¹‖₁)`.
    pub rcond: f64,
    pub ill_conditioned: bool,
}

pub fn invert_with_report(m: &CMatrix) -> Result<Inverse> {
    let matrix = LuFactor::new(m)?.inverse();
    let rcond = 1.0 / (m.norm1() * matrix.norm1());
    Ok(Inverse {
        ill_conditioned: rcond < ILL_CONDITIONED_RCOND,
        matrix,
        rcond,
    })
}

pub fn invert(m: &CMatrix) -> Result<CMatrix> {
    Ok(LuFactor::new(m)?.inverse())
}

/// Singular values in descending order, by one-sided Jacobi on the shorter
/// dimension.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut work = if m.rows <= m.cols {
        m.clone()
    } else {
        m.adjoint()
    };
    let k = work.rows;
    let n = work.cols;
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let alpha: f64 = work.row(i).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = work.row(j).iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot_conj(work.row(i), work.row(j));
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for col in 0..n {
                    let a = work.data[i * n + col];
                    let b = work.data[j * n + col] * phase;
                    work.data[i * n + col] = a * c - b * s;
                    work.data[j * n + col] = a * s + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..k)
        .map(|i| work.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        _ => f64::INFINITY,
    }
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

fn check_full_row_rank(m: &CMatrix, what: &str) -> Result<()> {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    let bottom = sv.last().copied().unwrap_or(0.0);
    if m.rows > m.cols || top == 0.0 || bottom <= RANK_TOL * top {
        return Err(Error::RankDeficient(format!(
            "{what} ({}x{}) singular values span [{bottom:e}, {top:e}]",
            m.rows, m.cols
        )));
    }
    Ok(())
}

pub(crate) fn ensure_full_row_rank(m: &CMatrix, what: &str) -> Result<()> {
    check_full_row_rank(m, what)
}

/// Orthonormal rows spanning the orthogonal complement of the row space of a
/// full-row-rank `k×d` matrix: returns `B` (`(d−k)×d`) with `B·Mᴴ = 0` and
/// `B·Bᴴ = I`.
pub fn orthonormal_null_basis(m: &CMatrix) -> Result<CMatrix> {
    let (k, d) = m.shape();
    if k >= d {
        return Err(Error::RankDeficient(format!(
            "{k}x{d} matrix has no proper null space"
        )));
    }
    check_full_row_rank(m, "null-basis input")?;
    let q = householder_q(&m.adjoint());
    Ok(q.cols_range(k, d).adjoint())
}

/// Full unitary factor `Q` of the Householder QR of a tall `d×k` matrix.
fn householder_q(a: &CMatrix) -> CMatrix {
    let (d, k) = a.shape();
    let mut r = a.clone();
    let mut q = CMatrix::identity(d);
    for j in 0..k.min(d) {
        let norm_x: f64 = (j..d).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(j, j)];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = (j..d).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // R ← (I − 2vvᴴ) R on rows j..d
        for col in j..k {
            let w: C64 = (j..d).map(|i| v[i - j].conj() * r[(i, col)]).sum();
            for i in j..d {
                r[(i, col)] -= v[i - j] * (w * 2.0);
            }
        }
        // Q ← Q (I − 2vvᴴ) on columns j..d
        for row in 0..d {
            let w: C64 = (j..d).map(|i| q[(row, i)] * v[i - j]).sum();
            for i in j..d {
                q[(row, i)] -= w * 2.0 * v[i - j].conj();
            }
        }
    }
    q
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, ordered like `values`.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi eigensolver. The input is symmetrized first.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::dims("eigendecomposition of a non-square matrix"));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[(p, q)];
                let gn = g.norm();
                if gn == 0.0 {
                    continue;
                }
                let e = (g / gn).conj(); // e^{-iφ}
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * gn);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← A·G, V ← V·G with G = [[c, s], [−s·e, c·e]]
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * e * s;
                    a[(k, q)] = akp * s + akq * e * c;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * e * s;
                    v[(k, q)] = vkp * s + vkq * e * c;
                }
                // A ← Gᴴ·A
                let ec = e.conj();
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * ec * s;
                    a[(q, k)] = apk * s + aqk * ec * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

//! Dense complex linear algebra: products, LU solves, eigenvalues and the
//! spectral norm.
//!
//! Storage is row-major and square only. Every routine here is a pure
//! function of its inputs.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Dimension up to which the operator norm comes from a full Jacobi SVD.
pub const SVD_NORM_MAX_DIM: usize = 64;
const POWER_ITER_TOL: f64 = 1e-13;
const POWER_ITER_MAX: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 80;
const SINGULAR_PIVOT_REL: f64 = 1e-14;

/// Square dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex::new(T::one(), T::zero()))
    }

    /// `z * I`.
    pub fn scalar(dim: usize, z: Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("diagonal must be non-empty"));
        }
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_diag(diag: &[T]) -> Result<Self> {
        let diag: Vec<_> = diag.iter().map(|&d| Complex::new(d, T::zero())).collect();
        Self::from_diag(&diag)
    }

    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(invalid(format!(
                    "matrix is not square: row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = Self { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect())
                .collect(),
        )
    }

    /// Block-diagonal matrix with the given square blocks.
    pub fn block_diag(blocks: &[ComplexMatrix<T>]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("need at least one block"));
        }
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m[(offset + i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.dim;
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(invalid("matrix has non-finite entries"))
        }
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self + z * I`.
    pub fn shift(&self, z: Complex<T>) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out[(i, i)] += z;
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Largest entry modulus; a cheap size measure.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> T {
        op_norm(self).expect("finite by construction")
    }

    /// Splits into the `blocks` equal diagonal blocks (used for block-diagonal checks).
    pub fn diagonal_block(&self, start: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(start + i, start + j)];
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = &self.data[i * self.dim + j];
                write!(f, "({:?}, {:?})  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> AddAssign<&ComplexMatrix<T>> for ComplexMatrix<T> {
    fn add_assign(&mut self, rhs: &ComplexMatrix<T>) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add_assign");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Real> SubAssign<&ComplexMatrix<T>> for ComplexMatrix<T> {
    fn sub_assign(&mut self, rhs: &ComplexMatrix<T>) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub_assign");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<T: Real> ComplexMatrix<T> {
    /// `self += w * other`.
    pub fn axpy(&mut self, w: Complex<T>, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in axpy");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * w;
        }
    }
}

// ---------------------------------------------------------------------------
// Spectral norm and singular values

/// Largest singular value of `m`.
///
/// Full one-sided Jacobi SVD up to [`SVD_NORM_MAX_DIM`], power iteration on
/// `m^H m` above that.
pub fn op_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    m.check_finite()?;
    if m.dim <= SVD_NORM_MAX_DIM {
        Ok(singular_values(m)?[0])
    } else {
        Ok(power_iteration_norm(m))
    }
}

/// Singular values in descending order (one-sided Hestenes-Jacobi).
pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    m.check_finite()?;
    let n = m.dim;
    // Column-major copy: cols[j] is column j.
    let mut cols: Vec<Vec<Complex<T>>> =
        (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    // n eps is the attainable accuracy of a computed inner product.
    let eps = T::epsilon() * T::from_count(n.max(1));
    let frob2: T = m.data.iter().map(|z| z.norm_sqr()).sum();
    let negligible = frob2 * T::epsilon() * T::epsilon() * T::epsilon();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (left, right) = cols.split_at_mut(j);
                let (ci, cj) = (&mut left[i], &mut right[0]);
                let alpha: T = ci.iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cj.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex<T> = ci.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                // Phase-align column j so the inner product is real and positive.
                let phase = gamma.conj() / g;
                for z in cj.iter_mut() {
                    *z = *z * phase;
                }
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * s;
                    *b = x * s + y * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: JACOBI_MAX_SWEEPS,
        });
    }
    let mut sv: Vec<T> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}

fn power_iteration_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    let n = m.dim;
    let gram = m.adjoint().matmul(m);
    // Deterministic, generic start vector with no special alignment.
    let mut v: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let x = T::from_count(i + 1);
            Complex::new(T::one() + (x * T::lit(0.618_033_988_749_895)).sin(), T::lit(0.1) * x.cos())
        })
        .collect();
    normalize(&mut v);
    let tol = T::tol(POWER_ITER_TOL, 4.0);
    let mut estimate = T::zero();
    for _ in 0..POWER_ITER_MAX {
        let w = mat_vec(&gram, &v);
        let rayleigh: T = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let nw = vec_norm(&w);
        if nw == T::zero() {
            return T::zero();
        }
        v = w.into_iter().map(|z| z / nw).collect();
        if (rayleigh - estimate).abs() <= tol * rayleigh.abs() {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    estimate.max(T::zero()).sqrt()
}

fn mat_vec<T: Real>(m: &ComplexMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = m.dim;
    (0..n)
        .map(|i| m.data[i * n..(i + 1) * n].iter().zip(v).map(|(&a, &b)| a * b).sum())
        .collect()
}

fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn normalize<T: Real>(v: &mut [Complex<T>]) {
    let nv = vec_norm(v);
    for z in v.iter_mut() {
        *z = *z / nv;
    }
}

// ---------------------------------------------------------------------------
// LU solve

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Factors `m`, failing when a pivot falls below `1e-14 * ||m||`.
    pub fn new(m: &ComplexMatrix<T>) -> Result<Self> {
        let threshold = T::tol(SINGULAR_PIVOT_REL, 4.0) * op_norm(m)?;
        let n = m.dim;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == T::zero() {
                return Err(Error::Singular {
                    pivot: k,
                    threshold: threshold.to_f64_lossy(),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Solves `m x = rhs` column by column.
    pub fn solve(&self, rhs: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let n = self.lu.dim;
        if rhs.dim != n {
            return Err(invalid(format!(
                "right-hand side has dimension {}, expected {n}",
                rhs.dim
            )));
        }
        let mut x = ComplexMatrix::zeros(n);
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for c in 0..n {
            for i in 0..n {
                col[i] = rhs[(self.perm[i], c)];
            }
            for i in 0..n {
                let mut acc = col[i];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * col[k];
                }
                col[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = col[i];
                for k in i + 1..n {
                    acc -= self.lu[(i, k)] * col[k];
                }
                col[i] = acc / self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, c)] = col[i];
            }
        }
        Ok(x)
    }
}

/// Solves `m x = rhs`.
pub fn solve<T: Real>(m: &ComplexMatrix<T>, rhs: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    rhs.check_finite()?;
    if rhs.dim != m.dim {
        return Err(invalid(format!(
            "right-hand side has dimension {}, expected {}",
            rhs.dim, m.dim
        )));
    }
    Lu::new(m)?.solve(rhs)
}

pub fn inverse<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    solve(m, &ComplexMatrix::identity(m.dim))
}

/// `R(z, m) = (z I - m)^{-1}`.
pub fn resolvent<T: Real>(m: &ComplexMatrix<T>, z: Complex<T>) -> Result<ComplexMatrix<T>> {
    inverse(&(-m).shift(z))
}

// ---------------------------------------------------------------------------
// Eigenvalues: Hessenberg reduction followed by shifted complex QR.

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with real `c`.
#[derive(Clone, Copy)]
struct Givens<T> {
    c: T,
    s: Complex<T>,
}

impl<T: Real> Givens<T> {
    /// Rotation that maps `(a, b)` to `(r, 0)`.
    fn zeroing(a: Complex<T>, b: Complex<T>) -> Option<Self> {
        let nb = b.norm();
        if nb == T::zero() {
            return None;
        }
        let na = a.norm();
        let r = na.hypot(nb);
        let phase = if na == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            a / na
        };
        Some(Self {
            c: na / r,
            s: phase * b.conj() / r,
        })
    }

    /// Left-multiply rows `p, p+1` by `G`, restricted to columns `cols`.
    fn rows(&self, h: &mut ComplexMatrix<T>, p: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let (x, y) = (h[(p, j)], h[(p + 1, j)]);
            h[(p, j)] = x * self.c + self.s * y;
            h[(p + 1, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Right-multiply columns `p, p+1` by `G^H`, restricted to rows `rows`.
    fn cols(&self, h: &mut ComplexMatrix<T>, p: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let (x, y) = (h[(i, p)], h[(i, p + 1)]);
            h[(i, p)] = x * self.c + y * self.s.conj();
            h[(i, p + 1)] = -x * self.s + y * self.c;
        }
    }
}

fn hessenberg<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = m.dim;
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        for i in (k + 2..n).rev() {
            if let Some(g) = Givens::zeroing(h[(i - 1, k)], h[(i, k)]) {
                g.rows(&mut h, i - 1, k..n);
                g.cols(&mut h, i - 1, 0..n);
                h[(i, k)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    h
}

/// Maximum QR sweeps allowed per eigenvalue before giving up.
const QR_SWEEPS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of `m`, with multiplicity, in the order they deflate.
pub fn eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<Complex<T>>> {
    m.check_finite()?;
    let n = m.dim;
    let mut h = hessenberg(m);
    let mut out = Vec::with_capacity(n);
    let eps = T::epsilon();
    let scale = m.max_abs().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let reference = if diag == T::zero() { scale } else { diag };
            if sub <= eps * reference {
                h[(l, l - 1)] = Complex::new(T::zero(), T::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > QR_SWEEPS_PER_EIGENVALUE {
            return Err(Error::NoConvergence { iterations: total });
        }
        let shift = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * T::lit(1.5), T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let g = Givens::zeroing(h[(k, k)], h[(k + 1, k)]);
            if let Some(g) = g {
                g.rows(&mut h, k, k..hi + 1);
                h[(k + 1, k)] = Complex::new(T::zero(), T::zero());
            }
            rots.push(g);
        }
        for (k, g) in (l..hi).zip(rots) {
            if let Some(g) = g {
                g.cols(&mut h, k, l..(k + 2).min(hi + 1));
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(out)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

// ---------------------------------------------------------------------------
// JSON file format: {"dim": n, "re": [[...]], "im": [[...]]}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MatrixFile<T> {
    pub dim: usize,
    pub re: Vec<Vec<T>>,
    pub im: Vec<Vec<T>>,
}

impl<T: Real> From<&ComplexMatrix<T>> for MatrixFile<T> {
    fn from(m: &ComplexMatrix<T>) -> Self {
        let n = m.dim;
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { dim: n, re, im }
    }
}

impl<T: Real> TryFrom<MatrixFile<T>> for ComplexMatrix<T> {
    type Error = Error;

    fn try_from(f: MatrixFile<T>) -> Result<Self> {
        let n = f.dim;
        if n == 0 {
            return Err(Error::Format("dim must be at least 1".into()));
        }
        for (name, part) in [("re", &f.re), ("im", &f.im)] {
            if part.len() != n || part.iter().any(|row| row.len() != n) {
                return Err(Error::Format(format!("\"{name}\" is not a {n}x{n} array")));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("\"{name}\" has non-finite entries")));
            }
        }
        let rows = f
            .re
            .into_iter()
            .zip(f.im)
            .map(|(r, i)| r.into_iter().zip(i).map(|(a, b)| Complex::new(a, b)).collect())
            .collect();
        ComplexMatrix::from_rows(rows)
    }
}

impl<T: Real> Serialize for ComplexMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for ComplexMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = MatrixFile::<T>::deserialize(deserializer)?;
        ComplexMatrix::try_from(file).map_err(D::Error::custom)
    }
}

impl<T: Real> ComplexMatrix<T> {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn norm_of_identity_and_diagonal() {
        for n in [1, 3, 7] {
            assert_relative_eq!(op_norm(&M::identity(n)).unwrap(), 1.0, epsilon = 1e-15);
        }
        let d = M::from_real_diag(&[1.0, -3.0]).unwrap();
        assert_relative_eq!(op_norm(&d).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn norm_of_nilpotent() {
        let m = M::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_relative_eq!(op_norm(&m).unwrap(), 2.0, epsilon = 1e-14);
        let sv = singular_values(&m).unwrap();
        assert_relative_eq!(sv[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        // 70x70 diagonal-plus-shift, above the SVD cut-off.
        let n = 70;
        let mut m = M::zeros(n);
        for i in 0..n {
            m[(i, i)] = c(1.0 + i as f64 / 10.0, 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = c(0.0, 0.3);
            }
        }
        let pi = op_norm(&m).unwrap();
        let jac = singular_values(&m).unwrap()[0];
        assert_relative_eq!(pi, jac, max_relative = 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let rows = vec![vec![c(f64::NAN, 0.0)]];
        assert!(matches!(M::from_rows(rows), Err(Error::InvalidInput(_))));
        let rows = vec![vec![c(1.0, 0.0), c(0.0, 0.0)]];
        assert!(M::from_rows(rows).is_err());
    }

    #[test]
    fn solve_trivial_cases() {
        let b = M::from_rows(vec![vec![c(1.0, 2.0), c(3.0, 0.0)], vec![c(0.0, -1.0), c(5.0, 5.0)]]).unwrap();
        assert_eq!(solve(&M::identity(2), &b).unwrap(), b);
        let d = M::from_real_diag(&[2.0, 4.0]).unwrap();
        let x = solve(&d, &M::identity(2)).unwrap();
        assert_eq!(x, M::from_real_diag(&[0.5, 0.25]).unwrap());
    }

    #[test]
    fn singular_solve_is_reported() {
        let m = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&m, &M::identity(2)), Err(Error::Singular { .. })));
        assert!(matches!(inverse(&M::zeros(3)), Err(Error::Singular { .. })));
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let mut ev = eigenvalues(&M::from_real_diag(&[-1.0, -4.0]).unwrap()).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_relative_eq!(ev[0].re, -4.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1].re, -1.0, epsilon = 1e-14);

        let nil = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        for z in eigenvalues(&nil).unwrap() {
            assert!(z.norm() < 1e-14);
        }

        // Companion matrix of z^2 + 1.
        let comp = M::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let mut ev = eigenvalues(&comp).unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let m = M::from_rows(vec![vec![c(1.0, -0.5), c(0.0, 2.0)], vec![c(3.0, 0.0), c(-1.0, 1.0)]]).unwrap();
        let s = m.to_json_string();
        assert_eq!(M::from_json_str(&s).unwrap(), m);
        assert!(M::from_json_str(r#"{"dim":2,"re":[[1,2]],"im":[[0,0]]}"#).is_err());
        assert!(M::from_json_str(r#"{"dim":1,"re":[[1,2]],"im":[[0,0]]}"#).is_err());
        assert!(M::from_json_str(r#"{"dim":0,"re":[],"im":[]}"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = ComplexMatrix::<f32>::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!((op_norm(&m).unwrap() - 2.0).abs() < 1e-6);
        let d = ComplexMatrix::<f32>::from_real_diag(&[2.0, 4.0]).unwrap();
        let x = inverse(&d).unwrap();
        assert!((x[(1, 1)].re - 0.25).abs() < 1e-7);
    }
}

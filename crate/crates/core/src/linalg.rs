//! Dense complex linear algebra.
//!
//! Matrices here are small (at most a few hundred rows in practice), so the
//! eigensolver and the singular-value routine are plain cyclic Jacobi
//! iterations. Both are accurate to a few ulps relative to the matrix norm,
//! which is what the rank decisions downstream rely on.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("ragged rows"));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_column(v: &[Complex<T>]) -> Self {
        DenseMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
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

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn into_column(self, c: usize) -> Vec<Complex<T>> {
        self.column(c)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .fold(Complex::zero(), |s, x| s + x)
            })
            .collect()
    }

    pub fn adjoint(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> DenseMatrix<T> {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> DenseMatrix<T> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip_with(&self, other: &DenseMatrix<T>, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> DenseMatrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add_assign(&mut self, other: &DenseMatrix<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&self, s: Complex<T>) -> DenseMatrix<T> {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> DenseMatrix<T> {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::zero(), |s, x| s + x)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `||m - m^dag||_F / ||m||_F` (zero for the zero matrix).
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let norm = self.frobenius_norm();
        if norm == T::zero() {
            return T::zero();
        }
        self.sub(&self.adjoint()).frobenius_norm() / norm
    }

    /// `(m + m^dag) / 2`.
    pub fn hermitian_part(&self) -> DenseMatrix<T> {
        self.add(&self.adjoint()).scale_real(T::lit(0.5))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Converts to another precision.
    pub fn cast<U: Real>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// Serialized as a list of rows, each entry a `[re, im]` pair.
impl<T: Real> Serialize for DenseMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[T; 2]>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| [self[(r, c)].re, self[(r, c)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DenseMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[T; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex<T>>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
            .collect();
        DenseMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

pub fn kron<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    DenseMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

/// `u v^dag`.
pub fn outer<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> DenseMatrix<T> {
    DenseMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
}

/// `u^dag v`.
pub fn inner<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(v).fold(Complex::zero(), |s, (a, b)| s + a.conj() * b)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Unitary `G` (as `[[g00, g01], [g10, g11]]`) with `G^dag B G` diagonal for
/// the Hermitian 2x2 block `B = [[alpha, gamma], [conj(gamma), beta]]`.
fn jacobi_rotation<T: Real>(alpha: T, gamma: Complex<T>, beta: T) -> [[Complex<T>; 2]; 2] {
    let r = gamma.norm();
    let one = Complex::one();
    let zero = Complex::zero();
    if r == T::zero() {
        return [[one, zero], [zero, one]];
    }
    let phase = gamma.conj() / r;
    let tau = (beta - alpha) / (r + r);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;
    [
        [Complex::new(cs, T::zero()), Complex::new(sn, T::zero())],
        [phase * (-sn), phase * cs],
    ]
}

/// Hermitian eigendecomposition, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigh<T> {
    pub values: Vec<T>,
    /// Columns are the eigenvectors.
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> Eigh<T> {
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let d = DenseMatrix::from_diagonal(&self.values);
        self.vectors.matmul(&d).matmul(&self.vectors.adjoint())
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input must be Hermitian to `1e-10` relative Frobenius deviation
/// (precision-dependent); it is symmetrized before the iteration.
pub fn eigh<T: Real>(m: &DenseMatrix<T>) -> Result<Eigh<T>> {
    if !m.is_square() {
        return Err(Error::dims(format!("eigh of {}x{} matrix", m.rows, m.cols)));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let dev = m.hermitian_deviation();
    if dev > T::structure_tol() {
        return Err(Error::NotHermitian(dev.to_f64_lossy()));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= T::epsilon() * scale || scale == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= T::min_positive_value() {
                    continue;
                }
                let g = jacobi_rotation(a[(p, p)].re, apq, a[(q, q)].re);
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * g[0][0] + y * g[1][0];
                    a[(k, q)] = x * g[0][1] + y * g[1][1];
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g[0][0].conj() * x + g[1][0].conj() * y;
                    a[(q, k)] = g[0][1].conj() * x + g[1][1].conj() * y;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * g[0][0] + y * g[1][0];
                    v[(k, q)] = x * g[0][1] + y * g[1][1];
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    // Orthogonalize the columns of the taller orientation.
    let w = if m.rows >= m.cols { m.clone() } else { m.adjoint() };
    let mut cols: Vec<Vec<Complex<T>>> = (0..w.cols).map(|c| w.column(c)).collect();
    let n = cols.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&cols[p], &cols[q]);
                if gamma.norm() <= T::epsilon() * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(alpha, gamma, beta);
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = a * g[0][0] + b * g[1][0];
                    *y = a * g[0][1] + b * g[1][1];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Absolute cutoff below which a singular value (or a PSD eigenvalue)
/// counts as zero: `max_dim * scale * rank_eps`.
pub fn rank_cutoff<T: Real>(max_dim: usize, scale: T) -> T {
    T::lit(max_dim as f64) * scale * T::rank_eps()
}

/// Number of singular values above [`rank_cutoff`].
pub fn numerical_rank<T: Real>(m: &DenseMatrix<T>) -> Result<usize> {
    if m.rows == 0 || m.cols == 0 {
        return Err(Error::dims("rank of an empty matrix"));
    }
    let sv = singular_values(m)?;
    let smax = sv[0];
    if smax == T::zero() {
        return Ok(0);
    }
    let tau = rank_cutoff(m.rows.max(m.cols), smax);
    Ok(sv.iter().filter(|&&s| s > tau).count())
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    Ok(eigh(m)?.values.iter().map(|l| l.abs()).sum())
}

/// Partial trace keeping the subsystems in `keep`, in their original order.
/// `dims` lists the subsystem dimensions, first factor leftmost.
pub fn partial_trace<T: Real>(m: &DenseMatrix<T>, dims: &[usize], keep: &[usize]) -> Result<DenseMatrix<T>> {
    if !m.is_square() {
        return Err(Error::dims("partial trace of a non-square matrix"));
    }
    let total: usize = dims.iter().product();
    if total != m.rows {
        return Err(Error::dims(format!(
            "subsystem dimensions multiply to {total}, matrix is {}x{}",
            m.rows, m.cols
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::dims(format!("invalid subsystem selection {keep:?}")));
    }
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let traced_dim = total / kept_dim;

    // full[a][t] = flat index for kept multi-index a and traced multi-index t
    let mut full = vec![vec![0usize; traced_dim]; kept_dim];
    for idx in 0..total {
        let mut rem = idx;
        let mut digits = vec![0usize; dims.len()];
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut a, mut t) = (0usize, 0usize);
        for (s, &d) in digits.iter().enumerate() {
            if keep_sorted.binary_search(&s).is_ok() {
                a = a * dims[s] + d;
            } else {
                t = t * dims[s] + d;
            }
        }
        full[a][t] = idx;
    }

    Ok(DenseMatrix::from_fn(kept_dim, kept_dim, |a, b| {
        (0..traced_dim).fold(Complex::zero(), |s, t| s + m[(full[a][t], full[b][t])])
    }))
}

/// `<psi|rho|psi>` for a normalized state and a unit-trace Hermitian `rho`.
pub fn fidelity<T: Real>(psi: &[Complex<T>], rho: &DenseMatrix<T>) -> Result<T> {
    if !rho.is_square() || rho.rows != psi.len() {
        return Err(Error::dims(format!(
            "state of length {} against {}x{} density matrix",
            psi.len(),
            rho.rows,
            rho.cols
        )));
    }
    let tol = T::reconstruction_tol();
    let nrm = norm(psi);
    if (nrm - T::one()).abs() > tol {
        return Err(Error::NotNormalized(format!("state norm {nrm}")));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
        return Err(Error::NotNormalized(format!("density matrix trace {tr}")));
    }
    let dev = rho.hermitian_deviation();
    if dev > T::structure_tol() {
        return Err(Error::NotHermitian(dev.to_f64_lossy()));
    }
    let f = inner(psi, &rho.matvec(psi));
    if f.im.abs() > T::structure_tol() {
        return Err(Error::NotHermitian(f.im.to_f64_lossy()));
    }
    Ok(f.re.max(T::zero()).min(T::one()))
}

/// Haar-random pure state: normalized vector of complex Gaussians.
pub fn haar_state<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let nrm = norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

/// Haar-random unitary from the QR of a complex Gaussian matrix
/// (Gram-Schmidt on the columns).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = haar_state::<T, R>(dim, rng);
        for u in &cols {
            let proj = inner(u, &v);
            for (x, &y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let nrm = norm(&v);
        if nrm > T::lit(1e-3) {
            cols.push(v.into_iter().map(|z| z / nrm).collect());
        }
    }
    DenseMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = DenseMatrix<f64>;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> M {
        let v = haar_state::<f64, _>(rows * cols, rng);
        M::from_fn(rows, cols, |r, c| v[r * cols + c])
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> M {
        random_matrix(dim, dim, rng).hermitian_part()
    }

    fn pauli_x() -> M {
        M::from_fn(2, 2, |r, c| if r != c { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&M::identity(4)).unwrap(), 4);
        let p0 = M::from_fn(2, 2, |r, c| if r == 0 && c == 0 { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
        assert_eq!(numerical_rank(&p0).unwrap(), 1);
        assert_eq!(numerical_rank(&M::zeros(3, 5)).unwrap(), 0);
        assert!(numerical_rank(&M::zeros(0, 0)).is_err());
        let mut bad = M::identity(2);
        bad[(0, 1)] = cx(f64::NAN, 0.0);
        assert_eq!(numerical_rank(&bad), Err(Error::NonFinite));
    }

    #[test]
    fn pauli_gram_has_full_rank() {
        // Hilbert-Schmidt Gram matrix of {I, X, Y, Z}/sqrt(2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mats: Vec<M> = ["I", "X", "Y", "Z"]
            .iter()
            .map(|l| {
                let p: crate::pauli::PauliString = l.parse().unwrap();
                p.to_dense::<f64>().unwrap().scale_real(s)
            })
            .collect();
        let gram = M::from_fn(4, 4, |i, j| mats[i].adjoint().matmul(&mats[j]).trace());
        assert!(gram.sub(&M::identity(4)).frobenius_norm() < 1e-14);
        assert_eq!(numerical_rank(&gram).unwrap(), 4);
    }

    #[test]
    fn rank_of_low_rank_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (rows, inner_dim, cols) in [(8, 3, 6), (5, 5, 9), (12, 1, 12), (4, 7, 4)] {
            let a = random_matrix(rows, inner_dim, &mut rng);
            let b = random_matrix(inner_dim, cols, &mut rng);
            let expected = inner_dim.min(rows).min(cols);
            assert_eq!(numerical_rank(&a.matmul(&b)).unwrap(), expected);
        }
    }

    #[test]
    fn eigh_examples() {
        let d = M::from_diagonal(&[1.0, 3.0]);
        let e = eigh(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);

        let e = eigh(&pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);
        let plus = e.vectors.column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((inner(&plus, &[cx(s, 0.0), cx(s, 0.0)]).norm() - 1.0).abs() < 1e-14);

        let mut nonherm = M::identity(2);
        nonherm[(0, 1)] = cx(1.0, 0.0);
        assert!(matches!(eigh(&nonherm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [1, 2, 8, 17, 40] {
            let h = random_hermitian(dim, &mut rng);
            let e = eigh(&h).unwrap();
            let rel = e.reconstruct().sub(&h).frobenius_norm() / h.frobenius_norm();
            assert!(rel < 1e-9, "dim {dim}: {rel}");
            let unitarity = e.vectors.adjoint().matmul(&e.vectors).sub(&M::identity(dim));
            assert!(unitarity.frobenius_norm() < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn partial_trace_examples() {
        let rho = M::from_fn(2, 2, |r, c| cx([[0.7, 0.1], [0.1, 0.3]][r][c], [[0.0, -0.2], [0.2, 0.0]][r][c]));
        let sigma = M::from_diagonal(&[0.25, 0.5, 0.75]);
        let prod = kron(&rho, &sigma);
        let out = partial_trace(&prod, &[2, 3], &[0]).unwrap();
        assert!(out.sub(&rho.scale_real(1.5)).frobenius_norm() < 1e-14);
        let out = partial_trace(&prod, &[2, 3], &[1]).unwrap();
        assert!(out.sub(&sigma).frobenius_norm() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)];
        let b = outer(&bell, &bell);
        for k in 0..2 {
            let red = partial_trace(&b, &[2, 2], &[k]).unwrap();
            assert!(red.sub(&M::identity(2).scale_real(0.5)).frobenius_norm() < 1e-15);
        }
        let all = partial_trace(&b, &[2, 2], &[0, 1]).unwrap();
        assert_eq!(all, b);
        assert!(partial_trace(&b, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&b, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn partial_trace_middle_subsystem_keeps_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let c = random_hermitian(2, &mut rng);
        let abc = kron(&kron(&a, &b), &c);
        let ac = partial_trace(&abc, &[2, 3, 2], &[2, 0]).unwrap();
        let expected = kron(&a, &c).scale(b.trace());
        assert!(ac.sub(&expected).frobenius_norm() < 1e-13);
    }

    #[test]
    fn fidelity_examples() {
        let zero = [cx(1.0, 0.0), cx(0.0, 0.0)];
        let one = [cx(0.0, 0.0), cx(1.0, 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = haar_state::<f64, _>(4, &mut rng);
        assert!((fidelity(&psi, &outer(&psi, &psi)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(fidelity(&zero, &outer(&one, &one)).unwrap(), 0.0);
        assert!((fidelity(&zero, &M::identity(2).scale_real(0.5)).unwrap() - 0.5).abs() < 1e-15);
        let unnormalized = [cx(1.0, 0.0), cx(1.0, 0.0)];
        assert!(matches!(
            fidelity(&unnormalized, &M::identity(2).scale_real(0.5)),
            Err(Error::NotNormalized(_))
        ));
        assert!(fidelity(&zero, &M::identity(2)).is_err());
    }

    #[test]
    fn f32_eigh_and_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h64 = random_hermitian(10, &mut rng);
        let h: DenseMatrix<f32> = h64.cast();
        let e = eigh(&h).unwrap();
        let rel = e.reconstruct().sub(&h).frobenius_norm() / h.frobenius_norm();
        assert!(rel < f32::reconstruction_tol());
        let a: DenseMatrix<f32> = random_matrix(6, 2, &mut rng).cast();
        assert_eq!(numerical_rank(&a.matmul(&a.adjoint())).unwrap(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rank_invariant_under_unitaries(seed in any::<u64>(), dim in 2usize..10, r in 1usize..10) {
            let r = r.min(dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(dim, r, &mut rng).matmul(&random_matrix(r, dim, &mut rng));
            let u = haar_unitary::<f64, _>(dim, &mut rng);
            let v = haar_unitary::<f64, _>(dim, &mut rng);
            let base = numerical_rank(&a).unwrap();
            prop_assert_eq!(base, r);
            prop_assert_eq!(numerical_rank(&u.matmul(&a).matmul(&v)).unwrap(), base);
        }

        #[test]
        fn eigh_spectral_identities(seed in any::<u64>(), dim in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(dim, &mut rng);
            let e = eigh(&h).unwrap();
            let sum: f64 = e.values.iter().sum();
            let sq: f64 = e.values.iter().map(|l| l * l).sum();
            let fro = h.frobenius_norm();
            prop_assert!((sum - h.trace().re).abs() < 1e-9);
            prop_assert!((sq - fro * fro).abs() < 1e-9);
        }

        #[test]
        fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_matrix(da * db, da * db, &mut rng);
            let rho = g.matmul(&g.adjoint());
            let rho = rho.scale_real(1.0 / rho.trace().re);
            for keep in [&[0usize][..], &[1usize][..]] {
                let red = partial_trace(&rho, &[da, db], keep).unwrap();
                prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
                let e = eigh(&red).unwrap();
                prop_assert!(e.values.iter().all(|&l| l > -1e-12));
            }
        }
    }
}

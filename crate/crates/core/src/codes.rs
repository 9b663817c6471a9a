//! Code spaces given as isometries from `k` logical to `n` physical qubits.

use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, DenseMatrix};
use crate::scalar::Real;

/// An `[[n, k]]` code. Column `l` of the isometry is the codeword for the
/// logical computational basis state `|l>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeSpace<T: Real> {
    n: usize,
    k: usize,
    isometry: DenseMatrix<T>,
}

impl<T: Real> CodeSpace<T> {
    /// Validates shape and orthonormality of the columns.
    pub fn from_isometry(n: usize, k: usize, isometry: DenseMatrix<T>) -> Result<Self> {
        limits::check_dense(n)?;
        if k > n || isometry.rows() != 1 << n || isometry.cols() != 1 << k {
            return Err(Error::dims(format!(
                "isometry is {}x{}, expected {}x{} for [[{n},{k}]]",
                isometry.rows(),
                isometry.cols(),
                1usize << n,
                1usize << k
            )));
        }
        let gram = isometry.adjoint().matmul(&isometry);
        let dev = gram.max_abs_diff(&DenseMatrix::identity(1 << k));
        if dev > T::structure_tol() {
            return Err(Error::InvalidArgument(format!(
                "isometry columns not orthonormal (deviation {dev})"
            )));
        }
        Ok(CodeSpace { n, k, isometry })
    }

    /// Codewords `|0...0>` and `|1...1>` on `n = 2m + 1` qubits.
    pub fn repetition_code(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("repetition code needs m >= 1".into()));
        }
        let n = 2 * m + 1;
        limits::check_dense(n)?;
        let mut v = DenseMatrix::zeros(1 << n, 2);
        v[(0, 0)] = Complex::one();
        v[((1 << n) - 1, 1)] = Complex::one();
        Self::from_isometry(n, 1, v)
    }

    /// Encodes `k = n - 2` data qubits as `|psi> (x) |0> (x) |+>`, ancillas
    /// last.
    pub fn ancilla_code(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("ancilla code needs n >= 3, got {n}")));
        }
        limits::check_dense(n)?;
        let k = n - 2;
        let amp = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let mut v = DenseMatrix::zeros(1 << n, 1 << k);
        for l in 0..1usize << k {
            // ancilla bits: (first, second) = (0, +)
            v[(l << 2, l)] = amp;
            v[((l << 2) | 1, l)] = amp;
        }
        Self::from_isometry(n, k, v)
    }

    /// Orthonormalizes the given vectors with modified Gram-Schmidt. The
    /// count must be a power of two and the vectors independent (a residual
    /// below `1e-10` of the original norm counts as dependent).
    pub fn from_codewords(vectors: &[Vec<Complex<T>>]) -> Result<Self> {
        let count = vectors.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(count));
        }
        let dim = vectors[0].len();
        if dim == 0 || !dim.is_power_of_two() || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::dims("codewords must share a power-of-two length"));
        }
        let n = dim.trailing_zeros() as usize;
        let k = count.trailing_zeros() as usize;
        let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(count);
        for v in vectors {
            let original = linalg::norm(v);
            let mut w = v.clone();
            for u in &basis {
                let proj = linalg::inner(u, &w);
                for (x, &y) in w.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
            let residual = linalg::norm(&w);
            if original == T::zero() || residual <= T::structure_tol() * original {
                return Err(Error::DependentVectors);
            }
            basis.push(w.into_iter().map(|z| z / residual).collect());
        }
        let iso = DenseMatrix::from_fn(dim, count, |r, c| basis[c][r]);
        Self::from_isometry(n, k, iso)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn physical_dim(&self) -> usize {
        1 << self.n
    }

    pub fn logical_dim(&self) -> usize {
        1 << self.k
    }

    pub fn isometry(&self) -> &DenseMatrix<T> {
        &self.isometry
    }

    pub fn projector(&self) -> DenseMatrix<T> {
        self.isometry.matmul(&self.isometry.adjoint())
    }

    pub fn codeword(&self, l: usize) -> Vec<Complex<T>> {
        self.isometry.column(l)
    }

    /// `V |psi>` for a logical state.
    pub fn encode(&self, logical: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if logical.len() != self.logical_dim() {
            return Err(Error::dims(format!(
                "logical state of length {} for k = {}",
                logical.len(),
                self.k
            )));
        }
        Ok(self.isometry.matvec(logical))
    }

    /// `V^dag rho V`.
    pub fn compress(&self, rho: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.isometry.adjoint().matmul(rho).matmul(&self.isometry)
    }

    /// `||(I - P_Q) rho||_F`, zero iff `rho` is supported on the code.
    pub fn leakage(&self, rho: &DenseMatrix<T>) -> Result<T> {
        if rho.rows() != self.physical_dim() {
            return Err(Error::dims("state dimension does not match code"));
        }
        let inside = self.isometry.matmul(&self.isometry.adjoint().matmul(rho));
        Ok(rho.sub(&inside).frobenius_norm())
    }

    /// Encoded Haar-random logical state.
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex<T>> {
        let psi = linalg::haar_state::<T, R>(self.logical_dim(), rng);
        self.isometry.matvec(&psi)
    }

    /// `(1/sqrt(2^k)) sum_l |l>` encoded.
    pub fn logical_plus(&self) -> Vec<Complex<T>> {
        let a = T::one() / T::lit(self.logical_dim() as f64).sqrt();
        let psi = vec![Complex::new(a, T::zero()); self.logical_dim()];
        self.isometry.matvec(&psi)
    }
}

/// JSON or shorthand code description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Family {
        family: CodeFamily,
        n: usize,
    },
    Codewords {
        n: usize,
        k: usize,
        codewords: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Repetition,
    Ancilla,
}

impl CodeSpec {
    pub fn build<T: Real>(&self) -> Result<CodeSpace<T>> {
        match self {
            CodeSpec::Family {
                family: CodeFamily::Repetition,
                n,
            } => {
                if n % 2 == 0 || *n < 3 {
                    return Err(Error::InvalidArgument(format!(
                        "repetition code needs odd n >= 3, got {n}"
                    )));
                }
                CodeSpace::repetition_code(n / 2)
            }
            CodeSpec::Family {
                family: CodeFamily::Ancilla,
                n,
            } => CodeSpace::ancilla_code(*n),
            CodeSpec::Codewords { n, k, codewords } => {
                limits::check_dense(*n)?;
                if codewords.len() != 1 << k {
                    return Err(Error::dims(format!(
                        "{} codewords given for k = {k}",
                        codewords.len()
                    )));
                }
                let vecs: Vec<Vec<Complex<T>>> = codewords
                    .iter()
                    .map(|v| v.iter().map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im))).collect())
                    .collect();
                if vecs.iter().any(|v| v.len() != 1 << n) {
                    return Err(Error::dims(format!("codewords must have length 2^{n}")));
                }
                CodeSpace::from_codewords(&vecs)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("code spec: {e}")))
    }
}

/// Parses `repetition:N` or `ancilla:N`.
impl FromStr for CodeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, n) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected family:n, got {s:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid qubit count in {s:?}")))?;
        let family = match name.trim() {
            "repetition" => CodeFamily::Repetition,
            "ancilla" => CodeFamily::Ancilla,
            other => return Err(Error::Parse(format!("unknown code family {other:?}"))),
        };
        Ok(CodeSpec::Family { family, n })
    }
}

impl<T: Real> CodeSpace<T> {
    pub fn to_spec(&self) -> CodeSpec {
        CodeSpec::Codewords {
            n: self.n,
            k: self.k,
            codewords: (0..self.logical_dim())
                .map(|l| {
                    self.codeword(l)
                        .iter()
                        .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                        .collect()
                })
                .collect(),
        }
    }
}

/// Complex zero/one helpers for building codeword lists by hand.
pub fn basis_vector<T: Real>(dim: usize, index: usize) -> Vec<Complex<T>> {
    let mut v = vec![Complex::zero(); dim];
    v[index] = Complex::one();
    v
}

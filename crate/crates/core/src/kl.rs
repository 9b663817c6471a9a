//! Knill-Laflamme correctability and degeneracy, plus the two equivalent
//! characterizations through the environment: the complementary channel is
//! constant on the code, and reference and environment end up uncorrelated.
//!
//! Index conventions: with Kraus operators `L_i` and encoding isometry `V`,
//!
//! ```text
//! M_ij      = Tr[V^dag L_i^dag L_j V] / 2^k
//! rho^E_ij  = Tr[L_i rho L_j^dag]
//! ```
//!
//! so that for a correctable pair `rho^E = M^T` for every code state.

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{Channel, KrausSet};
use crate::codes::CodeSpace;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, outer, DenseMatrix};
use crate::scalar::Real;

/// `L_j V` for every Kraus operator.
pub(crate) fn encoded_errors<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
) -> Result<Vec<DenseMatrix<T>>> {
    if channel.input_dim() != code.physical_dim() {
        return Err(Error::dims(format!(
            "channel input dimension {} vs code on {} qubits",
            channel.input_dim(),
            code.n()
        )));
    }
    (0..channel.kraus_len())
        .map(|j| channel.apply_kraus(j, code.isometry()))
        .collect()
}

/// Frobenius inner product `Tr[a^dag b]`.
fn hs_inner<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Complex<T> {
    a.data()
        .iter()
        .zip(b.data())
        .fold(Complex::zero(), |s, (x, y)| s + x.conj() * y)
}

#[derive(Debug, Clone)]
pub struct KlMatrix<T: Real> {
    pub m: DenseMatrix<T>,
    /// `max_ij ||V^dag L_i^dag L_j V - M_ij I||_F`.
    pub residual: T,
}

pub fn kl_matrix<T: Real, C: Channel<T> + ?Sized>(code: &CodeSpace<T>, channel: &C) -> Result<KlMatrix<T>> {
    let a = encoded_errors(code, channel)?;
    Ok(kl_from_encoded(&a, code.logical_dim()))
}

pub(crate) fn kl_from_encoded<T: Real>(a: &[DenseMatrix<T>], d: usize) -> KlMatrix<T> {
    let len = a.len();
    let inv_d = T::one() / T::lit(d as f64);
    let mut m = DenseMatrix::zeros(len, len);
    let mut residual = T::zero();
    let ident = DenseMatrix::identity(d);
    for i in 0..len {
        let ai_dag = a[i].adjoint();
        for j in i..len {
            let b = ai_dag.matmul(&a[j]);
            let mij = b.trace() * inv_d;
            let dev = b.sub(&ident.scale(mij)).frobenius_norm();
            residual = residual.max(dev);
            m[(i, j)] = mij;
            m[(j, i)] = mij.conj();
        }
    }
    KlMatrix { m, residual }
}

#[derive(Debug, Clone, Serialize)]
pub struct KlReport<T: Real> {
    #[serde(rename = "M")]
    pub m: DenseMatrix<T>,
    pub residual: T,
    pub tolerance: T,
    pub correctable: bool,
    pub degenerate: bool,
    #[serde(rename = "rank_M")]
    pub rank_m: usize,
    pub rank_choi: usize,
    pub kraus_count: usize,
    /// The supplied Kraus set was not minimal and was replaced by a minimal
    /// one before evaluating `M`.
    pub minimized: bool,
}

impl<T: Real> KlReport<T> {
    pub fn summary(&self) -> KlSummary {
        KlSummary {
            residual: self.residual.to_f64_lossy(),
            correctable: self.correctable,
            degenerate: self.degenerate,
            rank_m: self.rank_m,
            rank_choi: self.rank_choi,
            kraus_count: self.kraus_count,
            minimized: self.minimized,
        }
    }
}

/// [`KlReport`] without the matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlSummary {
    pub residual: f64,
    pub correctable: bool,
    pub degenerate: bool,
    #[serde(rename = "rank_M")]
    pub rank_m: usize,
    pub rank_choi: usize,
    pub kraus_count: usize,
    pub minimized: bool,
}

/// Knill-Laflamme test against a minimal Kraus representation.
/// `tol` defaults to [`Real::correctability_tol`].
pub fn is_correctable<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
    tol: Option<T>,
) -> Result<KlReport<T>> {
    let tol = tol.unwrap_or_else(T::correctability_tol);
    let rank_choi = channel.choi_rank()?;
    let minimized = channel.kraus_len() != rank_choi;
    let kl = if minimized {
        kl_matrix(code, &channel.minimal_kraus()?)?
    } else {
        kl_matrix(code, channel)?
    };
    let rank_m = linalg::numerical_rank(&kl.m)?;
    Ok(KlReport {
        kraus_count: kl.m.rows(),
        correctable: kl.residual <= tol,
        degenerate: rank_m < rank_choi,
        rank_m,
        rank_choi,
        minimized,
        residual: kl.residual,
        tolerance: tol,
        m: kl.m,
    })
}

/// `M` is singular relative to the minimal Kraus cardinality.
pub fn is_degenerate<T: Real, C: Channel<T> + ?Sized>(code: &CodeSpace<T>, channel: &C) -> Result<bool> {
    Ok(is_correctable(code, channel, None)?.degenerate)
}

/// Environment state `rho^E_ij = Tr[L_i rho L_j^dag]` produced by the
/// Stinespring dilation `|psi> -> sum_i L_i |psi> |e_i>`. `input` is a
/// physical density matrix supported on the code.
pub fn complementary_state<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
    input: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let a = encoded_errors(code, channel)?;
    complementary_from_encoded(code, &a, input)
}

fn complementary_from_encoded<T: Real>(
    code: &CodeSpace<T>,
    a: &[DenseMatrix<T>],
    input: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let leak = code.leakage(input)?;
    if leak > T::structure_tol() {
        return Err(Error::OutsideCode(leak.to_f64_lossy()));
    }
    let tr = input.trace();
    if (tr.re - T::one()).abs() > T::reconstruction_tol() {
        return Err(Error::NotNormalized(format!("input trace {tr}")));
    }
    // rho = V sigma V^dag, so Tr[L_i rho L_j^dag] = <A_j, A_i sigma>
    let sigma = code.compress(input);
    let a_sigma: Vec<DenseMatrix<T>> = a.iter().map(|ai| ai.matmul(&sigma)).collect();
    let len = a.len();
    Ok(DenseMatrix::from_fn(len, len, |i, j| hs_inner(&a[j], &a_sigma[i])))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeletionReport<T: Real> {
    /// Code states tried: `|0>`, `|+>` and the random samples.
    pub inputs: usize,
    /// `max ||rho^E(input) - M^T||_F` over the inputs.
    pub max_deviation: T,
    /// The complementary channel is constant on the tried inputs, i.e. it is
    /// a deletion channel on the code.
    pub constant: bool,
}

/// Checks that the complementary channel outputs `M^T` for the logical
/// `|0>`, the logical `|+>`, and `samples` seeded Haar-random code states.
pub fn deletion_test<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
    samples: usize,
    seed: u64,
    tol: Option<T>,
) -> Result<DeletionReport<T>> {
    let tol = tol.unwrap_or_else(T::correctability_tol);
    let a = encoded_errors(code, channel)?;
    let mt = kl_matrix(code, channel)?.m.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![code.codeword(0), code.logical_plus()];
    states.extend((0..samples).map(|_| code.random_state(&mut rng)));
    let mut max_deviation = T::zero();
    for psi in &states {
        let env = complementary_from_encoded(code, &a, &outer(psi, psi))?;
        max_deviation = max_deviation.max(env.sub(&mt).frobenius_norm());
    }
    Ok(DeletionReport {
        inputs: states.len(),
        constant: max_deviation <= tol,
        max_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck<T: Real> {
    pub is_product: bool,
    /// `||rho^{RE} - rho^R (x) rho^E||_1`.
    pub deviation: T,
}

/// Purifies the maximally mixed code state with a `2^k`-dimensional
/// reference, applies the Stinespring dilation of `channel`, traces out the
/// system and measures how far the reference-environment state is from
/// product form.
pub fn reference_environment_product_check<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
) -> Result<ProductCheck<T>> {
    let a = encoded_errors(code, channel)?;
    let (d, env) = (code.logical_dim(), a.len());
    let joint = d * env;
    let limit = 1usize << limits::dense_qubit_limit();
    if joint > limit {
        return Err(Error::Guard {
            what: "reference x environment dimension",
            value: joint,
            limit,
        });
    }
    // |Psi> = sum_{r,i} (L_i V |r>)_s / sqrt(d)  |s>|r>|e_i>
    let inv = T::one() / T::lit(d as f64).sqrt();
    let psi = DenseMatrix::from_fn(code.physical_dim(), joint, |s, c| a[c % env][(s, c / env)] * inv);
    // Tr_S |Psi><Psi| with (r, i) as the remaining index
    let rho_re = psi.adjoint().matmul(&psi).transpose();
    let rho_r = linalg::partial_trace(&rho_re, &[d, env], &[0])?;
    let rho_e = linalg::partial_trace(&rho_re, &[d, env], &[1])?;
    let diff = rho_re.sub(&linalg::kron(&rho_r, &rho_e));
    let deviation = linalg::trace_norm_hermitian(&diff.hermitian_part())?;
    Ok(ProductCheck {
        is_product: deviation <= T::correctability_tol(),
        deviation,
    })
}

/// Kraus set of a channel in the representation used for `M`: the channel
/// itself when minimal, otherwise its minimal decomposition.
pub fn minimal_representation<T: Real, C: Channel<T> + ?Sized>(channel: &C) -> Result<KrausSet<T>> {
    if channel.is_minimal()? {
        channel.to_kraus_set()
    } else {
        channel.minimal_kraus()
    }
}

//! Recovery channels and simulation.
//!
//! Every recovery Kraus operator is kept in factored form `R = G H^dag` with
//! `G` and `H` having orthonormal columns: `H` spans the subspace the
//! operator detects and `G` is where it sends it. A syndrome outcome with
//! projector `W W^dag` and Pauli correction `C` is `G = C W`, `H = W`.

use num_complex::Complex;
use num_traits::Zero;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{Channel, KrausSet, PauliChannel, ZERO_PROBABILITY};
use crate::codes::CodeSpace;
use crate::error::{Error, Result};
use crate::kl;
use crate::limits;
use crate::linalg::{self, inner, DenseMatrix};
use crate::pauli::{Letter, PauliString};
use crate::scalar::{Real, C};

#[derive(Debug, Clone)]
pub struct RecoveryOp<T: Real> {
    pub label: String,
    pub target: DenseMatrix<T>,
    pub source: DenseMatrix<T>,
    /// Added only to make the channel trace preserving off the subspace
    /// reachable from the code.
    pub completion: bool,
}

impl<T: Real> RecoveryOp<T> {
    pub fn dense(&self) -> DenseMatrix<T> {
        self.target.matmul(&self.source.adjoint())
    }

    fn apply(&self, m: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.target.matmul(&self.source.adjoint().matmul(m))
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryChannel<T: Real> {
    dim: usize,
    ops: Vec<RecoveryOp<T>>,
}

impl<T: Real> RecoveryChannel<T> {
    /// Checks shapes and `sum R^dag R = I`.
    pub fn new(dim: usize, ops: Vec<RecoveryOp<T>>) -> Result<Self> {
        let mut acc = DenseMatrix::zeros(dim, dim);
        for op in &ops {
            if op.target.rows() != dim || op.source.rows() != dim || op.target.cols() != op.source.cols() {
                return Err(Error::dims(format!("recovery operator {} has inconsistent shape", op.label)));
            }
            let g = op.target.adjoint().matmul(&op.target);
            acc.add_assign(&op.source.matmul(&g).matmul(&op.source.adjoint()));
        }
        let defect = acc.max_abs_diff(&DenseMatrix::identity(dim));
        if defect > T::structure_tol() {
            return Err(Error::InvalidArgument(format!(
                "recovery is not trace preserving (max deviation {defect})"
            )));
        }
        Ok(RecoveryChannel { dim, ops })
    }

    pub fn ops(&self) -> &[RecoveryOp<T>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Operators that act on error images of the code.
    pub fn reachable_len(&self) -> usize {
        self.ops.iter().filter(|o| !o.completion).count()
    }

    pub fn summary(&self) -> RecoverySummary {
        RecoverySummary {
            kraus_count: self.ops.len(),
            reachable: self.reachable_len(),
            completion: self.ops.len() - self.reachable_len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoverySummary {
    pub kraus_count: usize,
    pub reachable: usize,
    pub completion: usize,
}

impl<T: Real> Channel<T> for RecoveryChannel<T> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn kraus_len(&self) -> usize {
        self.ops.len()
    }

    fn apply_kraus(&self, j: usize, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if m.rows() != self.dim {
            return Err(Error::dims(format!("recovery on dimension {} vs {} rows", self.dim, m.rows())));
        }
        Ok(self.ops[j].apply(m))
    }

    fn to_kraus_set(&self) -> Result<KrausSet<T>> {
        Ok(KrausSet::new_unchecked(
            self.dim,
            self.dim,
            self.ops.iter().map(RecoveryOp::dense).collect(),
        ))
    }

    fn choi_rank(&self) -> Result<usize> {
        Channel::<T>::choi_rank(&self.to_kraus_set()?)
    }

    fn minimal_kraus(&self) -> Result<KrausSet<T>> {
        self.to_kraus_set()?.minimal_kraus()
    }
}

fn hstack<T: Real>(rows: usize, blocks: &[&DenseMatrix<T>]) -> DenseMatrix<T> {
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        for r in 0..rows {
            for c in 0..b.cols() {
                out[(r, off + c)] = b[(r, c)];
            }
        }
        off += b.cols();
    }
    out
}

/// Orthonormal basis of the complement of the column span of `q`, which
/// must have orthonormal columns. Gram-Schmidt over the standard basis.
fn orthonormal_complement<T: Real>(q: &DenseMatrix<T>) -> Result<Vec<Vec<C<T>>>> {
    let dim = q.rows();
    let want = dim - q.cols();
    let mut basis: Vec<Vec<C<T>>> = (0..q.cols()).map(|c| q.column(c)).collect();
    let mut out = Vec::with_capacity(want);
    let keep = T::lit(1e-3);
    for e in 0..dim {
        if out.len() == want {
            break;
        }
        let mut v = vec![Complex::zero(); dim];
        v[e] = Complex::new(T::one(), T::zero());
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= *bi * proj;
                }
            }
        }
        let nrm = linalg::norm(&v);
        if nrm > keep {
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v.clone());
            out.push(v);
        }
    }
    if out.len() != want {
        return Err(Error::DependentVectors);
    }
    Ok(out)
}

/// Sends the complement of the columns of `covered` onto the code, up to
/// `2^k` dimensions per operator.
fn completion_ops<T: Real>(code: &CodeSpace<T>, covered: &DenseMatrix<T>) -> Result<Vec<RecoveryOp<T>>> {
    let d = code.logical_dim();
    let v = code.isometry();
    let rest = orthonormal_complement(covered)?;
    Ok(rest
        .chunks(d)
        .enumerate()
        .map(|(i, chunk)| {
            let source = DenseMatrix::from_fn(v.rows(), chunk.len(), |r, c| chunk[c][r]);
            let target = DenseMatrix::from_fn(v.rows(), chunk.len(), |r, c| v[(r, c)]);
            RecoveryOp {
                label: format!("completion{i}"),
                target,
                source,
                completion: true,
            }
        })
        .collect())
}

/// Recovery built from the eigendecomposition `M = U D U^dag`: the rotated
/// errors `J_a = sum_j U_ja L_j` map the code onto mutually orthogonal
/// copies `J_a V`, and `R_a = V (J_a V)^dag / sqrt(D_a)` undoes each.
pub fn canonical_recovery<T: Real, Ch: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &Ch,
) -> Result<RecoveryChannel<T>> {
    limits::check_dense(code.n())?;
    let a = kl::encoded_errors(code, channel)?;
    let klm = kl::kl_from_encoded(&a, code.logical_dim());
    if klm.residual > T::correctability_tol() {
        return Err(Error::NotCorrectable(klm.residual.to_f64_lossy()));
    }
    let e = linalg::eigh(&klm.m)?;
    let lmax = e.values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let tau = linalg::rank_cutoff(a.len(), lmax);
    let ambiguous = T::lit(100.0) * tau;
    let mut ops = Vec::new();
    for (idx, &l) in e.values.iter().enumerate() {
        if l <= tau {
            continue;
        }
        if l <= ambiguous {
            return Err(Error::AmbiguousEigenvalue {
                value: l.to_f64_lossy(),
                threshold: tau.to_f64_lossy(),
            });
        }
        let mut b = DenseMatrix::zeros(code.physical_dim(), code.logical_dim());
        for (j, aj) in a.iter().enumerate() {
            let u = e.vectors[(j, idx)];
            if !u.is_zero() {
                b.add_assign(&aj.scale(u));
            }
        }
        ops.push(RecoveryOp {
            label: format!("J{idx}"),
            target: code.isometry().clone(),
            source: b.scale_real(T::one() / l.sqrt()),
            completion: false,
        });
    }
    let covered = hstack(code.physical_dim(), &ops.iter().map(|o| &o.source).collect::<Vec<_>>());
    ops.extend(completion_ops(code, &covered)?);
    RecoveryChannel::new(code.physical_dim(), ops)
}

#[derive(Debug, Clone)]
pub struct SyndromeOutcome<T: Real> {
    pub label: String,
    /// Orthonormal basis of the syndrome subspace.
    pub basis: DenseMatrix<T>,
    pub correction: PauliString,
}

impl<T: Real> SyndromeOutcome<T> {
    pub fn projector(&self) -> DenseMatrix<T> {
        self.basis.matmul(&self.basis.adjoint())
    }
}

#[derive(Debug, Clone)]
pub struct SyndromeTable<T: Real> {
    n: usize,
    outcomes: Vec<SyndromeOutcome<T>>,
}

/// Where one Pauli error sends the code under a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// `None` for weight outside every syndrome subspace.
    pub outcome: Option<usize>,
    pub probability: f64,
    /// The correction returns the code exactly, up to a global phase.
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermBranches {
    pub p: f64,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCheck {
    /// `max |W_a^dag W_b - delta_ab I|` over outcome pairs.
    pub orthogonality_defect: f64,
    /// Smallest total outcome probability over the channel's errors.
    pub min_coverage: f64,
    pub all_branches_corrected: bool,
}

impl<T: Real> SyndromeTable<T> {
    pub fn new(n: usize, outcomes: Vec<SyndromeOutcome<T>>) -> Result<Self> {
        limits::check_dense(n)?;
        for o in &outcomes {
            if o.basis.rows() != 1 << n || o.correction.num_qubits() != n {
                return Err(Error::dims(format!("outcome {} does not act on {n} qubits", o.label)));
            }
        }
        Ok(SyndromeTable { n, outcomes })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> &[SyndromeOutcome<T>] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|o| o.label.as_str()).collect()
    }

    pub fn orthogonality_defect(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.outcomes.iter().enumerate() {
            for (j, b) in self.outcomes.iter().enumerate().skip(i) {
                let g = a.basis.adjoint().matmul(&b.basis);
                let target = if i == j {
                    DenseMatrix::identity(g.rows())
                } else {
                    DenseMatrix::zeros(g.rows(), g.cols())
                };
                worst = worst.max(g.max_abs_diff(&target));
            }
        }
        worst
    }

    /// Measurement followed by correction, completed on the complement of
    /// the syndrome subspaces by mapping it onto the code.
    pub fn to_recovery(&self, code: &CodeSpace<T>) -> Result<RecoveryChannel<T>> {
        if code.n() != self.n {
            return Err(Error::dims(format!("table on {} qubits, code on {}", self.n, code.n())));
        }
        let mut ops = self
            .outcomes
            .iter()
            .map(|o| {
                Ok(RecoveryOp {
                    label: o.label.clone(),
                    target: o.correction.apply_to_matrix(&o.basis)?,
                    source: o.basis.clone(),
                    completion: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let covered = hstack(code.physical_dim(), &ops.iter().map(|o| &o.source).collect::<Vec<_>>());
        ops.extend(completion_ops(code, &covered)?);
        RecoveryChannel::new(code.physical_dim(), ops)
    }

    /// Outcome distribution and correction success for every term of
    /// `channel`, with the logical state maximally mixed.
    pub fn branches(&self, code: &CodeSpace<T>, channel: &PauliChannel) -> Result<Vec<TermBranches>> {
        if code.n() != self.n || channel.num_qubits() != self.n {
            return Err(Error::dims("table, code and channel must share the qubit count"));
        }
        let v = code.isometry();
        let d = T::lit(code.logical_dim() as f64);
        let tol = T::correctability_tol();
        channel
            .terms()
            .iter()
            .map(|term| {
                let ev = term.op.apply_to_matrix(v)?;
                let mut branches = Vec::new();
                let mut covered = 0.0;
                for (idx, o) in self.outcomes.iter().enumerate() {
                    let coeffs = o.basis.adjoint().matmul(&ev);
                    let q = (coeffs.frobenius_norm().powi(2) / d).to_f64_lossy();
                    if q <= ZERO_PROBABILITY {
                        continue;
                    }
                    covered += q;
                    let fixed = o.correction.apply_to_matrix(&o.basis.matmul(&coeffs))?;
                    let lambda = v.adjoint().matmul(&fixed).trace() / d;
                    let corrected = fixed.sub(&v.scale(lambda)).frobenius_norm() <= tol
                        && (lambda.norm() - T::one()).abs() <= tol;
                    branches.push(Branch {
                        outcome: Some(idx),
                        probability: q,
                        corrected,
                    });
                }
                if 1.0 - covered > ZERO_PROBABILITY {
                    branches.push(Branch {
                        outcome: None,
                        probability: 1.0 - covered,
                        corrected: false,
                    });
                }
                Ok(TermBranches { p: term.p, branches })
            })
            .collect()
    }

    pub fn check(&self, code: &CodeSpace<T>, channel: &PauliChannel) -> Result<TableCheck> {
        let terms = self.branches(code, channel)?;
        let min_coverage = terms
            .iter()
            .map(|t| t.branches.iter().filter(|b| b.outcome.is_some()).map(|b| b.probability).sum::<f64>())
            .fold(1.0, f64::min);
        Ok(TableCheck {
            orthogonality_defect: self.orthogonality_defect().to_f64_lossy(),
            min_coverage,
            all_branches_corrected: terms.iter().all(|t| t.branches.iter().all(|b| b.corrected)),
        })
    }
}

/// Parity checks `Z_{n-j} Z_n`, `j = 1..n-1`, of a bit pattern (qubit 0
/// first). For `n = 3` this gives the two-bit syndromes `00, 01, 10, 11`.
fn parity_label(bits: &[bool]) -> String {
    let n = bits.len();
    (1..n)
        .map(|j| if bits[n - j - 1] ^ bits[n - 1] { '1' } else { '0' })
        .collect()
}

/// Syndrome measurement for the `2m + 1` qubit repetition code against
/// correlated bit flips on subsets of the given even sizes. Outcome `S`
/// projects onto `span{X_S|0...0>, X_S|1...1>}` and corrects with `X_S`.
/// Phase errors `Z_S` of even weight act trivially on the code and `Y_S`
/// lands in the same subspace as `X_S`, so both are handled by the same
/// outcomes.
pub fn repetition_syndrome_table<T: Real>(m: usize, weights: &[usize]) -> Result<SyndromeTable<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("repetition table needs m >= 1".into()));
    }
    let n = 2 * m + 1;
    limits::check_dense(n)?;
    if weights.is_empty() || weights.iter().any(|&w| w == 0 || w % 2 == 1 || w > 2 * m) {
        return Err(Error::InvalidArgument(format!(
            "weights must be even values in 2..={}, got {weights:?}",
            2 * m
        )));
    }
    let mut sizes = weights.to_vec();
    sizes.push(0);
    sizes.sort_unstable();
    sizes.dedup();
    let dim = 1usize << n;
    let one = Complex::new(T::one(), T::zero());
    let mut outcomes = Vec::new();
    for &w in &sizes {
        for subset in crate::channels::combinations(n, w) {
            let mut bits = vec![false; n];
            subset.iter().for_each(|&q| bits[q] = true);
            let idx: usize = subset.iter().map(|&q| 1usize << (n - 1 - q)).sum();
            let mut basis = DenseMatrix::zeros(dim, 2);
            basis[(idx, 0)] = one;
            basis[(idx ^ (dim - 1), 1)] = one;
            outcomes.push(SyndromeOutcome {
                label: parity_label(&bits),
                basis,
                correction: PauliString::on(Letter::X, &subset, n)?,
            });
        }
    }
    outcomes.sort_by(|a, b| a.label.cmp(&b.label));
    SyndromeTable::new(n, outcomes)
}

/// Syndrome measurement for [`CodeSpace::ancilla_code`] against
/// fully correlated noise: the two ancillas are read in the computational
/// and `|+>, |->` bases. The correction is the full `n`-qubit string, which
/// also resets the ancillas to `|0>|+>`.
pub fn ancilla_recovery<T: Real>(n: usize) -> Result<SyndromeTable<T>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("ancilla recovery needs n >= 3, got {n}")));
    }
    limits::check_dense(n)?;
    let d = 1usize << (n - 2);
    let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let all: Vec<usize> = (0..n).collect();
    let table: [(&str, usize, bool, Option<Letter>); 4] = [
        ("0+", 0, false, None),
        ("1+", 1, false, Some(Letter::X)),
        ("1-", 1, true, Some(Letter::Y)),
        ("0-", 0, true, Some(Letter::Z)),
    ];
    let outcomes = table
        .iter()
        .map(|&(label, a1, minus, letter)| {
            let mut basis = DenseMatrix::zeros(d << 2, d);
            for l in 0..d {
                let base = (l << 2) | (a1 << 1);
                basis[(base, l)] = h;
                basis[(base | 1, l)] = if minus { -h } else { h };
            }
            Ok(SyndromeOutcome {
                label: label.to_string(),
                basis,
                correction: match letter {
                    None => PauliString::identity(n),
                    Some(l) => PauliString::on(l, &all, n)?,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SyndromeTable::new(n, outcomes)
}

/// `sum_j L_j rho L_j^dag`.
pub fn apply_channel<T: Real, Ch: Channel<T> + ?Sized>(state: &DenseMatrix<T>, channel: &Ch) -> Result<DenseMatrix<T>> {
    if !state.is_square() || state.rows() != channel.input_dim() {
        return Err(Error::dims(format!(
            "state is {}x{}, channel input dimension {}",
            state.rows(),
            state.cols(),
            channel.input_dim()
        )));
    }
    let out = channel.output_dim();
    if out > 1 << limits::dense_qubit_limit() {
        return Err(Error::Guard {
            what: "dense output dimension",
            value: out,
            limit: 1 << limits::dense_qubit_limit(),
        });
    }
    let mut acc = DenseMatrix::zeros(out, out);
    for j in 0..channel.kraus_len() {
        let half = channel.apply_kraus(j, state)?;
        acc.add_assign(&channel.apply_kraus(j, &half.adjoint())?.adjoint());
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport<T: Real> {
    pub trials: usize,
    pub seed: u64,
    pub worst_infidelity: T,
    pub mean_infidelity: T,
}

fn check_triple<T: Real, Ch: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &Ch,
    recovery: &RecoveryChannel<T>,
) -> Result<()> {
    let d = code.physical_dim();
    if channel.input_dim() != d || channel.output_dim() != d || recovery.dim() != d {
        return Err(Error::dims(format!(
            "code dimension {d}, channel {}->{}, recovery {}",
            channel.input_dim(),
            channel.output_dim(),
            recovery.dim()
        )));
    }
    Ok(())
}

/// Encodes `trials` Haar-random logical states, applies the channel then
/// the recovery and reports `1 - <psi|R(E(psi))|psi>`.
pub fn roundtrip_check<T: Real, Ch: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &Ch,
    recovery: &RecoveryChannel<T>,
    trials: usize,
    seed: u64,
) -> Result<RoundtripReport<T>> {
    check_triple(code, channel, recovery)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut total) = (T::zero(), T::zero());
    for _ in 0..trials {
        let psi = code.random_state(&mut rng);
        let col = DenseMatrix::from_column(&psi);
        let back: Vec<Vec<C<T>>> = recovery.ops().iter().map(|o| o.target.adjoint().matvec(&psi)).collect();
        let mut f = T::zero();
        for j in 0..channel.kraus_len() {
            let u = channel.apply_kraus(j, &col)?.into_column(0);
            for (op, g) in recovery.ops().iter().zip(&back) {
                f += inner(g, &op.source.adjoint().matvec(&u)).norm_sqr();
            }
        }
        let infid = (T::one() - f).max(T::zero());
        worst = worst.max(infid);
        total += infid;
    }
    Ok(RoundtripReport {
        trials,
        seed,
        worst_infidelity: worst,
        mean_infidelity: total / T::lit(trials as f64),
    })
}

/// Choi matrix of `R o E o V` (logical input, physical output), indexed
/// `(output * 2^k + input)`.
pub fn composite_choi<T: Real, Ch: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &Ch,
    recovery: &RecoveryChannel<T>,
) -> Result<DenseMatrix<T>> {
    check_triple(code, channel, recovery)?;
    let dim = code.physical_dim() * code.logical_dim();
    let limit = 1usize << limits::dense_qubit_limit();
    if dim > limit {
        return Err(Error::Guard {
            what: "composite Choi dimension",
            value: dim,
            limit,
        });
    }
    let tiny = T::structure_tol() * T::structure_tol();
    let encoded = kl::encoded_errors(code, channel)?;
    let mut choi = DenseMatrix::zeros(dim, dim);
    for a in &encoded {
        for op in recovery.ops() {
            let k = op.apply(a);
            if k.frobenius_norm().powi(2) <= tiny {
                continue;
            }
            let v = k.data();
            for r in 0..dim {
                if v[r].is_zero() {
                    continue;
                }
                for c in 0..dim {
                    choi[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
    }
    Ok(choi)
}

/// `max |Choi(R1 o E) - Choi(R2 o E)|` on the code.
pub fn channel_agreement<T: Real, Ch: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &Ch,
    first: &RecoveryChannel<T>,
    second: &RecoveryChannel<T>,
) -> Result<T> {
    Ok(composite_choi(code, channel, first)?.max_abs_diff(&composite_choi(code, channel, second)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeCount {
    pub label: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub shots: u64,
    pub seed: u64,
    pub successes: u64,
    pub success_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub outcomes: Vec<OutcomeCount>,
    /// Shots whose error left every syndrome subspace.
    pub unmatched: u64,
}

/// Shots per independent random stream.
pub const SHOT_BLOCK: u64 = 4096;

/// Samples an error term per shot, then a syndrome outcome, and counts the
/// shots whose correction restores the code exactly. Block `b` of
/// [`SHOT_BLOCK`] shots draws from stream `b` of a ChaCha8 generator seeded
/// with `seed`, so the result does not depend on the thread count.
pub fn monte_carlo_run<T: Real>(
    code: &CodeSpace<T>,
    channel: &PauliChannel,
    table: &SyndromeTable<T>,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let terms = table.branches(code, channel)?;
    let slots = table.outcomes().len();
    let labels = table.labels();
    let report = |counts: Vec<u64>, successes: u64, warning: Option<String>| MonteCarloReport {
        shots,
        seed,
        successes,
        success_fraction: if shots == 0 { 1.0 } else { successes as f64 / shots as f64 },
        warning,
        outcomes: labels
            .iter()
            .zip(&counts)
            .map(|(l, &count)| OutcomeCount {
                label: l.to_string(),
                count,
            })
            .collect(),
        unmatched: counts[slots],
    };
    if shots == 0 {
        return Ok(report(vec![0; slots + 1], 0, Some("no shots requested".into())));
    }
    let invalid = |e: rand::distr::weighted::Error| Error::InvalidProbability(e.to_string());
    let pick_term = WeightedIndex::new(terms.iter().map(|t| t.p)).map_err(invalid)?;
    let pick_branch = terms
        .iter()
        .map(|t| WeightedIndex::new(t.branches.iter().map(|b| b.probability)).map_err(invalid))
        .collect::<Result<Vec<_>>>()?;
    let blocks = shots.div_ceil(SHOT_BLOCK);
    let (counts, successes) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = SHOT_BLOCK.min(shots - b * SHOT_BLOCK);
            let mut counts = vec![0u64; slots + 1];
            let mut ok = 0u64;
            for _ in 0..len {
                let t = pick_term.sample(&mut rng);
                let br = &terms[t].branches[pick_branch[t].sample(&mut rng)];
                counts[br.outcome.unwrap_or(slots)] += 1;
                ok += u64::from(br.corrected);
            }
            (counts, ok)
        })
        .reduce(
            || (vec![0u64; slots + 1], 0),
            |(mut a, x), (b, y)| {
                a.iter_mut().zip(&b).for_each(|(p, q)| *p += q);
                (a, x + y)
            },
        );
    Ok(report(counts, successes, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Assignment, PauliTerm};
    use crate::linalg::outer;

    type Code = CodeSpace<f64>;

    fn uniform() -> Assignment {
        Assignment::uniform()
    }

    fn dense_roundtrip(code: &Code, ch: &PauliChannel, rec: &RecoveryChannel<f64>, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = code.random_state(&mut rng);
        let out = apply_channel(&apply_channel(&outer(&psi, &psi), ch).unwrap(), rec).unwrap();
        1.0 - linalg::fidelity(&psi, &out).unwrap()
    }

    #[test]
    fn repetition_table_m1() {
        let t = repetition_syndrome_table::<f64>(1, &[2]).unwrap();
        assert_eq!(t.labels(), ["00", "01", "10", "11"]);
        let corr: Vec<String> = t.outcomes().iter().map(|o| o.correction.to_string()).collect();
        assert_eq!(corr, ["+III", "+IXX", "+XIX", "+XXI"]);
        // S_01 = span{|011>, |100>}
        let p = t.outcomes()[1].projector();
        assert_eq!(p[(0b011, 0b011)].re, 1.0);
        assert_eq!(p[(0b100, 0b100)].re, 1.0);
        assert_eq!(p.trace().re, 2.0);
        assert_eq!(t.orthogonality_defect(), 0.0);
        let sum = t
            .outcomes()
            .iter()
            .fold(DenseMatrix::zeros(8, 8), |acc, o| acc.add(&o.projector()));
        assert_eq!(sum.max_abs_diff(&DenseMatrix::identity(8)), 0.0);
    }

    #[test]
    fn repetition_table_sizes() {
        assert_eq!(repetition_syndrome_table::<f64>(2, &[2, 4]).unwrap().outcomes().len(), 16);
        assert_eq!(repetition_syndrome_table::<f64>(2, &[2]).unwrap().outcomes().len(), 11);
        assert_eq!(repetition_syndrome_table::<f64>(3, &[2, 4, 6]).unwrap().outcomes().len(), 64);
        for bad in [&[][..], &[3], &[6], &[0, 2]] {
            assert!(repetition_syndrome_table::<f64>(2, bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn repetition_tables_correct_their_channels() {
        let cases = [
            (1, vec![2], PauliChannel::pairwise_correlated(3, &uniform()).unwrap()),
            (2, vec![2, 4], PauliChannel::even_weight_correlated(2, &uniform()).unwrap()),
        ];
        for (m, w, ch) in cases {
            let code = Code::repetition_code(m).unwrap();
            let t = repetition_syndrome_table::<f64>(m, &w).unwrap();
            let check = t.check(&code, &ch).unwrap();
            assert!(check.all_branches_corrected);
            assert!((check.min_coverage - 1.0).abs() < 1e-12);
            let rec = t.to_recovery(&code).unwrap();
            assert_eq!(rec.summary().completion, 0);
            let r = roundtrip_check(&code, &ch, &rec, 20, 1).unwrap();
            assert!(r.worst_infidelity < 1e-10, "m={m}: {}", r.worst_infidelity);
            assert!(dense_roundtrip(&code, &ch, &rec, 2) < 1e-10);
        }
    }

    #[test]
    fn ancilla_table_outcomes() {
        let code = Code::ancilla_code(3).unwrap();
        let t = ancilla_recovery::<f64>(3).unwrap();
        assert_eq!(t.labels(), ["0+", "1+", "1-", "0-"]);
        let psi = code.random_state(&mut ChaCha8Rng::seed_from_u64(5));
        for (err, expected) in [("XXX", 1), ("YYY", 2), ("ZZZ", 3), ("III", 0)] {
            let e: PauliString = err.parse().unwrap();
            let moved = e.apply_to_vector(&psi).unwrap();
            for (i, o) in t.outcomes().iter().enumerate() {
                let weight = linalg::norm(&o.basis.adjoint().matvec(&moved));
                assert!((weight - if i == expected { 1.0 } else { 0.0 }).abs() < 1e-12, "{err} {i}");
            }
        }
        assert!(ancilla_recovery::<f64>(2).is_err());
    }

    #[test]
    fn ancilla_roundtrips() {
        let code = Code::ancilla_code(3).unwrap();
        let ch = PauliChannel::triple_correlated(3, &uniform()).unwrap();
        let rec = ancilla_recovery::<f64>(3).unwrap().to_recovery(&code).unwrap();
        assert!(roundtrip_check(&code, &ch, &rec, 100, 9).unwrap().worst_infidelity < 1e-10);

        let code = Code::ancilla_code(5).unwrap();
        let ch = PauliChannel::fully_correlated(5, &uniform()).unwrap();
        let rec = ancilla_recovery::<f64>(5).unwrap().to_recovery(&code).unwrap();
        assert!(roundtrip_check(&code, &ch, &rec, 20, 9).unwrap().worst_infidelity < 1e-10);
    }

    #[test]
    fn canonical_recovery_examples() {
        let code = Code::repetition_code(1).unwrap();
        let id = PauliChannel::identity(3);
        let rec = canonical_recovery(&code, &id).unwrap();
        assert_eq!(rec.summary(), RecoverySummary { kraus_count: 4, reachable: 1, completion: 3 });
        assert!(roundtrip_check(&code, &id, &rec, 10, 0).unwrap().worst_infidelity < 1e-12);

        let ch = PauliChannel::pairwise_correlated(3, &uniform()).unwrap();
        let rec = canonical_recovery(&code, &ch).unwrap();
        assert_eq!(rec.reachable_len(), 4);
        assert!(roundtrip_check(&code, &ch, &rec, 20, 4).unwrap().worst_infidelity < 1e-10);
        let table = repetition_syndrome_table::<f64>(1, &[2]).unwrap().to_recovery(&code).unwrap();
        assert!(channel_agreement(&code, &ch, &rec, &table).unwrap() < 1e-8);

        let code = Code::ancilla_code(3).unwrap();
        let ch = PauliChannel::triple_correlated(3, &uniform()).unwrap();
        let rec = canonical_recovery(&code, &ch).unwrap();
        assert_eq!(rec.summary(), RecoverySummary { kraus_count: 4, reachable: 4, completion: 0 });
        let table = ancilla_recovery::<f64>(3).unwrap().to_recovery(&code).unwrap();
        assert!(channel_agreement(&code, &ch, &rec, &table).unwrap() < 1e-8);
    }

    #[test]
    fn canonical_recovery_refuses_uncorrectable_pairs() {
        let code = Code::repetition_code(1).unwrap();
        let ch = PauliChannel::weight_bounded(3, 1, &uniform()).unwrap();
        assert!(matches!(canonical_recovery(&code, &ch), Err(Error::NotCorrectable(_))));
    }

    #[test]
    fn canonical_recovery_flags_eigenvalues_near_threshold() {
        let code = Code::ancilla_code(3).unwrap();
        // two Kraus operators: tau = 2e-10 * lmax, and 1e-8 lies below 100 tau
        let ch = PauliChannel::new(
            3,
            vec![
                PauliTerm { p: 1.0 - 1e-8, op: "III".parse().unwrap() },
                PauliTerm { p: 1e-8, op: "XXX".parse().unwrap() },
            ],
        )
        .unwrap();
        assert!(matches!(canonical_recovery(&code, &ch), Err(Error::AmbiguousEigenvalue { .. })));
    }

    #[test]
    fn apply_channel_examples() {
        let plus = vec![Complex::new(0.5, 0.0); 4];
        let rho = outer(&plus, &plus);
        let id = PauliChannel::identity(2);
        assert_eq!(apply_channel(&rho, &id).unwrap().max_abs_diff(&rho), 0.0);

        let ch = PauliChannel::new(
            2,
            vec![
                PauliTerm { p: 0.5, op: "II".parse().unwrap() },
                PauliTerm { p: 0.5, op: "ZZ".parse().unwrap() },
            ],
        )
        .unwrap();
        let minus: Vec<_> = [0.5, -0.5, -0.5, 0.5].iter().map(|&x| Complex::new(x, 0.0)).collect();
        let expected = rho.add(&outer(&minus, &minus)).scale_real(0.5);
        let out = apply_channel(&rho, &ch).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-15);

        let dense: KrausSet<f64> = ch.minimal_kraus().unwrap();
        assert!(apply_channel(&rho, &dense).unwrap().max_abs_diff(&out) < 1e-15);
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!(apply_channel(&DenseMatrix::<f64>::identity(2), &ch).is_err());
    }

    #[test]
    fn monte_carlo_examples() {
        let code = Code::repetition_code(1).unwrap();
        let ch = PauliChannel::pairwise_correlated(3, &uniform()).unwrap();
        let t = repetition_syndrome_table::<f64>(1, &[2]).unwrap();
        let r = monte_carlo_run(&code, &ch, &t, 10_000, 3).unwrap();
        assert_eq!(r.success_fraction, 1.0);
        assert_eq!(r.outcomes.iter().map(|o| o.count).sum::<u64>(), 10_000);
        assert_eq!(r.unmatched, 0);

        let noisy = ch
            .with_extra_terms(&[PauliTerm { p: 0.1, op: "XII".parse().unwrap() }])
            .unwrap();
        let r = monte_carlo_run(&code, &noisy, &t, 10_000, 3).unwrap();
        assert!(r.success_fraction < 1.0);
        assert!((r.success_fraction - 0.9).abs() < 0.02);

        let r = monte_carlo_run(&code, &ch, &t, 0, 3).unwrap();
        assert_eq!(r.success_fraction, 1.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn monte_carlo_is_thread_count_independent() {
        let code = Code::repetition_code(1).unwrap();
        let ch = PauliChannel::pairwise_correlated(3, &uniform())
            .unwrap()
            .with_extra_terms(&[PauliTerm { p: 0.2, op: "IXI".parse().unwrap() }])
            .unwrap();
        let t = repetition_syndrome_table::<f64>(1, &[2]).unwrap();
        let shots = 3 * SHOT_BLOCK + 17;
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_run(&code, &ch, &t, shots, 11).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| monte_carlo_run(&code, &ch, &t, shots, 11).unwrap());
        assert_eq!(single, many);
        assert_ne!(single, monte_carlo_run(&code, &ch, &t, shots, 12).unwrap());
    }

    #[test]
    fn f32_repetition_roundtrip() {
        let code = CodeSpace::<f32>::repetition_code(1).unwrap();
        let ch = PauliChannel::pairwise_correlated(3, &uniform()).unwrap();
        let rec = repetition_syndrome_table::<f32>(1, &[2]).unwrap().to_recovery(&code).unwrap();
        assert!(roundtrip_check(&code, &ch, &rec, 10, 0).unwrap().worst_infidelity < 1e-5);
    }
}

//! Noise channels: Pauli mixtures (the correlated families) and general
//! Kraus sets, with Choi rank and minimal Kraus decompositions.

use std::collections::HashMap;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, DenseMatrix};
use crate::pauli::{Letter, PauliString};
use crate::scalar::Real;

/// Probabilities at or below this are treated as absent.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Tolerance on the total probability of a Pauli channel.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// One term `p * P rho P^dag` of a Pauli channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub p: f64,
    pub op: PauliString,
}

/// Probabilistic mixture of Pauli strings.
///
/// Terms are stored with distinct operators (equal up to phase counts as
/// equal) and strictly positive probabilities, in first-seen order. Each
/// operator is kept in its `+` Hermitian form since a global phase has no
/// effect on the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    n: usize,
    terms: Vec<PauliTerm>,
}

/// How a family constructor distributes probability over its error terms.
/// The identity always receives the remaining mass.
pub enum Assignment {
    /// `error_mass` split evenly over all error terms.
    Uniform { error_mass: f64 },
    /// Explicit probability per error operator.
    PerTerm(Box<dyn Fn(&PauliString) -> f64 + Send + Sync>),
}

impl Default for Assignment {
    fn default() -> Self {
        Assignment::Uniform { error_mass: 0.5 }
    }
}

impl Assignment {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn per_term(f: impl Fn(&PauliString) -> f64 + Send + Sync + 'static) -> Self {
        Assignment::PerTerm(Box::new(f))
    }
}

impl std::fmt::Debug for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assignment::Uniform { error_mass } => write!(f, "Uniform {{ error_mass: {error_mass} }}"),
            Assignment::PerTerm(_) => f.write_str("PerTerm(..)"),
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

impl PauliChannel {
    /// Builds a channel from explicit terms. Duplicate operators are merged,
    /// terms with `p <= 1e-12` dropped, and the total must be 1 within 1e-12.
    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        let mut index: HashMap<(Vec<u64>, Vec<u64>), usize> = HashMap::new();
        let mut total = 0.0;
        for t in terms {
            if t.op.num_qubits() != n {
                return Err(Error::dims(format!(
                    "term {} acts on {} qubits, channel on {n}",
                    t.op,
                    t.op.num_qubits()
                )));
            }
            if !t.p.is_finite() || t.p < -ZERO_PROBABILITY {
                return Err(Error::InvalidProbability(format!("p = {} for {}", t.p, t.op)));
            }
            total += t.p;
            let (x, z) = t.op.key();
            match index.get(&(x.to_vec(), z.to_vec())) {
                Some(&i) => merged[i].p += t.p,
                None => {
                    index.insert((x.to_vec(), z.to_vec()), merged.len());
                    merged.push(PauliTerm {
                        p: t.p,
                        op: t.op.hermitian_part(),
                    });
                }
            }
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidProbability(format!("probabilities sum to {total}")));
        }
        merged.retain(|t| t.p > ZERO_PROBABILITY);
        Ok(PauliChannel { n, terms: merged })
    }

    pub fn identity(n: usize) -> Self {
        PauliChannel {
            n,
            terms: vec![PauliTerm {
                p: 1.0,
                op: PauliString::identity(n),
            }],
        }
    }

    /// Identity plus the given error operators, weighted by `assignment`.
    pub fn from_errors(n: usize, errors: Vec<PauliString>, assignment: &Assignment) -> Result<Self> {
        let probs: Vec<f64> = match assignment {
            Assignment::Uniform { error_mass } => {
                if !(0.0..=1.0).contains(error_mass) {
                    return Err(Error::InvalidProbability(format!("error mass {error_mass}")));
                }
                if errors.is_empty() {
                    vec![]
                } else {
                    vec![error_mass / errors.len() as f64; errors.len()]
                }
            }
            Assignment::PerTerm(f) => errors.iter().map(f.as_ref()).collect(),
        };
        if let Some((p, e)) = probs.iter().zip(&errors).find(|(p, _)| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbability(format!("p = {p} for {e}")));
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + PROBABILITY_SUM_TOL {
            return Err(Error::InvalidProbability(format!(
                "error probabilities sum to {mass} > 1"
            )));
        }
        let mut terms = Vec::with_capacity(errors.len() + 1);
        terms.push(PauliTerm {
            p: (1.0 - mass).max(0.0),
            op: PauliString::identity(n),
        });
        terms.extend(errors.into_iter().zip(probs).map(|(op, p)| PauliTerm { p, op }));
        // renormalize away the clamp above so the sum check sees exactly 1
        let total: f64 = terms.iter().map(|t| t.p).sum();
        for t in &mut terms {
            t.p /= total;
        }
        Self::new(n, terms)
    }

    /// Identity plus `W^{(x)w}` on every `w`-subset of the `n` qubits, for
    /// each `W` in `{X, Y, Z}` and each `w` in `weights`.
    pub fn correlated(n: usize, weights: &[usize], assignment: &Assignment) -> Result<Self> {
        let mut ws = weights.to_vec();
        ws.sort_unstable();
        ws.dedup();
        if let Some(&w) = ws.iter().find(|&&w| w == 0 || w > n) {
            return Err(Error::InvalidArgument(format!(
                "correlated weight {w} not in 1..={n}"
            )));
        }
        let mut errors = Vec::new();
        for w in ws {
            for subset in combinations(n, w) {
                for letter in Letter::ERRORS {
                    errors.push(PauliString::on(letter, &subset, n)?);
                }
            }
        }
        Self::from_errors(n, errors, assignment)
    }

    /// Noise applying the same Pauli to pairs of qubits.
    pub fn pairwise_correlated(n: usize, assignment: &Assignment) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("pairwise noise needs n >= 2, got {n}")));
        }
        Self::correlated(n, &[2], assignment)
    }

    /// Same-letter errors on every even number of qubits up to `2m`, on
    /// `n = 2m + 1` qubits.
    pub fn even_weight_correlated(m: usize, assignment: &Assignment) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("even-weight noise needs m >= 1".into()));
        }
        let weights: Vec<usize> = (1..=m).map(|i| 2 * i).collect();
        Self::correlated(2 * m + 1, &weights, assignment)
    }

    /// Same-letter errors on every triple of qubits.
    pub fn triple_correlated(n: usize, assignment: &Assignment) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("triple noise needs n >= 3, got {n}")));
        }
        Self::correlated(n, &[3], assignment)
    }

    /// `{I, X^n, Y^n, Z^n}`.
    pub fn fully_correlated(n: usize, assignment: &Assignment) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("fully correlated noise needs n >= 1".into()));
        }
        Self::correlated(n, &[n], assignment)
    }

    /// Every Pauli string of weight at most `t`.
    pub fn weight_bounded(n: usize, t: usize, assignment: &Assignment) -> Result<Self> {
        if t > n {
            return Err(Error::InvalidArgument(format!("max weight {t} exceeds n = {n}")));
        }
        let mut errors = Vec::new();
        for w in 1..=t {
            for subset in combinations(n, w) {
                for code in 0..3usize.pow(w as u32) {
                    let mut letters = vec![Letter::I; n];
                    let mut c = code;
                    for &q in &subset {
                        letters[q] = Letter::ERRORS[c % 3];
                        c /= 3;
                    }
                    errors.push(PauliString::from_letters(&letters));
                }
            }
        }
        Self::from_errors(n, errors, assignment)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same channel with additional terms mixed in; existing probabilities
    /// are scaled by `1 - sum(extra)`.
    pub fn with_extra_terms(&self, extra: &[PauliTerm]) -> Result<Self> {
        let extra_mass: f64 = extra.iter().map(|t| t.p).sum();
        let mut terms: Vec<PauliTerm> = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                p: t.p * (1.0 - extra_mass),
                op: t.op.clone(),
            })
            .collect();
        terms.extend_from_slice(extra);
        Self::new(self.n, terms)
    }

    /// Hilbert-Schmidt Gram matrix of the weighted Kraus operators,
    /// normalized by `2^n`: `G_ij = sqrt(p_i p_j) Tr[P_i^dag P_j] / 2^n`.
    pub fn gram_matrix<T: Real>(&self) -> DenseMatrix<T> {
        let len = self.terms.len();
        DenseMatrix::from_fn(len, len, |i, j| {
            let (a, b) = (&self.terms[i], &self.terms[j]);
            if a.op.key() != b.op.key() {
                return Complex::zero();
            }
            // P_i^dag P_j is a phase times identity; its normalized trace is that phase
            let prod = a.op.adjoint().multiply(&b.op).expect("same n");
            crate::scalar::i_pow::<T>(prod.phase_exp()) * T::lit((a.p * b.p).sqrt())
        })
    }

    /// Symbolic action on a density matrix: `sum_i p_i P_i rho P_i^dag`.
    pub fn apply_symbolic<T: Real>(&self, rho: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let mut out = DenseMatrix::zeros(rho.rows(), rho.cols());
        for t in &self.terms {
            let left = t.op.apply_to_matrix(rho)?;
            let both = t.op.apply_to_matrix(&left.adjoint())?.adjoint();
            out.add_assign(&both.scale_real(T::lit(t.p)));
        }
        Ok(out)
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec::Terms {
            n: self.n,
            terms: self.terms.clone(),
        }
    }
}

/// General channel `rho -> sum_i K_i rho K_i^dag`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausSet<T: Real> {
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<DenseMatrix<T>>,
}

impl<T: Real> KrausSet<T> {
    /// Validates shapes and trace preservation (`sum K^dag K = I`).
    pub fn new(input_dim: usize, output_dim: usize, kraus: Vec<DenseMatrix<T>>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != output_dim || k.cols() != input_dim {
                return Err(Error::dims(format!(
                    "Kraus operator {i} is {}x{}, expected {output_dim}x{input_dim}",
                    k.rows(),
                    k.cols()
                )));
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let set = KrausSet {
            input_dim,
            output_dim,
            kraus,
        };
        let dev = set.trace_preservation_defect();
        if dev > T::structure_tol() {
            return Err(Error::InvalidArgument(format!(
                "Kraus set is not trace preserving (max deviation {dev})"
            )));
        }
        Ok(set)
    }

    pub(crate) fn new_unchecked(input_dim: usize, output_dim: usize, kraus: Vec<DenseMatrix<T>>) -> Self {
        KrausSet {
            input_dim,
            output_dim,
            kraus,
        }
    }

    /// Largest entry of `|sum K^dag K - I|`.
    pub fn trace_preservation_defect(&self) -> T {
        let mut acc = DenseMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus {
            acc.add_assign(&k.adjoint().matmul(k));
        }
        acc.max_abs_diff(&DenseMatrix::identity(self.input_dim))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn operators(&self) -> &[DenseMatrix<T>] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `G_ij = Tr[K_i^dag K_j]`.
    pub fn gram_matrix(&self) -> DenseMatrix<T> {
        let len = self.kraus.len();
        DenseMatrix::from_fn(len, len, |i, j| {
            self.kraus[i]
                .data()
                .iter()
                .zip(self.kraus[j].data())
                .fold(Complex::zero(), |s, (a, b)| s + a.conj() * b)
        })
    }

    /// Remixes the Kraus operators: `K'_a = sum_j u[j][a] K_j`. For unitary
    /// `u` the channel is unchanged.
    pub fn remix(&self, u: &DenseMatrix<T>) -> Result<Self> {
        if u.rows() != self.kraus.len() {
            return Err(Error::dims("remixing matrix rows must equal Kraus count"));
        }
        let kraus = (0..u.cols())
            .map(|a| {
                let mut acc = DenseMatrix::zeros(self.output_dim, self.input_dim);
                for (j, k) in self.kraus.iter().enumerate() {
                    if !u[(j, a)].is_zero() {
                        acc.add_assign(&k.scale(u[(j, a)]));
                    }
                }
                acc
            })
            .collect();
        Ok(Self::new_unchecked(self.input_dim, self.output_dim, kraus))
    }
}

/// Anything with a Kraus representation.
pub trait Channel<T: Real> {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn kraus_len(&self) -> usize;

    /// `K_j * m` for the `j`-th Kraus operator.
    fn apply_kraus(&self, j: usize, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    fn to_kraus_set(&self) -> Result<KrausSet<T>>;

    /// Rank of the Choi-Jamiolkowski operator, computed as the rank of the
    /// Kraus Gram matrix.
    fn choi_rank(&self) -> Result<usize>;

    /// Kraus set of cardinality `choi_rank` implementing the same channel.
    fn minimal_kraus(&self) -> Result<KrausSet<T>>;

    fn is_minimal(&self) -> Result<bool> {
        Ok(self.kraus_len() == self.choi_rank()?)
    }
}

impl<T: Real> Channel<T> for PauliChannel {
    fn input_dim(&self) -> usize {
        1 << self.n
    }

    fn output_dim(&self) -> usize {
        1 << self.n
    }

    fn kraus_len(&self) -> usize {
        self.terms.len()
    }

    fn apply_kraus(&self, j: usize, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let t = &self.terms[j];
        Ok(t.op.apply_to_matrix(m)?.scale_real(T::lit(t.p.sqrt())))
    }

    fn to_kraus_set(&self) -> Result<KrausSet<T>> {
        limits::check_dense(self.n)?;
        let kraus = self
            .terms
            .iter()
            .map(|t| Ok(t.op.to_dense::<T>()?.scale_real(T::lit(t.p.sqrt()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(KrausSet::new_unchecked(1 << self.n, 1 << self.n, kraus))
    }

    fn choi_rank(&self) -> Result<usize> {
        linalg::numerical_rank(&self.gram_matrix::<f64>())
    }

    /// Distinct Paulis with positive weight are Hilbert-Schmidt orthogonal,
    /// so the weighted set is already minimal.
    fn minimal_kraus(&self) -> Result<KrausSet<T>> {
        self.to_kraus_set()
    }
}

impl<T: Real> Channel<T> for KrausSet<T> {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn kraus_len(&self) -> usize {
        self.kraus.len()
    }

    fn apply_kraus(&self, j: usize, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if m.rows() != self.input_dim {
            return Err(Error::dims(format!(
                "Kraus input dimension {} vs matrix with {} rows",
                self.input_dim,
                m.rows()
            )));
        }
        Ok(self.kraus[j].matmul(m))
    }

    fn to_kraus_set(&self) -> Result<KrausSet<T>> {
        Ok(self.clone())
    }

    fn choi_rank(&self) -> Result<usize> {
        linalg::numerical_rank(&self.gram_matrix())
    }

    /// Diagonalizes the Gram matrix `G = W diag(l) W^dag` and keeps
    /// `K'_a = sum_j W_ja K_j` for the eigenvalues above the rank cutoff.
    fn minimal_kraus(&self) -> Result<KrausSet<T>> {
        let e = linalg::eigh(&self.gram_matrix())?;
        let lmax = e.values.first().copied().unwrap_or(T::zero()).max(T::zero());
        let cutoff = linalg::rank_cutoff(self.kraus.len(), lmax);
        let keep = e.values.iter().filter(|&&l| l > cutoff).count();
        let w = DenseMatrix::from_fn(self.kraus.len(), keep, |j, a| e.vectors[(j, a)]);
        self.remix(&w)
    }
}

/// Choi-Jamiolkowski operator `(E (x) I)(|I>><<I|)`, indexed as
/// `(output, input)` pairs.
pub fn choi_matrix<T: Real, C: Channel<T> + ?Sized>(channel: &C) -> Result<DenseMatrix<T>> {
    limits::check_choi(channel.input_dim())?;
    let set = channel.to_kraus_set()?;
    let (din, dout) = (set.input_dim, set.output_dim);
    let dim = din * dout;
    let mut choi = DenseMatrix::zeros(dim, dim);
    for k in &set.kraus {
        // |K>> = sum_n K|n>|n>, entry (a, n) = K[a][n]
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
    Ok(choi)
}

/// Either a symbolic Pauli channel or a dense Kraus set.
#[derive(Debug, Clone)]
pub enum AnyChannel<T: Real> {
    Pauli(PauliChannel),
    Kraus(KrausSet<T>),
}

impl<T: Real> AnyChannel<T> {
    pub fn as_pauli(&self) -> Option<&PauliChannel> {
        match self {
            AnyChannel::Pauli(p) => Some(p),
            AnyChannel::Kraus(_) => None,
        }
    }

    /// Qubit count, when the input dimension is a power of two.
    pub fn num_qubits(&self) -> Option<usize> {
        let d = Channel::<T>::input_dim(self);
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }
}

macro_rules! delegate {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            AnyChannel::Pauli($c) => $e,
            AnyChannel::Kraus($c) => $e,
        }
    };
}

impl<T: Real> Channel<T> for AnyChannel<T> {
    fn input_dim(&self) -> usize {
        delegate!(self, c => Channel::<T>::input_dim(c))
    }
    fn output_dim(&self) -> usize {
        delegate!(self, c => Channel::<T>::output_dim(c))
    }
    fn kraus_len(&self) -> usize {
        delegate!(self, c => Channel::<T>::kraus_len(c))
    }
    fn apply_kraus(&self, j: usize, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        delegate!(self, c => c.apply_kraus(j, m))
    }
    fn to_kraus_set(&self) -> Result<KrausSet<T>> {
        delegate!(self, c => c.to_kraus_set())
    }
    fn choi_rank(&self) -> Result<usize> {
        delegate!(self, c => Channel::<T>::choi_rank(c))
    }
    fn minimal_kraus(&self) -> Result<KrausSet<T>> {
        delegate!(self, c => c.minimal_kraus())
    }
}

/// Named channel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyName {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "pairwise")]
    Pairwise,
    #[serde(rename = "pairwise+quadruple")]
    PairwiseQuadruple,
    #[serde(rename = "even_weight")]
    EvenWeight,
    #[serde(rename = "triple")]
    Triple,
    #[serde(rename = "fully_correlated")]
    FullyCorrelated,
    #[serde(rename = "weight_bounded")]
    WeightBounded,
    #[serde(rename = "correlated")]
    Correlated,
}

impl std::str::FromStr for FamilyName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown channel family {s:?}")))
    }
}

impl std::fmt::Display for FamilyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| std::fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    /// Half-count for `even_weight` (acts on `2m + 1` qubits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Maximum weight for `weight_bounded`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Error weights for `correlated`, or a subset of the even weights for
    /// `even_weight`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<usize>>,
    /// Total error probability for the uniform assignment (default 0.5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub params: FamilyParams,
}

impl FamilySpec {
    pub fn new(family: FamilyName, n: Option<usize>) -> Self {
        FamilySpec {
            family,
            n,
            params: FamilyParams::default(),
        }
    }

    /// Qubit count implied by `n` and `params.m`.
    pub fn resolved_n(&self) -> Result<usize> {
        let from_m = match (self.family, self.params.m) {
            (FamilyName::EvenWeight, Some(m)) => Some(2 * m + 1),
            _ => None,
        };
        match (self.n, from_m) {
            (Some(n), Some(nm)) if n != nm => Err(Error::InvalidArgument(format!(
                "even_weight with m = {} acts on {nm} qubits, not {n}",
                self.params.m.unwrap_or_default()
            ))),
            (Some(n), _) | (None, Some(n)) => Ok(n),
            (None, None) => Err(Error::InvalidArgument(format!(
                "family {} needs n{}",
                self.family,
                if self.family == FamilyName::EvenWeight { " or m" } else { "" }
            ))),
        }
    }

    pub fn build(&self) -> Result<PauliChannel> {
        let n = self.resolved_n()?;
        let assignment = Assignment::Uniform {
            error_mass: self.params.error_mass.unwrap_or(0.5),
        };
        let need_t = || {
            self.params
                .t
                .ok_or_else(|| Error::InvalidArgument("weight_bounded needs params.t".into()))
        };
        match self.family {
            FamilyName::Identity => Ok(PauliChannel::identity(n)),
            FamilyName::Pairwise => PauliChannel::pairwise_correlated(n, &assignment),
            FamilyName::PairwiseQuadruple => PauliChannel::correlated(n, &[2, 4], &assignment),
            FamilyName::EvenWeight => {
                if n % 2 == 0 || n < 3 {
                    return Err(Error::InvalidArgument(format!(
                        "even_weight acts on n = 2m + 1 >= 3 qubits, got {n}"
                    )));
                }
                let m = n / 2;
                let weights = match &self.params.weights {
                    Some(w) => {
                        if let Some(bad) = w.iter().find(|&&w| w == 0 || w % 2 == 1 || w > 2 * m) {
                            return Err(Error::InvalidArgument(format!(
                                "even_weight weight {bad} not in {{2, 4, ..., {}}}",
                                2 * m
                            )));
                        }
                        w.clone()
                    }
                    None => (1..=m).map(|i| 2 * i).collect(),
                };
                PauliChannel::correlated(n, &weights, &assignment)
            }
            FamilyName::Triple => PauliChannel::triple_correlated(n, &assignment),
            FamilyName::FullyCorrelated => PauliChannel::fully_correlated(n, &assignment),
            FamilyName::WeightBounded => PauliChannel::weight_bounded(n, need_t()?, &assignment),
            FamilyName::Correlated => {
                let w = self.params.weights.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("correlated family needs params.weights".into())
                })?;
                PauliChannel::correlated(n, w, &assignment)
            }
        }
    }
}

/// JSON channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Family(FamilySpec),
    Terms {
        n: usize,
        terms: Vec<PauliTerm>,
    },
    Kraus {
        input_dim: usize,
        output_dim: usize,
        kraus: Vec<DenseMatrix<f64>>,
    },
}

impl ChannelSpec {
    pub fn build<T: Real>(&self) -> Result<AnyChannel<T>> {
        match self {
            ChannelSpec::Family(f) => Ok(AnyChannel::Pauli(f.build()?)),
            ChannelSpec::Terms { n, terms } => Ok(AnyChannel::Pauli(PauliChannel::new(*n, terms.clone())?)),
            ChannelSpec::Kraus {
                input_dim,
                output_dim,
                kraus,
            } => Ok(AnyChannel::Kraus(KrausSet::new(
                *input_dim,
                *output_dim,
                kraus.iter().map(DenseMatrix::cast).collect(),
            )?)),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("channel spec: {e}")))
    }
}

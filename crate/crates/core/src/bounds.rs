//! Packing and Hamming bounds in exact integer arithmetic.
//!
//! A nondegenerate code correcting a channel with Choi rank `r` needs
//! `2^n >= 2^k r`. For the channel of all Pauli errors of weight at most `t`
//! this is the quantum Hamming bound, `q^n >= q^k sum_i (q^2 - 1)^i C(n, i)`
//! for local dimension `q`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::channels::{Channel, FamilyName, FamilySpec};
use crate::codes::CodeSpace;
use crate::error::{Error, Result};
use crate::kl::{self, KlSummary};
use crate::scalar::Real;

/// Integers that fit in `u64` serialize as JSON numbers, larger ones as
/// decimal strings.
fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(x) => s.serialize_u64(x),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // exact at every step: the running product is C(n - k + i, i)
    (1..=k).fold(BigUint::one(), |acc, i| acc * (n - k + i) / i)
}

fn pow(base: usize, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Packing,
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVerdict {
    Satisfied,
    /// Satisfied with equality.
    Saturated,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub n: usize,
    pub k: usize,
    /// Local dimension.
    pub q: usize,
    #[serde(rename = "dim_S", serialize_with = "ser_big")]
    pub dim_s: BigUint,
    #[serde(rename = "dim_Q", serialize_with = "ser_big")]
    pub dim_q: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub rank: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub rhs: BigUint,
    pub satisfied: bool,
    pub verdict: BoundVerdict,
}

impl BoundReport {
    fn new(kind: BoundKind, n: usize, k: usize, q: usize, rank: BigUint) -> Self {
        let dim_s = pow(q, n);
        let dim_q = pow(q, k);
        let rhs = &dim_q * &rank;
        let verdict = match dim_s.cmp(&rhs) {
            std::cmp::Ordering::Greater => BoundVerdict::Satisfied,
            std::cmp::Ordering::Equal => BoundVerdict::Saturated,
            std::cmp::Ordering::Less => BoundVerdict::Violated,
        };
        BoundReport {
            kind,
            n,
            k,
            q,
            satisfied: verdict != BoundVerdict::Violated,
            verdict,
            dim_s,
            dim_q,
            rank,
            rhs,
        }
    }
}

/// Packing bound for a known Choi rank.
pub fn packing_bound(n: usize, k: usize, rank: impl Into<BigUint>) -> BoundReport {
    BoundReport::new(BoundKind::Packing, n, k, 2, rank.into())
}

/// Packing bound for `channel` acting on `n` qubits.
pub fn packing_check<T: Real, C: Channel<T> + ?Sized>(n: usize, k: usize, channel: &C) -> Result<BoundReport> {
    if n >= usize::BITS as usize || channel.input_dim() != 1 << n {
        return Err(Error::dims(format!(
            "channel input dimension {} is not 2^{n}",
            channel.input_dim()
        )));
    }
    Ok(packing_bound(n, k, BigUint::from(channel.choi_rank()?)))
}

/// Number of Paulis on `n` sites of local dimension `q` acting nontrivially
/// on at most `t` of them.
pub fn hamming_rank(n: usize, t: usize, q: usize) -> Result<BigUint> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("local dimension q = {q} < 2")));
    }
    if t > n {
        return Err(Error::InvalidArgument(format!("t = {t} exceeds n = {n}")));
    }
    Ok((0..=t).map(|i| pow(q * q - 1, i) * binomial(n, i)).sum())
}

/// `q^k sum_{i <= t} (q^2 - 1)^i C(n, i)`.
pub fn hamming_rhs(n: usize, k: usize, t: usize, q: usize) -> Result<BigUint> {
    Ok(pow(q, k) * hamming_rank(n, t, q)?)
}

pub fn hamming_check(n: usize, k: usize, t: usize, q: usize) -> Result<BoundReport> {
    Ok(BoundReport::new(BoundKind::Hamming, n, k, q, hamming_rank(n, t, q)?))
}

/// Smallest `n >= max(k, t)` satisfying the Hamming bound.
pub fn min_n_hamming(k: usize, t: usize, q: usize) -> Result<usize> {
    let mut n = k.max(t);
    while !hamming_check(n, k, t, q)?.satisfied {
        n += 1;
    }
    Ok(n)
}

/// Channel families whose Choi rank is a closed-form function of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankFamily {
    Identity,
    /// Identity plus `W^{(x)w}` on every `w`-subset, for each listed weight.
    Correlated(Vec<usize>),
    /// Identity plus `X^{(x)n}`, `Y^{(x)n}`, `Z^{(x)n}`.
    FullyCorrelated,
    /// All Paulis of weight at most `t`.
    WeightBounded(usize),
}

impl RankFamily {
    pub fn pairwise() -> Self {
        RankFamily::Correlated(vec![2])
    }

    pub fn pairwise_quadruple() -> Self {
        RankFamily::Correlated(vec![2, 4])
    }

    pub fn triple() -> Self {
        RankFamily::Correlated(vec![3])
    }

    /// Even weights `2, 4, ..., 2m`.
    pub fn even_weight(m: usize) -> Self {
        RankFamily::Correlated((1..=m).map(|i| 2 * i).collect())
    }

    /// Resolves the rank formula of a named family. Only the parameters that
    /// shape the operator set (`m`, `t`, `weights`) are used; `n` is free.
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let p = &spec.params;
        let need = |what: &str| Error::InvalidArgument(format!("{} family needs {what}", spec.family));
        Ok(match spec.family {
            FamilyName::Identity => RankFamily::Identity,
            FamilyName::Pairwise => Self::pairwise(),
            FamilyName::PairwiseQuadruple => Self::pairwise_quadruple(),
            FamilyName::Triple => Self::triple(),
            FamilyName::FullyCorrelated => RankFamily::FullyCorrelated,
            FamilyName::EvenWeight => {
                let m = match (p.m, spec.n) {
                    (Some(m), _) => m,
                    (None, Some(n)) if n % 2 == 1 => n / 2,
                    _ => return Err(need("m")),
                };
                if m == 0 {
                    return Err(Error::InvalidArgument("even_weight needs m >= 1".into()));
                }
                Self::even_weight(m)
            }
            FamilyName::WeightBounded => RankFamily::WeightBounded(p.t.ok_or_else(|| need("t"))?),
            FamilyName::Correlated => {
                let mut w = p.weights.clone().ok_or_else(|| need("weights"))?;
                w.sort_unstable();
                w.dedup();
                if w.contains(&0) {
                    return Err(Error::InvalidArgument("correlated weights must be positive".into()));
                }
                RankFamily::Correlated(w)
            }
        })
    }

    /// Fewest qubits on which every operator of the family fits.
    pub fn min_support(&self) -> usize {
        match self {
            RankFamily::Identity => 0,
            RankFamily::Correlated(w) => w.iter().copied().max().unwrap_or(0),
            RankFamily::FullyCorrelated => 1,
            RankFamily::WeightBounded(t) => *t,
        }
    }

    /// Choi rank of the family on `n >= min_support()` qubits with every
    /// term at positive probability.
    pub fn rank(&self, n: usize) -> BigUint {
        let three = BigUint::from(3u32);
        match self {
            RankFamily::Identity => BigUint::one(),
            RankFamily::Correlated(ws) => BigUint::one() + ws.iter().map(|&w| &three * binomial(n, w)).sum::<BigUint>(),
            RankFamily::FullyCorrelated => BigUint::from(4u32),
            RankFamily::WeightBounded(t) => (0..=*t.min(&n)).map(|i| pow(3, i) * binomial(n, i)).sum(),
        }
    }
}

/// Smallest `n >= max(k, min_support)` with `2^n >= 2^k rank(n)`.
pub fn min_n_packing(k: usize, family: &RankFamily) -> usize {
    let mut n = k.max(family.min_support());
    while !packing_bound(n, k, family.rank(n)).satisfied {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    #[serde(serialize_with = "ser_big")]
    pub rank: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub rhs: BigUint,
    #[serde(rename = "dim_S", serialize_with = "ser_big")]
    pub dim_s: BigUint,
    pub satisfied: bool,
}

pub fn packing_scan(k: usize, family: &RankFamily, ns: std::ops::RangeInclusive<usize>) -> Vec<ScanRow> {
    ns.map(|n| {
        let r = packing_bound(n, k, family.rank(n));
        ScanRow {
            n,
            rank: r.rank,
            rhs: r.rhs,
            dim_s: r.dim_s,
            satisfied: r.satisfied,
        }
    })
    .collect()
}

/// Minimal lengths stated in the literature for `k = 1`.
pub fn published_min_n(family: &RankFamily, k: usize) -> Option<usize> {
    if k != 1 {
        return None;
    }
    if *family == RankFamily::pairwise() {
        Some(7)
    } else if *family == RankFamily::pairwise_quadruple() {
        Some(14)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinNReport {
    pub k: usize,
    pub min_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published_min_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub scan: Vec<ScanRow>,
}

/// Minimal length with a scan table covering it, and the published value
/// where one exists.
pub fn min_n_report(k: usize, family: &RankFamily) -> MinNReport {
    let min_n = min_n_packing(k, family);
    let published = published_min_n(family, k);
    let lo = k.max(family.min_support()).max(min_n.saturating_sub(7));
    let hi = (min_n + 4).max(published.unwrap_or(0) + 2);
    MinNReport {
        k,
        min_n,
        published_min_n: published,
        note: published
            .filter(|&p| p != min_n)
            .map(|p| format!("published value {p} differs from direct evaluation ({min_n})")),
        scan: packing_scan(k, family, lo..=hi),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Correctable and degenerate while the nondegenerate bound fails.
    ViolationByDegenerateCode,
    Consistent,
    /// Correctable, nondegenerate and violating the bound: impossible, so
    /// this flags a numerical or implementation fault.
    ConsistencyError,
    NotCorrectable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub verdict: Verdict,
    pub kl: KlSummary,
    pub bound: BoundReport,
}

pub fn classify(kl: &KlSummary, bound: &BoundReport) -> Verdict {
    match (kl.correctable, kl.degenerate, bound.satisfied) {
        (false, _, _) => Verdict::NotCorrectable,
        (true, _, true) => Verdict::Consistent,
        (true, true, false) => Verdict::ViolationByDegenerateCode,
        (true, false, false) => Verdict::ConsistencyError,
    }
}

pub fn violation_report<T: Real, C: Channel<T> + ?Sized>(
    code: &CodeSpace<T>,
    channel: &C,
    tol: Option<T>,
) -> Result<ViolationReport> {
    let kl = kl::is_correctable(code, channel, tol)?.summary();
    let bound = packing_bound(code.n(), code.k(), BigUint::from(kl.rank_choi));
    Ok(ViolationReport {
        verdict: classify(&kl, &bound),
        kl,
        bound,
    })
}

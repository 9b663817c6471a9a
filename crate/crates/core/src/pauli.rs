//! Phase-tracked n-qubit Pauli operators in symplectic form.
//!
//! A [`PauliString`] stores the operator `i^phase * X^x Z^z` (tensor product
//! over qubits, qubit 0 leftmost) with `x` and `z` packed into 64-bit words.
//! A `Y` on qubit `q` is `x_q = z_q = 1` with one unit of phase, since
//! `Y = iXZ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::DenseMatrix;
use crate::scalar::{i_pow, Real};

const WORD: usize = 64;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ERRORS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Option<Letter> {
        match ch {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    phase: u8,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn words(n: usize) -> usize {
    n.div_ceil(WORD)
}

fn dot_parity(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            phase: 0,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
        }
    }

    /// Weight-one Pauli with `letter` at `position`.
    pub fn single(letter: Letter, position: usize, n: usize) -> Result<Self> {
        Self::on(letter, &[position], n)
    }

    /// The Hermitian product of `letter` on every qubit in `positions`.
    pub fn on(letter: Letter, positions: &[usize], n: usize) -> Result<Self> {
        let mut p = Self::identity(n);
        for &q in positions {
            if q >= n {
                return Err(Error::OutOfRange { index: q, len: n });
            }
            p.set_letter(q, letter);
        }
        Ok(p)
    }

    /// Hermitian Pauli from one letter per qubit.
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// Overwrites qubit `q` with a Hermitian letter, keeping the text-form
    /// sign of the rest of the string.
    fn set_letter(&mut self, q: usize, letter: Letter) {
        let was_y = self.x_bit(q) && self.z_bit(q);
        let (xb, zb) = letter.bits();
        let (w, b) = (q / WORD, q % WORD);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
        let now_y = letter == Letter::Y;
        self.phase = (self.phase + now_y as u8 + 4 - was_y as u8) & 3;
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` in `i^k X^x Z^z`.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones())
            .sum()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Text-form sign exponent: the operator equals `i^k` times the
    /// tensor product of its Hermitian letters.
    pub fn sign_exp(&self) -> u8 {
        ((self.phase as u32 + 4 - (self.y_count() & 3)) & 3) as u8
    }

    /// Same operator with the global phase stripped (text sign `+`).
    pub fn hermitian_part(&self) -> PauliString {
        let mut p = self.clone();
        p.phase = (self.y_count() & 3) as u8;
        p
    }

    pub fn is_hermitian(&self) -> bool {
        self.sign_exp() & 1 == 0
    }

    /// Symplectic bits, ignoring phase. Two strings with equal keys differ
    /// only by a global phase.
    pub fn key(&self) -> (&[u64], &[u64]) {
        (&self.x, &self.z)
    }

    fn check_same_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::dims(format!(
                "Pauli strings on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_same_n(other)?;
        // Z^z1 X^x2 = (-1)^(z1.x2) X^x2 Z^z1
        let swap = dot_parity(&self.z, &other.x) as u8;
        Ok(PauliString {
            n: self.n,
            phase: (self.phase + other.phase + 2 * swap) & 3,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same_n(other)?;
        Ok((dot_parity(&self.x, &other.z) ^ dot_parity(&self.z, &other.x)) == 0)
    }

    pub fn adjoint(&self) -> PauliString {
        // (i^k X^x Z^z)^dag = (-i)^k Z^z X^x = i^(-k) (-1)^(x.z) X^x Z^z
        let xz = dot_parity(&self.x, &self.z) as u8;
        let mut p = self.clone();
        p.phase = (4 - self.phase + 2 * xz) & 3;
        p
    }

    /// Basis-index masks for dense action: qubit `q` is bit `n-1-q`.
    fn index_masks(&self) -> (usize, usize) {
        let mut xm = 0usize;
        let mut zm = 0usize;
        for q in 0..self.n {
            let bit = 1usize << (self.n - 1 - q);
            if self.x_bit(q) {
                xm |= bit;
            }
            if self.z_bit(q) {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    /// Computes `self * m` without forming the dense operator.
    pub fn apply_to_matrix<T: Real>(&self, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        limits::check_dense(self.n)?;
        let dim = 1usize << self.n;
        if m.rows() != dim {
            return Err(Error::dims(format!(
                "Pauli on {} qubits applied to matrix with {} rows",
                self.n,
                m.rows()
            )));
        }
        let (xm, zm) = self.index_masks();
        let global = i_pow::<T>(self.phase);
        let neg = -global;
        let mut out = DenseMatrix::zeros(dim, m.cols());
        for b in 0..dim {
            let f = if (b & zm).count_ones() & 1 == 1 { neg } else { global };
            let target = b ^ xm;
            for col in 0..m.cols() {
                out[(target, col)] = f * m[(b, col)];
            }
        }
        Ok(out)
    }

    pub fn apply_to_vector<T: Real>(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let m = DenseMatrix::from_column(v);
        Ok(self.apply_to_matrix(&m)?.into_column(0))
    }

    /// Dense `2^n x 2^n` unitary.
    pub fn to_dense<T: Real>(&self) -> Result<DenseMatrix<T>> {
        limits::check_dense(self.n)?;
        self.apply_to_matrix(&DenseMatrix::identity(1 << self.n))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.sign_exp() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional `+`, `-`, `+i`, `-i` or `i` prefix followed by
    /// one letter per qubit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else {
            (0, s)
        };
        let letters = rest
            .chars()
            .map(|ch| {
                Letter::from_char(ch)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter {ch:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut p = PauliString::from_letters(&letters);
        p.phase = (p.phase + sign) & 3;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

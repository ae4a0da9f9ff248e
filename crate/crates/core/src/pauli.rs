//! n-qubit Pauli algebra in symplectic form.
//!
//! A [`PauliString`] denotes `i^phase_exp · ⊗_j X^{x_j} Z^{z_j}` with qubit 1
//! leftmost in the tensor product.
//!
//! **Y convention.** The letter `Y` means `[[0, i], [-i, 0]]`, which is the
//! *negative* of the usual Pauli Y. Under this convention `Y = -i·X·Z`, so the
//! string `"Y"` is stored with `phase_exp = 3`. Parsing and printing both use
//! this convention; callers exchanging strings with other tools must flip the
//! sign of every `Y`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, C64, ONE, ZERO};

/// Largest qubit count for which dense matrices are built.
pub const MAX_MATRIX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PauliError {
    #[error("expected {expected} Pauli letters, got {got} in {text:?}")]
    BadLength {
        expected: usize,
        got: usize,
        text: String,
    },
    #[error("invalid Pauli letter {letter:?} in {text:?}")]
    BadCharacter { letter: char, text: String },
    #[error("invalid phase prefix {prefix:?} in {text:?}")]
    BadPrefix { prefix: String, text: String },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("qubit count must be positive")]
    ZeroQubits,
    #[error("{n} qubits exceeds the dense-matrix cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("group closure exceeds {cap} elements")]
    ClosureTooLarge { cap: usize },
    #[error("not a stabilizer group: {0}")]
    NotStabilizer(String),
    #[error("generator {index} is dependent on the earlier generators")]
    DependentGenerators { index: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, PauliError>;

/// Single-qubit Pauli letter, numbered `σ_0 = I, σ_1 = Z, σ_2 = X, σ_3 = Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    Z,
    X,
    Y,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::Z, Letter::X, Letter::Y];

    pub fn sigma_index(self) -> u8 {
        match self {
            Letter::I => 0,
            Letter::Z => 1,
            Letter::X => 2,
            Letter::Y => 3,
        }
    }

    pub fn from_sigma_index(j: u8) -> Option<Letter> {
        Self::ALL.get(j as usize).copied()
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::Z => (false, true),
            Letter::X => (true, false),
            Letter::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (false, true) => Letter::Z,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::Z => 'Z',
            Letter::X => 'X',
            Letter::Y => 'Y',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    phase_exp: u8,
    x_bits: Vec<bool>,
    z_bits: Vec<bool>,
}

impl PauliString {
    pub fn new(phase_exp: u8, x_bits: Vec<bool>, z_bits: Vec<bool>) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(PauliError::QubitMismatch {
                left: x_bits.len(),
                right: z_bits.len(),
            });
        }
        if x_bits.is_empty() {
            return Err(PauliError::ZeroQubits);
        }
        Ok(Self {
            n: x_bits.len(),
            phase_exp: phase_exp % 4,
            x_bits,
            z_bits,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            phase_exp: 0,
            x_bits: vec![false; n],
            z_bits: vec![false; n],
        }
    }

    /// `i^letter_phase · σ_{letters[0]} ⊗ σ_{letters[1]} ⊗ ⋯`.
    pub fn from_letters(letter_phase: u8, letters: &[Letter]) -> Self {
        let (x_bits, z_bits): (Vec<bool>, Vec<bool>) = letters.iter().map(|l| l.bits()).unzip();
        let ys = letters.iter().filter(|&&l| l == Letter::Y).count() as u8;
        Self {
            n: letters.len(),
            phase_exp: (letter_phase + 3 * (ys % 4)) % 4,
            x_bits,
            z_bits,
        }
    }

    /// Phase-free string from indices `j ∈ {0,1,2,3}` in the `σ_j` numbering.
    pub fn from_sigma_indices(indices: &[u8]) -> Option<Self> {
        let letters: Option<Vec<Letter>> = indices
            .iter()
            .map(|&j| Letter::from_sigma_index(j))
            .collect();
        letters.map(|l| Self::from_letters(0, &l))
    }

    /// Single-letter string `σ` on qubit `q` (0-based) of `n`.
    pub fn single(n: usize, q: usize, letter: Letter) -> Self {
        let mut letters = vec![Letter::I; n];
        letters[q] = letter;
        Self::from_letters(0, &letters)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z_bits
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bits[q], self.z_bits[q])
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn sigma_indices(&self) -> Vec<u8> {
        self.letters()
            .into_iter()
            .map(Letter::sigma_index)
            .collect()
    }

    fn y_count(&self) -> usize {
        self.x_bits
            .iter()
            .zip(&self.z_bits)
            .filter(|(x, z)| **x && **z)
            .count()
    }

    /// Exponent `k` such that the operator is `i^k` times the letter product.
    pub fn letter_phase(&self) -> u8 {
        ((self.phase_exp as usize + self.y_count()) % 4) as u8
    }

    /// The same letters with coefficient `+1`; always Hermitian.
    pub fn phase_free(&self) -> Self {
        Self::from_letters(0, &self.letters())
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        !self.x_bits.iter().chain(&self.z_bits).any(|&b| b)
    }

    pub fn is_minus_identity(&self) -> bool {
        self.is_identity_up_to_phase() && self.phase_exp == 2
    }

    pub fn weight(&self) -> usize {
        self.x_bits
            .iter()
            .zip(&self.z_bits)
            .filter(|(x, z)| **x || **z)
            .count()
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(PauliError::QubitMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Identity key ignoring the phase.
    fn support_key(&self) -> (Vec<bool>, Vec<bool>) {
        (self.x_bits.clone(), self.z_bits.clone())
    }
}

impl fmt::Display for PauliString {
    /// Prints the letter form, e.g. `-iXYZ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.letter_phase() as usize];
        let letters: String = self.letters().into_iter().map(Letter::as_char).collect();
        write!(f, "{prefix}{letters}")
    }
}

/// Parses an optional phase prefix (`+`, `-`, `i`, `-i`) followed by exactly
/// `n` letters from `{I, X, Y, Z}`.
pub fn parse_pauli(text: &str, n: usize) -> Result<PauliString> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_ascii_uppercase())
        .unwrap_or(trimmed.len());
    let (prefix, body) = trimmed.split_at(split);
    let letter_phase = match prefix {
        "" | "+" => 0,
        "i" | "+i" => 1,
        "-" => 2,
        "-i" => 3,
        _ => {
            return Err(PauliError::BadPrefix {
                prefix: prefix.to_string(),
                text: text.to_string(),
            })
        }
    };
    let letters = body
        .chars()
        .map(|c| match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            other => Err(PauliError::BadCharacter {
                letter: other,
                text: text.to_string(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    if n == 0 {
        return Err(PauliError::ZeroQubits);
    }
    if letters.len() != n {
        return Err(PauliError::BadLength {
            expected: n,
            got: letters.len(),
            text: text.to_string(),
        });
    }
    Ok(PauliString::from_letters(letter_phase, &letters))
}

/// Parses a comma-separated generator list such as `"ZZI,IZZ"`.
pub fn parse_pauli_list(text: &str, n: usize) -> Result<Vec<PauliString>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_pauli(s, n))
        .collect()
}

/// Product `p · q` with exact phase tracking.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.check_n(q)?;
    // Z^z X^x' = (-1)^{z·x'} X^x' Z^z on each qubit.
    let swaps = p
        .z_bits
        .iter()
        .zip(&q.x_bits)
        .filter(|(a, b)| **a && **b)
        .count();
    let phase = (p.phase_exp as usize + q.phase_exp as usize + 2 * swaps) % 4;
    Ok(PauliString {
        n: p.n,
        phase_exp: phase as u8,
        x_bits: p.x_bits.iter().zip(&q.x_bits).map(|(a, b)| a ^ b).collect(),
        z_bits: p.z_bits.iter().zip(&q.z_bits).map(|(a, b)| a ^ b).collect(),
    })
}

/// Symplectic form: `Σ_j x_j z'_j + z_j x'_j ≡ 0 (mod 2)`.
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.check_n(q)?;
    let odd = (0..p.n)
        .filter(|&j| (p.x_bits[j] && q.z_bits[j]) ^ (p.z_bits[j] && q.x_bits[j]))
        .count();
    Ok(odd % 2 == 0)
}

fn check_matrix_cap(n: usize) -> Result<()> {
    if n > MAX_MATRIX_QUBITS {
        return Err(PauliError::TooManyQubits {
            n,
            cap: MAX_MATRIX_QUBITS,
        });
    }
    Ok(())
}

/// Bit mask of a per-qubit flag vector; qubit 0 is the most significant bit.
fn mask(bits: &[bool]) -> usize {
    let n = bits.len();
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |m, (q, _)| m | 1 << (n - 1 - q))
}

fn i_pow(k: usize) -> C64 {
    [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][k % 4]
}

/// Dense `2^n × 2^n` matrix; qubit 1 is the leftmost tensor factor.
pub fn to_matrix(p: &PauliString) -> Result<ComplexMatrix> {
    check_matrix_cap(p.n)?;
    let d = 1usize << p.n;
    let (xm, zm) = (mask(&p.x_bits), mask(&p.z_bits));
    let mut entries = vec![ZERO; d * d];
    for col in 0..d {
        let sign = 2 * ((zm & col).count_ones() as usize % 2);
        entries[(col ^ xm) * d + col] = i_pow(p.phase_exp as usize + sign);
    }
    Ok(ComplexMatrix::new(d, entries)?)
}

/// Every phase-free string on `n` qubits in lexicographic `σ`-index order.
pub fn all_phase_free(n: usize) -> impl Iterator<Item = PauliString> {
    (0..4usize.pow(n as u32)).map(move |mut k| {
        let mut idx = vec![0u8; n];
        for slot in idx.iter_mut().rev() {
            *slot = (k % 4) as u8;
            k /= 4;
        }
        PauliString::from_sigma_indices(&idx).expect("indices below 4")
    })
}

/// Rank over GF(2) of the `(x | z)` rows.
pub fn symplectic_rank(strings: &[PauliString]) -> usize {
    let mut rows: Vec<Vec<bool>> = strings
        .iter()
        .map(|p| p.x_bits.iter().chain(&p.z_bits).copied().collect())
        .collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c]) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] {
                row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// A subgroup of the Pauli group, fully enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliGroup {
    pub n: usize,
    pub generators: Vec<PauliString>,
    pub elements: Vec<PauliString>,
    pub is_abelian: bool,
    pub minus_identity_free: bool,
}

/// Default enumeration cap `4 · 4^n`.
pub fn default_group_cap(n: usize) -> usize {
    4usize.saturating_mul(4usize.saturating_pow(n as u32))
}

/// Closure of `gens` under multiplication (breadth-first, identity first).
pub fn generate_group(n: usize, gens: &[PauliString], cap: usize) -> Result<PauliGroup> {
    if n == 0 {
        return Err(PauliError::ZeroQubits);
    }
    for g in gens {
        if g.n != n {
            return Err(PauliError::QubitMismatch {
                left: n,
                right: g.n,
            });
        }
    }
    let id = PauliString::identity(n);
    let mut seen: HashSet<PauliString> = HashSet::from([id.clone()]);
    let mut elements = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(e) = queue.pop_front() {
        for g in gens {
            let prod = pauli_mul(&e, g)?;
            if seen.insert(prod.clone()) {
                if elements.len() >= cap {
                    return Err(PauliError::ClosureTooLarge { cap });
                }
                elements.push(prod.clone());
                queue.push_back(prod);
            }
        }
    }
    let mut is_abelian = true;
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            is_abelian &= commutes(a, b)?;
        }
    }
    let minus_identity_free = !elements.iter().any(PauliString::is_minus_identity);
    Ok(PauliGroup {
        n,
        generators: gens.to_vec(),
        elements,
        is_abelian,
        minus_identity_free,
    })
}

impl PauliGroup {
    /// Closure with the default cap.
    pub fn generate(n: usize, gens: &[PauliString]) -> Result<Self> {
        generate_group(n, gens, default_group_cap(n))
    }

    /// Parses `"ZZI,IZZ"` and generates the group.
    pub fn parse(n: usize, gens: &str) -> Result<Self> {
        Self::generate(n, &parse_pauli_list(gens, n)?)
    }

    pub fn is_stabilizer(&self) -> bool {
        self.is_abelian && self.minus_identity_free
    }

    pub fn require_stabilizer(&self) -> Result<()> {
        if !self.is_abelian {
            return Err(PauliError::NotStabilizer(
                "generators do not commute".into(),
            ));
        }
        if !self.minus_identity_free {
            return Err(PauliError::NotStabilizer("group contains -I".into()));
        }
        Ok(())
    }

    /// Number of independent generators `s`, so that `|G| = 2^s`.
    pub fn independent_generators(&self) -> usize {
        symplectic_rank(&self.generators)
    }

    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        self.elements.iter().map(to_matrix).collect()
    }

    /// Whether `p` equals some element up to phase.
    pub fn contains_up_to_phase(&self, p: &PauliString) -> bool {
        let key = p.support_key();
        self.elements.iter().any(|e| e.support_key() == key)
    }
}

/// Phase-free strings commuting with every generator.
///
/// For a stabilizer group the normalizer and the centralizer coincide, so this
/// is `N(G)` modulo phases.
pub fn normalizer(group: &PauliGroup) -> Result<Vec<PauliString>> {
    group.require_stabilizer()?;
    let mut out = Vec::new();
    for p in all_phase_free(group.n) {
        let mut ok = true;
        for g in &group.generators {
            if !commutes(&p, g)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(p);
        }
    }
    Ok(out)
}

/// `P = (1/|G|) Σ_g g`, the projector onto the common +1 eigenspace.
pub fn codespace_projector(group: &PauliGroup) -> Result<ComplexMatrix> {
    group.require_stabilizer()?;
    check_matrix_cap(group.n)?;
    let d = 1usize << group.n;
    let mut sum = ComplexMatrix::zeros(d);
    for g in &group.elements {
        sum = &sum + &to_matrix(g)?;
    }
    Ok(sum.scale(Complex64::new(1.0 / group.elements.len() as f64, 0.0)))
}

/// Elementary Clifford gates on 0-based qubit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
    X(usize),
    Z(usize),
}

impl CliffordGate {
    pub fn inverse(self) -> Self {
        match self {
            CliffordGate::S(q) => CliffordGate::Sdg(q),
            CliffordGate::Sdg(q) => CliffordGate::S(q),
            other => other,
        }
    }

    fn qubits(self) -> Vec<usize> {
        match self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Z(q) => vec![q],
            CliffordGate::Cnot { control, target } => vec![control, target],
        }
    }

    /// Image `G P_q G†` of the single-qubit Pauli `letter` on qubit `q`.
    fn image(self, n: usize, q: usize, letter: Letter) -> PauliString {
        let single = |l: Letter, at: usize| PauliString::single(n, at, l);
        let with_phase = |mut p: PauliString, k: u8| {
            p.phase_exp = (p.phase_exp + k) % 4;
            p
        };
        let raw_y = |at: usize| {
            // X·Z with phase 0, i.e. i·Y in letter form.
            let mut p = PauliString::identity(n);
            p.x_bits[at] = true;
            p.z_bits[at] = true;
            p
        };
        let base = single(letter, q);
        match (self, letter) {
            (CliffordGate::H(t), Letter::X) if t == q => single(Letter::Z, q),
            (CliffordGate::H(t), Letter::Z) if t == q => single(Letter::X, q),
            (CliffordGate::S(t), Letter::X) if t == q => with_phase(raw_y(q), 1),
            (CliffordGate::Sdg(t), Letter::X) if t == q => with_phase(raw_y(q), 3),
            (CliffordGate::X(t), Letter::Z) if t == q => with_phase(base, 2),
            (CliffordGate::Z(t), Letter::X) if t == q => with_phase(base, 2),
            (CliffordGate::Cnot { control, target }, Letter::X) if control == q => {
                pauli_mul(&base, &single(Letter::X, target)).expect("same n")
            }
            (CliffordGate::Cnot { control, target }, Letter::Z) if target == q => {
                pauli_mul(&single(Letter::Z, control), &base).expect("same n")
            }
            _ => base,
        }
    }

    /// `G p G†`.
    pub fn conjugate(self, p: &PauliString) -> PauliString {
        let touched = self.qubits();
        let mut out = p.clone();
        for &q in &touched {
            out.x_bits[q] = false;
            out.z_bits[q] = false;
        }
        // Factors on different qubits commute, so the untouched remainder can
        // be multiplied by the images of X^x Z^z on each touched qubit.
        for &q in &touched {
            if p.x_bits[q] {
                out = pauli_mul(&out, &self.image(p.n, q, Letter::X)).expect("same n");
            }
            if p.z_bits[q] {
                out = pauli_mul(&out, &self.image(p.n, q, Letter::Z)).expect("same n");
            }
        }
        out
    }

    fn single_qubit_matrix(self) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        let rows = match self {
            CliffordGate::H(_) => vec![vec![ONE * s, ONE * s], vec![ONE * s, -ONE * s]],
            CliffordGate::S(_) => vec![vec![ONE, ZERO], vec![ZERO, i]],
            CliffordGate::Sdg(_) => vec![vec![ONE, ZERO], vec![ZERO, -i]],
            CliffordGate::X(_) => vec![vec![ZERO, ONE], vec![ONE, ZERO]],
            CliffordGate::Z(_) => vec![vec![ONE, ZERO], vec![ZERO, -ONE]],
            CliffordGate::Cnot { .. } => unreachable!("two-qubit gate"),
        };
        ComplexMatrix::from_rows(&rows).expect("2x2")
    }

    pub fn matrix(self, n: usize) -> Result<ComplexMatrix> {
        check_matrix_cap(n)?;
        let d = 1usize << n;
        match self {
            CliffordGate::Cnot { control, target } => {
                let (cbit, tbit) = (1 << (n - 1 - control), 1 << (n - 1 - target));
                let mut entries = vec![ZERO; d * d];
                for col in 0..d {
                    let row = if col & cbit != 0 { col ^ tbit } else { col };
                    entries[row * d + col] = ONE;
                }
                Ok(ComplexMatrix::new(d, entries)?)
            }
            gate => {
                let q = gate.qubits()[0];
                let mut m = ComplexMatrix::identity(1 << q);
                m = m.kron(&gate.single_qubit_matrix());
                Ok(m.kron(&ComplexMatrix::identity(1 << (n - 1 - q))))
            }
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CliffordGate::H(q) => write!(f, "H {q}"),
            CliffordGate::S(q) => write!(f, "S {q}"),
            CliffordGate::Sdg(q) => write!(f, "SDG {q}"),
            CliffordGate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            CliffordGate::X(q) => write!(f, "X {q}"),
            CliffordGate::Z(q) => write!(f, "Z {q}"),
        }
    }
}

/// Gate sequence applied left to right: the unitary is `G_m ⋯ G_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordCircuit {
    pub n: usize,
    pub gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    /// Uniformly drawn gates from `{H, S, CNOT, X}`.
    pub fn random<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> Self {
        let gates = (0..len)
            .map(|_| {
                let q = rng.random_range(0..n);
                match rng.random_range(0..if n > 1 { 4 } else { 3 }) {
                    0 => CliffordGate::H(q),
                    1 => CliffordGate::S(q),
                    2 => CliffordGate::X(q),
                    _ => {
                        let mut t = rng.random_range(0..n - 1);
                        if t >= q {
                            t += 1;
                        }
                        CliffordGate::Cnot {
                            control: q,
                            target: t,
                        }
                    }
                }
            })
            .collect();
        Self { n, gates }
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    /// `C p C†`.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        self.gates
            .iter()
            .fold(p.clone(), |acc, g| g.conjugate(&acc))
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let mut u = ComplexMatrix::identity(1 << self.n);
        for g in &self.gates {
            u = &g.matrix(self.n)? * &u;
        }
        Ok(u)
    }
}

/// `⟨C Z_1 C†, …, C Z_s C†⟩` for a random Clifford `C` of `4·n²` gates; the
/// trailing `X` gates give random signs.
pub fn random_stabilizer_group<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    rng: &mut R,
) -> Result<PauliGroup> {
    if s > n {
        return Err(PauliError::NotStabilizer(format!(
            "{s} generators on {n} qubits"
        )));
    }
    let circuit = CliffordCircuit::random(n, 4 * n * n + 2, rng);
    let gens: Vec<PauliString> = (0..s)
        .map(|r| circuit.conjugate(&PauliString::single(n, r, Letter::Z)))
        .collect();
    PauliGroup::generate(n, &gens)
}

/// Result of mapping a stabilizer group onto `⟨Z_1, …, Z_s⟩`.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    /// Circuit for `U`; `U Z_i U† = generators[i]`.
    pub circuit: CliffordCircuit,
    pub unitary: ComplexMatrix,
    /// The input generators, in the order matched to `Z_1, …, Z_s`.
    pub generators: Vec<PauliString>,
    /// `Z_1, …, Z_s`.
    pub canonical: Vec<PauliString>,
}

/// Finds a Clifford `U` with `U Z_i U† = g_i` for the group's generators.
///
/// Symplectic Gaussian elimination: generator `k` is reduced to `+Z_k` with
/// H/S on its support, CNOTs to collapse the support onto one pivot, a swap
/// to bring the pivot to qubit `k`, CNOTs to strip earlier `Z_j` factors and
/// an `X_k` correction to fix the sign. Gates acting only on qubits `≥ k` or
/// controlled from `j < k` leave the earlier `Z_j` untouched.
pub fn clifford_canonicalize(group: &PauliGroup) -> Result<Canonicalization> {
    group.require_stabilizer()?;
    check_matrix_cap(group.n)?;
    let n = group.n;
    let mut gens = group.generators.clone();
    let mut reduce = CliffordCircuit::new(n);
    let mut apply = |gate: CliffordGate, gens: &mut Vec<PauliString>| {
        for g in gens.iter_mut() {
            *g = gate.conjugate(g);
        }
        reduce.gates.push(gate);
    };
    for k in 0..gens.len() {
        if k >= n {
            return Err(PauliError::DependentGenerators { index: k });
        }
        let support: Vec<usize> = (k..n)
            .filter(|&q| gens[k].x_bits[q] || gens[k].z_bits[q])
            .collect();
        let Some(&pivot) = support.first() else {
            return Err(PauliError::DependentGenerators { index: k });
        };
        for &q in &support {
            match (gens[k].x_bits[q], gens[k].z_bits[q]) {
                (true, true) => {
                    apply(CliffordGate::S(q), &mut gens);
                    apply(CliffordGate::H(q), &mut gens);
                }
                (true, false) => apply(CliffordGate::H(q), &mut gens),
                _ => {}
            }
        }
        for &q in &support[1..] {
            apply(
                CliffordGate::Cnot {
                    control: q,
                    target: pivot,
                },
                &mut gens,
            );
        }
        if pivot != k {
            apply(
                CliffordGate::Cnot {
                    control: pivot,
                    target: k,
                },
                &mut gens,
            );
            apply(
                CliffordGate::Cnot {
                    control: k,
                    target: pivot,
                },
                &mut gens,
            );
            apply(
                CliffordGate::Cnot {
                    control: pivot,
                    target: k,
                },
                &mut gens,
            );
        }
        for j in 0..k {
            if gens[k].z_bits[j] {
                apply(
                    CliffordGate::Cnot {
                        control: j,
                        target: k,
                    },
                    &mut gens,
                );
            }
        }
        match gens[k].letter_phase() {
            0 => {}
            2 => apply(CliffordGate::X(k), &mut gens),
            _ => {
                return Err(PauliError::NotStabilizer(format!(
                    "generator {k} is not Hermitian"
                )))
            }
        }
        debug_assert_eq!(gens[k], PauliString::single(n, k, Letter::Z));
    }
    let circuit = reduce.inverse();
    let unitary = circuit.matrix()?;
    Ok(Canonicalization {
        unitary,
        circuit,
        generators: group.generators.clone(),
        canonical: gens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rank_of_projector, C64};

    fn p(text: &str) -> PauliString {
        parse_pauli(text, text.trim_start_matches(['+', '-', 'i']).len()).unwrap()
    }

    fn m(rows: &[[(f64, f64); 2]; 2]) -> ComplexMatrix {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&(a, b)| C64::new(a, b)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn parse_examples() {
        let zi = parse_pauli("ZI", 2).unwrap();
        assert_eq!(
            (zi.phase_exp(), zi.x_bits(), zi.z_bits()),
            (0, &[false, false][..], &[true, false][..])
        );
        let xx = parse_pauli("-XX", 2).unwrap();
        assert_eq!(
            (xx.phase_exp(), xx.x_bits(), xx.z_bits()),
            (2, &[true, true][..], &[false, false][..])
        );
        let y = parse_pauli("Y", 1).unwrap();
        assert_eq!(y.phase_exp(), 3);
        assert_eq!(
            to_matrix(&y).unwrap(),
            m(&[[(0.0, 0.0), (0.0, 1.0)], [(0.0, -1.0), (0.0, 0.0)]])
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_pauli("ZZ", 3),
            Err(PauliError::BadLength { .. })
        ));
        assert!(matches!(
            parse_pauli("ZQ", 2),
            Err(PauliError::BadCharacter { letter: 'Q', .. })
        ));
        assert!(matches!(
            parse_pauli("--ZZ", 2),
            Err(PauliError::BadPrefix { .. })
        ));
        assert!(matches!(
            parse_pauli("2ZZ", 2),
            Err(PauliError::BadPrefix { .. })
        ));
    }

    #[test]
    fn display_round_trips() {
        for text in ["XYZ", "-iYIY", "iZ", "-XX", "IIII"] {
            let s = p(text);
            assert_eq!(s.to_string(), text);
            assert_eq!(parse_pauli(&s.to_string(), s.n()).unwrap(), s);
        }
        assert_eq!(p("+Y").to_string(), "Y");
    }

    #[test]
    fn to_matrix_examples() {
        assert_eq!(
            to_matrix(&p("Z")).unwrap(),
            ComplexMatrix::diagonal(&[ONE, -ONE])
        );
        let x = to_matrix(&p("X")).unwrap();
        assert_eq!(
            to_matrix(&p("XI")).unwrap(),
            x.kron(&ComplexMatrix::identity(2))
        );
        assert!(matches!(
            to_matrix(&PauliString::identity(13)),
            Err(PauliError::TooManyQubits { .. })
        ));
    }

    #[test]
    fn mul_examples() {
        // X·Z = [[0,-1],[1,0]] = i·Y with Y = [[0,i],[-i,0]].
        let xz = pauli_mul(&p("X"), &p("Z")).unwrap();
        assert_eq!(xz, p("iY"));
        assert_eq!(
            to_matrix(&xz).unwrap(),
            m(&[[(0.0, 0.0), (-1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
        );
        assert_eq!(pauli_mul(&p("Z"), &p("Z")).unwrap(), p("I"));
        let prod = pauli_mul(&p("ZZ"), &p("XX")).unwrap();
        let expect = &to_matrix(&p("ZZ")).unwrap() * &to_matrix(&p("XX")).unwrap();
        assert_eq!(to_matrix(&prod).unwrap(), expect);
        assert!(pauli_mul(&p("Z"), &p("ZZ")).is_err());
    }

    #[test]
    fn fourth_power_is_identity() {
        for s in ["iXYZ", "-YY", "iI", "Y"] {
            let a = p(s);
            let mut acc = PauliString::identity(a.n());
            for _ in 0..4 {
                acc = pauli_mul(&acc, &a).unwrap();
            }
            assert_eq!(acc, PauliString::identity(a.n()));
        }
    }

    #[test]
    fn commutes_examples() {
        assert!(!commutes(&p("X"), &p("Z")).unwrap());
        assert!(commutes(&p("XX"), &p("ZZ")).unwrap());
        assert!(commutes(&p("XYZ"), &PauliString::identity(3)).unwrap());
    }

    #[test]
    fn exhaustive_matrix_agreement_up_to_three_qubits() {
        for n in 1..=3 {
            let all: Vec<_> = all_phase_free(n).collect();
            let mats: Vec<_> = all.iter().map(|s| to_matrix(s).unwrap()).collect();
            for (a, ma) in all.iter().zip(&mats) {
                for (b, mb) in all.iter().zip(&mats) {
                    let prod = to_matrix(&pauli_mul(a, b).unwrap()).unwrap();
                    assert!(prod.distance(&(ma * mb)).unwrap() <= 1e-12);
                    let comm = ma.commutator_norm(mb).unwrap() <= 1e-12;
                    assert_eq!(commutes(a, b).unwrap(), comm, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn group_examples() {
        let g = PauliGroup::parse(1, "Z").unwrap();
        assert_eq!(g.elements, vec![p("I"), p("Z")]);
        assert!(g.is_abelian && g.minus_identity_free);

        let g = PauliGroup::parse(1, "X,Z").unwrap();
        // Dihedral group {±I, ±X, ±Z, ±XZ}; ±i phases never arise from X and Z alone.
        assert_eq!(g.elements.len(), 8);
        assert!(!g.is_abelian);
        assert!(!g.minus_identity_free);
        assert!(g.elements.contains(&p("-I")));

        let g = PauliGroup::parse(3, "ZZI,IZZ").unwrap();
        assert_eq!(g.elements.len(), 4);
        assert!(g.is_stabilizer());
        assert_eq!(g.independent_generators(), 2);

        // Hermitian-looking generators whose product is -I.
        let g = PauliGroup::parse(1, "Z,-Z").unwrap();
        assert!(g.is_abelian && !g.minus_identity_free);
        assert!(matches!(
            generate_group(1, &[p("X"), p("Z")], 7),
            Err(PauliError::ClosureTooLarge { cap: 7 })
        ));
    }

    #[test]
    fn normalizer_examples() {
        let g = PauliGroup::parse(1, "Z").unwrap();
        assert_eq!(normalizer(&g).unwrap(), vec![p("I"), p("Z")]);

        // {I,Z} on the first qubit, anything on the second.
        let g = PauliGroup::parse(2, "ZI").unwrap();
        let norm = normalizer(&g).unwrap();
        assert_eq!(norm.len(), 8);
        assert!(norm
            .iter()
            .all(|s| matches!(s.letter(0), Letter::I | Letter::Z)));

        let trivial = PauliGroup::generate(2, &[]).unwrap();
        assert_eq!(normalizer(&trivial).unwrap().len(), 16);

        assert!(normalizer(&PauliGroup::parse(1, "X,Z").unwrap()).is_err());
    }

    #[test]
    fn normalizer_is_closed_and_contains_group() {
        let g = PauliGroup::parse(3, "XXI,-ZZZ").unwrap();
        let norm = normalizer(&g).unwrap();
        let keys: HashSet<_> = norm.iter().map(PauliString::support_key).collect();
        for a in &norm {
            for b in &norm {
                assert!(keys.contains(&pauli_mul(a, b).unwrap().support_key()));
            }
        }
        for e in &g.elements {
            assert!(keys.contains(&e.support_key()));
        }
    }

    #[test]
    fn codespace_projector_examples() {
        let pz = codespace_projector(&PauliGroup::parse(1, "Z").unwrap()).unwrap();
        assert_eq!(pz, ComplexMatrix::diagonal(&[ONE, ZERO]));

        let rep = codespace_projector(&PauliGroup::parse(3, "ZZI,IZZ").unwrap()).unwrap();
        let mut diag = vec![ZERO; 8];
        diag[0] = ONE;
        diag[7] = ONE;
        assert!(rep.distance(&ComplexMatrix::diagonal(&diag)).unwrap() <= 1e-12);
        assert_eq!(rank_of_projector(&rep, 1e-12).unwrap(), 2);

        let id = codespace_projector(&PauliGroup::generate(2, &[]).unwrap()).unwrap();
        assert_eq!(id, ComplexMatrix::identity(4));
    }

    #[test]
    fn gate_conjugation_matches_matrices() {
        let gates = [
            CliffordGate::H(0),
            CliffordGate::H(1),
            CliffordGate::S(0),
            CliffordGate::Sdg(1),
            CliffordGate::X(1),
            CliffordGate::Z(0),
            CliffordGate::Cnot {
                control: 0,
                target: 1,
            },
            CliffordGate::Cnot {
                control: 1,
                target: 0,
            },
        ];
        for gate in gates {
            let u = gate.matrix(2).unwrap();
            assert!(u.unitarity_residual() <= 1e-12);
            for s in all_phase_free(2) {
                let lhs = to_matrix(&gate.conjugate(&s)).unwrap();
                let rhs = to_matrix(&s).unwrap().conjugate_by(&u).unwrap();
                assert!(lhs.distance(&rhs).unwrap() <= 1e-12, "{gate:?} on {s}");
            }
        }
    }

    fn check_canonicalization(group: &PauliGroup) -> Canonicalization {
        let c = clifford_canonicalize(group).unwrap();
        let u = &c.unitary;
        assert!(u.unitarity_residual() <= 1e-9);
        for (i, g) in c.generators.iter().enumerate() {
            let zi = to_matrix(&PauliString::single(group.n, i, Letter::Z)).unwrap();
            let image = zi.conjugate_by(u).unwrap();
            assert!(
                image.distance(&to_matrix(g).unwrap()).unwrap() <= 1e-9,
                "generator {g}"
            );
            assert_eq!(c.circuit.conjugate(&c.canonical[i]), *g);
        }
        c
    }

    #[test]
    fn canonicalize_examples() {
        let c = check_canonicalization(&PauliGroup::parse(1, "Z").unwrap());
        assert!(c.unitary.distance(&ComplexMatrix::identity(2)).unwrap() <= 1e-12);

        let c = check_canonicalization(&PauliGroup::parse(1, "X").unwrap());
        let h = CliffordGate::H(0).matrix(1).unwrap();
        assert!(c.unitary.distance(&h).unwrap() <= 1e-12);

        check_canonicalization(&PauliGroup::parse(2, "XX,ZZ").unwrap());
        check_canonicalization(&PauliGroup::parse(3, "-YYI,ZZX").unwrap());
        check_canonicalization(&PauliGroup::parse(4, "XXXX,ZZZZ,XXII,-ZZII").unwrap());
    }

    #[test]
    fn canonicalize_rejects_dependent_generators() {
        let g = PauliGroup::parse(2, "ZZ,ZI,IZ").unwrap();
        assert!(matches!(
            clifford_canonicalize(&g),
            Err(PauliError::DependentGenerators { index: 2 })
        ));
        assert!(clifford_canonicalize(&PauliGroup::parse(1, "X,Z").unwrap()).is_err());
    }
}

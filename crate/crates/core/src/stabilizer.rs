//! Operator-system characterization for `G = ⟨Z_1, …, Z_s⟩`, the span
//! identity between valid `V_{M0}` and the errors outside the normalizer, and
//! a brute-force check of the classical stabilizer error-correction criterion.
//!
//! Coefficients are indexed by tuples `(j_1, …, j_n)` with `σ_0 = I`,
//! `σ_1 = Z`, `σ_2 = X`, `σ_3 = Y`. The first `s` indices split into the
//! classes `{0, 1}` (commute with `Z`) and `{2, 3}` (anticommute); the pattern
//! of classes is the block index `u`.

use std::collections::BTreeMap;
use std::thread;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, orthonormalize, subspace_equal, ComplexMatrix, OperatorSubspace, C64, ZERO,
};
use crate::ncgraph::{
    self, build_ncgraph, is_operator_system, pauli_group_unitaries, NcGraphError, PauliCoefficients,
};
use crate::pauli::{
    self, all_phase_free, clifford_canonicalize, codespace_projector, normalizer, Letter,
    PauliError, PauliGroup, PauliString,
};

/// Largest qubit count for [`classical_stabilizer_check`].
pub const CLASSICAL_CHECK_MAX_QUBITS: usize = 4;
/// Largest qubit count for [`stabilizer_span`].
pub const SPAN_MAX_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilizerError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    NcGraph(#[from] NcGraphError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("malformed index tuple {0:?}")]
    MalformedIndex(String),
    #[error("need 1 <= s <= n, got n = {n}, s = {s}")]
    BadShape { n: usize, s: usize },
    #[error("invalid coefficients: {0:?}")]
    InvalidCoefficients(Vec<Violation>),
    #[error("trivial group: at least one stabilizer generator is required")]
    TrivialGroup,
    #[error("{n} qubits exceeds the brute-force cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, StabilizerError>;

/// Index class of each of the first `s` qubits; `true` means `j_r ∈ {2, 3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockIndex(pub Vec<bool>);

impl BlockIndex {
    pub fn of(index: &[u8], s: usize) -> Self {
        Self(index[..s].iter().map(|&j| j >= 2).collect())
    }

    pub fn is_zero(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    /// All `2^s − 1` nonzero blocks in binary order.
    pub fn nonzero(s: usize) -> impl Iterator<Item = BlockIndex> {
        (1..1usize << s)
            .map(move |k| BlockIndex((0..s).map(|r| k >> (s - 1 - r) & 1 == 1).collect()))
    }

    /// Every index tuple in this block: `j_r ∈ I_{u_r}` for `r ≤ s`, tail free.
    pub fn members(&self, n: usize) -> Vec<Vec<u8>> {
        let s = self.0.len();
        let mut out = vec![Vec::with_capacity(n)];
        for q in 0..n {
            let choices: &[u8] = match self.0.get(q) {
                Some(false) => &[0, 1],
                Some(true) => &[2, 3],
                None => &[0, 1, 2, 3],
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |&j| {
                        let mut v = prefix.clone();
                        v.push(j);
                        v
                    })
                })
                .collect();
        }
        debug_assert_eq!(out.len(), (1 << s) * 4usize.pow((n - s) as u32));
        out
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// `M0 = Σ α_j σ_{j_1} ⊗ ⋯ ⊗ σ_{j_n}` relative to `⟨Z_1, …, Z_s⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientJson", into = "CoefficientJson")]
pub struct M0Coefficients {
    pub n: usize,
    pub s: usize,
    pub alpha: BTreeMap<Vec<u8>, C64>,
}

/// `{"n": n, "s": s, "alpha": {"j1 j2 ... jn": [re, im], ...}}`.
#[derive(Serialize, Deserialize)]
struct CoefficientJson {
    n: usize,
    s: usize,
    alpha: BTreeMap<String, [f64; 2]>,
}

impl TryFrom<CoefficientJson> for M0Coefficients {
    type Error = StabilizerError;

    fn try_from(json: CoefficientJson) -> Result<Self> {
        let mut alpha = BTreeMap::new();
        for (key, [re, im]) in json.alpha {
            let index = key
                .split_whitespace()
                .map(|t| t.parse::<u8>().ok().filter(|&j| j < 4))
                .collect::<Option<Vec<u8>>>()
                .ok_or_else(|| StabilizerError::MalformedIndex(key.clone()))?;
            alpha.insert(index, C64::new(re, im));
        }
        let coeffs = M0Coefficients {
            n: json.n,
            s: json.s,
            alpha,
        };
        coeffs.validate_shape()?;
        Ok(coeffs)
    }
}

impl From<M0Coefficients> for CoefficientJson {
    fn from(c: M0Coefficients) -> Self {
        CoefficientJson {
            n: c.n,
            s: c.s,
            alpha: c
                .alpha
                .into_iter()
                .map(|(k, v)| {
                    let key: Vec<String> = k.iter().map(u8::to_string).collect();
                    (key.join(" "), [v.re, v.im])
                })
                .collect(),
        }
    }
}

impl M0Coefficients {
    pub fn new(n: usize, s: usize) -> Self {
        Self {
            n,
            s,
            alpha: BTreeMap::new(),
        }
    }

    pub fn with(mut self, index: &[u8], value: C64) -> Self {
        self.alpha.insert(index.to_vec(), value);
        self
    }

    /// Converts the letter-keyed form (`{"XIZ": [re, im]}`).
    pub fn from_pauli(coeffs: &PauliCoefficients, s: usize) -> Result<Self> {
        let mut alpha = BTreeMap::new();
        for (key, [re, im]) in &coeffs.coeffs {
            let p = pauli::parse_pauli(key, coeffs.n)?;
            if p.letter_phase() != 0 {
                return Err(StabilizerError::MalformedIndex(key.clone()));
            }
            *alpha.entry(p.sigma_indices()).or_insert(ZERO) += C64::new(*re, *im);
        }
        let out = Self {
            n: coeffs.n,
            s,
            alpha,
        };
        out.validate_shape()?;
        Ok(out)
    }

    pub fn to_pauli(&self) -> PauliCoefficients {
        PauliCoefficients {
            n: self.n,
            coeffs: self
                .alpha
                .iter()
                .map(|(k, v)| {
                    let p = PauliString::from_sigma_indices(k).expect("validated indices");
                    (p.to_string(), [v.re, v.im])
                })
                .collect(),
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.s == 0 || self.s > self.n {
            return Err(StabilizerError::BadShape {
                n: self.n,
                s: self.s,
            });
        }
        for k in self.alpha.keys() {
            if k.len() != self.n || k.iter().any(|&j| j > 3) {
                return Err(StabilizerError::MalformedIndex(format!("{k:?}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, index: &[u8]) -> C64 {
        self.alpha.get(index).copied().unwrap_or(ZERO)
    }

    fn identity_index(&self) -> Vec<u8> {
        vec![0; self.n]
    }

    fn norm(&self) -> f64 {
        self.alpha
            .values()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficients of one block, in member order.
    fn block_vector(&self, block: &BlockIndex) -> Vec<(Vec<u8>, C64)> {
        block
            .members(self.n)
            .into_iter()
            .map(|k| {
                let v = self.get(&k);
                (k, v)
            })
            .filter(|(_, v)| *v != ZERO)
            .collect()
    }

    /// `Σ α σ` over the members of one block.
    pub fn block_matrix(&self, block: &BlockIndex) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::zeros(1 << self.n);
        for (k, v) in self.block_vector(block) {
            let p = PauliString::from_sigma_indices(&k).expect("validated indices");
            m = &m + &pauli::to_matrix(&p)?.scale(v);
        }
        Ok(m)
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        self.validate_shape()?;
        Ok(self.to_pauli().to_matrix()?)
    }
}

/// A failed condition of the characterization.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `α_{0…0}` vanishes.
    IdentityCoefficientZero,
    /// A nonzero coefficient on a string commuting with every `Z_r` other
    /// than the identity.
    ForbiddenTerm { index: Vec<u8>, value: [f64; 2] },
    /// No single phase makes the block real; `residual` is the distance of
    /// the block's adjoint from its own line.
    LineCondition { block: String, residual: f64 },
}

/// Distance of `v̄` from `span{v}`, normalized:
/// `2‖a‖‖b‖/(‖a‖² + ‖b‖²)` where `e^{-iφ} v = a + ib` with the phase chosen so
/// that `Σ (e^{-iφ} v_k)²` is real and nonnegative.
fn line_residual(values: &[C64]) -> f64 {
    let sum_sq: C64 = values.iter().map(|v| v * v).sum();
    let rot = C64::from_polar(1.0, -sum_sq.arg() / 2.0);
    let (mut a2, mut b2) = (0.0, 0.0);
    for v in values {
        let w = v * rot;
        a2 += w.re * w.re;
        b2 += w.im * w.im;
    }
    if a2 + b2 == 0.0 {
        return 0.0;
    }
    2.0 * (a2 * b2).sqrt() / (a2 + b2)
}

/// Checks the three conditions characterizing an operator system:
/// nonzero identity coefficient, no other term commuting with all `Z_r`, and
/// every nonzero block on a complex line through the origin.
pub fn valid_m0_check(coeffs: &M0Coefficients, tol: f64) -> Result<(bool, Vec<Violation>)> {
    coeffs.validate_shape()?;
    let scale = coeffs.norm().max(f64::MIN_POSITIVE);
    let mut violations = Vec::new();
    if coeffs.get(&coeffs.identity_index()).norm() <= tol * scale {
        violations.push(Violation::IdentityCoefficientZero);
    }
    for (index, value) in &coeffs.alpha {
        let commuting = BlockIndex::of(index, coeffs.s).is_zero();
        let is_identity = index.iter().all(|&j| j == 0);
        if commuting && !is_identity && value.norm() > tol * scale {
            violations.push(Violation::ForbiddenTerm {
                index: index.clone(),
                value: [value.re, value.im],
            });
        }
    }
    for block in BlockIndex::nonzero(coeffs.s) {
        let values: Vec<C64> = coeffs
            .block_vector(&block)
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        let residual = line_residual(&values);
        if residual > tol {
            violations.push(Violation::LineCondition {
                block: block.label(),
                residual,
            });
        }
    }
    Ok((violations.is_empty(), violations))
}

/// Deterministic random coefficients satisfying every condition of
/// [`valid_m0_check`].
pub fn valid_m0_sample(n: usize, s: usize, seed: u64) -> Result<M0Coefficients> {
    if s == 0 || s > n || n > SPAN_MAX_QUBITS {
        return Err(StabilizerError::BadShape { n, s });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = M0Coefficients::new(n, s);
    let r0 = rng.random_range(0.5..2.0);
    let t0 = rng.random_range(0.0..std::f64::consts::TAU);
    out.alpha.insert(vec![0; n], C64::from_polar(r0, t0));
    for block in BlockIndex::nonzero(s) {
        if rng.random_bool(0.25) {
            continue;
        }
        let members = block.members(n);
        let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let count = rng.random_range(1..=members.len().min(3));
        for idx in sample(&mut rng, members.len(), count) {
            let magnitude = rng.random_range(0.25..2.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            out.alpha
                .insert(members[idx].clone(), phase * (sign * magnitude));
        }
    }
    Ok(out)
}

/// Breaks exactly one condition of a valid sample, chosen by `seed`:
/// zeroes the identity coefficient, adds a forbidden term, or adds a
/// block member a quarter turn off the block's line.
pub fn perturb_invalid(coeffs: &M0Coefficients, seed: u64) -> M0Coefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = coeffs.clone();
    let n = coeffs.n;
    match rng.random_range(0..3) {
        0 => {
            out.alpha.remove(&vec![0; n]);
        }
        1 => {
            let commuting = BlockIndex(vec![false; coeffs.s]).members(n);
            let pick = &commuting[rng.random_range(1..commuting.len())];
            out.alpha.insert(
                pick.clone(),
                C64::from_polar(
                    rng.random_range(0.25..2.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                ),
            );
        }
        _ => {
            let blocks: Vec<BlockIndex> = BlockIndex::nonzero(coeffs.s).collect();
            let block = &blocks[rng.random_range(0..blocks.len())];
            let members = block.members(n);
            let present = coeffs.block_vector(block);
            let (anchor, phase) = match present.first() {
                Some((k, v)) => (k.clone(), C64::from_polar(1.0, v.arg())),
                None => (
                    members[0].clone(),
                    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
                ),
            };
            let off_line = members
                .iter()
                .find(|k| **k != anchor)
                .expect("blocks have >= 2 members");
            if present.is_empty() {
                out.alpha.insert(anchor, phase);
            }
            let quarter_turn = C64::new(0.0, rng.random_range(0.5..1.5));
            out.alpha.insert(off_line.clone(), phase * quarter_turn);
        }
    }
    out
}

/// `⟨Z_1, …, Z_s⟩` on `n` qubits.
pub fn z_form_group(n: usize, s: usize) -> Result<PauliGroup> {
    if s == 0 || s > n {
        return Err(StabilizerError::BadShape { n, s });
    }
    let gens: Vec<PauliString> = (0..s)
        .map(|r| PauliString::single(n, r, Letter::Z))
        .collect();
    Ok(PauliGroup::generate(n, &gens)?)
}

/// `V_{M0}` built numerically over `⟨Z_1, …, Z_s⟩`.
pub fn numeric_vm0(coeffs: &M0Coefficients, tol: f64) -> Result<ncgraph::NcGraph> {
    let group = z_form_group(coeffs.n, coeffs.s)?;
    Ok(build_ncgraph(
        pauli_group_unitaries(&group)?,
        coeffs.to_matrix()?,
        tol,
    )?)
}

/// Analytic basis `{I} ∪ {Σ_{block u} α σ : u ≠ 0}`, orthonormalized.
pub fn vm0_characterize(coeffs: &M0Coefficients) -> Result<OperatorSubspace> {
    let (ok, violations) = valid_m0_check(coeffs, linalg::DEFAULT_TOL)?;
    if !ok {
        return Err(StabilizerError::InvalidCoefficients(violations));
    }
    let mut mats = vec![ComplexMatrix::identity(1 << coeffs.n)];
    for block in BlockIndex::nonzero(coeffs.s) {
        mats.push(coeffs.block_matrix(&block)?);
    }
    Ok(orthonormalize(&mats, linalg::DEFAULT_TOL)?)
}

/// Both sides of the span identity for one stabilizer group.
#[derive(Debug, Clone)]
pub struct SpanIdentity {
    pub n: usize,
    pub s: usize,
    /// `span ⋃ V_{I+σ}` over the generating family.
    pub lhs: OperatorSubspace,
    /// `span({I} ∪ Paulis outside N(G))`.
    pub rhs: OperatorSubspace,
    pub equal: bool,
    pub expected_rank: usize,
    /// Members of the generating family whose `V_{I+σ}` was not an operator
    /// system; always zero unless tolerances are broken.
    pub rejected: usize,
}

/// `4^n − 2^s · 4^{n−s} + 1`.
pub fn expected_span_rank(n: usize, s: usize) -> usize {
    4usize.pow(n as u32) - (1 << s) * 4usize.pow((n - s) as u32) + 1
}

/// Computes both sides of the span identity.
///
/// The left side is generated by `M0 = I + U σ U†` where `U` maps `Z_r` to
/// the group's generators and `σ` ranges over the Paulis with some `X`/`Y` in
/// the first `s` positions; each such `V_{M0}` is built numerically over the
/// group's elements.
pub fn stabilizer_span(group: &PauliGroup, tol: f64) -> Result<SpanIdentity> {
    group.require_stabilizer()?;
    let n = group.n;
    if n > SPAN_MAX_QUBITS {
        return Err(StabilizerError::TooManyQubits {
            n,
            cap: SPAN_MAX_QUBITS,
        });
    }
    let s = group.independent_generators();
    if s == 0 {
        return Err(StabilizerError::TrivialGroup);
    }
    let reduced = if s == group.generators.len() {
        group.clone()
    } else {
        PauliGroup::generate(n, &independent_subset(&group.generators))?
    };
    let canon = clifford_canonicalize(&reduced)?;
    let unitaries = pauli_group_unitaries(group)?;
    let id = ComplexMatrix::identity(1 << n);
    let mut generators = Vec::new();
    let mut rejected = 0;
    for sigma in all_phase_free(n) {
        if BlockIndex::of(&sigma.sigma_indices(), s).is_zero() {
            continue;
        }
        let tau = pauli::to_matrix(&sigma)?.conjugate_by(&canon.unitary)?;
        let graph = build_ncgraph(unitaries.clone(), &id + &tau, tol)?;
        if is_operator_system(&graph.space, tol)?.0 {
            generators.extend(graph.space.basis().iter().cloned());
        } else {
            rejected += 1;
        }
    }
    let lhs = orthonormalize(&generators, tol)?;

    let normal: std::collections::HashSet<Vec<u8>> = normalizer(group)?
        .iter()
        .map(PauliString::sigma_indices)
        .collect();
    let mut rhs_mats = vec![id];
    for p in all_phase_free(n) {
        if !normal.contains(&p.sigma_indices()) {
            rhs_mats.push(pauli::to_matrix(&p)?);
        }
    }
    let rhs = orthonormalize(&rhs_mats, tol)?;
    let equal = rejected == 0 && subspace_equal(&lhs, &rhs, tol)?;
    Ok(SpanIdentity {
        n,
        s,
        lhs,
        rhs,
        equal,
        expected_rank: expected_span_rank(n, s),
        rejected,
    })
}

/// Greedy GF(2)-independent subset, preserving order.
fn independent_subset(gens: &[PauliString]) -> Vec<PauliString> {
    let mut kept: Vec<PauliString> = Vec::new();
    for g in gens {
        let mut trial = kept.clone();
        trial.push(g.clone());
        if pauli::symplectic_rank(&trial) == trial.len() {
            kept = trial;
        }
    }
    kept
}

/// One row of the brute-force comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalEntry {
    pub pauli: String,
    /// `P E P = c P` holds.
    pub compresses: bool,
    pub scalar: [f64; 2],
    /// `E ∈ span((P_n \ N(G)) ∪ G)`.
    pub in_span: bool,
}

impl ClassicalEntry {
    pub fn agrees(&self) -> bool {
        self.compresses == self.in_span
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCheck {
    pub holds: bool,
    pub entries: Vec<ClassicalEntry>,
}

/// For every phase-free Pauli `E`, compares `P E P ∝ P` against membership in
/// `span((P_n \ N(G)) ∪ G)`.
pub fn classical_stabilizer_check(group: &PauliGroup, tol: f64) -> Result<ClassicalCheck> {
    classical_stabilizer_check_sharded(group, tol, 1)
}

/// [`classical_stabilizer_check`] split across `jobs` threads; entries keep
/// the sequential order.
pub fn classical_stabilizer_check_sharded(
    group: &PauliGroup,
    tol: f64,
    jobs: usize,
) -> Result<ClassicalCheck> {
    group.require_stabilizer()?;
    let n = group.n;
    if n > CLASSICAL_CHECK_MAX_QUBITS {
        return Err(StabilizerError::TooManyQubits {
            n,
            cap: CLASSICAL_CHECK_MAX_QUBITS,
        });
    }
    let p = codespace_projector(group)?;
    let normal: std::collections::HashSet<Vec<u8>> = normalizer(group)?
        .iter()
        .map(PauliString::sigma_indices)
        .collect();
    let mut span_mats = group.matrices()?;
    for e in all_phase_free(n) {
        if !normal.contains(&e.sigma_indices()) {
            span_mats.push(pauli::to_matrix(&e)?);
        }
    }
    let span = orthonormalize(&span_mats, tol)?;
    let all: Vec<PauliString> = all_phase_free(n).collect();
    let chunk = all.len().div_ceil(jobs.max(1));
    let check = |e: &PauliString| -> Result<ClassicalEntry> {
        let m = pauli::to_matrix(e)?;
        let pep = p.try_mul(&m)?.try_mul(&p)?;
        let c = pep.trace() / p.trace();
        let compresses = pep.distance(&p.scale(c))? <= tol * p.hs_norm();
        Ok(ClassicalEntry {
            pauli: e.to_string(),
            compresses,
            scalar: [c.re, c.im],
            in_span: linalg::contains(&span, &m, tol)?,
        })
    };
    let entries: Vec<ClassicalEntry> = thread::scope(|scope| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(check).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<Vec<_>>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    Ok(ClassicalCheck {
        holds: entries.iter().all(ClassicalEntry::agrees),
        entries,
    })
}

//! Dense complex matrices, Hilbert–Schmidt subspace algebra and spectral
//! decomposition of normal (typically unitary) operators.
//!
//! Everything here is value-semantic: a [`ComplexMatrix`] is never mutated
//! after construction and every operation returns a fresh value.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Global relative tolerance (HS norm) used when a caller does not pass one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Two eigenvalues closer than this share one spectral projector.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Relative residual allowed in the normality and commutation checks.
pub const NORMALITY_TOL: f64 = 1e-8;

/// Largest Hilbert-space dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 4096;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("matrix is not normal (residual {residual:.3e})")]
    NotNormal { residual: f64 },
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("inputs {first} and {second} do not commute (residual {residual:.3e})")]
    NotCommuting {
        first: usize,
        second: usize,
        residual: f64,
    },
    #[error("not a projector: {0}")]
    NotProjector(String),
    #[error("empty input")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense `d × d` complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

/// JSON wire form: `{"dim": d, "re": [[...]], "im": [[...]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = LinalgError;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let d = json.dim;
        if json.re.len() != d || json.im.len() != d {
            return Err(LinalgError::Malformed(format!(
                "expected {d} rows, got re={} im={}",
                json.re.len(),
                json.im.len()
            )));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (row, (re, im)) in json.re.iter().zip(&json.im).enumerate() {
            if re.len() != d || im.len() != d {
                return Err(LinalgError::Malformed(format!("ragged row {row}")));
            }
            entries.extend(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)));
        }
        ComplexMatrix::new(d, entries)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            m.entries
                .chunks(m.dim)
                .map(|row| row.iter().map(f).collect())
                .collect()
        };
        MatrixJson {
            dim: m.dim,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.entries.chunks(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(LinalgError::Malformed("dimension must be positive".into()));
        }
        if dim > MAX_DIM {
            return Err(LinalgError::TooLarge(dim));
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::Malformed(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    /// Build from rows; rejects ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(LinalgError::Malformed("ragged rows".into()));
        }
        Self::new(d, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &z) in diag.iter().enumerate() {
            m.entries[i * dim + i] = z;
        }
        m
    }

    /// Rank-one projector `|v⟩⟨v|/⟨v|v⟩`.
    pub fn outer_projector(v: &[C64]) -> Self {
        let dim = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                entries.push(a * b.conj() / norm2);
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let row = &self.entries[i * d..(i + 1) * d];
            let out_row = &mut out[i * d..(i + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.entries[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            dim: d,
            entries: out,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − other‖_HS`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.hs_norm())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut entries = vec![ZERO; d * d];
        for i in 0..a {
            for j in 0..a {
                let s = self.entries[i * a + j];
                if s == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        entries[(i * b + k) * d + j * b + l] = s * other.entries[k * b + l];
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.try_mul(self)?.try_mul(&u.adjoint())
    }

    /// `‖AB − BA‖_HS`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.try_mul(other)?.distance(&other.try_mul(self)?)
    }

    /// `‖U†U − I‖_HS`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint()
            .try_mul(self)
            .and_then(|m| m.distance(&Self::identity(self.dim)))
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()).unwrap_or(f64::INFINITY) <= tol * self.hs_norm().max(1.0)
    }

    /// `‖UU† − U†U‖_HS`.
    pub fn normality_residual(&self) -> f64 {
        self.commutator_norm(&self.adjoint())
            .unwrap_or(f64::INFINITY)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(m[(i, j)]);
            }
        }
        Self { dim, entries }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on dimension mismatch; use [`ComplexMatrix::try_add`] otherwise.
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

/// Hilbert–Schmidt inner product `tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_dim(b)?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// A subspace of operators held as an HS-orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    tol: f64,
}

impl OperatorSubspace {
    /// The zero subspace of `B(C^dim)`.
    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
            tol,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn check_dim(&self, a: &ComplexMatrix) -> Result<()> {
        // The zero subspace built from an empty list carries no dimension.
        if self.basis.is_empty() && self.ambient_dim == 0 {
            return Ok(());
        }
        if a.dim != self.ambient_dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.ambient_dim,
                right: a.dim,
            });
        }
        Ok(())
    }

    /// Orthogonal projection of `a` onto the subspace.
    pub fn project(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(a)?;
        let mut out = vec![ZERO; a.entries.len()];
        for b in &self.basis {
            let c = hs_inner(b, a)?;
            for (o, &x) in out.iter_mut().zip(&b.entries) {
                *o += c * x;
            }
        }
        Ok(ComplexMatrix {
            dim: a.dim,
            entries: out,
        })
    }

    /// `‖A − proj(A)‖_HS`.
    pub fn residual(&self, a: &ComplexMatrix) -> Result<f64> {
        a.distance(&self.project(a)?)
    }
}

/// HS-orthonormal basis for `span(mats)`.
///
/// Modified Gram–Schmidt with one re-orthogonalization pass. A candidate is
/// dropped when its residual is at most `tol · max_i ‖mats_i‖_HS`.
pub fn orthonormalize(mats: &[ComplexMatrix], tol: f64) -> Result<OperatorSubspace> {
    let Some(first) = mats.first() else {
        return Ok(OperatorSubspace::zero(0, tol));
    };
    let dim = first.dim;
    for m in mats {
        first.check_dim(m)?;
    }
    let max_norm = mats.iter().map(ComplexMatrix::hs_norm).fold(0.0, f64::max);
    let threshold = tol * max_norm;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for m in mats {
        if basis.len() == dim * dim {
            break;
        }
        let mut v = m.entries.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > threshold && norm > 0.0 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    Ok(OperatorSubspace {
        ambient_dim: dim,
        basis: basis
            .into_iter()
            .map(|entries| ComplexMatrix { dim, entries })
            .collect(),
        tol,
    })
}

/// Membership test: `‖A − proj(A)‖_HS ≤ tol · max(1, ‖A‖_HS)`.
pub fn contains(space: &OperatorSubspace, a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(space.residual(a)? <= tol * a.hs_norm().max(1.0))
}

pub fn subspace_equal(a: &OperatorSubspace, b: &OperatorSubspace, tol: f64) -> Result<bool> {
    if a.ambient_dim != b.ambient_dim && a.rank() > 0 && b.rank() > 0 {
        return Err(LinalgError::DimensionMismatch {
            left: a.ambient_dim,
            right: b.ambient_dim,
        });
    }
    if a.rank() != b.rank() {
        return Ok(false);
    }
    for m in &a.basis {
        if !contains(b, m, tol)? {
            return Ok(false);
        }
    }
    for m in &b.basis {
        if !contains(a, m, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_projector(p: &ComplexMatrix, tol: f64) -> bool {
    let scale = tol * p.hs_norm().max(1.0);
    let herm = p.distance(&p.adjoint()).unwrap_or(f64::INFINITY);
    let idem = p
        .try_mul(p)
        .and_then(|pp| pp.distance(p))
        .unwrap_or(f64::INFINITY);
    herm <= scale && idem <= scale
}

/// `round(tr P)`; errors when `P` is not a projector or its trace is far
/// from an integer.
pub fn rank_of_projector(p: &ComplexMatrix, tol: f64) -> Result<usize> {
    if !is_projector(p, tol) {
        return Err(LinalgError::NotProjector(
            "not Hermitian and idempotent".into(),
        ));
    }
    let tr = p.trace();
    let rounded = tr.re.round();
    let slack = tol * (p.dim as f64).max(1.0);
    if (tr.re - rounded).abs() > slack || tr.im.abs() > slack || rounded < 0.0 {
        return Err(LinalgError::NotProjector(format!(
            "trace {tr} is not a nonnegative integer"
        )));
    }
    Ok(rounded as usize)
}

/// `U = Σ λ_i P_i` with distinct eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub pairs: Vec<(C64, ComplexMatrix)>,
    pub source_dim: usize,
}

impl SpectralDecomposition {
    /// `‖Σ P_i − I‖_HS`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .pairs
            .iter()
            .fold(ComplexMatrix::zeros(self.source_dim), |acc, (_, p)| {
                &acc + p
            });
        sum.distance(&ComplexMatrix::identity(self.source_dim))
            .unwrap_or(f64::INFINITY)
    }

    /// Largest `‖P_i P_j − δ_ij P_i‖_HS` over all pairs.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (_, p)) in self.pairs.iter().enumerate() {
            for (j, (_, q)) in self.pairs.iter().enumerate() {
                let pq = p * q;
                let r = if i == j {
                    pq.distance(p).unwrap_or(f64::INFINITY)
                } else {
                    pq.hs_norm()
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `‖Σ λ_i P_i − U‖_HS / max(1, ‖U‖_HS)`.
    pub fn reconstruction_residual(&self, source: &ComplexMatrix) -> f64 {
        let sum = self
            .pairs
            .iter()
            .fold(ComplexMatrix::zeros(self.source_dim), |acc, (l, p)| {
                &acc + &p.scale(*l)
            });
        sum.distance(source).unwrap_or(f64::INFINITY) / source.hs_norm().max(1.0)
    }
}

/// Eigenvalue and orthonormal column basis of one eigenspace.
struct Eigenspace {
    value: C64,
    basis: DMatrix<C64>,
}

/// Groups sorted reals into chains whose neighbours are within `tol`.
fn cluster_sorted(values: &[(f64, usize)], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &(v, idx) in values {
        match clusters.last_mut() {
            Some(c) if v - last <= tol => c.push(idx),
            _ => clusters.push(vec![idx]),
        }
        last = v;
    }
    clusters
}

/// Hermitian eigensolve followed by clustering of the eigenvalues.
/// Returns orthonormal column bases, one per cluster.
fn hermitian_clusters(h: &DMatrix<C64>, tol: f64) -> Result<Vec<DMatrix<C64>>> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        LinalgError::EigenFailure("Hermitian eigensolver did not converge".into())
    })?;
    let mut order: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(cluster_sorted(&order, tol)
        .into_iter()
        .map(|idx| {
            let mut basis = DMatrix::zeros(n, idx.len());
            for (c, &i) in idx.iter().enumerate() {
                basis.set_column(c, &eig.eigenvectors.column(i));
            }
            basis
        })
        .collect())
}

/// Eigenspaces of a normal matrix: split by the Hermitian part first, then
/// by the anti-Hermitian part restricted to each cluster.
fn normal_eigenspaces(u: &DMatrix<C64>, cluster_tol: f64) -> Result<Vec<Eigenspace>> {
    let adj = u.adjoint();
    let herm = (u + &adj).scale(0.5);
    let mut spaces: Vec<Eigenspace> = Vec::new();
    for v in hermitian_clusters(&herm, cluster_tol)? {
        let k = v.adjoint() * u * &v;
        let anti = (&k - k.adjoint()) * C64::new(0.0, -0.5);
        for w in hermitian_clusters(&anti, cluster_tol)? {
            let basis = &v * w;
            let restricted = basis.adjoint() * u * &basis;
            let value = restricted.trace() / basis.ncols() as f64;
            match spaces
                .iter_mut()
                .find(|s| (s.value - value).norm() <= cluster_tol)
            {
                Some(s) => {
                    let cols = s.basis.ncols();
                    let merged = s
                        .basis
                        .clone()
                        .resize_horizontally(cols + basis.ncols(), ZERO);
                    let mut merged = merged;
                    merged.columns_mut(cols, basis.ncols()).copy_from(&basis);
                    s.basis = merged;
                }
                None => spaces.push(Eigenspace { value, basis }),
            }
        }
    }
    spaces.sort_by(|a, b| eigen_order(a.value).total_cmp(&eigen_order(b.value)));
    Ok(spaces)
}

/// Sort key: argument in `[0, 2π)`, with values just below `2π` wrapped to 0.
fn eigen_order(z: C64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut a = z.arg().rem_euclid(tau);
    if tau - a < 1e-9 {
        a = 0.0;
    }
    a * 1e3 + z.norm().min(1e3 - 1.0) / 1e3
}

fn check_normal(u: &ComplexMatrix) -> Result<()> {
    let norm = u.hs_norm();
    let residual = u.normality_residual();
    if residual > NORMALITY_TOL * norm * norm.max(1.0) {
        return Err(LinalgError::NotNormal { residual });
    }
    Ok(())
}

/// Spectral decomposition of a normal matrix.
///
/// Hermitian involutions (every Pauli string) skip the eigensolver: their
/// projectors are `(I ± U)/2`.
pub fn spectral_projectors(u: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    check_normal(u)?;
    let d = u.dim;
    let id = ComplexMatrix::identity(d);
    let involution = u.is_hermitian(NORMALITY_TOL)
        && (u * u).distance(&id).unwrap_or(f64::INFINITY) <= NORMALITY_TOL * (d as f64).sqrt();
    if involution {
        let plus = (&id + u).scale(C64::new(0.5, 0.0));
        let minus = (&id - u).scale(C64::new(0.5, 0.0));
        let pairs = [(ONE, plus), (-ONE, minus)]
            .into_iter()
            .filter(|(_, p)| p.trace().re > 0.5)
            .collect();
        return Ok(SpectralDecomposition {
            pairs,
            source_dim: d,
        });
    }
    let pairs = normal_eigenspaces(&u.to_nalgebra(), cluster_tol)?
        .into_iter()
        .map(|s| {
            let p = &s.basis * s.basis.adjoint();
            (s.value, ComplexMatrix::from_nalgebra(&p))
        })
        .collect();
    Ok(SpectralDecomposition {
        pairs,
        source_dim: d,
    })
}

/// One joint eigenspace of a commuting family.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenspace {
    /// Scalar by which each input acts on the range, in input order.
    pub label: Vec<C64>,
    pub projector: ComplexMatrix,
    pub rank: usize,
}

/// Minimal family of orthogonal projectors on whose ranges every input acts
/// as a scalar.
///
/// Starts from `{I}` and splits each current range by the eigenspaces of the
/// next input compressed to it.
pub fn joint_eigenprojectors(
    us: &[ComplexMatrix],
    cluster_tol: f64,
) -> Result<Vec<JointEigenspace>> {
    let first = us.first().ok_or(LinalgError::EmptyInput)?;
    let d = first.dim;
    for u in us {
        first.check_dim(u)?;
        check_normal(u)?;
    }
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            let residual = us[i].commutator_norm(&us[j])?;
            if residual > NORMALITY_TOL * us[i].hs_norm() * us[j].hs_norm() {
                return Err(LinalgError::NotCommuting {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    let mut current: Vec<(Vec<C64>, DMatrix<C64>)> = vec![(Vec::new(), DMatrix::identity(d, d))];
    for u in us {
        let u = u.to_nalgebra();
        let mut next = Vec::with_capacity(current.len());
        for (label, range) in current {
            let compressed = range.adjoint() * &u * &range;
            for space in normal_eigenspaces(&compressed, cluster_tol)? {
                let mut label = label.clone();
                label.push(space.value);
                next.push((label, &range * space.basis));
            }
        }
        current = next;
    }
    let mut out: Vec<JointEigenspace> = current
        .into_iter()
        .map(|(label, basis)| JointEigenspace {
            label,
            rank: basis.ncols(),
            projector: ComplexMatrix::from_nalgebra(&(&basis * basis.adjoint())),
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = a.label.iter().map(|z| eigen_order(*z));
        let kb = b.label.iter().map(|z| eigen_order(*z));
        ka.partial_cmp(kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

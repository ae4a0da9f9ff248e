//! Noncommutative graphs `V = span{U M0 U† : U ∈ π(G)}` built from a finite
//! family of unitaries, the operator-system test, anticlique search over
//! joint eigenspaces and the Knill–Laflamme check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, hs_inner, joint_eigenprojectors, orthonormalize, rank_of_projector, ComplexMatrix,
    LinalgError, OperatorSubspace, C64, DEFAULT_CLUSTER_TOL,
};
use crate::pauli::{self, parse_pauli, PauliError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NcGraphError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("unitary {label:?} is not unitary (residual {residual:.3e})")]
    NotUnitary { label: String, residual: f64 },
    #[error("empty unitary family")]
    EmptyFamily,
    #[error("unitaries {first:?} and {second:?} do not commute (residual {residual:.3e})")]
    NotAbelian {
        first: String,
        second: String,
        residual: f64,
    },
    #[error("space is not an operator system: {0}")]
    NotOperatorSystem(OperatorSystemWitness),
    #[error("invalid bound arguments: {0}")]
    InvalidBounds(String),
    #[error("malformed M0: {0}")]
    MalformedM0(String),
}

pub type Result<T> = std::result::Result<T, NcGraphError>;

/// `V_{M0}` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct NcGraph {
    pub dim: usize,
    pub unitaries: Vec<(String, ComplexMatrix)>,
    pub m0: ComplexMatrix,
    /// `U M0 U†`, one per unitary, in input order.
    pub conjugates: Vec<ComplexMatrix>,
    pub space: OperatorSubspace,
}

pub fn build_ncgraph(
    unitaries: Vec<(String, ComplexMatrix)>,
    m0: ComplexMatrix,
    tol: f64,
) -> Result<NcGraph> {
    if unitaries.is_empty() {
        return Err(NcGraphError::EmptyFamily);
    }
    let dim = m0.dim();
    for (label, u) in &unitaries {
        if u.dim() != dim {
            return Err(LinalgError::DimensionMismatch {
                left: dim,
                right: u.dim(),
            }
            .into());
        }
        let residual = u.unitarity_residual();
        if residual > tol * (dim as f64).sqrt().max(1.0) {
            return Err(NcGraphError::NotUnitary {
                label: label.clone(),
                residual,
            });
        }
    }
    let conjugates = unitaries
        .iter()
        .map(|(_, u)| m0.conjugate_by(u))
        .collect::<linalg::Result<Vec<_>>>()?;
    let space = orthonormalize(&conjugates, tol)?;
    Ok(NcGraph {
        dim,
        unitaries,
        m0,
        conjugates,
        space,
    })
}

/// Labels each group element by its letter form, e.g. `"-ZZI"`.
pub fn pauli_group_unitaries(group: &pauli::PauliGroup) -> Result<Vec<(String, ComplexMatrix)>> {
    group
        .elements
        .iter()
        .map(|g| Ok((g.to_string(), pauli::to_matrix(g)?)))
        .collect()
}

/// First condition of the operator-system definition that fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSystemWitness {
    Holds,
    IdentityMissing { residual: f64 },
    AdjointEscapes { index: usize, residual: f64 },
}

impl std::fmt::Display for OperatorSystemWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Holds => write!(f, "operator system"),
            Self::IdentityMissing { residual } => {
                write!(f, "identity not in span (residual {residual:.3e})")
            }
            Self::AdjointEscapes { index, residual } => write!(
                f,
                "adjoint of basis element {index} leaves the span (residual {residual:.3e})"
            ),
        }
    }
}

/// Unital and adjoint-closed. Adjoint closure is checked per basis element,
/// which is equivalent to closure of the whole span.
pub fn is_operator_system(
    space: &OperatorSubspace,
    tol: f64,
) -> Result<(bool, OperatorSystemWitness)> {
    if space.rank() == 0 {
        return Ok((
            false,
            OperatorSystemWitness::IdentityMissing {
                residual: f64::INFINITY,
            },
        ));
    }
    let id = ComplexMatrix::identity(space.ambient_dim());
    if !linalg::contains(space, &id, tol)? {
        let residual = space.residual(&id)?;
        return Ok((false, OperatorSystemWitness::IdentityMissing { residual }));
    }
    for (index, b) in space.basis().iter().enumerate() {
        let adj = b.adjoint();
        if !linalg::contains(space, &adj, tol)? {
            let residual = space.residual(&adj)?;
            return Ok((
                false,
                OperatorSystemWitness::AdjointEscapes { index, residual },
            ));
        }
    }
    Ok((true, OperatorSystemWitness::Holds))
}

/// `P B P = λ_B P` with `λ_B = tr(PBP)/tr(P)`; returns `(λ_B, residual)`
/// where the residual is `‖PBP − λ_B P‖_HS / (‖P‖_HS · max(1, ‖B‖_HS))`.
fn compress(p: &ComplexMatrix, b: &ComplexMatrix) -> Result<(C64, f64)> {
    let pbp = p.try_mul(b)?.try_mul(p)?;
    let lambda = pbp.trace() / p.trace();
    let residual = pbp.distance(&p.scale(lambda))? / (p.hs_norm() * b.hs_norm().max(1.0));
    Ok((lambda, residual))
}

/// Outcome of checking `dim P V P = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticliqueCheck {
    pub holds: bool,
    /// `λ_B` per basis element of the space.
    pub scalars: Vec<C64>,
    pub residual: f64,
}

pub fn verify_anticlique(
    p: &ComplexMatrix,
    space: &OperatorSubspace,
    tol: f64,
) -> Result<AnticliqueCheck> {
    let rank = rank_of_projector(p, tol.max(1e-12))?;
    if rank == 0 {
        return Err(LinalgError::NotProjector("rank 0".into()).into());
    }
    let mut scalars = Vec::with_capacity(space.rank());
    let mut residual: f64 = 0.0;
    for b in space.basis() {
        let (lambda, r) = compress(p, b)?;
        scalars.push(lambda);
        residual = residual.max(r);
    }
    Ok(AnticliqueCheck {
        holds: residual <= tol,
        scalars,
        residual,
    })
}

/// A projector witnessing `P (U M0 U†) P = c(U) P` for every unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticliqueCertificate {
    pub projector: ComplexMatrix,
    pub rank: usize,
    /// Eigenvalue of each unitary on the range, in input order.
    pub eigenvalues: Vec<C64>,
    pub scalars: BTreeMap<String, C64>,
    pub residual: f64,
}

/// A rank ≥ 2 joint eigenprojector that failed to compress `V` to scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub projector: ComplexMatrix,
    pub rank: usize,
    pub eigenvalues: Vec<C64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnticliqueSearch {
    pub certificates: Vec<AnticliqueCertificate>,
    pub counterexamples: Vec<Counterexample>,
    /// Joint eigenprojectors of rank 1, skipped by the rank condition.
    pub rank_one: usize,
}

/// Certifies every joint eigenprojector of rank ≥ 2 of an abelian family
/// whose graph is an operator system.
pub fn find_anticliques(graph: &NcGraph, tol: f64) -> Result<AnticliqueSearch> {
    let (ok, witness) = is_operator_system(&graph.space, tol)?;
    if !ok {
        return Err(NcGraphError::NotOperatorSystem(witness));
    }
    let mats: Vec<ComplexMatrix> = graph.unitaries.iter().map(|(_, u)| u.clone()).collect();
    let joint = joint_eigenprojectors(&mats, DEFAULT_CLUSTER_TOL).map_err(|e| match e {
        LinalgError::NotCommuting {
            first,
            second,
            residual,
        } => NcGraphError::NotAbelian {
            first: graph.unitaries[first].0.clone(),
            second: graph.unitaries[second].0.clone(),
            residual,
        },
        other => other.into(),
    })?;
    let mut search = AnticliqueSearch {
        certificates: Vec::new(),
        counterexamples: Vec::new(),
        rank_one: 0,
    };
    for space in joint {
        if space.rank < 2 {
            search.rank_one += 1;
            continue;
        }
        let mut scalars = BTreeMap::new();
        let mut residual: f64 = 0.0;
        for ((label, _), conj) in graph.unitaries.iter().zip(&graph.conjugates) {
            let (c, r) = compress(&space.projector, conj)?;
            scalars.insert(label.clone(), c);
            residual = residual.max(r);
        }
        if residual <= tol {
            search.certificates.push(AnticliqueCertificate {
                projector: space.projector,
                rank: space.rank,
                eigenvalues: space.label,
                scalars,
                residual,
            });
        } else {
            search.counterexamples.push(Counterexample {
                projector: space.projector,
                rank: space.rank,
                eigenvalues: space.label,
                residual,
            });
        }
    }
    Ok(search)
}

/// Outcome of the Knill–Laflamme test `P E_i† E_j P = λ_ij P`.
#[derive(Debug, Clone, PartialEq)]
pub struct KlCheck {
    pub holds: bool,
    pub lambda: Vec<Vec<C64>>,
    /// Largest `‖P E_i† E_j P − λ_ij P‖_HS / ‖P‖_HS` (operators scaled to
    /// unit RMS singular value).
    pub max_residual: f64,
    /// `‖λ − λ†‖_F`.
    pub hermiticity_residual: f64,
}

pub fn kl_verify(p: &ComplexMatrix, errors: &[ComplexMatrix], tol: f64) -> Result<KlCheck> {
    rank_of_projector(p, tol.max(1e-12))?;
    let d = p.dim();
    for e in errors {
        if e.dim() != d {
            return Err(LinalgError::DimensionMismatch {
                left: d,
                right: e.dim(),
            }
            .into());
        }
    }
    let tr = p.trace();
    let adjoints: Vec<ComplexMatrix> = errors.iter().map(ComplexMatrix::adjoint).collect();
    let mut lambda = vec![vec![linalg::ZERO; errors.len()]; errors.len()];
    let mut max_residual: f64 = 0.0;
    for (i, ei) in adjoints.iter().enumerate() {
        for (j, ej) in errors.iter().enumerate() {
            let prod = ei.try_mul(ej)?;
            let compressed = p.try_mul(&prod)?.try_mul(p)?;
            let l = compressed.trace() / tr;
            let scale = p.hs_norm() * (prod.hs_norm() / (d as f64).sqrt()).max(1.0);
            max_residual = max_residual.max(compressed.distance(&p.scale(l))? / scale);
            lambda[i][j] = l;
        }
    }
    let hermiticity_residual = lambda
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            let lambda = &lambda;
            row.iter()
                .enumerate()
                .map(move |(j, l)| (l - lambda[j][i].conj()).norm_sqr())
        })
        .sum::<f64>()
        .sqrt();
    Ok(KlCheck {
        holds: max_residual <= tol && hermiticity_residual <= tol,
        lambda,
        max_residual,
        hermiticity_residual,
    })
}

/// Sufficient conditions for a `k`-dimensional anticlique:
/// `dim V (dim V + 1) ≤ d/k` in general and `dim V ≤ (d − k)/(k − 1)` for
/// commuting spanning sets. `k = 1` makes the second bound vacuous.
pub fn weaver_bounds(dim_v: usize, d: usize, k: usize) -> Result<(bool, bool)> {
    if d == 0 || k == 0 {
        return Err(NcGraphError::InvalidBounds(
            "d and k must be positive".into(),
        ));
    }
    if k > d {
        return Err(NcGraphError::InvalidBounds(format!(
            "k = {k} exceeds d = {d}"
        )));
    }
    let general = dim_v * (dim_v + 1) * k <= d;
    let commuting = k == 1 || dim_v * (k - 1) <= d - k;
    Ok((general, commuting))
}

/// `(1/|G|) Σ U M0 U† = I` within `tol · √d`.
pub fn finite_average_check(
    unitaries: &[ComplexMatrix],
    m0: &ComplexMatrix,
    tol: f64,
) -> Result<bool> {
    if unitaries.is_empty() {
        return Err(NcGraphError::EmptyFamily);
    }
    let d = m0.dim();
    let mut sum = ComplexMatrix::zeros(d);
    for u in unitaries {
        sum = sum.try_add(&m0.conjugate_by(u)?)?;
    }
    let avg = sum.scale(C64::new(1.0 / unitaries.len() as f64, 0.0));
    Ok(avg.distance(&ComplexMatrix::identity(d))? <= tol * (d as f64).sqrt())
}

/// `Σ c_σ σ` keyed by letter strings such as `"XIZ"`; the JSON form is
/// `{"n": n, "coeffs": {"XIZ": [re, im], ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub n: usize,
    pub coeffs: BTreeMap<String, [f64; 2]>,
}

impl PauliCoefficients {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.n == 0 || self.n > pauli::MAX_MATRIX_QUBITS {
            return Err(NcGraphError::MalformedM0(format!(
                "unsupported qubit count {}",
                self.n
            )));
        }
        let mut m = ComplexMatrix::zeros(1 << self.n);
        for (key, [re, im]) in &self.coeffs {
            let term = pauli::to_matrix(&parse_pauli(key, self.n)?)?;
            m = &m + &term.scale(C64::new(*re, *im));
        }
        Ok(m)
    }

    /// Pauli expansion `c_σ = tr(σ M)/2^n` of a dense matrix; drops terms
    /// below `cutoff`.
    pub fn from_matrix(m: &ComplexMatrix, cutoff: f64) -> Result<Self> {
        let d = m.dim();
        let n = d.trailing_zeros() as usize;
        if d != 1 << n {
            return Err(NcGraphError::MalformedM0(format!(
                "dimension {d} is not a power of two"
            )));
        }
        let mut coeffs = BTreeMap::new();
        for s in pauli::all_phase_free(n) {
            let c = hs_inner(&pauli::to_matrix(&s)?, m)? / d as f64;
            if c.norm() > cutoff {
                coeffs.insert(s.to_string(), [c.re, c.im]);
            }
        }
        Ok(Self { n, coeffs })
    }
}

/// Reads either the dense form `{"dim", "re", "im"}` or the Pauli form
/// `{"n", "coeffs"}`.
pub fn parse_m0_json(text: &str) -> Result<ComplexMatrix> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| NcGraphError::MalformedM0(e.to_string()))?;
    if value.get("coeffs").is_some() {
        let coeffs: PauliCoefficients =
            serde_json::from_value(value).map_err(|e| NcGraphError::MalformedM0(e.to_string()))?;
        coeffs.to_matrix()
    } else {
        serde_json::from_value(value).map_err(|e| NcGraphError::MalformedM0(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{subspace_equal, DEFAULT_TOL, ONE, ZERO};
    use crate::pauli::{codespace_projector, PauliGroup};

    const TOL: f64 = DEFAULT_TOL;

    fn pm(text: &str, n: usize) -> ComplexMatrix {
        pauli::to_matrix(&parse_pauli(text, n).unwrap()).unwrap()
    }

    fn labeled(items: &[(&str, usize)]) -> Vec<(String, ComplexMatrix)> {
        items
            .iter()
            .map(|&(t, n)| (t.to_string(), pm(t, n)))
            .collect()
    }

    fn group(n: usize, gens: &str) -> PauliGroup {
        PauliGroup::parse(n, gens).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = build_ncgraph(labeled(&[("I", 1)]), pm("X", 1), TOL).unwrap();
        assert_eq!(g.space.rank(), 1);

        let m0 = &pm("I", 1) + &pm("X", 1);
        let g = build_ncgraph(labeled(&[("I", 1), ("Z", 1)]), m0, TOL).unwrap();
        assert_eq!(g.space.rank(), 2);
        let ix = orthonormalize(&[pm("I", 1), pm("X", 1)], TOL).unwrap();
        assert!(subspace_equal(&g.space, &ix, TOL).unwrap());

        // X(Y)X = -Y and X(Z)X = -Z, so the conjugates are I ± (Y + Z).
        let m0 = &(&pm("I", 1) + &pm("Y", 1)) + &pm("Z", 1);
        let g = build_ncgraph(labeled(&[("I", 1), ("X", 1)]), m0, TOL).unwrap();
        assert_eq!(g.space.rank(), 2);
        for c in &g.conjugates {
            assert!(linalg::contains(&g.space, c, TOL).unwrap());
        }
    }

    #[test]
    fn build_rejects_non_unitary_and_mismatch() {
        let bad = vec![("2I".to_string(), pm("I", 1).scale(C64::new(2.0, 0.0)))];
        assert!(matches!(
            build_ncgraph(bad, pm("X", 1), TOL),
            Err(NcGraphError::NotUnitary { .. })
        ));
        assert!(build_ncgraph(labeled(&[("II", 2)]), pm("X", 1), TOL).is_err());
        assert!(matches!(
            build_ncgraph(vec![], pm("X", 1), TOL),
            Err(NcGraphError::EmptyFamily)
        ));
    }

    #[test]
    fn operator_system_examples() {
        let ix = orthonormalize(&[pm("I", 1), pm("X", 1)], TOL).unwrap();
        assert_eq!(
            is_operator_system(&ix, TOL).unwrap(),
            (true, OperatorSystemWitness::Holds)
        );

        let x = orthonormalize(&[pm("X", 1)], TOL).unwrap();
        assert!(matches!(
            is_operator_system(&x, TOL).unwrap(),
            (false, OperatorSystemWitness::IdentityMissing { .. })
        ));

        // M0 = I + iY + iZ under {I, X}: the block (i, i) lies on a line.
        let i = C64::new(0.0, 1.0);
        let m0 = &(&pm("I", 1) + &pm("Y", 1).scale(i)) + &pm("Z", 1).scale(i);
        let g = build_ncgraph(labeled(&[("I", 1), ("X", 1)]), m0, TOL).unwrap();
        assert!(is_operator_system(&g.space, TOL).unwrap().0);

        // Block (1, i) does not: the adjoint escapes.
        let m0 = &(&pm("I", 1) + &pm("Y", 1)) + &pm("Z", 1).scale(i);
        let g = build_ncgraph(labeled(&[("I", 1), ("X", 1)]), m0, TOL).unwrap();
        assert!(matches!(
            is_operator_system(&g.space, TOL).unwrap(),
            (false, OperatorSystemWitness::AdjointEscapes { .. })
        ));
    }

    #[test]
    fn anticlique_examples() {
        // <Z1 Z2>, M0 = I + X1.
        let m0 = &pm("II", 2) + &pm("XI", 2);
        let g = build_ncgraph(pauli_group_unitaries(&group(2, "ZZ")).unwrap(), m0, TOL).unwrap();
        let found = find_anticliques(&g, TOL).unwrap();
        assert_eq!(found.certificates.len(), 2);
        assert!(found.counterexamples.is_empty());
        let p_even = ComplexMatrix::diagonal(&[ONE, ZERO, ZERO, ONE]);
        assert!(found.certificates[0].projector.distance(&p_even).unwrap() < 1e-12);
        for cert in &found.certificates {
            assert_eq!(cert.rank, 2);
            assert!(cert.residual <= TOL);
            // Both conjugates I ± X1 compress to P.
            for c in cert.scalars.values() {
                assert!((c - ONE).norm() < 1e-12);
            }
            assert!(
                verify_anticlique(&cert.projector, &g.space, TOL)
                    .unwrap()
                    .holds
            );
        }

        let g = build_ncgraph(labeled(&[("II", 2)]), pm("II", 2), TOL).unwrap();
        let found = find_anticliques(&g, TOL).unwrap();
        assert_eq!(found.certificates.len(), 1);
        assert_eq!(found.certificates[0].rank, 4);
        assert!((found.certificates[0].scalars["II"] - ONE).norm() < 1e-12);

        let m0 = &pm("II", 2) + &pm("XX", 2);
        let g = build_ncgraph(pauli_group_unitaries(&group(2, "ZI,IZ")).unwrap(), m0, TOL).unwrap();
        let found = find_anticliques(&g, TOL).unwrap();
        assert!(found.certificates.is_empty());
        assert_eq!(found.rank_one, 4);
    }

    #[test]
    fn anticlique_preconditions() {
        let g = build_ncgraph(labeled(&[("I", 1)]), pm("X", 1), TOL).unwrap();
        assert!(matches!(
            find_anticliques(&g, TOL),
            Err(NcGraphError::NotOperatorSystem(_))
        ));

        let g = build_ncgraph(labeled(&[("I", 1), ("X", 1), ("Z", 1)]), pm("I", 1), TOL).unwrap();
        match find_anticliques(&g, TOL) {
            Err(NcGraphError::NotAbelian { first, second, .. }) => {
                assert_eq!((first.as_str(), second.as_str()), ("X", "Z"));
            }
            other => panic!("expected NotAbelian, got {other:?}"),
        }
    }

    #[test]
    fn verify_anticlique_examples() {
        let ix = orthonormalize(&[pm("I", 1), pm("X", 1)], TOL).unwrap();
        let p0 = (&pm("I", 1) + &pm("Z", 1)).scale(C64::new(0.5, 0.0));
        assert!(verify_anticlique(&p0, &ix, TOL).unwrap().holds);
        assert!(!verify_anticlique(&pm("I", 1), &ix, TOL).unwrap().holds);
        assert!(verify_anticlique(&pm("X", 1), &ix, TOL).is_err());
    }

    #[test]
    fn kl_examples() {
        let p = codespace_projector(&group(3, "ZZI,IZZ")).unwrap();
        let errors: Vec<_> = ["III", "XII", "IXI", "IIX"]
            .iter()
            .map(|e| pm(e, 3))
            .collect();
        let kl = kl_verify(&p, &errors, TOL).unwrap();
        assert!(kl.holds);
        for (i, row) in kl.lambda.iter().enumerate() {
            for (j, l) in row.iter().enumerate() {
                let expect = if i == j { ONE } else { ZERO };
                assert!((l - expect).norm() <= 1e-9);
            }
        }

        let rank_one = ComplexMatrix::outer_projector(&[ONE, C64::new(0.0, 1.0)]);
        assert!(kl_verify(&rank_one, &[pm("X", 1)], TOL).unwrap().holds);

        let kl = kl_verify(&p, &[pm("III", 3), pm("ZII", 3)], TOL).unwrap();
        assert!(!kl.holds);
        assert!(kl.max_residual > 0.5);

        assert!(kl_verify(&pm("X", 1), &[pm("X", 1)], TOL).is_err());
        assert!(kl_verify(&p, &[pm("X", 1)], TOL).is_err());
    }

    #[test]
    fn weaver_examples() {
        assert_eq!(weaver_bounds(1, 2, 1).unwrap(), (true, true));
        assert_eq!(weaver_bounds(3, 64, 2).unwrap(), (true, true));
        assert_eq!(weaver_bounds(13, 9, 3).unwrap(), (false, false));
        assert!(weaver_bounds(1, 2, 3).is_err());
    }

    #[test]
    fn finite_average_examples() {
        let iz = [pm("I", 1), pm("Z", 1)];
        assert!(finite_average_check(&iz, &(&pm("I", 1) + &pm("X", 1)), TOL).unwrap());
        assert!(!finite_average_check(&[pm("I", 1)], &pm("X", 1), TOL).unwrap());
        let ix = [pm("I", 1), pm("X", 1)];
        let m0 = &(&pm("I", 1) + &pm("Y", 1)) + &pm("Z", 1);
        assert!(finite_average_check(&ix, &m0, TOL).unwrap());
    }

    #[test]
    fn m0_json_forms() {
        let coeffs = r#"{"n": 1, "coeffs": {"I": [1, 0], "Y": [0, 1], "Z": [0, 1]}}"#;
        let m = parse_m0_json(coeffs).unwrap();
        let i = C64::new(0.0, 1.0);
        let expect = &(&pm("I", 1) + &pm("Y", 1).scale(i)) + &pm("Z", 1).scale(i);
        assert!(m.distance(&expect).unwrap() < 1e-15);

        let dense = serde_json::to_string(&expect).unwrap();
        assert_eq!(parse_m0_json(&dense).unwrap(), expect);

        let back = PauliCoefficients::from_matrix(&expect, 1e-12).unwrap();
        assert_eq!(back.coeffs.len(), 3);
        assert!(back.to_matrix().unwrap().distance(&expect).unwrap() < 1e-15);

        assert!(parse_m0_json(r#"{"n": 1, "coeffs": {"Q": [1, 0]}}"#).is_err());
        assert!(parse_m0_json("[1, 2]").is_err());
    }
}

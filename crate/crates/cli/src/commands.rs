//! One function per subcommand. Each returns a verdict and a JSON payload.

use ncgraph_core::linalg::{self, orthonormalize, ComplexMatrix, LinalgError, C64};
use ncgraph_core::ncgraph::{
    build_ncgraph, find_anticliques, is_operator_system, kl_verify, pauli_group_unitaries,
    NcGraphError,
};
use ncgraph_core::pauli::{
    self, clifford_canonicalize, codespace_projector, parse_pauli, Letter, PauliError, PauliGroup,
    PauliString,
};
use ncgraph_core::stabilizer::{
    classical_stabilizer_check_sharded, numeric_vm0, perturb_invalid, stabilizer_span,
    valid_m0_check, valid_m0_sample, M0Coefficients, StabilizerError,
};
use serde_json::{json, Value};

use crate::config::{Command, Inputs};

/// Why a command stopped before reaching a verdict.
#[derive(Debug)]
pub enum Failure {
    /// The input violates a mathematical precondition; reported as verdict false.
    Precondition(String),
    /// Malformed input or a resource cap; exit code 2.
    Input(String),
}

fn pauli_precondition(e: &PauliError) -> bool {
    matches!(
        e,
        PauliError::NotStabilizer(_) | PauliError::DependentGenerators { .. }
    )
}

fn ncgraph_precondition(e: &NcGraphError) -> bool {
    match e {
        NcGraphError::NotAbelian { .. } | NcGraphError::NotOperatorSystem(_) => true,
        NcGraphError::Linalg(LinalgError::NotCommuting { .. }) => true,
        NcGraphError::Pauli(p) => pauli_precondition(p),
        _ => false,
    }
}

impl From<PauliError> for Failure {
    fn from(e: PauliError) -> Self {
        if pauli_precondition(&e) {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<NcGraphError> for Failure {
    fn from(e: NcGraphError) -> Self {
        if ncgraph_precondition(&e) {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        NcGraphError::from(e).into()
    }
}

impl From<StabilizerError> for Failure {
    fn from(e: StabilizerError) -> Self {
        let pre = match &e {
            StabilizerError::Pauli(p) => pauli_precondition(p),
            StabilizerError::NcGraph(g) => ncgraph_precondition(g),
            StabilizerError::TrivialGroup | StabilizerError::InvalidCoefficients(_) => true,
            _ => false,
        };
        if pre {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<crate::UsageError> for Failure {
    fn from(e: crate::UsageError) -> Self {
        Failure::Input(e.0)
    }
}

pub struct Outcome {
    pub verdict: bool,
    pub details: Value,
}

pub fn execute(inputs: &Inputs, jobs: usize) -> Result<Outcome, Failure> {
    match inputs.command {
        Command::CheckOpsys => check_opsys(inputs),
        Command::Anticliques => anticliques(inputs),
        Command::KlVerify => kl(inputs),
        Command::StabilizerSpan => span(inputs),
        Command::ClassicalCheck => classical(inputs, jobs),
        Command::Canonicalize => canonicalize(inputs),
        Command::LemmaCheck => lemma(inputs),
    }
}

fn c64(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(rows: &[Vec<C64>]) -> Value {
    let re: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|z| z.re).collect())
        .collect();
    let im: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|z| z.im).collect())
        .collect();
    json!({ "re": re, "im": im })
}

fn strings(items: &[PauliString]) -> Vec<String> {
    items.iter().map(ToString::to_string).collect()
}

fn group(inputs: &Inputs) -> Result<PauliGroup, Failure> {
    let text = inputs.group.as_ref().expect("validated").join(",");
    Ok(PauliGroup::parse(inputs.n, &text)?)
}

fn check_opsys(inputs: &Inputs) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    let m0 = inputs.m0.as_ref().expect("validated").to_matrix()?;
    let graph = build_ncgraph(pauli_group_unitaries(&g)?, m0, inputs.tol)?;
    let (holds, witness) = is_operator_system(&graph.space, inputs.tol)?;
    Ok(Outcome {
        verdict: holds,
        details: json!({
            "dim": graph.dim,
            "group_order": g.elements.len(),
            "rank": graph.space.rank(),
            "witness": serde_json::to_value(&witness).expect("witness serializes"),
        }),
    })
}

fn anticliques(inputs: &Inputs) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    let (m0, source) = match &inputs.m0 {
        Some(m0) => (m0.to_matrix()?, "input"),
        None => {
            // A valid M0 for ⟨Z_1..Z_s⟩ carried over by the canonicalizing Clifford.
            let canon = clifford_canonicalize(&g)?;
            let s = canon.generators.len();
            let coeffs = valid_m0_sample(inputs.n, s, inputs.seed)?;
            (coeffs.to_matrix()?.conjugate_by(&canon.unitary)?, "sampled")
        }
    };
    let graph = build_ncgraph(pauli_group_unitaries(&g)?, m0, inputs.tol)?;
    let search = find_anticliques(&graph, inputs.tol)?;
    let labels: Vec<&str> = graph.unitaries.iter().map(|(l, _)| l.as_str()).collect();
    let eig = |values: &[C64]| -> Value {
        labels
            .iter()
            .zip(values)
            .map(|(l, z)| (l.to_string(), c64(*z)))
            .collect::<serde_json::Map<_, _>>()
            .into()
    };
    let certificates: Vec<Value> = search
        .certificates
        .iter()
        .map(|c| {
            json!({
                "rank": c.rank,
                "eigenvalues": eig(&c.eigenvalues),
                "scalars": c.scalars.iter().map(|(k, v)| (k.clone(), c64(*v))).collect::<serde_json::Map<_, _>>(),
                "residual": c.residual,
            })
        })
        .collect();
    let counterexamples: Vec<Value> = search
        .counterexamples
        .iter()
        .map(|c| json!({ "rank": c.rank, "eigenvalues": eig(&c.eigenvalues), "residual": c.residual }))
        .collect();
    let max_residual = search
        .certificates
        .iter()
        .map(|c| c.residual)
        .fold(0.0, f64::max);
    Ok(Outcome {
        verdict: search.counterexamples.is_empty(),
        details: json!({
            "m0_source": source,
            "space_rank": graph.space.rank(),
            "certificates": certificates,
            "counterexamples": counterexamples,
            "rank_one_skipped": search.rank_one,
            "max_residual": max_residual,
        }),
    })
}

fn kl(inputs: &Inputs) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    g.require_stabilizer()?;
    let p = codespace_projector(&g)?;
    let errors: Vec<ComplexMatrix> = inputs
        .errors
        .as_ref()
        .expect("validated")
        .iter()
        .map(|e| Ok(pauli::to_matrix(&parse_pauli(e, inputs.n)?)?))
        .collect::<Result<_, Failure>>()?;
    let check = kl_verify(&p, &errors, inputs.tol)?;
    Ok(Outcome {
        verdict: check.holds,
        details: json!({
            "code_rank": linalg::rank_of_projector(&p, inputs.tol)?,
            "lambda": matrix_json(&check.lambda),
            "max_residual": check.max_residual,
            "hermiticity_residual": check.hermiticity_residual,
        }),
    })
}

fn span(inputs: &Inputs) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    let id = stabilizer_span(&g, inputs.tol)?;
    // The variant of the right side that also contains G.
    let mut with_group: Vec<ComplexMatrix> = id.rhs.basis().to_vec();
    with_group.extend(g.matrices()?);
    let with_group_rank = orthonormalize(&with_group, inputs.tol)?.rank();
    Ok(Outcome {
        verdict: id.equal && id.lhs.rank() == id.expected_rank,
        details: json!({
            "s": id.s,
            "lhs_rank": id.lhs.rank(),
            "rhs_rank": id.rhs.rank(),
            "expected_rank": id.expected_rank,
            "equal": id.equal,
            "rejected": id.rejected,
            "rhs_with_group_rank": with_group_rank,
            "group_excess": with_group_rank - id.rhs.rank(),
        }),
    })
}

fn classical(inputs: &Inputs, jobs: usize) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    let check = classical_stabilizer_check_sharded(&g, inputs.tol, jobs)?;
    let disagreements: Vec<Value> = check
        .entries
        .iter()
        .filter(|e| !e.agrees())
        .map(|e| serde_json::to_value(e).expect("entry serializes"))
        .collect();
    let compressing: Vec<&str> = check
        .entries
        .iter()
        .filter(|e| e.compresses)
        .map(|e| e.pauli.as_str())
        .collect();
    Ok(Outcome {
        verdict: check.holds,
        details: json!({
            "paulis_checked": check.entries.len(),
            "compressing": compressing,
            "disagreements": disagreements,
        }),
    })
}

fn canonicalize(inputs: &Inputs) -> Result<Outcome, Failure> {
    let g = group(inputs)?;
    let c = clifford_canonicalize(&g)?;
    let n = inputs.n;
    let mut mapping_residual: f64 = 0.0;
    for (i, gen) in c.generators.iter().enumerate() {
        let zi = pauli::to_matrix(&PauliString::single(n, i, Letter::Z))?;
        let image = zi.conjugate_by(&c.unitary)?;
        mapping_residual = mapping_residual.max(image.distance(&pauli::to_matrix(gen)?)?);
    }
    let unitarity_residual = c.unitary.unitarity_residual();
    let gates: Vec<String> = c.circuit.gates.iter().map(ToString::to_string).collect();
    Ok(Outcome {
        verdict: unitarity_residual <= inputs.tol && mapping_residual <= inputs.tol,
        details: json!({
            "circuit": gates,
            "generators": strings(&c.generators),
            "canonical": strings(&c.canonical),
            "unitarity_residual": unitarity_residual,
            "mapping_residual": mapping_residual,
        }),
    })
}

fn lemma_single(coeffs: &M0Coefficients, tol: f64) -> Result<(bool, bool, Value), Failure> {
    let (analytic, violations) = valid_m0_check(coeffs, tol)?;
    let graph = numeric_vm0(coeffs, tol)?;
    let (numeric, witness) = is_operator_system(&graph.space, tol)?;
    let detail = json!({
        "analytic": analytic,
        "numeric": numeric,
        "violations": serde_json::to_value(&violations).expect("violations serialize"),
        "witness": serde_json::to_value(&witness).expect("witness serializes"),
    });
    Ok((analytic, numeric, detail))
}

fn lemma(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n;
    let s = inputs.s.expect("validated");
    if let Some(m0) = &inputs.m0 {
        let coeffs = M0Coefficients::from_pauli(&m0.to_pauli()?, s)?;
        let (analytic, numeric, detail) = lemma_single(&coeffs, inputs.tol)?;
        return Ok(Outcome {
            verdict: analytic == numeric,
            details: detail,
        });
    }
    let trials = inputs.trials.expect("validated");
    let mut agreements = 0;
    let mut mislabeled = 0;
    let mut disagreements = Vec::new();
    for t in 0..trials {
        let seed = inputs.seed.wrapping_add(t as u64);
        let valid = valid_m0_sample(n, s, seed)?;
        let expect_valid = t % 2 == 0;
        let coeffs = if expect_valid {
            valid
        } else {
            perturb_invalid(&valid, seed)
        };
        let (analytic, numeric, _) = lemma_single(&coeffs, inputs.tol)?;
        if analytic == numeric {
            agreements += 1;
        } else {
            disagreements.push(json!({ "trial": t, "analytic": analytic, "numeric": numeric }));
        }
        if analytic != expect_valid {
            mislabeled += 1;
        }
    }
    Ok(Outcome {
        verdict: agreements == trials && mislabeled == 0,
        details: json!({
            "trials": trials,
            "agreements": agreements,
            "valid_samples": trials.div_ceil(2),
            "invalid_samples": trials / 2,
            "mislabeled": mislabeled,
            "disagreements": disagreements,
        }),
    })
}

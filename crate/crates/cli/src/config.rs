use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use ncgraph_core::linalg::{ComplexMatrix, DEFAULT_TOL};
use ncgraph_core::ncgraph::PauliCoefficients;
use ncgraph_core::pauli::{parse_pauli, parse_pauli_list, MAX_MATRIX_QUBITS};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::UsageError;

/// Environment variable that overrides the default tolerance.
pub const TOL_ENV: &str = "NCGRAPH_TOL";

pub const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Is V_{M0} over the group an operator system?
    CheckOpsys,
    /// Certify every joint eigenprojector of rank >= 2 as an anticlique.
    Anticliques,
    /// Knill-Laflamme conditions for the group's code space.
    KlVerify,
    /// Compare the span of all V_{I+σ} with {I} plus the Paulis outside N(G).
    StabilizerSpan,
    /// Brute-force P E P ∝ P against the classical error-span description.
    ClassicalCheck,
    /// Clifford U with U Z_i U† = g_i.
    Canonicalize,
    /// Analytic characterization of valid M0 versus the numeric test.
    LemmaCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::CheckOpsys => "check-opsys",
            Command::Anticliques => "anticliques",
            Command::KlVerify => "kl-verify",
            Command::StabilizerSpan => "stabilizer-span",
            Command::ClassicalCheck => "classical-check",
            Command::Canonicalize => "canonicalize",
            Command::LemmaCheck => "lemma-check",
        }
    }
}

/// Raw command line.
#[derive(Debug, Parser)]
#[command(
    name = "ncgraph",
    version,
    about = "Verify noncommutative graph and stabilizer code claims"
)]
pub struct RawArgs {
    #[arg(value_enum, required_unless_present = "config")]
    pub command: Option<Command>,
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of Z-type stabilizers (lemma-check).
    #[arg(long)]
    pub s: Option<usize>,
    /// Numerical tolerance [default: 1e-9].
    #[arg(long, env = TOL_ENV)]
    pub tol: Option<f64>,
    /// Seed for sampled inputs [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated group generators, e.g. "ZZI,IZZ".
    #[arg(long, allow_hyphen_values = true)]
    pub group: Option<String>,
    /// JSON array of group generators.
    #[arg(long, value_name = "PATH")]
    pub group_file: Option<PathBuf>,
    /// M0 as a JSON file: {"dim","re","im"} or {"n","coeffs"}.
    #[arg(long, value_name = "PATH")]
    pub m0: Option<PathBuf>,
    /// Inline M0 Pauli coefficients, e.g. '{"I":[1,0],"Z":[0,1]}'.
    #[arg(long, value_name = "JSON")]
    pub m0_coeffs: Option<String>,
    /// Comma-separated Pauli error operators (kl-verify).
    #[arg(long, allow_hyphen_values = true)]
    pub errors: Option<String>,
    /// JSON array of Pauli error operators.
    #[arg(long, value_name = "PATH")]
    pub errors_file: Option<PathBuf>,
    /// Random samples for lemma-check [default: 200].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads for brute-force loops.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Read inputs from a JSON file, e.g. a previous report's "inputs".
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Text summary instead of JSON.
    #[arg(long)]
    pub human: bool,
    /// Record elapsed milliseconds in the report.
    #[arg(long)]
    pub timing: bool,
}

/// M0 in either supported encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum M0Input {
    Pauli(PauliCoefficients),
    Dense(ComplexMatrix),
}

impl M0Input {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, UsageError> {
        match self {
            M0Input::Pauli(p) => p
                .to_matrix()
                .map_err(|e| UsageError::new(format!("--m0: {e}"))),
            M0Input::Dense(m) => Ok(m.clone()),
        }
    }

    pub fn to_pauli(&self) -> Result<PauliCoefficients, UsageError> {
        match self {
            M0Input::Pauli(p) => Ok(p.clone()),
            M0Input::Dense(m) => PauliCoefficients::from_matrix(m, 1e-14)
                .map_err(|e| UsageError::new(format!("--m0: {e}"))),
        }
    }
}

/// Everything that determines a report's content; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub command: Command,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<M0Input>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub jobs: usize,
    pub output: Option<PathBuf>,
    pub human: bool,
    pub timing: bool,
}

fn read_file(path: &Path, flag: &str) -> Result<String, UsageError> {
    fs::read_to_string(path)
        .map_err(|e| UsageError::new(format!("{flag}: cannot read {}: {e}", path.display())))
}

fn one_source<'a>(
    inline: Option<&'a str>,
    file: Option<&'a Path>,
    inline_flag: &str,
    file_flag: &str,
) -> Result<Option<Source<'a>>, UsageError> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(UsageError::new(format!(
            "{inline_flag} and {file_flag} both given; choose one source"
        ))),
        (Some(text), None) => Ok(Some(Source::Inline(text))),
        (None, Some(path)) => Ok(Some(Source::File(path))),
        (None, None) => Ok(None),
    }
}

enum Source<'a> {
    Inline(&'a str),
    File(&'a Path),
}

fn normalize_paulis(items: &[String], n: usize, flag: &str) -> Result<Vec<String>, UsageError> {
    if items.is_empty() {
        return Err(UsageError::new(format!("{flag}: empty list")));
    }
    items
        .iter()
        .map(|t| {
            parse_pauli(t, n)
                .map(|p| p.to_string())
                .map_err(|e| UsageError::new(format!("{flag}: {e}")))
        })
        .collect()
}

fn pauli_list(
    source: Source<'_>,
    n: usize,
    inline_flag: &str,
    file_flag: &str,
) -> Result<Vec<String>, UsageError> {
    match source {
        Source::Inline(text) => {
            let parsed = parse_pauli_list(text, n)
                .map_err(|e| UsageError::new(format!("{inline_flag}: {e}")))?;
            Ok(parsed.iter().map(ToString::to_string).collect())
        }
        Source::File(path) => {
            let items: Vec<String> =
                serde_json::from_str(&read_file(path, file_flag)?).map_err(|e| {
                    UsageError::new(format!(
                        "{file_flag}: expected a JSON array of strings: {e}"
                    ))
                })?;
            normalize_paulis(&items, n, file_flag)
        }
    }
}

fn json_err(flag: &str, e: impl std::fmt::Display) -> UsageError {
    UsageError::new(format!("{flag}: {e}"))
}

/// Inline form accepts a bare `{"XZ": [re, im]}` map as well as the file forms.
fn parse_m0(source: Source<'_>, n: usize) -> Result<M0Input, UsageError> {
    let (flag, text) = match source {
        Source::Inline(t) => ("--m0-coeffs", t.to_string()),
        Source::File(p) => ("--m0", read_file(p, "--m0")?),
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| json_err(flag, e))?;
    let is_inline = flag == "--m0-coeffs";
    let m0 = if value.get("coeffs").is_some() {
        M0Input::Pauli(serde_json::from_value(value).map_err(|e| json_err(flag, e))?)
    } else if value.get("dim").is_some() {
        M0Input::Dense(serde_json::from_value(value).map_err(|e| json_err(flag, e))?)
    } else if is_inline {
        let coeffs = serde_json::from_value(value).map_err(|e| json_err(flag, e))?;
        M0Input::Pauli(PauliCoefficients { n, coeffs })
    } else {
        return Err(UsageError::new(format!(
            "{flag}: expected {{\"dim\",\"re\",\"im\"}} or {{\"n\",\"coeffs\"}}"
        )));
    };
    check_m0(&m0, n)?;
    Ok(m0)
}

fn check_m0(m0: &M0Input, n: usize) -> Result<(), UsageError> {
    let m = m0.to_matrix()?;
    if m.dim() != 1 << n {
        return Err(UsageError::new(format!(
            "--m0: dimension {} does not match 2^n = {}",
            m.dim(),
            1usize << n
        )));
    }
    if m.entries()
        .iter()
        .all(|z| *z == num_complex::Complex64::new(0.0, 0.0))
    {
        return Err(UsageError::new("--m0: zero operator"));
    }
    Ok(())
}

/// Turns raw flags into a validated [`RunConfig`].
pub fn parse_inputs(raw: RawArgs) -> Result<RunConfig, UsageError> {
    let inputs = match &raw.config {
        Some(path) => {
            let given = [
                ("command", raw.command.is_some()),
                ("--n", raw.n.is_some()),
                ("--s", raw.s.is_some()),
                ("--seed", raw.seed.is_some()),
                ("--group", raw.group.is_some()),
                ("--group-file", raw.group_file.is_some()),
                ("--m0", raw.m0.is_some()),
                ("--m0-coeffs", raw.m0_coeffs.is_some()),
                ("--errors", raw.errors.is_some()),
                ("--errors-file", raw.errors_file.is_some()),
                ("--trials", raw.trials.is_some()),
            ];
            if let Some((flag, _)) = given.iter().find(|(_, set)| *set) {
                return Err(UsageError::new(format!(
                    "{flag} cannot be combined with --config"
                )));
            }
            let text = read_file(path, "--config")?;
            let inputs: Inputs =
                serde_json::from_str(&text).map_err(|e| json_err("--config", e))?;
            validate(inputs)?
        }
        None => validate_raw(&raw)?,
    };
    if raw.jobs == 0 {
        return Err(UsageError::new("--jobs must be at least 1"));
    }
    Ok(RunConfig {
        inputs,
        jobs: raw.jobs,
        output: raw.output,
        human: raw.human,
        timing: raw.timing,
    })
}

fn validate_raw(raw: &RawArgs) -> Result<Inputs, UsageError> {
    let command = raw
        .command
        .ok_or_else(|| UsageError::new("missing command"))?;
    let n = raw.n.ok_or_else(|| UsageError::new("missing --n"))?;
    check_n(n)?;
    let group = one_source(
        raw.group.as_deref(),
        raw.group_file.as_deref(),
        "--group",
        "--group-file",
    )?
    .map(|src| pauli_list(src, n, "--group", "--group-file"))
    .transpose()?;
    let errors = one_source(
        raw.errors.as_deref(),
        raw.errors_file.as_deref(),
        "--errors",
        "--errors-file",
    )?
    .map(|src| pauli_list(src, n, "--errors", "--errors-file"))
    .transpose()?;
    let m0 = one_source(
        raw.m0_coeffs.as_deref(),
        raw.m0.as_deref(),
        "--m0-coeffs",
        "--m0",
    )?
    .map(|src| parse_m0(src, n))
    .transpose()?;
    let sampling = command == Command::LemmaCheck && m0.is_none();
    let trials = match (raw.trials, sampling) {
        (Some(_), false) => {
            return Err(UsageError::new(format!(
                "--trials is not used by {}",
                command.as_str()
            )))
        }
        (t, true) => Some(t.unwrap_or(DEFAULT_TRIALS)),
        (None, false) => None,
    };
    validate(Inputs {
        command,
        n,
        s: raw.s,
        tol: raw.tol.unwrap_or(DEFAULT_TOL),
        seed: raw.seed.unwrap_or(0),
        group,
        m0,
        errors,
        trials,
    })
}

fn check_n(n: usize) -> Result<(), UsageError> {
    if n == 0 {
        return Err(UsageError::new("--n must be at least 1"));
    }
    if n > MAX_MATRIX_QUBITS {
        return Err(UsageError::new(format!(
            "--n {n} exceeds the dense-matrix cap of {MAX_MATRIX_QUBITS}"
        )));
    }
    Ok(())
}

/// Command-specific presence rules, shared by flags and `--config`.
fn validate(mut inputs: Inputs) -> Result<Inputs, UsageError> {
    check_n(inputs.n)?;
    if !(inputs.tol.is_finite() && inputs.tol > 0.0) {
        return Err(UsageError::new(format!(
            "--tol must be positive, got {}",
            inputs.tol
        )));
    }
    let name = inputs.command.as_str();
    let needs_group = inputs.command != Command::LemmaCheck;
    let (m0_rule, errors_rule, s_rule) = match inputs.command {
        Command::CheckOpsys => (Rule::Required, Rule::Forbidden, Rule::Forbidden),
        Command::Anticliques => (Rule::Optional, Rule::Forbidden, Rule::Forbidden),
        Command::KlVerify => (Rule::Forbidden, Rule::Required, Rule::Forbidden),
        Command::LemmaCheck => (Rule::Optional, Rule::Forbidden, Rule::Required),
        _ => (Rule::Forbidden, Rule::Forbidden, Rule::Forbidden),
    };
    let group_rule = if needs_group {
        Rule::Required
    } else {
        Rule::Forbidden
    };
    group_rule.check(inputs.group.is_some(), "--group", name)?;
    m0_rule.check(inputs.m0.is_some(), "--m0", name)?;
    errors_rule.check(inputs.errors.is_some(), "--errors", name)?;
    s_rule.check(inputs.s.is_some(), "--s", name)?;
    if let Some(s) = inputs.s {
        if s == 0 || s > inputs.n {
            return Err(UsageError::new(format!(
                "--s must satisfy 1 <= s <= n, got {s}"
            )));
        }
    }
    if let Some(group) = &inputs.group {
        inputs.group = Some(normalize_paulis(group, inputs.n, "--group")?);
    }
    if let Some(errors) = &inputs.errors {
        inputs.errors = Some(normalize_paulis(errors, inputs.n, "--errors")?);
    }
    if let Some(m0) = &inputs.m0 {
        check_m0(m0, inputs.n)?;
    }
    let sampling = inputs.command == Command::LemmaCheck && inputs.m0.is_none();
    match (inputs.trials, sampling) {
        (Some(0), true) => return Err(UsageError::new("--trials must be at least 1")),
        (None, true) => inputs.trials = Some(DEFAULT_TRIALS),
        (Some(_), false) => return Err(UsageError::new(format!("--trials is not used by {name}"))),
        _ => {}
    }
    Ok(inputs)
}

enum Rule {
    Required,
    Optional,
    Forbidden,
}

impl Rule {
    fn check(&self, present: bool, flag: &str, command: &str) -> Result<(), UsageError> {
        match (self, present) {
            (Rule::Required, false) => Err(UsageError::new(format!("{command} requires {flag}"))),
            (Rule::Forbidden, true) => {
                Err(UsageError::new(format!("{flag} is not used by {command}")))
            }
            _ => Ok(()),
        }
    }
}

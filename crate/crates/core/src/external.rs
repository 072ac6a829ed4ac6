//! Adapter for external DIMACS/DRAT solvers.
//!
//! The command template is run through `sh -c` after substituting `{input}`
//! (the DIMACS path) and `{proof}` (where the solver should write its DRAT
//! proof). Standard output is scanned for the usual `s ...` status line and
//! `v ...` model lines. Models are re-checked against the formula; proofs are
//! parsed (text or binary DRAT) but not checked here.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cdcl::{SolveResult, SolveStats, SolveStatus};
use crate::cnf::{Assignment, Cnf, Lit};
use crate::drat::{DratError, DratProof};

/// Environment variable holding a default command template.
pub const SOLVER_ENV: &str = "CNP_EXTERNAL_SOLVER";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("could not run external solver: {0}")]
    ProcessFailure(String),
    #[error("unparseable solver output: {0}")]
    UnparseableOutput(String),
    #[error("external model falsifies clause {clause}")]
    ModelCheckFailed { clause: usize },
    #[error("external proof: {0}")]
    Proof(#[from] DratError),
}

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub template: String,
    /// Kill the process and report Unknown after this long.
    pub timeout: Option<Duration>,
}

impl ExternalSolver {
    pub fn new(template: impl Into<String>) -> Self {
        ExternalSolver {
            template: template.into(),
            timeout: None,
        }
    }

    /// Template from [`SOLVER_ENV`], if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }

    pub fn command_line(&self, input: &Path, proof: &Path) -> String {
        self.template
            .replace("{input}", &shell_quote(input))
            .replace("{proof}", &shell_quote(proof))
    }

    /// Runs the solver on the DIMACS file `input`, which must contain `cnf`.
    /// The proof is written to `proof`, or to a temporary file next to the
    /// input when `None`.
    pub fn solve(
        &self,
        input: &Path,
        cnf: &Cnf,
        proof: Option<&Path>,
    ) -> Result<SolveResult, ExternalError> {
        let proof_path: PathBuf = match proof {
            Some(p) => p.to_path_buf(),
            None => {
                let mut p = input.as_os_str().to_owned();
                p.push(format!(".{}.drat", std::process::id()));
                p.into()
            }
        };
        let start = Instant::now();
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(self.command_line(input, &proof_path))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| ExternalError::ProcessFailure(e.to_string()))?;
        let mut stdout = child.stdout.take().expect("piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let mut timed_out = false;
        let status = loop {
            if let Some(st) = child
                .try_wait()
                .map_err(|e| ExternalError::ProcessFailure(e.to_string()))?
            {
                break Some(st);
            }
            if self.timeout.is_some_and(|t| start.elapsed() >= t) {
                let _ = child.kill();
                let _ = child.wait();
                timed_out = true;
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let out = reader
            .join()
            .expect("reader thread")
            .map_err(|e| ExternalError::UnparseableOutput(e.to_string()))?;
        let runtime = start.elapsed();
        let cleanup = || {
            if proof.is_none() {
                let _ = std::fs::remove_file(&proof_path);
            }
        };
        if timed_out {
            cleanup();
            return Ok(unknown(runtime));
        }
        let parsed = match parse_output(&out, cnf.num_vars) {
            Ok(p) => p,
            Err(e) => {
                cleanup();
                return match status {
                    Some(st) if !st.success() && !out.lines().any(|l| l.starts_with("s ")) => Err(
                        ExternalError::ProcessFailure(format!("solver exited with {st}")),
                    ),
                    _ => Err(e),
                };
            }
        };
        let result = match parsed {
            (SolveStatus::Sat, Some(model)) => {
                if let Some(clause) = model.first_falsified(&cnf.clauses) {
                    cleanup();
                    return Err(ExternalError::ModelCheckFailed { clause });
                }
                SolveResult {
                    status: SolveStatus::Sat,
                    model: Some(model),
                    proof: None,
                    stats: stats(runtime),
                }
            }
            (SolveStatus::Sat, None) => {
                cleanup();
                return Err(ExternalError::UnparseableOutput(
                    "SATISFIABLE without model lines".into(),
                ));
            }
            (SolveStatus::Unsat, _) => {
                let proof = DratProof::read_path(&proof_path);
                cleanup();
                let proof = proof?;
                if !proof.contains_empty_clause() && !cnf.clauses.iter().any(|c| c.is_empty()) {
                    return Err(ExternalError::UnparseableOutput(
                        "proof lacks the empty clause".into(),
                    ));
                }
                SolveResult {
                    status: SolveStatus::Unsat,
                    model: None,
                    proof: Some(proof),
                    stats: stats(runtime),
                }
            }
            (SolveStatus::Unknown, _) => {
                cleanup();
                unknown(runtime)
            }
        };
        Ok(result)
    }
}

fn stats(runtime: Duration) -> SolveStats {
    SolveStats {
        runtime,
        ..SolveStats::default()
    }
}

fn unknown(runtime: Duration) -> SolveResult {
    SolveResult {
        status: SolveStatus::Unknown,
        model: None,
        proof: None,
        stats: stats(runtime),
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

/// Parses solver standard output into a status and, for SAT, a model.
pub fn parse_output(
    out: &str,
    num_vars: u32,
) -> Result<(SolveStatus, Option<Assignment>), ExternalError> {
    let mut status = None;
    let mut model: Option<Assignment> = None;
    for line in out.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            let s = match rest.trim() {
                "SATISFIABLE" => SolveStatus::Sat,
                "UNSATISFIABLE" => SolveStatus::Unsat,
                "UNKNOWN" | "INDETERMINATE" => SolveStatus::Unknown,
                other => {
                    return Err(ExternalError::UnparseableOutput(format!(
                        "status line `s {other}`"
                    )))
                }
            };
            if status.is_some_and(|old| old != s) {
                return Err(ExternalError::UnparseableOutput(
                    "conflicting status lines".into(),
                ));
            }
            status = Some(s);
        } else if let Some(rest) = line
            .strip_prefix("v ")
            .or_else(|| (line == "v").then_some(""))
        {
            let m = model.get_or_insert_with(|| Assignment::new(num_vars));
            for tok in rest.split_whitespace() {
                let x: i64 = tok.parse().map_err(|_| {
                    ExternalError::UnparseableOutput(format!("model token `{tok}`"))
                })?;
                if x == 0 {
                    continue;
                }
                if x.unsigned_abs() > num_vars as u64 {
                    return Err(ExternalError::UnparseableOutput(format!(
                        "model variable {x} out of range"
                    )));
                }
                let l = Lit::new(x as i32);
                m.set(l.var(), !l.is_negative());
            }
        }
    }
    match status {
        Some(s) => Ok((s, model)),
        None => Err(ExternalError::UnparseableOutput("no status line".into())),
    }
}

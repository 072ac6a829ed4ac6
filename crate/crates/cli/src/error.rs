//! Failure classes and their exit codes.

use std::fmt;

use cnp_core::analyze::AnalyzeError;
use cnp_core::cnf::DimacsError;
use cnp_core::drat::{DratError, TrimError};
use cnp_core::encode::EncodeError;
use cnp_core::exactnum::FieldError;
use cnp_core::external::ExternalError;
use cnp_core::graphio::GraphFileError;
use cnp_core::shrink::ShrinkError;
use cnp_core::udgraph::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Parse,
    Math,
    Budget,
    Verification,
    Io,
    External,
    /// A well-formed answer other than the one the command needs, e.g. a
    /// colorable graph handed to `shrink`.
    Outcome,
}

impl Class {
    pub fn code(self) -> i32 {
        match self {
            Class::Parse => 3,
            Class::Math => 4,
            Class::Budget => 5,
            Class::Verification => 6,
            Class::Io => 7,
            Class::External => 8,
            Class::Outcome => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Parse => "parse",
            Class::Math => "math",
            Class::Budget => "budget",
            Class::Verification => "verification",
            Class::Io => "io",
            Class::External => "external",
            Class::Outcome => "outcome",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: Class,
    pub message: String,
}

impl CliError {
    pub fn new(class: Class, message: impl Into<String>) -> Self {
        CliError {
            class,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(Class::Parse, message)
    }

    pub fn io(path: impl fmt::Display, e: std::io::Error) -> Self {
        Self::new(Class::Io, format!("{path}: {e}"))
    }

    /// The single stderr line: a JSON object with `error`, `code` and
    /// `message`.
    pub fn machine_line(&self) -> String {
        serde_json::json!({
            "error": self.class.name(),
            "code": self.class.code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.class.name(), self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Class::Io, e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let class = match e {
            FieldError::Parse { .. } => Class::Parse,
            _ => Class::Math,
        };
        Self::new(class, e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Field(f) => f.into(),
            GraphError::UnknownBuiltin(_) => Self::parse(e.to_string()),
            _ => Self::new(Class::Math, e.to_string()),
        }
    }
}

impl From<GraphFileError> for CliError {
    fn from(e: GraphFileError) -> Self {
        match e {
            GraphFileError::Io(io) => io.into(),
            GraphFileError::Field(f) => f.into(),
            GraphFileError::Graph(GraphError::Field(f)) => f.into(),
            GraphFileError::Graph(GraphError::UnknownBuiltin(n)) => Self::parse(format!("unknown built-in graph {n:?}")),
            // Edges that do not match exact geometry are a data error.
            GraphFileError::Graph(g) => Self::new(Class::Math, g.to_string()),
            GraphFileError::Syntax { .. } => Self::parse(e.to_string()),
        }
    }
}

impl From<DimacsError> for CliError {
    fn from(e: DimacsError) -> Self {
        match e {
            DimacsError::Io(io) => io.into(),
            other => Self::parse(other.to_string()),
        }
    }
}

impl From<DratError> for CliError {
    fn from(e: DratError) -> Self {
        match e {
            DratError::Io(io) => io.into(),
            other => Self::parse(other.to_string()),
        }
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::Io(io) => io.into(),
            EncodeError::NotAModel(_) => Self::new(Class::Verification, e.to_string()),
            other => Self::parse(other.to_string()),
        }
    }
}

impl From<TrimError> for CliError {
    fn from(e: TrimError) -> Self {
        Self::new(Class::Verification, e.to_string())
    }
}

impl From<AnalyzeError> for CliError {
    fn from(e: AnalyzeError) -> Self {
        let class = match e {
            AnalyzeError::BudgetExceeded { .. } => Class::Budget,
            AnalyzeError::ExceedsBound { .. } => Class::Outcome,
            AnalyzeError::Verification { .. } | AnalyzeError::BadModel => Class::Verification,
            AnalyzeError::BadVertex(_) => Class::Parse,
        };
        Self::new(class, e.to_string())
    }
}

impl From<ShrinkError> for CliError {
    fn from(e: ShrinkError) -> Self {
        match e {
            ShrinkError::Colorable { .. } => Self::new(Class::Outcome, e.to_string()),
            ShrinkError::BudgetExceeded => Self::new(Class::Budget, e.to_string()),
            ShrinkError::Trim(t) => t.into(),
            ShrinkError::Analyze(a) => a.into(),
            ShrinkError::Graph(g) => g.into(),
        }
    }
}

impl From<ExternalError> for CliError {
    fn from(e: ExternalError) -> Self {
        let class = match e {
            ExternalError::ModelCheckFailed { .. } => Class::Verification,
            _ => Class::External,
        };
        Self::new(class, e.to_string())
    }
}

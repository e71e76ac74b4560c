use std::path::PathBuf;

use crate::d2q9::Edge;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direction index {0} is out of range (expected 0..=8)")]
    DirectionOutOfRange(usize),

    #[error("extent {extent} is not an integer multiple of the lattice spacing {dx}")]
    NonCommensurate { extent: f64, dx: f64 },

    #[error("no boundary condition assigned to the {0} edge")]
    UnassignedEdge(Edge),

    #[error("the {0} edge is assigned more than one boundary condition")]
    DoublyAssignedEdge(Edge),

    #[error("inverted element: det(F) = {jacobian:e}{}", node_suffix(*.node))]
    InvertedElement { jacobian: f64, node: Option<usize> },

    #[error("simulation diverged at step {step} (t = {time}): non-finite {field} at node {node}")]
    Diverged {
        step: usize,
        time: f64,
        field: &'static str,
        node: usize,
    },

    #[error("Poisson's ratio {nu} violates the CFL limit nu <= 5/11")]
    CflViolation { nu: f64 },

    #[error("relaxation time tau = {tau} must exceed 1/2 (lattice units)")]
    UnstableRelaxation { tau: f64 },

    #[error("reference displacement field has zero norm")]
    ZeroReferenceNorm,

    #[error("field size mismatch: expected {expected} nodes, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("unknown preset '{0}' (valid: tension, shear, wave, patch)")]
    UnknownPreset(String),

    #[error("config error{}: {message}", line_suffix(*.line))]
    Config {
        line: Option<usize>,
        message: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 configuration, 2 divergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::InvertedElement { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|n| format!(" at node {n}")).unwrap_or_default()
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

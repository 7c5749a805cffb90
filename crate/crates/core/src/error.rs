//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no lateral equilibrium for lambda1' = {lambda1_prime}: {detail}")]
    NoLateralEquilibrium { lambda1_prime: f64, detail: String },

    #[error("over-compression: volume ratio J = {j} <= 1 (mixing term undefined)")]
    OverCompression { j: f64 },

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("no swelling equilibrium root in J in ({lo}, {hi}]")]
    NoSwellingRoot { lo: f64, hi: f64 },

    #[error("non-finite energy in element {element}: J = {j} <= 1 + {delta}")]
    NonFiniteEnergy { element: usize, j: f64, delta: f64 },

    #[error("solver failed to converge: {0}")]
    NonConvergence(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate helix fit: {0}")]
    DegenerateHelix(String),

    #[error("bead model error: {0}")]
    BeadModel(String),

    #[error("degenerate body geometry: {0}")]
    DegenerateGeometry(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Tag an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine.
///
/// Variants fall into two families: domain errors (bad states, bad
/// arguments to pure operations) and configuration errors (bad run
/// settings, missing or unusable input files). [`Error::is_config`]
/// tells them apart; the CLI maps them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid dimensions {height}x{width}: {reason}")]
    InvalidDims {
        height: usize,
        width: usize,
        reason: &'static str,
    },

    #[error("tile id {tile} out of range for a grid of {cells} cells")]
    TileOutOfRange { tile: usize, cells: usize },

    #[error("malformed puzzle state: {0}")]
    MalformedState(String),

    #[error("puzzle state is not solvable")]
    Unsolvable,

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("image of {height}x{width} pixels is too small for a {rows}x{cols} grid")]
    ImageTooSmall {
        height: usize,
        width: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid augmentation parameter: {0}")]
    InvalidAugment(String),

    #[error("{height}x{width} grid exceeds the enumeration guard of {limit} cells")]
    EnumerationGuard {
        height: usize,
        width: usize,
        limit: usize,
    },

    #[error("search budget exhausted after {nodes_expanded} node expansions")]
    BudgetExhausted { nodes_expanded: u64 },

    #[error("policy failed: {0}")]
    Policy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("not enough decodable images in {dir}: wanted {wanted}, found {found}")]
    NotEnoughImages {
        dir: PathBuf,
        wanted: usize,
        found: usize,
    },

    #[error("held-out set overlaps the training pool: {0}")]
    HeldoutOverlap(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by run configuration or input files rather
    /// than by the values passed to a domain operation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::NotEnoughImages { .. }
                | Error::HeldoutOverlap(_)
                | Error::Io { .. }
                | Error::Image(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("beam ({lx}, {ly}) lies outside the unit disk")]
    InvalidBeam { lx: f64, ly: f64 },

    #[error("search grid has {points} points, limit is {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("result table is empty, nothing to write")]
    EmptyTable,

    #[error("table mixes sweep kinds: {0}")]
    MixedSweepKinds(String),

    #[error("malformed results file: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("phantom geometry overflow: {0}")]
    GeometryOverflow(String),

    #[error("scan time too short: zero profiles per frame")]
    ZeroProfiles,

    #[error("frame {0} has no acquired k-space samples")]
    EmptyFrame(usize),

    #[error("synth_phase requires a magnitude image (zero imaginary part)")]
    NonzeroPhase,

    #[error("missing weights for {0}")]
    MissingWeights(&'static str),

    #[error("missing reference data for {0}")]
    MissingReference(&'static str),

    #[error("label value {0} out of range (expected 0..=3)")]
    InvalidLabel(u8),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("step out of order: t = {t} s is not greater than previous {last} s")]
    OutOfOrderStep { t: f64, last: f64 },

    #[error("session already terminated")]
    SessionDone,

    #[error("container {path}: version/format error: {detail}")]
    ContainerVersion { path: PathBuf, detail: String },

    #[error("container {path}: array '{name}': shape/byte-length mismatch")]
    ContainerShape { path: PathBuf, name: String },

    #[error("container {path}: truncated payload")]
    ContainerTruncated { path: PathBuf },

    #[error("container has no array named '{0}'")]
    UnknownArray(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

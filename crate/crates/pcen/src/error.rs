//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A WAV file violated the RIFF/WAVE container rules. `chunk` names the
    /// chunk (or pseudo-chunk like "RIFF header") that failed to parse.
    #[error("wav decode error in {chunk}: {detail}")]
    WavDecode { chunk: String, detail: String },

    /// Structurally valid WAV but a codec this crate does not read.
    #[error("unsupported wav format: {0}")]
    UnsupportedFormat(String),

    /// A numeric parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A frontend configuration that cannot produce a valid filterbank
    /// or framing.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The input is too short to yield any output frames or windows.
    #[error("input too short: {0}")]
    InputTooShort(String),

    /// RMS of the signal is zero; it cannot be scaled to a dBFS target.
    #[error("cannot scale silent audio (rms = 0)")]
    SilentAudio,

    /// Training failed fast: single-class data, non-finite gradients or a
    /// diverged loss.
    #[error("training error: {0}")]
    Training(String),

    /// A serialized gram, params, checkpoint or manifest file failed to parse.
    #[error("malformed file `{path}`: {detail}")]
    MalformedFile { path: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn malformed(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::MalformedFile {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

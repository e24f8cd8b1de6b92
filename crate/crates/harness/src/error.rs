use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] tripedal_core::Error),
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error("non-physical ramp data: {kinetic} J of kinetic energy exceeds the {released} J released")]
    NonPhysical { released: f64, kinetic: f64 },
    #[error("mass does not slide: friction {mu} holds it on a {slope_deg} deg slope")]
    RampStall { mu: f64, slope_deg: f64 },
    #[error("runs follow different paths")]
    PathMismatch,
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::ConfigInvalid { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

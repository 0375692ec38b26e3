use qhm_core::closure::ClosureError;
use qhm_core::engine::EngineError;
use qhm_core::quantale::QuantaleError;
use qhm_core::systems::SystemsError;
use qhm_core::vcat::VCatError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    VCat(#[from] VCatError),
    #[error(transparent)]
    Systems(#[from] SystemsError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Parse(_) => "parse",
            CliError::Invalid(_) => "invalid",
            CliError::Quantale(_) => "quantale",
            CliError::VCat(_) => "vcat",
            CliError::Systems(_) => "systems",
            CliError::Engine(_) => "engine",
            CliError::Closure(_) => "closure",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({"error": self.kind(), "message": self.to_string()}).to_string()
    }
}

//! Command-line front end: game files, analyses as JSON reports, and CSV
//! trajectories.

pub mod commands;
pub mod gamefile;
pub mod golden;
pub mod report;

pub use gamefile::{parse_game_file, serialize_game_file, GameFile, IntegrationDefaults, ParseError};

/// Environment variable that redirects relative output paths.
pub const OUT_DIR_VAR: &str = "POLYHAM_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Io(String),
    #[error("expected verdict `{expected}`, report says `{actual}`")]
    Expect { expected: String, actual: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(ParseError::Syntax { .. }) => 2,
            CliError::Parse(ParseError::Semantic { .. }) | CliError::Semantic(_) => 3,
            CliError::Expect { .. } => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<polyham::Error> for CliError {
    fn from(e: polyham::Error) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

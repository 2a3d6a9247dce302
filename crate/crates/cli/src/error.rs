use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{stage} failed: {source}")]
    Solver {
        stage: &'static str,
        #[source]
        source: heun_spectra::Error,
    },

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait Stage<T> {
    /// Attaches the name of the failing stage to a solver error.
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for heun_spectra::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Solver { stage, source })
    }
}

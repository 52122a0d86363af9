use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] hetero_bi::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hetero_bi::Error as E;
        match self {
            CliError::Config(_) => 4,
            CliError::Verification(_) => 2,
            CliError::Core(e) => match e {
                E::NonConvergence { .. } => 3,
                E::Config(_) | E::Hypothesis { .. } | E::Expression(_) | E::Parameter(_) | E::DegenerateWell { .. } => {
                    4
                }
                _ => 1,
            },
        }
    }
}

use slidebasis::io::IoError;
use slidebasis::mesh::MeshError;
use slidebasis::optimize::{ProblemError, SlideError};
use slidebasis::rocket::RocketError;
use slidebasis::spectral::SpectralError;
use slidebasis::topopt::TopOptError;

/// Failure classes; each maps to its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("physics: {0}")]
    Physics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Physics(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<RocketError> for CliError {
    fn from(e: RocketError) -> Self {
        match e {
            RocketError::Params(_) | RocketError::Profile(_) => CliError::Config(e.to_string()),
            RocketError::Io(..) => CliError::Io(e.to_string()),
            _ => CliError::Physics(e.to_string()),
        }
    }
}

impl From<TopOptError> for CliError {
    fn from(e: TopOptError) -> Self {
        match e {
            TopOptError::Solve(_) | TopOptError::Residual(_) => CliError::Solver(e.to_string()),
            TopOptError::Config(_) | TopOptError::Filter(_) => CliError::Config(e.to_string()),
            TopOptError::Mesh(m) => m.into(),
            _ => CliError::Physics(e.to_string()),
        }
    }
}

impl From<SlideError> for CliError {
    fn from(e: SlideError) -> Self {
        match e {
            SlideError::Config(c) => CliError::Config(c.to_string()),
            SlideError::Problem(p) => p.into(),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Evaluation(_) => CliError::Physics(e.to_string()),
            ProblemError::Dimension { .. } => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

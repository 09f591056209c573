use mstruct::descriptors::DescriptorError;
use mstruct::losses::LossError;
use mstruct::physics::PhysicsError;
use mstruct::quality::QualityError;
use mstruct::synth::SynthError;
use mstruct::texture::TextureError;
use mstruct::VolumeError;
use thiserror::Error;

/// Failure classes of the command line. Each maps to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or incompatible input data; also output I/O.
    #[error("{0}")]
    Input(String),
    /// Bad configuration file, flag value or analysis parameter.
    #[error("{0}")]
    Config(String),
    /// The diffusion solver did not reach its tolerance.
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub const INPUT_EXIT: i32 = 2;
    pub const CONFIG_EXIT: i32 = 3;
    pub const SOLVER_EXIT: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => Self::INPUT_EXIT,
            CliError::Config(_) => Self::CONFIG_EXIT,
            CliError::Solver(_) => Self::SOLVER_EXIT,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    /// Single-line form for stderr.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string().replace('\n', " ");
        format!("mstruct: error: {text}")
    }
}

impl From<VolumeError> for CliError {
    fn from(e: VolumeError) -> Self {
        CliError::input(e)
    }
}

impl From<DescriptorError> for CliError {
    fn from(e: DescriptorError) -> Self {
        match e {
            DescriptorError::LagTooLarge { .. }
            | DescriptorError::WindowTooLarge { .. }
            | DescriptorError::BadStride
            | DescriptorError::BadPhase { .. } => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<TextureError> for CliError {
    fn from(e: TextureError) -> Self {
        match e {
            TextureError::BadParams(_) | TextureError::NoValidPairs { .. } => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<QualityError> for CliError {
    fn from(e: QualityError) -> Self {
        match e {
            QualityError::BadParams(_) | QualityError::ImageSmallerThanWindow { .. } => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<PhysicsError> for CliError {
    fn from(e: PhysicsError) -> Self {
        match e {
            PhysicsError::SolverDiverged { .. } => CliError::Solver(e.to_string()),
            PhysicsError::BadParams(_) | PhysicsError::BadPhase { .. } => CliError::config(e),
            PhysicsError::NotPhase => CliError::input(e),
        }
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        match e {
            LossError::NegativeClip(_) => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::BadSpec(_) => CliError::config(e),
            SynthError::NotBinary => CliError::input(e),
            SynthError::Volume(v) => v.into(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("IoFailure: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("IoFailure: {e}"))
    }
}

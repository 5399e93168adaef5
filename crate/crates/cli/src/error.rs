use std::process::ExitCode;

use subtile::{DeformationError, Error, GeometryError, SpectralError, SubstitutionError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        })
    }
}

fn from_substitution(e: SubstitutionError) -> CliError {
    match e {
        SubstitutionError::OverflowGuard { .. }
        | SubstitutionError::LevelCap { .. }
        | SubstitutionError::TooManyTiles { .. } => CliError::Numeric(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

fn from_geometry(e: GeometryError) -> CliError {
    match e {
        GeometryError::Io(io) => CliError::Io(io),
        GeometryError::Substitution(s) => from_substitution(s),
        GeometryError::NotSaturated { .. } | GeometryError::NoInteriorCopy { .. } => CliError::Numeric(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Substitution(s) => from_substitution(s),
            Error::Geometry(g) => from_geometry(g),
            Error::Spectral(SpectralError::Substitution(s)) => from_substitution(s),
            Error::Spectral(SpectralError::Geometry(g)) => from_geometry(g),
            Error::Deformation(d @ DeformationError::RadiusTooLarge { .. }) => CliError::Numeric(d.to_string()),
            Error::Deformation(d @ DeformationError::Degenerate(_)) => CliError::Numeric(d.to_string()),
            Error::Cocycle(c @ subtile::CocycleError::Overflow) => CliError::Numeric(c.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Lifts any library error into [`CliError`] through [`subtile::Error`].
pub fn lib<E: Into<Error>>(e: E) -> CliError {
    CliError::from(e.into())
}

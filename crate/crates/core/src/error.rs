use thiserror::Error;

/// Errors raised by the dynamics, linearization and control operations.
///
/// Values are carried as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("speed limit: |v| = {speed} is not below the admissible bound {limit} (c = {c})")]
    SpeedLimit { speed: f64, limit: f64, c: f64 },

    #[error("{name} = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite input: {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid rocket parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires the {expected} model, got {actual}")]
    WrongModel {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("uncontrollable parameterization: input coefficient b = {b}")]
    Uncontrollable { b: f64 },

    #[error("state with |v| = {speed} is not reachable (c = {c})")]
    Unreachable { speed: f64, c: f64 },

    #[error("poles must be closed under complex conjugation: {0}")]
    PolesNotConjugate(String),
}

pub type Result<T, E = DynamicsError> = std::result::Result<T, E>;

//! One error type for front ends, with a stable category per failure kind.

use thiserror::Error;

use crate::instances::InstanceError;
use crate::knapsack::KnapsackError;
use crate::lpfile::LpParseError;
use crate::master::MasterError;
use crate::model::{ModelError, ValidationReport};
use crate::oracles::OracleError;
use crate::rcg::RcgError;
use crate::separation::{RoundingError, SeparationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Input,
    Solver,
    Io,
    Limit,
}

impl ErrorCategory {
    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::Usage => "usage",
            ErrorCategory::Input => "input",
            ErrorCategory::Solver => "solver",
            ErrorCategory::Io => "io",
            ErrorCategory::Limit => "limit",
        }
    }

    /// Process exit status used by the command line.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Usage => 2,
            ErrorCategory::Input => 3,
            ErrorCategory::Solver => 4,
            ErrorCategory::Io => 5,
            ErrorCategory::Limit => 6,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    LpParse(#[from] LpParseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ValidationReport> for Error {
    fn from(report: ValidationReport) -> Self {
        Error::Model(ModelError::Invalid(report))
    }
}

impl From<RcgError> for Error {
    fn from(e: RcgError) -> Self {
        match e {
            RcgError::Master(m) => Error::Master(m),
            RcgError::Separation(s) => Error::Separation(s),
        }
    }
}

fn knapsack_category(e: &KnapsackError) -> ErrorCategory {
    match e {
        KnapsackError::EpsilonOutOfRange => ErrorCategory::Usage,
        KnapsackError::ScalingNotExact => ErrorCategory::Solver,
        KnapsackError::Io(_) => ErrorCategory::Io,
        KnapsackError::ProfitBoundOverflow { .. }
        | KnapsackError::ProfitOverflow
        | KnapsackError::WeightOverflow
        | KnapsackError::TooLarge { .. } => ErrorCategory::Limit,
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Usage(_) => ErrorCategory::Usage,
            Error::Model(_) | Error::Rounding(_) | Error::LpParse(_) => ErrorCategory::Input,
            Error::Knapsack(k) => knapsack_category(k),
            Error::Separation(s) => match s {
                SeparationError::FractionalInput | SeparationError::Model(_) => {
                    ErrorCategory::Input
                }
                SeparationError::Knapsack(k) => knapsack_category(k),
            },
            Error::Master(m) => match m {
                MasterError::CutsRequireEqualCosts | MasterError::DuplicateScenario => {
                    ErrorCategory::Usage
                }
                MasterError::Model(_) => ErrorCategory::Input,
                MasterError::TooLargeForInternal { .. } | MasterError::Overflow => {
                    ErrorCategory::Limit
                }
                MasterError::Io(_) => ErrorCategory::Io,
                MasterError::Infeasible
                | MasterError::SolverNotFound(_)
                | MasterError::ParseError(_)
                | MasterError::SolverReportedInfeasible
                | MasterError::Verification(_) => ErrorCategory::Solver,
            },
            Error::Instance(i) => match i {
                InstanceError::BadSpec(_) => ErrorCategory::Usage,
                InstanceError::Io { .. } => ErrorCategory::Io,
                _ => ErrorCategory::Input,
            },
            Error::Oracle(_) => ErrorCategory::Limit,
            Error::Io(_) => ErrorCategory::Io,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let all = [
            ErrorCategory::Usage,
            ErrorCategory::Input,
            ErrorCategory::Solver,
            ErrorCategory::Io,
            ErrorCategory::Limit,
        ];
        let codes: Vec<i32> = all.iter().map(|c| c.exit_code()).collect();
        assert_eq!(codes, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn categories() {
        let e: Error = KnapsackError::TooLarge { n: 30, max: 22 }.into();
        assert_eq!(e.category(), ErrorCategory::Limit);
        let e: Error = InstanceError::VersionMismatch { found: "v9".into() }.into();
        assert_eq!(e.category(), ErrorCategory::Input);
        let e: Error = MasterError::SolverNotFound("x".into()).into();
        assert_eq!(e.category(), ErrorCategory::Solver);
        let e: Error = std::io::Error::other("x").into();
        assert_eq!(e.category(), ErrorCategory::Io);
    }
}

//! Benchmark generators and the text instance formats.

mod gen;
mod io;

use thiserror::Error;

use crate::model::{ModelError, ValidationReport};

pub use gen::{
    gen_ck, gen_rebp, budget_multiplier, CkGenSpec, GeneratedRebp, NominalSource, RebpGenSpec,
    CK_EXPERIMENTS,
};
pub use io::{
    parse_ck, parse_instance, parse_rebp, read_ck, read_instance, read_rebp, render_ck,
    render_rebp, write_ck, write_rebp, AnyInstance, CK_HEADER, FORMAT_VERSION, REBP_HEADER,
};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid generator settings: {0}")]
    BadSpec(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported format version `{found}`, expected v{FORMAT_VERSION}")]
    VersionMismatch { found: String },
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

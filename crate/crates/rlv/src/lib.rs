//! File formats, reports, commands and the differential fuzz harness around
//! `rlv-core`. The `rlv` binary is a thin wrapper over [`cli`].

use std::path::Path;

pub mod cli;
pub mod cmd;
pub mod format;
pub mod fuzz;
pub mod model;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: invalid JSON")]
    Json {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: syntax error")]
    Parse {
        path: String,
        #[source]
        source: rlv_core::efsm::ParseError,
    },
    #[error(transparent)]
    Expand(#[from] rlv_core::efsm::ExpandError),
    #[error(transparent)]
    Select(#[from] rlv_core::efsm::SelectError),
    #[error(transparent)]
    Predicate(#[from] rlv_core::efsm::PredicateError),
    #[error(transparent)]
    System(#[from] rlv_core::system::SystemError),
    #[error(transparent)]
    Mismatch(#[from] rlv_core::Mismatch),
    #[error("selections apply to guarded-command models only")]
    SelectionOnExplicit,
    #[error("explicit systems take state lists, not `{0}`")]
    ExprOnExplicit(String),
    #[error("state id {id} out of range (system has {len} states)")]
    StateRange { id: usize, len: usize },
    #[error("undefined name `${0}`")]
    UnknownDef(String),
    #[error("unknown rule `{0}`")]
    BadRule(String),
    #[error("tag must be T or F, found `{0}`")]
    BadTag(String),
    #[error("premise must be an index or `X0:<index>`, found `{0}`")]
    BadPremise(String),
    #[error("discharge must be `oracle`, `hypothesis` or a certificate, found `{0}`")]
    BadDischarge(String),
    #[error("{rule} needs parameter `{field}`")]
    MissingParam { rule: String, field: &'static str },
    #[error("at {location}")]
    At {
        location: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn json(origin: impl AsRef<Path>, source: serde_json::Error) -> Self {
        Error::Json {
            origin: origin.as_ref().display().to_string(),
            source,
        }
    }
}

pub fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Too few points, or points without spatial spread.
    #[error("unfittable detection: {0}")]
    Unfittable(&'static str),
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown world family `{0}`")]
    UnknownFamily(String),
    #[error("anchor_frame needs at least one estimate")]
    EmptyViews,
    #[error("no reachable candidate viewpoints")]
    NoCandidates,
    #[error("cannot select a viewpoint from an empty result list")]
    EmptyResults,
    #[error("start pose is not on a navigable cell")]
    StartOffGrid,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

//! Point sets bundled with the binary.

use pv_core::fatpoints::{FatPointError, PointSet, PointSetRecord};

pub const PAPER_F2_997: &str = "paper-f2-997";
pub const PAPER_P2_997: &str = "paper-p2-997";
pub const PAPER_F4_65537: &str = "paper-f4-65537";

pub const NAMES: [&str; 3] = [PAPER_F2_997, PAPER_P2_997, PAPER_F4_65537];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        PAPER_F2_997 => Some(include_str!("../fixtures/paper-f2-997.json")),
        PAPER_P2_997 => Some(include_str!("../fixtures/paper-p2-997.json")),
        PAPER_F4_65537 => Some(include_str!("../fixtures/paper-f4-65537.json")),
        _ => None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("no bundled fixture named {0:?}")]
    Unknown(String),
    #[error("malformed point file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Points(#[from] FatPointError),
}

pub fn parse(json: &str) -> Result<PointSet, FixtureError> {
    let record: PointSetRecord = serde_json::from_str(json)?;
    Ok(PointSet::from_record(&record)?)
}

pub fn load(name: &str) -> Result<PointSet, FixtureError> {
    parse(source(name).ok_or_else(|| FixtureError::Unknown(name.into()))?)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{parse_case, NetworkCase};

/// The IEEE benchmark systems compiled into the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmbeddedCase {
    Ieee14,
    Ieee57,
    Ieee118,
}

impl EmbeddedCase {
    pub const ALL: [EmbeddedCase; 3] = [EmbeddedCase::Ieee14, EmbeddedCase::Ieee57, EmbeddedCase::Ieee118];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddedCase::Ieee14 => "ieee14",
            EmbeddedCase::Ieee57 => "ieee57",
            EmbeddedCase::Ieee118 => "ieee118",
        }
    }

    /// The case file text exactly as shipped.
    pub fn source(self) -> &'static str {
        match self {
            EmbeddedCase::Ieee14 => include_str!("../../cases/ieee14.m"),
            EmbeddedCase::Ieee57 => include_str!("../../cases/ieee57.m"),
            EmbeddedCase::Ieee118 => include_str!("../../cases/ieee118.m"),
        }
    }
}

impl fmt::Display for EmbeddedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown case `{0}` (expected ieee14, ieee57 or ieee118)")]
pub struct UnknownCaseName(pub String);

impl FromStr for EmbeddedCase {
    type Err = UnknownCaseName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ieee14" | "case14" | "14" => Ok(EmbeddedCase::Ieee14),
            "ieee57" | "case57" | "57" => Ok(EmbeddedCase::Ieee57),
            "ieee118" | "case118" | "118" => Ok(EmbeddedCase::Ieee118),
            _ => Err(UnknownCaseName(s.to_string())),
        }
    }
}

pub fn embedded_case(which: EmbeddedCase) -> NetworkCase {
    parse_case(which.source()).expect("embedded case files are validated by the test suite")
}

//! Schema-tagged JSON artifacts.

use serde::{Deserialize, Serialize};

use crate::code::Code;
use crate::concat::{CompatibilityWitness, Encoder};
use crate::error::{Error, Result};
use crate::genconstruct::FunctionFamily;
use crate::pipeline::PipelineReport;
use crate::separability::SeparabilityCertificate;
use crate::tester::Tester;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "schema")]
pub enum Artifact {
    #[serde(rename = "ltc-forge/code-v1")]
    Code(Code),
    #[serde(rename = "ltc-forge/tester-v1")]
    Tester(Tester),
    #[serde(rename = "ltc-forge/family-v1")]
    Family(FunctionFamily),
    #[serde(rename = "ltc-forge/encoder-v1")]
    Encoder(Encoder),
    #[serde(rename = "ltc-forge/witness-v1")]
    Witness(CompatibilityWitness),
    #[serde(rename = "ltc-forge/certificate-v1")]
    Certificate(SeparabilityCertificate),
    #[serde(rename = "ltc-forge/report-v1")]
    Report(Box<PipelineReport>),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Code(_) => "code",
            Artifact::Tester(_) => "tester",
            Artifact::Family(_) => "family",
            Artifact::Encoder(_) => "encoder",
            Artifact::Witness(_) => "witness",
            Artifact::Certificate(_) => "certificate",
            Artifact::Report(_) => "report",
        }
    }
}

pub fn to_json(a: &Artifact) -> String {
    serde_json::to_string_pretty(a).expect("artifacts serialize")
}

pub fn from_json(s: &str) -> Result<Artifact> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_code(s: &str) -> Result<Code> {
    match from_json(s)? {
        Artifact::Code(c) => Ok(c),
        a => Err(Error::Schema(format!("expected a code, found a {}", a.kind()))),
    }
}

pub fn read_tester(s: &str) -> Result<Tester> {
    match from_json(s)? {
        Artifact::Tester(t) => Ok(t),
        a => Err(Error::Schema(format!("expected a tester, found a {}", a.kind()))),
    }
}

pub fn read_family(s: &str) -> Result<FunctionFamily> {
    match from_json(s)? {
        Artifact::Family(f) => Ok(f),
        Artifact::Encoder(e) => Ok(e.family),
        a => Err(Error::Schema(format!("expected a function family, found a {}", a.kind()))),
    }
}

pub fn read_encoder(s: &str) -> Result<Encoder> {
    match from_json(s)? {
        Artifact::Encoder(e) => Ok(e),
        Artifact::Family(f) => Ok(Encoder::new(f)),
        a => Err(Error::Schema(format!("expected an encoder, found a {}", a.kind()))),
    }
}

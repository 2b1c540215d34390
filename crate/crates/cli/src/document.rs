//! The certificate document: a certificate with provenance, the full assumption
//! list, and oracle reports.

use std::sync::OnceLock;

use jsonschema::JSONSchema;
use serde::Serialize;
use serde_json::Value;

use sumleaf::criteria::{Assumption, Certificate};
use sumleaf::oracle::OracleReport;

pub const CERTIFICATE_SCHEMA: &str = include_str!("../schemas/certificate.schema.json");
pub const FORMAT: &str = "sumleaf-certificate";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CertificateDocument {
    pub format: &'static str,
    pub format_version: u32,
    pub tool_version: &'static str,
    pub manifest: String,
    pub manifest_digest: String,
    /// Taken from the caller, never from the clock, so reruns are byte-identical.
    pub timestamp: Option<String>,
    pub seed: u64,
    pub depth: u64,
    pub certificate: Option<Certificate>,
    pub assumptions: Vec<Assumption>,
    pub reports: Vec<OracleReport>,
}

impl CertificateDocument {
    pub fn new(manifest: &str, digest: &str, seed: u64, depth: usize, timestamp: Option<String>) -> Self {
        CertificateDocument {
            format: FORMAT,
            format_version: FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            manifest: manifest.to_string(),
            manifest_digest: digest.to_string(),
            timestamp,
            seed,
            depth: depth as u64,
            certificate: None,
            assumptions: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> Self {
        self.assumptions = certificate.assumptions.clone();
        self.certificate = Some(certificate);
        self
    }

    pub fn with_reports(mut self, reports: Vec<OracleReport>) -> Self {
        self.reports = reports;
        self
    }

    /// Pretty JSON with a trailing newline, validated against the shipped schema.
    pub fn to_json(&self) -> Result<String, String> {
        let value = serde_json::to_value(self).map_err(|e| e.to_string())?;
        validate(&value)?;
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?;
        text.push('\n');
        Ok(text)
    }
}

fn schema() -> &'static JSONSchema {
    static SCHEMA: OnceLock<JSONSchema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let value: Value = serde_json::from_str(CERTIFICATE_SCHEMA).expect("shipped schema is JSON");
        JSONSchema::compile(&value).expect("shipped schema compiles")
    })
}

pub fn validate(value: &Value) -> Result<(), String> {
    schema()
        .validate(value)
        .map_err(|errors| errors.map(|e| format!("at {}: {e}", e.instance_path)).collect::<Vec<_>>().join("; "))
}

/// RFC 3339 rendering of `SOURCE_DATE_EPOCH`-style seconds.
pub fn timestamp_from_epoch(seconds: &str) -> Result<String, String> {
    let secs: i64 = seconds.trim().parse().map_err(|_| format!("invalid epoch seconds {seconds:?}"))?;
    let time = chrono::DateTime::from_timestamp(secs, 0).ok_or_else(|| format!("epoch {secs} out of range"))?;
    Ok(time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

/// Epoch seconds or an RFC 3339 timestamp, rendered in UTC.
pub fn normalize_timestamp(text: &str) -> Result<String, String> {
    if text.trim().bytes().all(|b| b.is_ascii_digit()) {
        return timestamp_from_epoch(text);
    }
    let time =
        chrono::DateTime::parse_from_rfc3339(text.trim()).map_err(|e| format!("invalid timestamp {text:?}: {e}"))?;
    Ok(time.with_timezone(&chrono::Utc).to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

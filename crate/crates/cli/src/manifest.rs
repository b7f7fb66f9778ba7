//! Run manifests. Every output file begins with a `#`-comment header
//! carrying the tool version, the command, the canonical request payload,
//! a SHA-256 digest of that payload, and per-point status lines; the JSON
//! twin embeds the same manifest as an object.
//!
//! Re-running the embedded request must reproduce the file byte for byte,
//! so the manifest deliberately excludes anything execution-specific:
//! wall-clock time (reported on stderr instead), the worker count, and
//! the output directory.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Canonical request payload; everything needed to re-run.
    pub request: serde_json::Value,
    /// SHA-256 of `command` + newline + the serialized request.
    pub config_digest: String,
    /// One line per solved point.
    pub status: Vec<String>,
}

impl RunManifest {
    pub fn new<R: Serialize>(command: &'static str, request: &R) -> Result<Self, CliError> {
        let request = serde_json::to_value(request)?;
        let canonical = format!("{command}\n{}", serde_json::to_string(&request)?);
        let digest = Sha256::digest(canonical.as_bytes());
        let mut config_digest = String::with_capacity(64);
        for b in digest {
            use std::fmt::Write;
            write!(config_digest, "{b:02x}").expect("hex into string");
        }
        Ok(Self {
            tool: "lqlift",
            version: env!("CARGO_PKG_VERSION"),
            command,
            request,
            config_digest,
            status: Vec::new(),
        })
    }

    /// The `#`-comment lines placed before the CSV header.
    pub fn preamble(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# tool: {} {}", self.tool, self.version),
            format!("# command: {}", self.command),
            format!(
                "# request: {}",
                serde_json::to_string(&self.request).expect("request round-trips")
            ),
            format!("# config_digest: {}", self.config_digest),
        ];
        for s in &self.status {
            lines.push(format!("# status: {s}"));
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Req {
        a: f64,
        b: Vec<u32>,
    }

    #[test]
    fn digest_is_stable_and_request_sensitive() {
        let r1 = RunManifest::new("curve", &Req { a: 0.5, b: vec![1, 2] }).unwrap();
        let r2 = RunManifest::new("curve", &Req { a: 0.5, b: vec![1, 2] }).unwrap();
        let r3 = RunManifest::new("curve", &Req { a: 0.6, b: vec![1, 2] }).unwrap();
        assert_eq!(r1.config_digest, r2.config_digest);
        assert_ne!(r1.config_digest, r3.config_digest);
        assert_eq!(r1.config_digest.len(), 64);
    }

    #[test]
    fn preamble_orders_status_after_identity() {
        let mut m = RunManifest::new("q0", &Req { a: 1.0, b: vec![] }).unwrap();
        m.status.push("alpha=0.5 ok".into());
        let lines = m.preamble();
        assert!(lines[0].starts_with("# tool: lqlift "));
        assert_eq!(lines[1], "# command: q0");
        assert!(lines[2].starts_with("# request: {"));
        assert!(lines[3].starts_with("# config_digest: "));
        assert_eq!(lines[4], "# status: alpha=0.5 ok");
    }
}

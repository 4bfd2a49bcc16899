//! Run manifests: enough metadata to rerun any invocation bit-for-bit and to
//! check that an archived output matches what the tool would produce today.

use std::collections::BTreeMap;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::CommandOutput;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Subcommand flags after parsing, normalized to their rendered form.
    /// Worker count is deliberately absent: outputs must not depend on it.
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    /// sha256 over the canonical CSV rendering, and over the payload when
    /// one exists.
    pub digests: BTreeMap<String, String>,
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

impl RunManifest {
    pub fn start(command: &str, flags: BTreeMap<String, String>, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            flags,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: timestamp(),
            finished: String::new(),
            digests: BTreeMap::new(),
        }
    }

    /// Stamps the end time and digests the output it describes.
    pub fn finish(&mut self, output: &CommandOutput) {
        self.digests
            .insert("csv".to_string(), sha256_hex(output.csv().as_bytes()));
        if let Some(payload) = &output.payload {
            let bytes = serde_json::to_vec(payload).expect("payload serializes");
            self.digests
                .insert("payload".to_string(), sha256_hex(&bytes));
        }
        self.finished = timestamp();
    }
}

/// The archival document written by `--out`: manifest plus the same cells the
/// CSV would carry, plus any witness payload.
pub fn json_document(manifest: &RunManifest, output: &CommandOutput) -> serde_json::Value {
    serde_json::json!({
        "manifest": manifest,
        "columns": output.columns,
        "rows": output.rows,
        "payload": output.payload,
    })
}

/// Blanks the wall-clock fields, leaving everything a rerun must reproduce.
pub fn scrub_timestamps(doc: &mut serde_json::Value) {
    if let Some(m) = doc.get_mut("manifest") {
        if let Some(obj) = m.as_object_mut() {
            obj.insert("started".to_string(), serde_json::Value::String(String::new()));
            obj.insert("finished".to_string(), serde_json::Value::String(String::new()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_known_vector() {
        // sha256 of the empty string.
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_digests_track_output() {
        let mut out = CommandOutput::new(vec!["x"]);
        out.push_row(vec!["1".into()]).unwrap();
        let mut m = RunManifest::start("norms", BTreeMap::new(), 7);
        m.finish(&out);
        assert_eq!(m.digests["csv"], sha256_hex(out.csv().as_bytes()));
        assert!(!m.finished.is_empty());
        assert!(!m.digests.contains_key("payload"));
    }

    #[test]
    fn scrub_blanks_only_timestamps() {
        let out = CommandOutput::new(vec!["x"]);
        let mut m = RunManifest::start("norms", BTreeMap::new(), 0);
        m.finish(&out);
        let mut doc = json_document(&m, &out);
        scrub_timestamps(&mut doc);
        assert_eq!(doc["manifest"]["started"], "");
        assert_eq!(doc["manifest"]["finished"], "");
        assert_eq!(doc["manifest"]["seed"], 0);
        assert!(doc["manifest"]["digests"]["csv"].is_string());
    }
}

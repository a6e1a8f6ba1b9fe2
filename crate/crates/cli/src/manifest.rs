//! Run manifest and the versioned JSON envelope.
//!
//! JSON output has the shape
//!
//! ```text
//! { "schema_version": 1, "manifest": { ... }, "<payload>": ... }
//! ```
//!
//! where the manifest records the command, the resolved configuration, the
//! seed, the tool version, the wall-clock time and, for commands that read a
//! CSV file, the SHA-256 digest of its bytes. Only `started_unix` and
//! `elapsed_seconds` vary between identical runs.

use serde::Serialize;
use serde_json::Value;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub started_unix: f64,
    pub elapsed_seconds: f64,
    pub input_sha256: Option<String>,
}

/// Wall-clock bookkeeping for a manifest under construction.
pub struct Clock {
    started_unix: f64,
    start: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Self {
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            start: Instant::now(),
        }
    }

    pub fn finish(
        &self,
        command: &'static str,
        config: Value,
        seed: Option<u64>,
        input_sha256: Option<String>,
    ) -> RunManifest {
        RunManifest {
            command,
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started_unix,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            input_sha256,
        }
    }
}

/// Pretty-printed envelope with a trailing newline.
pub fn envelope<T: Serialize>(manifest: &RunManifest, key: &str, payload: &T) -> Vec<u8> {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    map.insert(
        "manifest".into(),
        serde_json::to_value(manifest).expect("manifest serializes"),
    );
    map.insert(
        key.into(),
        serde_json::to_value(payload).expect("payload serializes"),
    );
    let mut out = serde_json::to_vec_pretty(&Value::Object(map)).expect("json encodes");
    out.push(b'\n');
    out
}

//! Eigensolve memoization. With `GRUSHINLAB_CACHE` set, solved spectra are
//! stored as JSON under the SHA-256 of everything that determines them: the
//! grid, the sampled potential values and the eigen request.

use std::path::PathBuf;

use anyhow::Context;
use grushinlab_core::{eigensolve, DiscreteOperator, EigenRequest, SpectralData};
use sha2::{Digest, Sha256};

use crate::output::VERSION;

pub const CACHE_ENV: &str = "GRUSHINLAB_CACHE";

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn key(op: &DiscreteOperator, request: EigenRequest) -> String {
    let mut h = Sha256::new();
    h.update(VERSION.as_bytes());
    h.update(serde_json::to_vec(op.grid()).expect("grid serializes"));
    h.update(serde_json::to_vec(&request).expect("request serializes"));
    for v in op.potential_values() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// `eigensolve`, through the cache when one is configured. Unreadable cache
/// entries are recomputed and overwritten.
pub fn solve(op: &DiscreteOperator, request: EigenRequest) -> anyhow::Result<SpectralData> {
    let Some(dir) = cache_dir() else {
        return Ok(eigensolve(op, request)?);
    };
    let path = dir.join(format!("{}.json", key(op, request)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(mut s) = serde_json::from_str::<SpectralData>(&text) {
            if s.complete_to == f64::MAX {
                s.complete_to = f64::INFINITY;
            }
            if s.grid == *op.grid() {
                return Ok(s);
            }
        }
    }
    let s = eigensolve(op, request)?;
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create cache directory {}", dir.display()))?;
    let tmp = path.with_extension("tmp");
    // JSON has no infinity.
    let mut stored = s.clone();
    if stored.complete_to.is_infinite() {
        stored.complete_to = f64::MAX;
    }
    std::fs::write(&tmp, serde_json::to_vec(&stored)?)?;
    std::fs::rename(&tmp, &path)?;
    Ok(s)
}

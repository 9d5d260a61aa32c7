use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::walks::{enumerate_with, EnumerateOptions, Region, StepSet, TableJson, WalkError, WalkTable};

/// Bumped whenever the enumeration box or table layout changes.
pub const BOX_POLICY_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn table_hash(t: &TableJson) -> String {
    sha256_hex(&serde_json::to_vec(t).expect("table serializes"))
}

fn key_material(steps: &StepSet, region: &Region, m_max: usize) -> String {
    format!("steps={steps}|region={region}|m_max={m_max}|box_policy={BOX_POLICY_VERSION}")
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: String,
    table_sha256: String,
    table: TableJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
    /// A cached file existed but failed its hash check and was replaced.
    Corrupt,
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{}.json", sha256_hex(key.as_bytes())))
}

fn read(path: &Path, key: &str) -> Option<Result<WalkTable, ()>> {
    let bytes = fs::read(path).ok()?;
    let parsed: CacheFile = match serde_json::from_slice(&bytes) {
        Ok(c) => c,
        Err(_) => return Some(Err(())),
    };
    if parsed.key != key || table_hash(&parsed.table) != parsed.table_sha256 {
        return Some(Err(()));
    }
    Some(WalkTable::from_json(&parsed.table).map_err(|_| ()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("artifact"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    write_atomic(path, bytes)
}

/// Full-retention table for `(steps, region, m_max)`, read from the cache
/// directory when a valid entry exists and stored there otherwise.
pub fn load_or_enumerate(
    steps: &StepSet,
    region: &Region,
    m_max: usize,
    budget: u64,
    cache_dir: Option<&Path>,
) -> Result<(WalkTable, CacheStatus), WalkError> {
    let opts = EnumerateOptions {
        cell_budget: budget,
        ..Default::default()
    };
    let Some(dir) = cache_dir else {
        return Ok((enumerate_with(steps, region, m_max, &opts)?, CacheStatus::Disabled));
    };
    let key = key_material(steps, region, m_max);
    let path = cache_path(dir, &key);
    let status = match read(&path, &key) {
        Some(Ok(t)) => return Ok((t, CacheStatus::Hit)),
        Some(Err(())) => CacheStatus::Corrupt,
        None => CacheStatus::Miss,
    };
    let t = enumerate_with(steps, region, m_max, &opts)?;
    let json = t.to_json();
    let file = CacheFile {
        key,
        table_sha256: table_hash(&json),
        table: json,
    };
    // A failed cache write only costs a recomputation next time.
    let _ = write_atomic(&path, &serde_json::to_vec(&file).expect("cache entry serializes"));
    Ok((t, status))
}

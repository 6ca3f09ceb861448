//! Binary model checkpoints: spec header plus the flat parameter vector,
//! bit-exact on round trip.

use std::fs;
use std::path::Path;

use super::model::{count_params, ModelSpec};
use super::NnError;

const MAGIC: &[u8; 8] = b"DTCKPT\x00\x01";

/// Layout: 8-byte magic (includes the format version), u64-LE spec-JSON
/// length, the spec JSON, u64-LE parameter count, then raw little-endian
/// f64 parameters.
pub fn save_checkpoint(spec: &ModelSpec, params: &[f64], path: &Path) -> Result<(), NnError> {
    let spec_json = serde_json::to_vec(spec)
        .map_err(|e| NnError::Checkpoint(format!("spec serialization failed: {e}")))?;
    let mut bytes = Vec::with_capacity(8 + 8 + spec_json.len() + 8 + params.len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(spec_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&spec_json);
    bytes.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelSpec, Vec<f64>), NnError> {
    let bytes = fs::read(path)?;
    let take = |range: std::ops::Range<usize>| -> Result<&[u8], NnError> {
        bytes
            .get(range)
            .ok_or_else(|| NnError::Checkpoint("truncated checkpoint".into()))
    };
    if take(0..8)? != MAGIC {
        return Err(NnError::Checkpoint("bad magic or unsupported version".into()));
    }
    let spec_len = u64::from_le_bytes(take(8..16)?.try_into().unwrap()) as usize;
    let spec_end = 16 + spec_len;
    let spec: ModelSpec = serde_json::from_slice(take(16..spec_end)?)
        .map_err(|e| NnError::Checkpoint(format!("bad spec header: {e}")))?;
    let n = u64::from_le_bytes(take(spec_end..spec_end + 8)?.try_into().unwrap()) as usize;
    let data = take(spec_end + 8..spec_end + 8 + n * 8)?;
    if spec_end + 8 + n * 8 != bytes.len() {
        return Err(NnError::Checkpoint("trailing bytes after parameters".into()));
    }
    let expected = count_params(&spec)?.total;
    if n != expected {
        return Err(NnError::Checkpoint(format!(
            "checkpoint holds {n} parameters, spec requires {expected}"
        )));
    }
    let params = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((spec, params))
}

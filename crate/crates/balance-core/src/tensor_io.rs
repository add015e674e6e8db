//! Tensor file formats.
//!
//! Binary "BLNC v1" layout, all little-endian:
//!
//! ```text
//! magic   4 bytes  "BLNC"
//! version u32      1
//! dtype   u8       0 = f32, 1 = f64
//! dims    3 x u64  S, N, C
//! data    S*N*C values, row-major
//! ```
//!
//! A JSON mirror (`{"dims": [S, N, C], "data": [...]}`) is accepted for
//! small fixtures; files not starting with the magic bytes are parsed as
//! JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{BalanceError, Result};
use crate::tensor::PredictionTensor;

const MAGIC: &[u8; 4] = b"BLNC";
const VERSION: u32 = 1;

/// Element width of a stored tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

#[derive(Serialize, Deserialize)]
struct JsonTensor {
    dims: [u64; 3],
    data: Vec<f64>,
}

/// Reads a tensor from either BLNC v1 binary or the JSON mirror.
pub fn read_tensor(path: impl AsRef<Path>) -> Result<PredictionTensor> {
    let mut file = BufReader::new(File::open(path.as_ref())?);
    let mut magic = [0u8; 4];
    let got = read_up_to(&mut file, &mut magic)?;
    if got == 4 && &magic == MAGIC {
        read_binary_body(&mut file)
    } else {
        let mut bytes = magic[..got].to_vec();
        file.read_to_end(&mut bytes)?;
        let parsed: JsonTensor = serde_json::from_slice(&bytes)
            .map_err(|e| BalanceError::Format(format!("neither BLNC v1 nor JSON mirror: {e}")))?;
        tensor_from_parts(parsed.dims, parsed.data)
    }
}

/// Writes BLNC v1 with the requested element width.
pub fn write_tensor(path: impl AsRef<Path>, tensor: &PredictionTensor, dtype: Dtype) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[match dtype {
        Dtype::F32 => 0u8,
        Dtype::F64 => 1u8,
    }])?;
    for dim in [
        tensor.num_hypotheses(),
        tensor.num_points(),
        tensor.num_classes(),
    ] {
        out.write_all(&(dim as u64).to_le_bytes())?;
    }
    match dtype {
        Dtype::F32 => {
            for &v in tensor.values() {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        Dtype::F64 => {
            for &v in tensor.values() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the JSON mirror.
pub fn write_tensor_json(path: impl AsRef<Path>, tensor: &PredictionTensor) -> Result<()> {
    let body = JsonTensor {
        dims: [
            tensor.num_hypotheses() as u64,
            tensor.num_points() as u64,
            tensor.num_classes() as u64,
        ],
        data: tensor.values().to_vec(),
    };
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    serde_json::to_writer(&mut out, &body)
        .map_err(|e| BalanceError::Format(format!("serializing tensor: {e}")))?;
    out.flush()?;
    Ok(())
}

fn read_binary_body<R: Read>(file: &mut R) -> Result<PredictionTensor> {
    let mut u32buf = [0u8; 4];
    file.read_exact(&mut u32buf)
        .map_err(|_| BalanceError::Format("truncated header".into()))?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        return Err(BalanceError::Format(format!(
            "unsupported version {version}"
        )));
    }
    let mut flag = [0u8; 1];
    file.read_exact(&mut flag)
        .map_err(|_| BalanceError::Format("truncated header".into()))?;
    let dtype = match flag[0] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        other => return Err(BalanceError::Format(format!("unknown dtype flag {other}"))),
    };
    let mut dims = [0u64; 3];
    let mut u64buf = [0u8; 8];
    for d in dims.iter_mut() {
        file.read_exact(&mut u64buf)
            .map_err(|_| BalanceError::Format("truncated dims".into()))?;
        *d = u64::from_le_bytes(u64buf);
    }
    let count = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| BalanceError::Format("dimension overflow".into()))? as usize;
    let width = match dtype {
        Dtype::F32 => 4,
        Dtype::F64 => 8,
    };
    let mut raw = vec![0u8; count * width];
    file.read_exact(&mut raw)
        .map_err(|_| BalanceError::Format("truncated data section".into()))?;
    let data: Vec<f64> = match dtype {
        Dtype::F32 => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::F64 => raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    tensor_from_parts(dims, data)
}

fn tensor_from_parts(dims: [u64; 3], data: Vec<f64>) -> Result<PredictionTensor> {
    PredictionTensor::from_probs(dims[0] as usize, dims[1] as usize, dims[2] as usize, data)
        .map_err(|e| BalanceError::Format(e.to_string()))
}

fn read_up_to<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut total = 0;
    while total < buf.len() {
        let n = reader.read(&mut buf[total..])?;
        if n == 0 {
            break;
        }
        total += n;
    }
    Ok(total)
}

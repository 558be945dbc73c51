//! Flat binary tensor dumps.
//!
//! Layout (all multi-byte fields little-endian):
//!
//! | offset | size | field                                               |
//! |--------|------|-----------------------------------------------------|
//! | 0      | 4    | magic `b"TUGW"`                                     |
//! | 4      | 1    | element width in bits: 8, 16 or 32                  |
//! | 5      | 1    | rank, 1..=4                                         |
//! | 6      | 2    | reserved, must be 0                                 |
//! | 8      | 8    | four `u16` dims; the first `rank` are ≥ 1, rest 0   |
//! | 16     | ...  | `product(dims)` signed two's-complement elements    |
//!
//! The file ends exactly after the last element.

use std::path::Path;

use crate::error::{DumpError, LoadError};

pub const MAGIC: [u8; 4] = *b"TUGW";
pub const HEADER_LEN: usize = 16;
pub const MAX_RANK: usize = 4;

/// A dense signed-integer tensor of any rank up to four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<i64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<i64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Tensor { dims, data }
    }

    pub fn max_abs(&self) -> u64 {
        self.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }
}

pub fn decode(bytes: &[u8]) -> Result<Tensor, DumpError> {
    if bytes.len() < HEADER_LEN {
        return Err(DumpError::Length {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(DumpError::BadMagic { found: magic });
    }
    let bits = bytes[4];
    let elem_bytes = match bits {
        8 | 16 | 32 => usize::from(bits / 8),
        _ => return Err(DumpError::ElementWidth { bits }),
    };
    let rank = bytes[5];
    if rank == 0 || usize::from(rank) > MAX_RANK {
        return Err(DumpError::Rank { rank });
    }
    let reserved = u16::from_le_bytes([bytes[6], bytes[7]]);
    if reserved != 0 {
        return Err(DumpError::Header {
            field: "reserved",
            expected: 0,
            found: reserved.into(),
        });
    }
    let mut dims = Vec::with_capacity(usize::from(rank));
    for k in 0..MAX_RANK {
        let d = u16::from_le_bytes([bytes[8 + 2 * k], bytes[9 + 2 * k]]);
        match (k < usize::from(rank), d) {
            (true, 0) => {
                return Err(DumpError::Header {
                    field: "dim",
                    expected: 1,
                    found: 0,
                })
            }
            (true, d) => dims.push(usize::from(d)),
            (false, 0) => {}
            (false, d) => {
                return Err(DumpError::Header {
                    field: "unused dim",
                    expected: 0,
                    found: d.into(),
                })
            }
        }
    }
    let count: usize = dims.iter().product();
    let expected = HEADER_LEN + count * elem_bytes;
    if bytes.len() != expected {
        return Err(DumpError::Length {
            expected,
            found: bytes.len(),
        });
    }
    let body = &bytes[HEADER_LEN..];
    let data = match elem_bytes {
        1 => body.iter().map(|&b| i64::from(b as i8)).collect(),
        2 => body
            .chunks_exact(2)
            .map(|c| i64::from(i16::from_le_bytes([c[0], c[1]])))
            .collect(),
        _ => body
            .chunks_exact(4)
            .map(|c| i64::from(i32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
    };
    Ok(Tensor { dims, data })
}

pub fn encode(tensor: &Tensor, bits: u8) -> Result<Vec<u8>, DumpError> {
    if !matches!(bits, 8 | 16 | 32) {
        return Err(DumpError::ElementWidth { bits });
    }
    let rank = tensor.dims.len();
    if rank == 0 || rank > MAX_RANK {
        return Err(DumpError::Rank { rank: rank as u8 });
    }
    let mut out = Vec::with_capacity(HEADER_LEN + tensor.data.len() * usize::from(bits / 8));
    out.extend_from_slice(&MAGIC);
    out.push(bits);
    out.push(rank as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    for k in 0..MAX_RANK {
        let d = tensor.dims.get(k).copied().unwrap_or(0);
        let d16 = u16::try_from(d).map_err(|_| DumpError::DimTooLarge { dim: k, size: d })?;
        if k < rank && d == 0 {
            return Err(DumpError::Header {
                field: "dim",
                expected: 1,
                found: 0,
            });
        }
        out.extend_from_slice(&d16.to_le_bytes());
    }
    for &v in &tensor.data {
        let too_wide = || DumpError::ValueTooWide { value: v, bits };
        match bits {
            8 => out.push(i8::try_from(v).map_err(|_| too_wide())? as u8),
            16 => out.extend_from_slice(&i16::try_from(v).map_err(|_| too_wide())?.to_le_bytes()),
            _ => out.extend_from_slice(&i32::try_from(v).map_err(|_| too_wide())?.to_le_bytes()),
        }
    }
    Ok(out)
}

pub fn read_dump(path: &Path) -> Result<Tensor, LoadError> {
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode(&bytes).map_err(|source| LoadError::Dump {
        path: path.to_owned(),
        source,
    })
}

pub fn write_dump(path: &Path, tensor: &Tensor, bits: u8) -> Result<(), LoadError> {
    let bytes = encode(tensor, bits).map_err(|source| LoadError::Dump {
        path: path.to_owned(),
        source,
    })?;
    std::fs::write(path, bytes).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

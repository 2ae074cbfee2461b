//! DBF1 binary field files with a JSON sidecar.
//!
//! Layout (little-endian): magic `DBF1`, `u32` version, `u32` ndims,
//! `u64` dims (grid shape followed by value rows and cols), `u8` scalar kind,
//! the row-major payload of complex pairs, then the mask as packed bits
//! (least significant bit first). The sidecar carries origin, spacing and
//! the domain.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ComplexGrid, Domain, Field};
use crate::error::{DbarError, Result};
use crate::C64;

pub const MAGIC: &[u8; 4] = b"DBF1";
pub const VERSION: u32 = 1;

/// Storage width of each complex entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    /// Two `f32` (8 bytes per entry).
    F32,
    /// Two `f64` (16 bytes per entry).
    F64,
}

impl ScalarKind {
    fn code(self) -> u8 {
        match self {
            ScalarKind::F32 => 0,
            ScalarKind::F64 => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(ScalarKind::F32),
            1 => Ok(ScalarKind::F64),
            other => Err(DbarError::Format(format!("unknown scalar kind {other}"))),
        }
    }

    fn width(self) -> usize {
        match self {
            ScalarKind::F32 => 8,
            ScalarKind::F64 => 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Sidecar {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub domain_kind: String,
    pub domain: Domain,
}

impl Sidecar {
    pub fn of(grid: &ComplexGrid) -> Self {
        Sidecar {
            origin: grid.origin().to_vec(),
            spacing: grid.spacing().to_vec(),
            domain_kind: grid.domain().kind().to_string(),
            domain: grid.domain().clone(),
        }
    }
}

pub fn encode(field: &Field, kind: ScalarKind) -> Vec<u8> {
    let grid = field.grid();
    let mut dims: Vec<u64> = grid.shape().iter().map(|&n| n as u64).collect();
    dims.push(field.rows() as u64);
    dims.push(field.cols() as u64);
    let mut out = Vec::with_capacity(16 + 8 * dims.len() + field.values().len() * kind.width());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in &dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.push(kind.code());
    for v in field.values() {
        match kind {
            ScalarKind::F32 => {
                out.extend_from_slice(&(v.re as f32).to_le_bytes());
                out.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
            ScalarKind::F64 => {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    let mask = grid.mask();
    let mut bits = vec![0u8; mask.len().div_ceil(8)];
    for (i, &m) in mask.iter().enumerate() {
        if m {
            bits[i / 8] |= 1 << (i % 8);
        }
    }
    out.extend_from_slice(&bits);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DbarError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parse a DBF1 payload; the lattice comes from the sidecar.
pub fn decode(bytes: &[u8], sidecar: &Sidecar) -> Result<(Field, ScalarKind)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(DbarError::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(DbarError::UnsupportedVersion(version));
    }
    let ndims = r.u32()? as usize;
    if !(ndims == 4 || ndims == 6) {
        return Err(DbarError::Format(format!("unexpected ndims {ndims}")));
    }
    let dims: Vec<usize> = (0..ndims)
        .map(|_| r.u64().map(|d| d as usize))
        .collect::<Result<_>>()?;
    let kind = ScalarKind::from_code(r.take(1)?[0])?;
    let shape = dims[..ndims - 2].to_vec();
    let (rows, cols) = (dims[ndims - 2], dims[ndims - 1]);
    let cells = shape
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| DbarError::Format("shape overflow".into()))?;
    let count = cells
        .checked_mul(rows)
        .and_then(|c| c.checked_mul(cols))
        .ok_or_else(|| DbarError::Format("shape overflow".into()))?;
    let payload = r.take(
        count
            .checked_mul(kind.width())
            .ok_or_else(|| DbarError::Format("shape overflow".into()))?,
    )?;
    let values: Vec<C64> = match kind {
        ScalarKind::F32 => payload
            .chunks_exact(8)
            .map(|c| {
                C64::new(
                    f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                    f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
                )
            })
            .collect(),
        ScalarKind::F64 => payload
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect(),
    };
    let bits = r.take(cells.div_ceil(8))?;
    if r.pos != bytes.len() {
        return Err(DbarError::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    let mask: Vec<bool> = (0..cells).map(|i| bits[i / 8] >> (i % 8) & 1 == 1).collect();
    let grid = ComplexGrid::from_parts(
        sidecar.domain.clone(),
        sidecar.origin.clone(),
        sidecar.spacing.clone(),
        shape,
        Some(mask),
    )
    .map_err(|e| DbarError::Format(format!("sidecar does not describe the lattice: {e}")))?;
    Ok((Field::new(Arc::new(grid), rows, cols, values)?, kind))
}

/// Path of the JSON sidecar belonging to a field file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_field(path: &Path, field: &Field, kind: ScalarKind) -> Result<()> {
    fs::write(path, encode(field, kind))?;
    let side = serde_json::to_string_pretty(&Sidecar::of(field.grid()))?;
    fs::write(sidecar_path(path), side + "\n")?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(Field, ScalarKind)> {
    let bytes = fs::read(path)?;
    let side: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    decode(&bytes, &side)
}

//! Flat binary grid files.
//!
//! Layout: an unsigned 64-bit little-endian length `L`, then `L` bytes of
//! UTF-8 JSON `{"dims":[nt,nlat,nlon],"times":[..],"lats":[..],"lons":[..],
//! "variable":"..","units":".."}`, then `nt·nlat·nlon` little-endian `f64`
//! values in time-major, longitude-fastest order. NaN marks a missing value.

use std::path::Path;

use pcrps_core::GridField;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    dims: [usize; 3],
    times: Vec<i64>,
    lats: Vec<f64>,
    lons: Vec<f64>,
    #[serde(default)]
    variable: String,
    #[serde(default)]
    units: String,
}

/// A grid field with its variable name and units.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatGrid {
    pub field: GridField,
    pub variable: String,
    pub units: String,
}

impl FlatGrid {
    pub fn new(field: GridField, variable: impl Into<String>, units: impl Into<String>) -> Self {
        Self {
            field,
            variable: variable.into(),
            units: units.into(),
        }
    }

    /// Decodes a file image; `path` is used in error messages only.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> CliResult<Self> {
        if bytes.len() < 8 {
            return Err(CliError::parse(
                path,
                "byte 0",
                "file shorter than the 8-byte header length",
            ));
        }
        let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let header_end = usize::try_from(header_len)
            .ok()
            .and_then(|l| l.checked_add(8))
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                CliError::parse(
                    path,
                    "byte 0",
                    format!("header length {header_len} exceeds file size"),
                )
            })?;
        let header: Header = serde_json::from_slice(&bytes[8..header_end])
            .map_err(|e| CliError::parse(path, "byte 8", format!("invalid header JSON: {e}")))?;

        let [nt, nlat, nlon] = header.dims;
        let expected = nt
            .checked_mul(nlat)
            .and_then(|v| v.checked_mul(nlon))
            .and_then(|v| v.checked_mul(8));
        let payload = &bytes[header_end..];
        if expected != Some(payload.len()) {
            return Err(CliError::parse(
                path,
                format!("byte {header_end}"),
                format!(
                    "payload has {} bytes, dims {:?} need {}",
                    payload.len(),
                    header.dims,
                    expected.map_or("an overflowing count".to_string(), |e| e.to_string())
                ),
            ));
        }
        if header.times.len() != nt || header.lats.len() != nlat || header.lons.len() != nlon {
            return Err(CliError::Validation(format!(
                "{}: dims {:?} disagree with {} times, {} lats, {} lons",
                path.display(),
                header.dims,
                header.times.len(),
                header.lats.len(),
                header.lons.len()
            )));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let field = GridField::new(header.times, header.lats, header.lons, values)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok(Self {
            field,
            variable: header.variable,
            units: header.units,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.field;
        let header = Header {
            dims: f.dims(),
            times: f.times().to_vec(),
            lats: f.lats().to_vec(),
            lons: f.lons().to_vec(),
            variable: self.variable.clone(),
            units: self.units.clone(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(8 + json.len() + 8 * f.values().len());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }
}

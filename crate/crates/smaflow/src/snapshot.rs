//! Binary state snapshots.
//!
//! Layout: a text header
//!
//! ```text
//! SMAFLOW1
//! n 32
//! t 0.125
//! fields v1 v2 phi
//! data
//! ```
//!
//! followed by the physical values of `v1`, `v2` and `phi`, each `n × n`
//! row-major (`x1` slow, `x2` fast) as little-endian `f64`. Physical values
//! are the canonical state representation, so a round trip is bit-exact.

use std::fs;
use std::path::Path;

use smaflow_core::{make_grid, Field, State, VectorField};

use crate::error::SnapshotError;
use crate::{Error, Result};

pub const MAGIC: &str = "SMAFLOW1";
const FIELDS: [&str; 3] = ["v1", "v2", "phi"];

pub fn encode(s: &State) -> Vec<u8> {
    let n = s.grid().n();
    let mut out = format!("{MAGIC}\nn {n}\nt {:?}\nfields {}\ndata\n", s.t, FIELDS.join(" ")).into_bytes();
    out.reserve(3 * n * n * 8);
    for field in [&s.v[0], &s.v[1], &s.phi] {
        for x in field.physical() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<State, SnapshotError> {
    let mut rest = bytes;
    let mut line = |what: &str| -> Result<&str, SnapshotError> {
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| SnapshotError::Header(format!("missing `{what}` line")))?;
        let text =
            std::str::from_utf8(&rest[..end]).map_err(|_| SnapshotError::Header(format!("`{what}` is not UTF-8")))?;
        rest = &rest[end + 1..];
        Ok(text)
    };
    if !bytes.starts_with(MAGIC.as_bytes()) || line("magic")? != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let n: usize = keyed(line("n")?, "n")?
        .parse()
        .map_err(|e| SnapshotError::Header(format!("bad grid size: {e}")))?;
    let t: f64 = keyed(line("t")?, "t")?
        .parse()
        .map_err(|e| SnapshotError::Header(format!("bad time: {e}")))?;
    let fields = keyed(line("fields")?, "fields")?;
    if fields.split_whitespace().ne(FIELDS) {
        return Err(SnapshotError::Header(format!("unsupported field list `{fields}`")));
    }
    if line("data")? != "data" {
        return Err(SnapshotError::Header("missing `data` line".into()));
    }
    let grid = make_grid(n).map_err(|e| SnapshotError::Header(e.to_string()))?;
    let expected = 3 * n * n * 8;
    if rest.len() != expected {
        return Err(SnapshotError::SizeMismatch {
            expected,
            actual: rest.len(),
        });
    }
    let mut fields = Vec::with_capacity(3);
    for (k, name) in FIELDS.iter().enumerate() {
        let chunk = &rest[k * n * n * 8..(k + 1) * n * n * 8];
        let values: Vec<f64> = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(SnapshotError::NonFinite { field: name, index });
        }
        fields.push(Field::from_physical(&grid, values));
    }
    let phi = fields.pop().expect("three fields");
    let v2 = fields.pop().expect("three fields");
    let v1 = fields.pop().expect("three fields");
    State::new(VectorField::new(v1, v2), phi, t).map_err(|e| SnapshotError::Header(e.to_string()))
}

fn keyed<'a>(line: &'a str, key: &str) -> Result<&'a str, SnapshotError> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| SnapshotError::Header(format!("expected `{key} ...`, found `{line}`")))
}

pub fn save_snapshot(s: &State, path: &Path) -> Result<()> {
    fs::write(path, encode(s)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<State> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|kind| Error::Snapshot {
        path: path.to_path_buf(),
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_plain_text() {
        let g = make_grid(8).unwrap();
        let bytes = encode(&State::equilibrium(&g, 1.0));
        assert!(bytes.starts_with(b"SMAFLOW1\nn 8\nt 0.0\nfields v1 v2 phi\ndata\n"));
        assert_eq!(bytes.len(), 41 + 3 * 64 * 8);
    }

    #[test]
    fn extra_payload_is_a_size_mismatch() {
        let g = make_grid(8).unwrap();
        let mut bytes = encode(&State::equilibrium(&g, 1.0));
        bytes.push(0);
        assert!(matches!(decode(&bytes), Err(SnapshotError::SizeMismatch { .. })));
    }
}

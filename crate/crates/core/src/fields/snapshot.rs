//! Field snapshot file format `SCEFLD v1`.
//!
//! Layout: one ASCII header line
//!
//! ```text
//! SCEFLD v1 <dim> <N> <L> <t>\n
//! ```
//!
//! followed by the raw samples of each component in row-major order as
//! little-endian 64-bit floats. The component count is implied by the payload
//! size; a state snapshot stores density first and then the velocity
//! components. The decoder validates every header token and never trusts the
//! input for allocations beyond the buffer it was handed.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::Grid;

const MAGIC: &str = "SCEFLD";
const VERSION: &str = "v1";
const MAX_HEADER_LEN: usize = 256;
const MAX_COMPONENTS: usize = 16;

/// A decoded snapshot: grid metadata, time stamp and raw components.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub components: Vec<Vec<f64>>,
}

/// Serialize components sampled on `grid` at time `t`.
pub fn write_snapshot(w: &mut impl Write, grid: Grid, time: f64, components: &[&[f64]]) -> Result<()> {
    if components.is_empty() || components.len() > MAX_COMPONENTS {
        return Err(Error::Snapshot(format!(
            "component count {} outside 1..={MAX_COMPONENTS}",
            components.len()
        )));
    }
    for c in components {
        if c.len() != grid.node_count() {
            return Err(Error::Snapshot(format!(
                "component has {} samples, grid has {} nodes",
                c.len(),
                grid.node_count()
            )));
        }
    }
    writeln!(
        w,
        "{MAGIC} {VERSION} {} {} {:.16e} {:.16e}",
        grid.dim(),
        grid.points_per_axis(),
        grid.length(),
        time
    )?;
    for c in components {
        for &x in *c {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_snapshot_file(path: &Path, grid: Grid, time: f64, components: &[&[f64]]) -> Result<()> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, grid, time, components)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

/// Decode a snapshot from raw bytes.
pub fn read_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let nl = bytes
        .iter()
        .take(MAX_HEADER_LEN)
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
    let mut tok = header.split_ascii_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(bad("bad magic"));
    }
    if tok.next() != Some(VERSION) {
        return Err(bad("unsupported version"));
    }
    let dim: usize = tok
        .next()
        .ok_or_else(|| bad("missing dim"))?
        .parse()
        .map_err(|_| bad("dim is not an integer"))?;
    let n: usize = tok
        .next()
        .ok_or_else(|| bad("missing N"))?
        .parse()
        .map_err(|_| bad("N is not an integer"))?;
    let len: f64 = tok
        .next()
        .ok_or_else(|| bad("missing L"))?
        .parse()
        .map_err(|_| bad("L is not a number"))?;
    let time: f64 = tok
        .next()
        .ok_or_else(|| bad("missing t"))?
        .parse()
        .map_err(|_| bad("t is not a number"))?;
    if tok.next().is_some() {
        return Err(bad("trailing header tokens"));
    }
    if n > 1 << 16 {
        return Err(bad("N too large"));
    }
    let grid = Grid::new(dim, n, len).map_err(|e| bad(format!("bad grid: {e}")))?;
    if !time.is_finite() {
        return Err(bad("non-finite time"));
    }

    let payload = &bytes[nl + 1..];
    let nodes = grid.node_count();
    let comp_bytes = nodes
        .checked_mul(8)
        .ok_or_else(|| bad("node count overflow"))?;
    if payload.is_empty() || payload.len() % comp_bytes != 0 {
        return Err(bad("payload size is not a whole number of components"));
    }
    let ncomp = payload.len() / comp_bytes;
    if ncomp > MAX_COMPONENTS {
        return Err(bad("too many components"));
    }
    let mut components = Vec::with_capacity(ncomp);
    for c in 0..ncomp {
        let mut data = Vec::with_capacity(nodes);
        let base = c * comp_bytes;
        for i in 0..nodes {
            let off = base + i * 8;
            let raw: [u8; 8] = payload[off..off + 8].try_into().unwrap();
            data.push(f64::from_le_bytes(raw));
        }
        components.push(data);
    }
    Ok(Snapshot {
        grid,
        time,
        components,
    })
}

pub fn read_snapshot_file(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path)?;
    read_snapshot(&bytes)
}

//! Binary index snapshot so repeated runs can skip re-indexing.
//!
//! Layout (little endian):
//!
//! ```text
//! magic    8 bytes  "MGMINDEX"
//! version  u32      1
//! graph    u64 length + JSON {"nodes": [...], "edges": [...]}
//! labels   u32      label alphabet size
//! types    u32      type alphabet size
//! rows     u64      row count, then per row: first u64, second u64, words x u64
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BitSignatureMatrix, SignatureLayout, TargetIndex};
use crate::error::SnapshotError;
use crate::graph::{Edge, Multigraph, Node};

pub const MAGIC: &[u8; 8] = b"MGMINDEX";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GraphBlob {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, SnapshotError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, SnapshotError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn write_snapshot<W: Write>(idx: &TargetIndex, mut w: W) -> Result<(), SnapshotError> {
    let g = idx.graph();
    let blob = serde_json::to_vec(&GraphBlob {
        nodes: g.nodes().to_vec(),
        edges: g.edges().to_vec(),
    })
    .map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
    let m = idx.bit_matrix();
    let layout = m.layout();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(blob.len() as u64).to_le_bytes())?;
    w.write_all(&blob)?;
    w.write_all(&(layout.labels as u32).to_le_bytes())?;
    w.write_all(&(layout.types as u32).to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    for (i, &(a, b)) in m.keys().iter().enumerate() {
        w.write_all(&(a as u64).to_le_bytes())?;
        w.write_all(&(b as u64).to_le_bytes())?;
        for word in m.row_at(i) {
            w.write_all(&word.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<TargetIndex, SnapshotError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let len = read_u64(&mut r)? as usize;
    let mut blob = vec![0u8; len];
    r.read_exact(&mut blob)?;
    let blob: GraphBlob =
        serde_json::from_slice(&blob).map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
    let graph = Multigraph::from_parts(blob.nodes, blob.edges)
        .map_err(|e| SnapshotError::Corrupt(e.to_string()))?;

    let layout = SignatureLayout::new(read_u32(&mut r)? as usize, read_u32(&mut r)? as usize);
    if layout != SignatureLayout::of(&graph) {
        return Err(SnapshotError::Corrupt(
            "signature layout does not match graph alphabets".into(),
        ));
    }
    let rows = read_u64(&mut r)? as usize;
    let words = layout.words();
    let mut keys = Vec::with_capacity(rows);
    let mut bits = Vec::with_capacity(rows * words);
    for _ in 0..rows {
        let a = read_u64(&mut r)? as usize;
        let b = read_u64(&mut r)? as usize;
        if a > b || b >= graph.node_count() {
            return Err(SnapshotError::Corrupt(format!("bad row key ({a}, {b})")));
        }
        keys.push((a, b));
        for _ in 0..words {
            bits.push(read_u64(&mut r)?);
        }
    }
    let matrix = BitSignatureMatrix::from_rows(layout, keys, bits);
    Ok(TargetIndex::with_bit_matrix(graph, matrix))
}

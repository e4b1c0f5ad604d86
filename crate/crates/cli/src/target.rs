use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use mgm_core::index::snapshot::{read_snapshot, write_snapshot};
use mgm_core::io::{load_graph, save_graph};
use mgm_core::{Multigraph, TargetIndex};

use crate::Failure;

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";

/// Where a target comes from: a directory holding `nodes.csv` and
/// `edges.csv`, or an index snapshot file.
#[derive(Debug, Clone)]
pub enum TargetSource {
    Csv { nodes: PathBuf, edges: PathBuf },
    Snapshot(PathBuf),
}

impl TargetSource {
    pub fn resolve(path: &Path) -> Result<Self, Failure> {
        if path.is_dir() {
            Ok(TargetSource::Csv {
                nodes: path.join(NODES_FILE),
                edges: path.join(EDGES_FILE),
            })
        } else if path.is_file() {
            Ok(TargetSource::Snapshot(path.to_path_buf()))
        } else {
            Err(Failure::load(format!("target {} does not exist", path.display())))
        }
    }
}

pub struct LoadedTarget {
    pub index: TargetIndex,
    pub read_secs: f64,
    pub index_secs: f64,
}

pub fn read_graph(src: &TargetSource) -> Result<Multigraph, Failure> {
    match src {
        TargetSource::Csv { nodes, edges } => load_graph(nodes, edges).map_err(|e| Failure::load(e.to_string())),
        TargetSource::Snapshot(p) => Ok(read_index(p)?.graph().clone()),
    }
}

fn read_index(p: &Path) -> Result<TargetIndex, Failure> {
    let f = File::open(p).map_err(|e| Failure::load(format!("{}: {e}", p.display())))?;
    read_snapshot(BufReader::new(f)).map_err(|e| Failure::load(format!("{}: {e}", p.display())))
}

pub fn load_target(src: &TargetSource) -> Result<LoadedTarget, Failure> {
    let t = Instant::now();
    match src {
        TargetSource::Csv { .. } => {
            let g = read_graph(src)?;
            let read_secs = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let index = TargetIndex::build(g);
            Ok(LoadedTarget {
                index,
                read_secs,
                index_secs: t.elapsed().as_secs_f64(),
            })
        }
        TargetSource::Snapshot(p) => {
            let index = read_index(p)?;
            Ok(LoadedTarget {
                index,
                read_secs: t.elapsed().as_secs_f64(),
                index_secs: 0.0,
            })
        }
    }
}

pub fn save_index(idx: &TargetIndex, out: &Path) -> Result<(), Failure> {
    let f = File::create(out).map_err(|e| Failure::load(format!("{}: {e}", out.display())))?;
    write_snapshot(idx, BufWriter::new(f)).map_err(|e| Failure::load(format!("{}: {e}", out.display())))
}

pub fn save_csv(g: &Multigraph, dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::load(format!("{}: {e}", dir.display())))?;
    save_graph(g, &dir.join(NODES_FILE), &dir.join(EDGES_FILE)).map_err(|e| Failure::load(e.to_string()))
}

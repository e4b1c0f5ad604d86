//! Canonical CSV interchange format.
//!
//! Nodes: `id,labels,properties` with `;`-separated labels and a JSON object of
//! properties. Edges: `id,src,dst,type,properties`. Both files need a header row.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::GraphError;
use crate::graph::{GraphBuilder, Multigraph, Properties, PropertyValue, ORIG_ID, UNLABELED};

fn load_err(file: &Path, line: u64, message: impl Into<String>) -> GraphError {
    GraphError::Load {
        file: file.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_properties(raw: &str, file: &Path, line: u64) -> Result<Properties, GraphError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Properties::new());
    }
    let value: serde_json::Value = serde_json::from_str(raw)
        .map_err(|e| load_err(file, line, format!("bad properties JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| load_err(file, line, "properties must be a JSON object"))?;
    obj.iter()
        .map(|(k, v)| {
            PropertyValue::from_json(v)
                .map(|pv| (k.clone(), pv))
                .ok_or_else(|| load_err(file, line, format!("property {k:?} is not a scalar")))
        })
        .collect()
}

fn parse_id(raw: &str, what: &str, file: &Path, line: u64) -> Result<u64, GraphError> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| load_err(file, line, format!("{what} {raw:?} is not a non-negative integer")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(r)
}

/// Reads the node and edge CSV files into a [`Multigraph`].
pub fn load_graph(nodes_file: &Path, edges_file: &Path) -> Result<Multigraph, GraphError> {
    let open = |p: &Path| {
        File::open(p).map_err(|source| GraphError::Io {
            file: p.to_path_buf(),
            source,
        })
    };
    load_graph_from(open(nodes_file)?, nodes_file, open(edges_file)?, edges_file)
}

/// Like [`load_graph`] over arbitrary readers; the paths only label error messages.
pub fn load_graph_from<R1: Read, R2: Read>(
    nodes: R1,
    nodes_name: &Path,
    edges: R2,
    edges_name: &Path,
) -> Result<Multigraph, GraphError> {
    let mut builder = GraphBuilder::new();
    let mut seen_nodes = BTreeSet::new();
    for (i, rec) in reader(nodes).records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| load_err(nodes_name, line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(load_err(
                nodes_name,
                line,
                format!("expected 3 columns, found {}", rec.len()),
            ));
        }
        let id = parse_id(&rec[0], "node id", nodes_name, line)?;
        if !seen_nodes.insert(id) {
            return Err(load_err(nodes_name, line, format!("duplicate node id {id}")));
        }
        let labels: Vec<String> = rec[1]
            .split(';')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        let props = parse_properties(&rec[2], nodes_name, line)?;
        builder.add_node(id, labels, props);
    }

    let mut seen_edges = BTreeSet::new();
    for (i, rec) in reader(edges).records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| load_err(edges_name, line, e.to_string()))?;
        if rec.len() != 5 {
            return Err(load_err(
                edges_name,
                line,
                format!("expected 5 columns, found {}", rec.len()),
            ));
        }
        let id = parse_id(&rec[0], "edge id", edges_name, line)?;
        if !seen_edges.insert(id) {
            return Err(load_err(edges_name, line, format!("duplicate edge id {id}")));
        }
        let src = parse_id(&rec[1], "source id", edges_name, line)?;
        let dst = parse_id(&rec[2], "destination id", edges_name, line)?;
        for end in [src, dst] {
            if !seen_nodes.contains(&end) {
                return Err(load_err(edges_name, line, format!("unknown node id {end}")));
            }
        }
        let etype = rec[3].trim();
        if etype.is_empty() {
            return Err(load_err(edges_name, line, "edge type is empty"));
        }
        let props = parse_properties(&rec[4], edges_name, line)?;
        builder.add_edge(id, src, dst, etype, props);
    }
    builder.build()
}

fn props_json(props: &Properties) -> String {
    let map: serde_json::Map<String, serde_json::Value> = props
        .iter()
        .filter(|(k, _)| k.as_str() != ORIG_ID)
        .map(|(k, v)| (k.clone(), v.to_json()))
        .collect();
    serde_json::Value::Object(map).to_string()
}

/// Writes `g` in the canonical CSV format, restoring input ids.
pub fn write_graph<W1: Write, W2: Write>(
    g: &Multigraph,
    nodes_out: W1,
    edges_out: W2,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(nodes_out);
    w.write_record(["id", "labels", "properties"])?;
    for n in g.nodes() {
        let labels: Vec<&str> = n
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| *l != UNLABELED)
            .collect();
        w.write_record([
            g.original_node_id(n.id).to_string(),
            labels.join(";"),
            props_json(&n.properties),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(edges_out);
    w.write_record(["id", "src", "dst", "type", "properties"])?;
    for e in g.edges() {
        w.write_record([
            g.original_edge_id(e.id).to_string(),
            g.original_node_id(e.src).to_string(),
            g.original_node_id(e.dst).to_string(),
            e.etype.clone(),
            props_json(&e.properties),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `g` to the given node and edge files.
pub fn save_graph(g: &Multigraph, nodes_path: &Path, edges_path: &Path) -> Result<(), GraphError> {
    let create = |p: &Path| {
        File::create(p).map_err(|source| GraphError::Io {
            file: p.to_path_buf(),
            source,
        })
    };
    write_graph(g, create(nodes_path)?, create(edges_path)?)
        .map_err(|e| GraphError::Invalid(format!("csv write failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Direction;

    fn load(nodes: &str, edges: &str) -> Result<Multigraph, GraphError> {
        load_graph_from(
            nodes.as_bytes(),
            Path::new("nodes.csv"),
            edges.as_bytes(),
            Path::new("edges.csv"),
        )
    }

    #[test]
    fn single_node_no_edges() {
        let g = load("id,labels,properties\n0,a,{}\n", "id,src,dst,type,properties\n").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(g.neighbors(0).is_empty());
    }

    #[test]
    fn parallel_edges_and_multi_labels() {
        let g = load(
            "id,labels,properties\n0,red;yellow,\"{\"\"name\"\":\"\"x\"\"}\"\n1,red,{}\n",
            "id,src,dst,type,properties\n0,0,1,a,{}\n1,0,1,a,\"{\"\"year\"\":2007}\"\n",
        )
        .unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(
            g.node(0).labels,
            BTreeSet::from(["red".to_string(), "yellow".to_string()])
        );
        assert_eq!(
            g.edge(1).properties.get("year"),
            Some(&PropertyValue::Int(2007))
        );
        assert_eq!(g.t_degree(1, "a", Direction::In).unwrap(), 2);
    }

    #[test]
    fn errors_name_file_and_line() {
        let err = load("id,labels,properties\n0,a,{}\nx,b,{}\n", "id,src,dst,type,properties\n")
            .unwrap_err();
        assert_eq!(err.to_string(), "nodes.csv:3: node id \"x\" is not a non-negative integer");

        let err = load(
            "id,labels,properties\n0,a,{}\n",
            "id,src,dst,type,properties\n0,0,9,r,{}\n",
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "edges.csv:2: unknown node id 9");

        let err = load("id,labels,properties\n0,a\n", "id,src,dst,type,properties\n").unwrap_err();
        assert!(err.to_string().starts_with("nodes.csv:2: expected 3 columns"));

        let err = load("id,labels,properties\n0,a,{}\n0,b,{}\n", "id,src,dst,type,properties\n")
            .unwrap_err();
        assert_eq!(err.to_string(), "nodes.csv:3: duplicate node id 0");
    }

    #[test]
    fn write_then_reload_is_identical() {
        let g = load(
            "id,labels,properties\n10,red;yellow,\"{\"\"s\"\":\"\"a,b\"\",\"\"f\"\":1.5,\"\"t\"\":true}\"\n3,,{}\n",
            "id,src,dst,type,properties\n8,10,3,a,{}\n2,3,3,b,\"{\"\"w\"\":-4}\"\n",
        )
        .unwrap();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        write_graph(&g, &mut nodes, &mut edges).unwrap();
        let g2 = load(
            std::str::from_utf8(&nodes).unwrap(),
            std::str::from_utf8(&edges).unwrap(),
        )
        .unwrap();
        assert_eq!(g, g2);
    }
}

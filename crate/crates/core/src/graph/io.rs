//! `TWG1` text format and the JSON layout sidecar.
//!
//! ```text
//! TWG1 <vertex_count> <seed>
//! 0: 1 1 0
//! 1: 0 0
//! ```
//! Each vertex line lists its neighbor bag in stored order; a self-loop
//! appears once per loop.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::layout::{InstanceLayout, LayoutDocument};
use super::{Instance, MultiGraph};
use crate::error::{Error, Result};

const MAGIC: &str = "TWG1";

pub fn write_graph<W: Write>(mut w: W, g: &MultiGraph, seed: u64) -> Result<()> {
    writeln!(w, "{MAGIC} {} {seed}", g.vertex_count())?;
    let mut line = String::new();
    for (v, bag) in g.bags().iter().enumerate() {
        line.clear();
        let _ = write!(line, "{v}:");
        for u in bag {
            let _ = write!(line, " {u}");
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a `TWG1` document, returning the graph and its recorded seed.
pub fn read_graph<R: BufRead>(r: R) -> Result<(MultiGraph, u64)> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty input, expected TWG1 header".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad_header = |message: String| Error::Parse { line: 1, message };
    if parts.len() != 3 || parts[0] != MAGIC {
        return Err(bad_header(format!("expected `{MAGIC} <vertex_count> <seed>`, found `{header}`")));
    }
    let n: usize = parts[1]
        .parse()
        .map_err(|_| bad_header(format!("bad vertex count `{}`", parts[1])))?;
    let seed: u64 = parts[2]
        .parse()
        .map_err(|_| bad_header(format!("bad seed `{}`", parts[2])))?;

    let mut adjacency = Vec::with_capacity(n);
    for v in 0..n {
        let line_no = v + 2;
        let line = lines.next().transpose()?.ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unexpected end of input, expected the line for vertex {v}"),
        })?;
        let (idx, rest) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "missing `:` after vertex index".into(),
        })?;
        if idx.trim().parse::<usize>().ok() != Some(v) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected vertex index {v}, found `{}`", idx.trim()),
            });
        }
        let bag = rest
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad neighbor index `{tok}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(&u) = bag.iter().find(|&&u| u >= n) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("neighbor {u} out of range 0..{n}"),
            });
        }
        adjacency.push(bag);
    }
    for (i, extra) in lines.enumerate() {
        if !extra?.trim().is_empty() {
            return Err(Error::Parse {
                line: n + 2 + i,
                message: "trailing content after the last vertex".into(),
            });
        }
    }
    Ok((MultiGraph::from_adjacency(adjacency)?, seed))
}

/// Path of the layout sidecar for a graph file.
pub fn layout_path(graph_path: &Path) -> PathBuf {
    let mut s = graph_path.as_os_str().to_owned();
    s.push(".layout.json");
    PathBuf::from(s)
}

pub fn write_layout<W: Write>(w: W, layout: &InstanceLayout) -> Result<()> {
    let mut w = w;
    serde_json::to_writer(&mut w, &layout.to_document())?;
    w.flush()?;
    Ok(())
}

pub fn read_layout<R: std::io::Read>(r: R) -> Result<InstanceLayout> {
    let doc: LayoutDocument = serde_json::from_reader(r)?;
    InstanceLayout::from_document(doc)
}

/// Writes `path` in `TWG1` form and the layout to `<path>.layout.json`.
pub fn save_instance(path: &Path, instance: &Instance) -> Result<()> {
    write_graph(
        BufWriter::new(File::create(path)?),
        &instance.graph,
        instance.layout.seed(),
    )?;
    write_layout(BufWriter::new(File::create(layout_path(path))?), &instance.layout)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let (graph, _) = read_graph(BufReader::new(File::open(path)?))?;
    let layout = read_layout(BufReader::new(File::open(layout_path(path))?))?;
    if layout.vertex_count() != graph.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "layout has {} vertices, graph has {}",
            layout.vertex_count(),
            graph.vertex_count()
        )));
    }
    Ok(Instance { graph, layout })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 0);
        g.add_edge(0, 1);
        g.add_edge(1, 0);
        g.add_edge(2, 1);
        let mut buf = Vec::new();
        write_graph(&mut buf, &g, 42).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "TWG1 3 42\n0: 0 1 1\n1: 0 0 2\n2: 1\n");
        let (h, seed) = read_graph(buf.as_slice()).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(g, h);
    }

    #[test]
    fn truncated_names_line() {
        let err = read_graph("TWG1 3 0\n0: 1\n1: 0\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        let err = read_graph("TWG2 1 0\n0:\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_graph("TWG1 2 0\n0: 1\n1: x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn asymmetric_file_rejected() {
        assert!(read_graph("TWG1 2 0\n0: 1\n1:\n".as_bytes()).is_err());
    }
}

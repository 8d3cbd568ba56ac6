//! Edge-list and node-attribute file ingestion.
//!
//! Edge lists are plain text, one edge per line, endpoints separated by
//! whitespace or commas, `#` starting a comment line. Node ids may be
//! arbitrary tokens; they are compacted to `0..n-1` in first-appearance
//! order and the original tokens are kept for reporting. Features and
//! labels arrive as CSV keyed by the compacted node id.

use super::{DropStats, Features, Graph, MAX_FEATURES};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// Split on commas if the line contains one, otherwise whitespace.
    #[default]
    Auto,
    Whitespace,
    Comma,
}

/// A parsed edge list: the graph, the original node tokens indexed by
/// compacted id, and the number of dropped self-loops/duplicates.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub original_ids: Vec<String>,
    pub dropped: DropStats,
}

pub fn load_edge_list(path: impl AsRef<Path>, format: EdgeListFormat) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_edge_list(&text, format)
}

fn parse_edge_list(text: &str, format: EdgeListFormat) -> Result<LoadedGraph> {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut original_ids: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();

    let mut intern = |tok: &str, original_ids: &mut Vec<String>| -> u32 {
        *ids.entry(tok.to_string()).or_insert_with(|| {
            original_ids.push(tok.to_string());
            (original_ids.len() - 1) as u32
        })
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let use_comma = match format {
            EdgeListFormat::Whitespace => false,
            EdgeListFormat::Comma => true,
            EdgeListFormat::Auto => line.contains(','),
        };
        let toks: Vec<&str> = if use_comma {
            line.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect()
        } else {
            line.split_whitespace().collect()
        };
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected two node ids, found {}", toks.len()),
            });
        }
        let u = intern(toks[0], &mut original_ids);
        let v = intern(toks[1], &mut original_ids);
        edges.push((u, v));
    }

    if edges.is_empty() {
        return Err(Error::invalid("edge list contains no edges"));
    }

    let (graph, dropped) = Graph::new_counting(original_ids.len(), edges)?;
    Ok(LoadedGraph {
        graph,
        original_ids,
        dropped,
    })
}

/// Write the edge set as "u v" lines, ordered so that node ids make their
/// first appearance in increasing order. Reloading such a file compacts
/// ids to the identity mapping, which makes save-then-load an exact fixed
/// point for any graph that itself came out of the loader. Isolated nodes
/// cannot be represented by an edge list and are dropped.
pub fn save_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = graph.node_count();
    let mut appeared = vec![false; n];
    let mut emitted: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    let mut out = String::new();
    let mut emit = |u: u32, v: u32, out: &mut String, appeared: &mut [bool]| {
        out.push_str(&format!("{u} {v}\n"));
        emitted.insert((u.min(v), u.max(v)));
        appeared[u as usize] = true;
        appeared[v as usize] = true;
    };
    // introduction pass: each unseen node enters via its smallest seen
    // neighbor when it has one, otherwise jointly with its smallest
    // (larger) neighbor
    for k in 0..n {
        if appeared[k] || graph.degree(k) == 0 {
            continue;
        }
        let seen_nbr = graph
            .neighbors(k)
            .iter()
            .copied()
            .filter(|&j| appeared[j as usize])
            .min();
        match seen_nbr {
            Some(j) => emit(j, k as u32, &mut out, &mut appeared),
            None => {
                let w = *graph.neighbors(k).first().expect("degree checked above");
                emit(k as u32, w, &mut out, &mut appeared);
            }
        }
    }
    // remaining edges in sorted order; every endpoint has appeared
    for (u, v) in graph.edges() {
        if !emitted.contains(&(u, v)) {
            out.push_str(&format!("{u} {v}\n"));
        }
    }
    let mut f =
        fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Features CSV: header `node,f0,...,f{d-1}`, one row per node, entries 0/1.
/// Every node id in `0..n-1` must appear exactly once.
pub fn load_features_csv(path: impl AsRef<Path>, n: usize) -> Result<Features> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let header_len = rdr
        .headers()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        .len();
    if header_len < 2 {
        return Err(Error::invalid("features CSV needs node column plus features"));
    }
    let d = header_len - 1;
    if d > MAX_FEATURES {
        return Err(Error::invalid(format!(
            "features CSV has {d} feature columns; pre-select at most {MAX_FEATURES}"
        )));
    }
    let mut rows = vec![u8::MAX; n * d];
    let mut seen = vec![false; n];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        let node: usize = rec[0].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: format!("bad node id '{}'", &rec[0]),
        })?;
        if node >= n {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("node id {node} out of range 0..{n}"),
            });
        }
        if seen[node] {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("duplicate row for node {node}"),
            });
        }
        seen[node] = true;
        for j in 0..d {
            let bit: u8 = rec[j + 1].parse().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("bad feature value '{}'", &rec[j + 1]),
            })?;
            rows[node * d + j] = bit;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!("features CSV missing node {missing}")));
    }
    Features::new(n, d, rows)
}

/// Labels CSV: header `node,label`, one row per node.
pub fn load_labels_csv(path: impl AsRef<Path>, n: usize) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let mut labels = vec![u32::MAX; n];
    let mut seen = vec![false; n];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let node: usize = rec[0].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: format!("bad node id '{}'", &rec[0]),
        })?;
        if node >= n || seen[node] {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("node id {node} out of range or duplicated"),
            });
        }
        seen[node] = true;
        labels[node] = rec[1].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: format!("bad label '{}'", &rec[1]),
        })?;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!("labels CSV missing node {missing}")));
    }
    Ok(labels)
}

//! Text formats: edge lists, load CSVs, bit traces and queue series.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::load::{LoadStats, LoadVector};
use crate::netgen::{GenParams, Graph};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("nothing to write to {0}")]
    Empty(PathBuf),
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Header metadata of an edge list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeListHeader {
    pub n_vertices: Option<usize>,
    pub n_edges: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

impl EdgeListHeader {
    pub fn from_params(p: &GenParams) -> Self {
        Self { n_vertices: Some(p.n_vertices()), n_edges: Some(p.n_edges()), alpha: Some(p.alpha()), seed: Some(p.seed()) }
    }
}

/// `# key=value` header lines, then one `u v` line per edge with `u < v`.
/// `N` and `M` always reflect the graph itself.
pub fn format_edge_list(g: &Graph, header: &EdgeListHeader) -> String {
    let mut out = String::new();
    out.push_str("# static-model edge list\n");
    let _ = writeln!(out, "# N={}", g.n_vertices());
    let _ = writeln!(out, "# M={}", g.n_edges());
    if let Some(alpha) = header.alpha {
        let _ = writeln!(out, "# alpha={alpha}");
    }
    if let Some(seed) = header.seed {
        let _ = writeln!(out, "# seed={seed}");
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<(Graph, EdgeListHeader), IoError> {
    let mut header = EdgeListHeader::default();
    let mut edges = Vec::new();
    let mut max_index = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| IoError::Format { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                let bad = |_| err(format!("bad value {value:?} for {}", key.trim()));
                match key.trim() {
                    "N" => header.n_vertices = Some(value.parse().map_err(bad)?),
                    "M" => header.n_edges = Some(value.parse().map_err(bad)?),
                    "alpha" => header.alpha = Some(value.parse().map_err(|_| err(format!("bad alpha {value:?}")))?),
                    "seed" => header.seed = Some(value.parse().map_err(|_| err(format!("bad seed {value:?}")))?),
                    _ => {}
                }
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `u v`, got {line:?}")));
        };
        let u: usize = a.parse().map_err(|_| err(format!("bad vertex {a:?}")))?;
        let v: usize = b.parse().map_err(|_| err(format!("bad vertex {b:?}")))?;
        max_index = max_index.max(Some(u.max(v)));
        edges.push((u, v));
    }
    let n = header.n_vertices.unwrap_or(max_index.map_or(0, |m| m + 1));
    if let Some(m) = header.n_edges {
        if m != edges.len() {
            return Err(IoError::Format { line: 0, msg: format!("header says M={m} but {} edges listed", edges.len()) });
        }
    }
    let g = Graph::from_edges(n, edges).map_err(|e| IoError::Format { line: 0, msg: e.to_string() })?;
    Ok((g, header))
}

/// `vertex,load` rows followed by a `# mean=...` footer.
pub fn format_load_csv(lv: &LoadVector, stats: Option<&LoadStats>) -> String {
    let mut out = String::from("vertex,load\n");
    for (v, l) in lv.values().iter().enumerate() {
        let _ = writeln!(out, "{v},{l}");
    }
    if let Some(s) = stats {
        let _ = writeln!(
            out,
            "# mean={},std={},normalized_std={},max={},argmax_vertex={}",
            s.mean, s.std, s.normalized_std, s.max, s.argmax_vertex
        );
    }
    out
}

/// One `0`/`1` per line.
pub fn format_bits_raw(bits: &[u8]) -> String {
    let mut out = String::with_capacity(bits.len() * 2);
    for &b in bits {
        out.push(if b != 0 { '1' } else { '0' });
        out.push('\n');
    }
    out
}

/// Run-length encoding, e.g. `Off:12 On:3 Off:40`.
pub fn format_bits_rle(bits: &[u8]) -> String {
    let mut runs: Vec<String> = Vec::new();
    let mut iter = bits.iter().map(|&b| b != 0).peekable();
    while let Some(state) = iter.next() {
        let mut len = 1;
        while iter.next_if_eq(&state).is_some() {
            len += 1;
        }
        runs.push(format!("{}:{len}", if state { "On" } else { "Off" }));
    }
    let mut out = runs.join(" ");
    out.push('\n');
    out
}

pub fn parse_bits_rle(text: &str) -> Result<Vec<u8>, IoError> {
    let mut bits = Vec::new();
    for token in text.split_whitespace() {
        let bad = || IoError::Format { line: 1, msg: format!("bad run {token:?}") };
        let (state, len) = token.split_once(':').ok_or_else(bad)?;
        let bit = match state {
            "On" => 1,
            "Off" => 0,
            _ => return Err(bad()),
        };
        let len: usize = len.parse().map_err(|_| bad())?;
        bits.extend(std::iter::repeat_n(bit, len));
    }
    Ok(bits)
}

/// `step,total_queued`, steps numbered from 1 within the window.
pub fn format_queue_series(series: &[u64]) -> String {
    let mut out = String::from("step,total_queued\n");
    for (i, q) in series.iter().enumerate() {
        let _ = writeln!(out, "{},{q}", i + 1);
    }
    out
}

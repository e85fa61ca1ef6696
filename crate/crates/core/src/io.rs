//! Text formats: undirected edge lists and numeric CSV tables.

use std::io::{BufRead, Read, Write};

use ndarray::Array2;

use crate::error::{GmError, Result};
use crate::linalg::AdjacencyMatrix;

/// Parses an edge list: one `u v` pair per line, 0-indexed. Blank lines and
/// lines starting with `#` are skipped. When `n` is `None` the vertex count is
/// one more than the largest index seen.
pub fn read_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let mut edges = Vec::new();
    let mut max_index = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next = |name: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| GmError::Parse { line: lineno, msg: format!("missing {name}") })?
                .parse::<usize>()
                .map_err(|e| GmError::Parse { line: lineno, msg: e.to_string() })
        };
        let u = next("first endpoint")?;
        let v = next("second endpoint")?;
        if fields.next().is_some() {
            return Err(GmError::Parse { line: lineno, msg: "expected exactly two fields".into() });
        }
        if u == v {
            return Err(GmError::Parse { line: lineno, msg: format!("self-loop at {u}") });
        }
        max_index = Some(max_index.unwrap_or(0).max(u).max(v));
        edges.push((u, v));
    }
    let n = match (n, max_index) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    AdjacencyMatrix::from_edges(n, &edges)
}

pub fn write_edge_list<W: Write>(mut writer: W, graph: &AdjacencyMatrix) -> Result<()> {
    for (u, v) in graph.edges() {
        writeln!(writer, "{u} {v}")?;
    }
    Ok(())
}

/// Reads a numeric table with a header row into a dense matrix.
pub fn read_csv_matrix<R: Read>(reader: R) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| GmError::Parse { line, msg: e.to_string() })?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(GmError::Parse { line, msg: "ragged row".into() });
        }
        for cell in record.iter() {
            let x: f64 = cell.parse().map_err(|_| GmError::Parse {
                line,
                msg: format!("not a number: {cell:?}"),
            })?;
            data.push(x);
        }
    }
    let cols = cols.unwrap_or(0);
    let rows = if cols == 0 { 0 } else { data.len() / cols };
    Ok(Array2::from_shape_vec((rows, cols), data).expect("row lengths checked"))
}

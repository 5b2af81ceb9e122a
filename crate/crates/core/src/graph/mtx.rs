//! Matrix Market (coordinate, real, symmetric) ingestion of SDD matrices and
//! export of graph Laplacians.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Diagonal surplus below this fraction of the row's off-diagonal absolute
/// sum is treated as zero.
pub const SDD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MtxImport {
    pub graph: WeightedGraph,
    /// Positive off-diagonal entries dropped from the edge set (counted once
    /// per unordered pair).
    pub dropped_positive: usize,
    /// Rows whose diagonal fell short of the off-diagonal absolute sum by
    /// more than the tolerance; their surplus was clamped to zero.
    pub non_sdd_rows: usize,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MtxImport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

pub fn parse_matrix_market<R: Read>(reader: R) -> Result<MtxImport> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty file"))?
        .map_err(|e| bad(e.to_string()))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(bad(format!("unrecognized header: {header}")));
    }
    if tokens[2] != "coordinate" {
        return Err(bad(format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(bad(format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(bad(format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut read = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let lineno = lineno + 2;
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(bad(format!("line {lineno}: expected size line")));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| bad(format!("line {lineno}: bad integer '{s}'")))
                };
                let (r, c, nnz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if r != c {
                    return Err(bad(format!("matrix is {r}x{c}, not square")));
                }
                size = Some((r, c, nnz));
            }
            Some((n, _, _)) => {
                if fields.len() < 3 {
                    return Err(bad(format!("line {lineno}: expected 'row col value'")));
                }
                let idx = |s: &str| -> Result<usize> {
                    let i: usize = s
                        .parse()
                        .map_err(|_| bad(format!("line {lineno}: bad index '{s}'")))?;
                    if i == 0 || i > n {
                        return Err(bad(format!("line {lineno}: index {i} outside 1..={n}")));
                    }
                    Ok(i - 1)
                };
                let (i, j) = (idx(fields[0])?, idx(fields[1])?);
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| bad(format!("line {lineno}: bad value '{}'", fields[2])))?;
                let key = if symmetric {
                    (i.max(j), i.min(j))
                } else {
                    (i, j)
                };
                *entries.entry(key).or_insert(0.0) += v;
                read += 1;
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| bad("missing size line"))?;
    if read != nnz {
        return Err(bad(format!("expected {nnz} entries, found {read}")));
    }

    let mut diag = vec![0.0; n];
    // lower-triangular view: (row > col) -> value
    let mut lower: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &v) in &entries {
        if i == j {
            diag[i] += v;
            continue;
        }
        if symmetric {
            lower.insert((i, j), v);
        } else {
            let mirror = entries.get(&(j, i)).copied();
            match mirror {
                Some(m) if (m - v).abs() <= 1e-12 * m.abs().max(v.abs()) => {
                    if i > j {
                        lower.insert((i, j), v);
                    }
                }
                _ => return Err(bad(format!("asymmetric pattern at ({}, {})", i + 1, j + 1))),
            }
        }
    }

    let mut abs_row = vec![0.0; n];
    let mut edges = Vec::new();
    let mut dropped_positive = 0;
    for (&(i, j), &v) in &lower {
        abs_row[i] += v.abs();
        abs_row[j] += v.abs();
        if v < 0.0 {
            edges.push((i, j, -v));
        } else if v > 0.0 {
            dropped_positive += 1;
        }
    }
    if dropped_positive > 0 {
        warn!("dropped {dropped_positive} positive off-diagonal entries");
    }
    let mut non_sdd_rows = 0;
    let self_weights: Vec<f64> = (0..n)
        .map(|i| {
            let surplus = diag[i] - abs_row[i];
            let tol = SDD_TOLERANCE * abs_row[i];
            if surplus > tol {
                surplus
            } else {
                if surplus < -tol {
                    non_sdd_rows += 1;
                }
                0.0
            }
        })
        .collect();
    if non_sdd_rows > 0 {
        warn!("{non_sdd_rows} rows are not diagonally dominant; surplus clamped to zero");
    }
    let graph = WeightedGraph::with_self_weights(n, edges, self_weights)?;
    Ok(MtxImport {
        graph,
        dropped_positive,
        non_sdd_rows,
    })
}

/// Writes the graph's Laplacian (lower triangle plus diagonal, 1-based,
/// column-major order).
pub fn write_matrix_market(graph: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_laplacian(graph, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_laplacian<W: Write>(graph: &WeightedGraph, out: &mut W) -> std::io::Result<()> {
    let n = graph.n();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", n, n, n + graph.m())?;
    for col in 0..n {
        writeln!(out, "{} {} {}", col + 1, col + 1, graph.diagonal(col))?;
        let mut below: Vec<(usize, f64)> = graph
            .neighbors(col)
            .iter()
            .filter(|&&(u, _)| u > col)
            .map(|&(u, e)| (u, graph.edge(e).w))
            .collect();
        below.sort_by_key(|&(u, _)| u);
        for (row, w) in below {
            writeln!(out, "{} {} {}", row + 1, col + 1, -w)?;
        }
    }
    Ok(())
}

//! On-disk formats: node CSV, labeled-pair CSV, signed-graph TSV and JSON.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use edgeclust_core::density::{Sign, SignedEdge, SignedWeightedGraph};
use edgeclust_core::partition::all_pairs;
use edgeclust_core::{Matrix, PairIndex, SampleSet};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{AppError, AppResult, StageExt};

fn open(path: &Path) -> AppResult<File> {
    File::open(path).map_err(|e| AppError::io(path, e))
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads comma-separated node features. A first row with any non-numeric
/// cell is taken as a header. With `has_labels` the last column holds
/// integer cluster labels.
pub fn load_csv(path: impl AsRef<Path>, has_labels: bool) -> AppResult<SampleSet> {
    let path = path.as_ref();
    parse_csv(open(path)?, has_labels).map_err(|message| AppError::data(path, message))
}

/// [`load_csv`] over any reader; errors are plain diagnostics without the path.
pub fn parse_csv<R: Read>(reader: R, has_labels: bool) -> Result<SampleSet, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| format!("malformed CSV: {e}"))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().any(|c| parse_number(c).is_none()) {
            // header row
            width = Some(record.len());
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(format!("line {line}: expected {w} fields, found {}", record.len()));
            }
            Some(_) => {}
        }
        let feature_cols = if has_labels { record.len().saturating_sub(1) } else { record.len() };
        if feature_cols == 0 {
            return Err(format!("line {line}: no feature columns"));
        }
        for (col, cell) in record.iter().enumerate().take(feature_cols) {
            let v = parse_number(cell)
                .ok_or_else(|| format!("line {line}, column {}: '{cell}' is not a finite number", col + 1))?;
            data.push(v);
        }
        if has_labels {
            let cell = &record[feature_cols];
            let label = cell
                .parse::<usize>()
                .ok()
                .or_else(|| parse_number(cell).filter(|v| *v >= 0.0 && v.fract() == 0.0).map(|v| v as usize))
                .ok_or_else(|| {
                    format!("line {line}, column {}: label '{cell}' is not a non-negative integer", feature_cols + 1)
                })?;
            labels.push(label);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err("no data rows".into());
    }
    let d = data.len() / rows;
    let features = Matrix::from_vec(rows, d, data).map_err(|e| e.to_string())?;
    SampleSet::new(features, has_labels.then_some(labels)).map_err(|e| e.to_string())
}

/// Writes node features with a `x1,..,xd[,label]` header.
pub fn write_csv(path: impl AsRef<Path>, s: &SampleSet) -> AppResult<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = (1..=s.dim()).map(|c| format!("x{c}")).collect();
    if s.labels().is_some() {
        header.push("label".into());
    }
    let wrap = |e: csv::Error| AppError::data(path, e.to_string());
    w.write_record(&header).map_err(wrap)?;
    for i in 0..s.len() {
        let mut rec: Vec<String> = s.point(i).iter().map(|v| v.to_string()).collect();
        if let Some(p) = s.labels() {
            rec.push(p.label(i).to_string());
        }
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Labeled pairs as `i,j,same` rows with `same` in `{0,1}`.
pub fn write_pairs(path: impl AsRef<Path>, pairs: &[(PairIndex, bool)]) -> AppResult<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| AppError::io(path, e);
    writeln!(w, "i,j,same").map_err(io)?;
    for (p, same) in pairs {
        writeln!(w, "{},{},{}", p.i, p.j, u8::from(*same)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_pairs(path: impl AsRef<Path>) -> AppResult<Vec<(PairIndex, bool)>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(open(path)?);
    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| AppError::data(path, format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && record.get(0) == Some("i") {
            continue;
        }
        let bad = |what: &str| AppError::data(path, format!("line {line}: {what}"));
        if record.len() != 3 {
            return Err(bad(&format!("expected 3 fields i,j,same, found {}", record.len())));
        }
        let i: usize = record[0].parse().map_err(|_| bad("i is not a node index"))?;
        let j: usize = record[1].parse().map_err(|_| bad("j is not a node index"))?;
        let same = match &record[2] {
            "0" => false,
            "1" => true,
            other => return Err(bad(&format!("same must be 0 or 1, found '{other}'"))),
        };
        let pair = PairIndex::new(i, j).map_err(|e| bad(&e.to_string()))?;
        out.push((pair, same));
    }
    Ok(out)
}

/// Signed graph as TSV: a `# n=<nodes>` line, then `i<TAB>j<TAB>sign<TAB>cost`
/// per kept edge with sign `1` or `-1`. Dropped pairs are omitted.
pub fn write_graph_tsv<W: Write>(mut w: W, g: &SignedWeightedGraph) -> std::io::Result<()> {
    writeln!(w, "# n={}", g.n())?;
    for e in g.edges() {
        writeln!(w, "{}\t{}\t{}\t{}", e.pair.i, e.pair.j, e.sign.as_i8(), e.cost)?;
    }
    Ok(())
}

pub fn save_graph(path: impl AsRef<Path>, g: &SignedWeightedGraph) -> AppResult<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_graph_tsv(&mut w, g).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

/// Parses the TSV graph format. Without a `# n=` line the node count is one
/// more than the largest endpoint. Every pair not listed is treated as dropped.
pub fn read_graph_tsv<R: BufRead>(r: R) -> Result<SignedWeightedGraph, String> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| format!("line {line_no}: {e}"))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("n=") {
                n = Some(v.trim().parse().map_err(|_| format!("line {line_no}: bad node count '{v}'"))?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(format!("line {line_no}: expected 4 tab-separated fields, found {}", fields.len()));
        }
        let i: usize = fields[0].parse().map_err(|_| format!("line {line_no}: bad node '{}'", fields[0]))?;
        let j: usize = fields[1].parse().map_err(|_| format!("line {line_no}: bad node '{}'", fields[1]))?;
        let sign = fields[2]
            .parse::<i8>()
            .ok()
            .and_then(Sign::from_i8)
            .ok_or_else(|| format!("line {line_no}: sign must be 1 or -1, found '{}'", fields[2]))?;
        let cost: f64 = fields[3].parse().map_err(|_| format!("line {line_no}: bad cost '{}'", fields[3]))?;
        let pair = PairIndex::new(i, j).map_err(|e| format!("line {line_no}: {e}"))?;
        edges.push(SignedEdge { pair, sign, cost });
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|e| e.pair.j + 1).max().unwrap_or(0));
    let mut listed = vec![false; n * n];
    for e in &edges {
        if e.pair.j < n {
            listed[e.pair.i * n + e.pair.j] = true;
        }
    }
    let dropped = all_pairs(n).filter(|p| !listed[p.i * n + p.j]).collect();
    SignedWeightedGraph::new(n, edges, dropped).map_err(|e| e.to_string())
}

pub fn load_graph(path: impl AsRef<Path>) -> AppResult<SignedWeightedGraph> {
    let path = path.as_ref();
    read_graph_tsv(BufReader::new(open(path)?)).map_err(|m| AppError::data(path, m))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> AppResult<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| AppError::data(path, e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> AppResult<T> {
    let path = path.as_ref();
    serde_json::from_reader(BufReader::new(open(path)?)).map_err(|e| AppError::data(path, e.to_string()))
}

/// Loads samples for a command: `.json` files hold a serialized set, anything else is CSV.
pub fn load_samples(path: impl AsRef<Path>, has_labels: bool) -> AppResult<SampleSet> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "json") {
        read_json(path)
    } else {
        load_csv(path, has_labels)
    }
}

/// Errors unless the graph has exactly `n` nodes.
pub fn check_node_count(g: &SignedWeightedGraph, n: usize) -> AppResult<()> {
    if g.n() != n {
        return Err(edgeclust_core::Error::LengthMismatch { left: g.n(), right: n }).stage("graph");
    }
    Ok(())
}

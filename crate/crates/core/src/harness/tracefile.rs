//! Trace CSV files: fixed header, one row per iterate, empty fields for absent values.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::{Status, Trace, TraceRecord, COLUMNS};

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            format_float(r.f),
            field(r.gap),
            format_float(r.grad_norm),
            field(r.alpha),
            field(r.gamma),
            field(r.theta),
            field(r.l_k),
            field(r.dist_opt),
            field(r.lyap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &Trace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Trace(e.to_string()))
}

pub fn write_trace_file(trace: &Trace, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(file))
}

fn parse_opt(s: &str, row: usize, col: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Trace(format!("row {row}: {col} value {s:?} is not a number")))
}

fn parse_req(s: &str, row: usize, col: &str) -> Result<f64> {
    parse_opt(s, row, col)?.ok_or_else(|| Error::Trace(format!("row {row}: {col} is empty")))
}

/// Parses a trace file. The header must match exactly and `k` must run `0..N`.
///
/// Files carry no termination status or iterate snapshots; the status is
/// `NumericFailure` when the last row holds a non-finite value and `MaxIter`
/// otherwise.
pub fn read_trace<R: Read>(input: R) -> Result<Trace> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows = rd.records();
    let header = rows.next().ok_or_else(|| Error::Trace("empty file".into()))??;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Trace(format!(
            "header must be {:?}, got {:?}",
            COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (i, row) in rows.enumerate() {
        let row = row?;
        if row.len() != COLUMNS.len() {
            return Err(Error::Trace(format!("row {i}: expected {} fields, got {}", COLUMNS.len(), row.len())));
        }
        let k: usize = row[0]
            .parse()
            .map_err(|_| Error::Trace(format!("row {i}: k value {:?} is not an index", &row[0])))?;
        if k != i {
            return Err(Error::Trace(format!("row {i}: k is {k}, expected {i}")));
        }
        records.push(TraceRecord {
            k,
            f: parse_req(&row[1], i, "f")?,
            gap: parse_opt(&row[2], i, "gap")?,
            grad_norm: parse_req(&row[3], i, "grad_norm")?,
            alpha: parse_opt(&row[4], i, "alpha")?,
            gamma: parse_opt(&row[5], i, "gamma")?,
            theta: parse_opt(&row[6], i, "theta")?,
            l_k: parse_opt(&row[7], i, "L_k")?,
            dist_opt: parse_opt(&row[8], i, "dist_opt")?,
            lyap: parse_opt(&row[9], i, "lyap")?,
            x: None,
        });
    }
    let Some(last) = records.last() else {
        return Err(Error::Trace("no data rows".into()));
    };
    let status = if last.f.is_finite() && last.grad_norm.is_finite() {
        Status::MaxIter
    } else {
        Status::NumericFailure
    };
    Ok(Trace { records, status })
}

pub fn read_trace_file(path: &Path) -> Result<Trace> {
    read_trace(std::io::BufReader::new(std::fs::File::open(path)?))
}

use std::io::{Read, Write};

use super::Demonstration;
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Reads demonstrations from CSV with header `demo,s0..s{I-1},x0..x{D-1}`.
/// Rows sharing a `demo` id form one demonstration, in order of first appearance.
pub fn read_demos_csv<R: Read>(reader: R) -> Result<Vec<Demonstration>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("demo") {
        return Err(Error::Data("first CSV column must be `demo`".into()));
    }
    let mut input_dim = 0;
    let mut output_dim = 0;
    for (i, h) in headers.iter().enumerate().skip(1) {
        let h = h.trim();
        if h == format!("s{input_dim}") && output_dim == 0 {
            input_dim += 1;
        } else if h == format!("x{output_dim}") {
            output_dim += 1;
        } else {
            return Err(Error::Data(format!("unexpected CSV column {i}: `{h}`")));
        }
    }
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::Data("CSV needs at least one s and one x column".into()));
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: Vec<(Vec<Vector>, Vec<Vector>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or("").trim().to_string();
        let nums: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Data(format!("row {}: {e}", line + 2)))?;
        if nums.len() != input_dim + output_dim {
            return Err(Error::Data(format!("row {} has {} values", line + 2, nums.len())));
        }
        let slot = match order.iter().position(|o| *o == id) {
            Some(p) => p,
            None => {
                order.push(id);
                rows.push((Vec::new(), Vec::new()));
                rows.len() - 1
            }
        };
        rows[slot].0.push(Vector::from_column_slice(&nums[..input_dim]));
        rows[slot].1.push(Vector::from_column_slice(&nums[input_dim..]));
    }
    if rows.is_empty() {
        return Err(Error::Data("CSV contains no samples".into()));
    }
    rows.into_iter().map(|(s, x)| Demonstration::new(s, x)).collect()
}

pub fn write_demos_csv<W: Write>(writer: W, demos: &[Demonstration]) -> Result<()> {
    let first = demos
        .first()
        .ok_or_else(|| Error::Data("no demonstrations to write".into()))?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["demo".to_string()];
    header.extend((0..first.input_dim()).map(|i| format!("s{i}")));
    header.extend((0..first.output_dim()).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (id, d) in demos.iter().enumerate() {
        for (s, x) in d.inputs.iter().zip(&d.outputs) {
            let mut rec = vec![id.to_string()];
            rec.extend(s.iter().chain(x.iter()).map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

//! CSV and JSON writers. Numbers are printed in shortest round-trip form so repeated
//! runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chemotaxis_core::{CellField, EnergyReport, Mesh, Record};

use crate::{io_err, CliResult};

pub const TIMESERIES_HEADER: [&str; 13] =
    ["t", "mass", "min_n", "max_n", "min_c", "max_c", "max_drift", "E_n", "E_grad_c", "E_c", "rhs36", "cum_En", "dt"];

pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<File>) -> CliResult<()> {
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    finish(path, w)
}

pub fn write_timeseries(path: &Path, records: &[Record], energy: Option<&[EnergyReport]>) -> CliResult<()> {
    let rows = records.iter().enumerate().map(|(i, rec)| {
        let mut row = vec![
            num(rec.state.t),
            num(rec.state.mass),
            num(rec.report.min_n),
            num(rec.report.max_n),
            num(rec.signal.min()),
            num(rec.signal.max()),
            num(rec.report.max_drift),
        ];
        match energy.map(|e| &e[i]) {
            Some(e) => row.extend([e.e_n, e.e_grad_c, e.e_c, e.rhs36, e.cum_e_n].map(num)),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row.push(num(rec.report.dt));
        row
    });
    write_rows(path, &TIMESERIES_HEADER, rows)
}

fn coordinate_header(mesh: &Mesh) -> Vec<&'static str> {
    if mesh.dim() == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

/// Cell-centred fields, one row per cell, preceded by the coordinates.
pub fn write_fields(path: &Path, mesh: &Mesh, names: &[&str], fields: &[&CellField]) -> CliResult<()> {
    let mut header = coordinate_header(mesh);
    header.extend_from_slice(names);
    let rows = (0..mesh.cell_count()).map(|i| {
        let mut row: Vec<String> = mesh.cell_center(i).iter().map(|&x| num(x)).collect();
        row.extend(fields.iter().map(|f| num(f.values[i])));
        row
    });
    write_rows(path, &header, rows)
}

pub fn write_fields_json(path: &Path, mesh: &Mesh, t: f64, names: &[&str], fields: &[&CellField]) -> CliResult<()> {
    let mut obj = serde_json::Map::new();
    obj.insert("t".into(), t.into());
    let centers: Vec<Vec<f64>> = (0..mesh.cell_count()).map(|i| mesh.cell_center(i).to_vec()).collect();
    obj.insert("centers".into(), serde_json::json!(centers));
    for (name, f) in names.iter().zip(fields) {
        obj.insert((*name).into(), serde_json::json!(f.values));
    }
    write_json(path, &serde_json::Value::Object(obj))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-20, 3.3e-5, 123456.75, 6.02e23, 0.1 + 0.2] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-20), "1e-20");
    }
}

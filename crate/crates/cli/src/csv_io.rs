//! Sweep CSV: fixed column order, 17 significant digits, empty fields for
//! missing values.

use std::io::{Read, Write};

use krrlab::sweep::SweepResult;

use crate::CliError;

pub const COLUMNS: [&str; 13] = [
    "n",
    "lambda",
    "replicate",
    "bias",
    "variance",
    "bias_bound",
    "variance_bound",
    "best_k_bias",
    "best_k_variance",
    "rho",
    "zeta",
    "xi",
    "status",
];

/// One parsed CSV record.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub lambda: f64,
    pub replicate: usize,
    pub bias: Option<f64>,
    pub variance: Option<f64>,
    pub bias_bound: Option<f64>,
    pub variance_bound: Option<f64>,
    pub best_k_bias: Option<usize>,
    pub best_k_variance: Option<usize>,
    pub rho: Option<f64>,
    pub zeta: Option<f64>,
    pub xi: Option<f64>,
    pub status: String,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Csv(e.to_string())
}

pub fn write_sweep_csv<W: Write>(res: &SweepResult, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for row in &res.rows {
        let b = row.bounds.as_ref();
        w.write_record([
            row.n.to_string(),
            real(row.lambda),
            row.replicate.to_string(),
            opt_real(row.bias),
            opt_real(row.variance),
            opt_real(b.map(|b| b.bias_bound)),
            opt_real(b.map(|b| b.variance_bound)),
            b.map(|b| b.best_k_bias.to_string()).unwrap_or_default(),
            b.map(|b| b.best_k_variance.to_string()).unwrap_or_default(),
            opt_real(b.map(|b| b.rho)),
            opt_real(b.map(|b| b.zeta)),
            opt_real(b.map(|b| b.xi)),
            row.status.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<Option<T>, CliError> {
    let raw = rec.get(i).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| CliError::Csv(format!("column {}: cannot parse {raw:?}", COLUMNS[i])))
}

fn required<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, CliError> {
    field(rec, i)?.ok_or_else(|| CliError::Csv(format!("column {} is empty", COLUMNS[i])))
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(COLUMNS) {
        return Err(CliError::Csv(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(CsvRow {
                n: required(&rec, 0)?,
                lambda: required(&rec, 1)?,
                replicate: required(&rec, 2)?,
                bias: field(&rec, 3)?,
                variance: field(&rec, 4)?,
                bias_bound: field(&rec, 5)?,
                variance_bound: field(&rec, 6)?,
                best_k_bias: field(&rec, 7)?,
                best_k_variance: field(&rec, 8)?,
                rho: field(&rec, 9)?,
                zeta: field(&rec, 10)?,
                xi: field(&rec, 11)?,
                status: rec.get(12).unwrap_or("").to_string(),
            })
        })
        .collect()
}

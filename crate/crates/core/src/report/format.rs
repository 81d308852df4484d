//! CSV, JSON and aligned-table rendering of result rows.
//!
//! All three formats share one fixed column order. A column appears only if
//! at least one row populates it; a row that lacks a value in a present
//! column writes `NA` (CSV, table) or omits the key (JSON) and carries a flag
//! explaining why. Floats are rounded to 9 significant digits everywhere, so
//! identical requests give byte-identical output.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::report::ResultRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Table,
}

pub const SIGNIFICANT_DIGITS: usize = 9;
const MISSING: &str = "NA";

/// Shortest decimal that carries 9 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci.split_once('e').map(|(_, e)| e.parse().unwrap()).unwrap();
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round_float(x: f64) -> f64 {
    format_float(x).parse().expect("formatted float parses")
}

type Getter = fn(&ResultRow) -> Option<f64>;

const NUMERIC: [(&str, Getter); 32] = [
    ("m", |r| Some(r.m)),
    ("omega", |r| Some(r.omega)),
    ("lambda", |r| Some(r.lambda)),
    ("beta", |r| Some(r.beta)),
    ("temperature", |r| Some(r.temperature)),
    ("z", |r| r.z),
    ("t_reduced", |r| r.t_reduced),
    ("omega_big", |r| r.omega_big),
    ("f0", |r| r.f0),
    ("f2", |r| r.f2),
    ("f3", |r| r.f3),
    ("f4", |r| r.f4),
    ("f4_literature", |r| r.f4_literature),
    ("exact", |r| r.exact),
    ("exact_bound", |r| r.exact_bound),
    ("exact_gap", |r| r.exact_gap),
    ("c2", |r| r.c2),
    ("c3", |r| r.c3),
    ("c4", |r| r.c4),
    ("c2_quad", |r| r.c2_quad),
    ("c3_quad", |r| r.c3_quad),
    ("c4_quad", |r| r.c4_quad),
    ("c2_gap", |r| r.c2_gap),
    ("c3_gap", |r| r.c3_gap),
    ("c4_gap", |r| r.c4_gap),
    ("ref_f0", |r| r.ref_f0),
    ("ref_f2", |r| r.ref_f2),
    ("ref_f3", |r| r.ref_f3),
    ("ref_f4", |r| r.ref_f4),
    ("ref_exact", |r| r.ref_exact),
    ("ref_f1_kr", |r| r.ref_f1_kr),
    ("ref_f3_kr", |r| r.ref_f3_kr),
];

fn numeric_columns() -> impl Iterator<Item = (&'static str, Getter)> {
    NUMERIC.into_iter()
}

/// Every numeric field of a row, in column order.
pub fn numeric_fields(row: &ResultRow) -> Vec<(&'static str, Option<f64>)> {
    numeric_columns().map(|(n, g)| (n, g(row))).collect()
}

enum Column {
    Num(&'static str, Getter),
    Status,
    Flags,
}

impl Column {
    fn name(&self) -> &'static str {
        match self {
            Column::Num(n, _) => n,
            Column::Status => "status",
            Column::Flags => "flags",
        }
    }

    fn text(&self, row: &ResultRow) -> String {
        match self {
            Column::Num(_, g) => g(row).map_or_else(|| MISSING.to_string(), format_float),
            Column::Status => row.status.as_str().to_string(),
            Column::Flags => row.flags.join("; "),
        }
    }
}

fn columns(rows: &[ResultRow]) -> Vec<Column> {
    let mut cols: Vec<Column> = numeric_columns()
        .filter(|(_, g)| rows.iter().any(|r| g(r).is_some()))
        .map(|(n, g)| Column::Num(n, g))
        .collect();
    cols.push(Column::Status);
    if rows.iter().any(|r| !r.flags.is_empty()) {
        cols.push(Column::Flags);
    }
    cols
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let cols = columns(rows);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(cols.iter().map(Column::name)).map_err(io)?;
    for row in rows {
        w.write_record(cols.iter().map(|c| c.text(row))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
}

pub fn to_json(rows: &[ResultRow]) -> Result<String> {
    let cols = columns(rows);
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for c in &cols {
                match c {
                    Column::Num(name, g) => {
                        if let Some(v) = g(row).and_then(|v| Number::from_f64(round_float(v))) {
                            obj.insert((*name).into(), Value::Number(v));
                        }
                    }
                    Column::Status => {
                        obj.insert("status".into(), Value::String(row.status.as_str().into()));
                    }
                    Column::Flags => {
                        let flags = row.flags.iter().cloned().map(Value::String).collect();
                        obj.insert("flags".into(), Value::Array(flags));
                    }
                }
            }
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(array)).map_err(|e| Error::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_table(rows: &[ResultRow]) -> String {
    let cols = columns(rows);
    let cells: Vec<Vec<String>> = rows.iter().map(|r| cols.iter().map(|c| c.text(r)).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.name().len()]).max().unwrap())
        .collect();
    let line = |items: Vec<&str>| -> String {
        let mut s = items
            .iter()
            .zip(&widths)
            .map(|(t, w)| format!("{t:>w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(cols.iter().map(Column::name).collect());
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
    out.push('\n');
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows),
        OutputFormat::Table => Ok(to_table(rows)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::report::{compute_row, RowOptions};
    use crate::series::Order;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_float(2.262259515640938), "2.26225952");
        assert_eq!(format_float(-53.2269143165), "-53.2269143");
        assert_eq!(format_float(0.000123456789123), "0.000123456789");
        assert_eq!(format_float(9.9999999996), "10");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(1.5e-12), "1.50000000e-12");
        assert_eq!(format_float(0.0), "0");
    }

    fn row(order: Order) -> ResultRow {
        let p = ModelParams::new(1.0, 1.0, 1.0, 5.0).unwrap();
        compute_row(&p, &RowOptions { max_order: order, ..RowOptions::default() }).unwrap()
    }

    #[test]
    fn csv_omits_unrequested_columns() {
        let csv = to_csv(&[row(Order::Two)]).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "m,omega,lambda,beta,temperature,z,t_reduced,omega_big,f0,f2,status");
        assert!(!csv.contains(",,"));
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn mixed_rows_write_na_not_blanks() {
        let mut a = row(Order::Two);
        a.m = 2.0;
        a.z = None;
        a.t_reduced = None;
        let csv = to_csv(&[a, row(Order::Two)]).unwrap();
        let first = csv.lines().nth(1).unwrap();
        assert!(first.contains("NA"));
        assert!(!first.contains(",,"));
    }

    #[test]
    fn json_is_array_of_objects_with_numbers_and_string_flags() {
        let mut r = row(Order::Three);
        r.flags.push("note".into());
        let v: Value = serde_json::from_str(&to_json(&[r]).unwrap()).unwrap();
        let obj = &v.as_array().unwrap()[0];
        assert!(obj["f3"].is_number());
        assert_eq!(obj["status"], "converged");
        assert_eq!(obj["flags"][0], "note");
        assert!(obj.get("f4").is_none());
    }

    #[test]
    fn output_is_deterministic() {
        let a = to_csv(&[row(Order::Four)]).unwrap();
        let b = to_csv(&[row(Order::Four)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_aligns_columns() {
        let t = to_table(&[row(Order::Two), row(Order::Two)]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2].len(), lines[3].len());
    }
}

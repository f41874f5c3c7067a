//! Trajectory serialization: CSV and JSON tables.
//!
//! Floats are printed with Rust's shortest round-trip formatting (at most 17
//! significant digits), so an emitted file parses back to the exact bits of
//! the in-memory trajectory and reruns produce byte-identical files.

use crate::bundle::TangentVector;
use crate::flow::{covariant_deviation_velocity, JacobiState};
use crate::integrate::Trajectory;
use crate::models::ManifoldModel;
use crate::{Error, Result};

pub fn geodesic_columns(m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=m).map(|i| format!("x{i}")));
    cols.extend((1..=m).map(|i| format!("v{i}")));
    cols
}

pub fn jacobi_columns(m: usize) -> Vec<String> {
    let mut cols = geodesic_columns(m);
    cols.extend((1..=m).map(|i| format!("J{i}")));
    cols.extend((1..=m).map(|i| format!("Jdot{i}")));
    cols.extend((1..=m).map(|i| format!("nablaJ{i}")));
    cols
}

pub fn geodesic_rows(traj: &Trajectory<TangentVector<f64>>) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let mut row = vec![t];
            row.extend_from_slice(&s.base);
            row.extend_from_slice(&s.vec);
            row
        })
        .collect()
}

/// Jacobi rows carry the chart data plus the covariant derivative of `J`
/// recomputed from each state.
pub fn jacobi_rows(
    model: &ManifoldModel,
    traj: &Trajectory<JacobiState>,
) -> Result<Vec<Vec<f64>>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let nabla = covariant_deviation_velocity(model, s)?;
            let mut row = vec![t];
            row.extend_from_slice(&s.x);
            row.extend_from_slice(&s.xi);
            row.extend_from_slice(&s.j);
            row.extend_from_slice(&s.j_dot);
            row.extend(nabla);
            Ok(row)
        })
        .collect()
}

pub fn to_csv(columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(columns: &[String], rows: &[Vec<f64>]) -> String {
    let value = serde_json::json!({
        "columns": columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("table serializes");
    text.push('\n');
    text
}

/// Parse a CSV produced by [`to_csv`]; numbers round-trip exactly.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument {
            reason: "empty CSV".to_string(),
        })?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::InvalidArgument {
                    reason: format!("bad float in CSV: {cell}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidArgument {
                reason: format!(
                    "row width {} does not match header width {}",
                    row.len(),
                    header.len()
                ),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

//! Table writers.
//!
//! CSV tables go to the output path, with the resolved configuration in a
//! sidecar `<path>.config.toml`. Without a path the table goes to standard
//! output and the configuration to standard error. JSON output embeds the
//! configuration as a string under `"config"` next to `"rows"`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::Format;
use super::run::Row;
use super::CliError;

/// Fixed column order of steady-state tables.
pub const COLUMNS: [&str; 12] = [
    "g",
    "delta",
    "kappa",
    "n_sites",
    "chi_max",
    "site_i",
    "site_j",
    "observable",
    "value",
    "converged",
    "discarded_weight",
    "wall_time_s",
];

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn record(row: &Row, with_status: bool) -> Vec<String> {
    let mut v = vec![
        row.g.to_string(),
        row.delta.to_string(),
        row.kappa.to_string(),
        row.n_sites.to_string(),
        row.chi_max.to_string(),
        row.site_i.to_string(),
        row.site_j.map_or(String::new(), |j| j.to_string()),
        row.observable.clone(),
        row.value.to_string(),
        row.converged.to_string(),
        row.discarded_weight.to_string(),
        row.wall_time_s.to_string(),
    ];
    if with_status {
        v.push(row.status.as_str().to_string());
    }
    v
}

/// CSV text of `rows`; sweeps add a trailing `status` column.
pub fn rows_to_csv(rows: &[Row], with_status: bool) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if with_status {
        header.push("status");
    }
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(record(r, with_status)).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(io)?).map_err(io)
}

/// CSV text of any flat serializable rows, header from field names.
pub fn serialized_to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(io)?).map_err(io)
}

#[derive(Serialize)]
struct JsonTable<'a, T> {
    config: &'a str,
    rows: &'a [T],
}

fn emit(body: &str, path: Option<&Path>, format: Format, config: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            if format == Format::Csv {
                let side = format!("{}.config.toml", p.display());
                std::fs::write(&side, config).map_err(|e| CliError::Io(format!("{side}: {e}")))?;
            }
        }
        None => {
            std::io::stdout().write_all(body.as_bytes()).map_err(io)?;
            if format == Format::Csv {
                eprintln!("# resolved config\n{config}");
            }
        }
    }
    Ok(())
}

fn json<T: Serialize>(rows: &[T], config: &str) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&JsonTable { config, rows }).map_err(io)?;
    s.push('\n');
    Ok(s)
}

pub fn write_rows(
    rows: &[Row],
    path: Option<&Path>,
    format: Format,
    with_status: bool,
    config: &str,
) -> Result<(), CliError> {
    let body = match format {
        Format::Csv => rows_to_csv(rows, with_status)?,
        Format::Json => json(rows, config)?,
    };
    emit(&body, path, format, config)
}

pub fn write_serialized<T: Serialize>(
    rows: &[T],
    path: Option<&Path>,
    format: Format,
    config: &str,
) -> Result<(), CliError> {
    let body = match format {
        Format::Csv => serialized_to_csv(rows)?,
        Format::Json => json(rows, config)?,
    };
    emit(&body, path, format, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Status;

    fn row() -> Row {
        Row {
            g: 0.5,
            delta: 1.0,
            kappa: 0.5,
            n_sites: 4,
            chi_max: 20,
            site_i: 1,
            site_j: Some(2),
            observable: "xx".into(),
            value: -0.125,
            converged: true,
            discarded_weight: 0.0,
            wall_time_s: 0.25,
            status: Status::Ok,
        }
    }

    #[test]
    fn csv_header_is_fixed() {
        let text = rows_to_csv(&[row()], false).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "0.5,1,0.5,4,20,1,2,xx,-0.125,true,0,0.25");
        let text = rows_to_csv(&[row()], true).unwrap();
        assert!(text.lines().next().unwrap().ends_with(",status"));
        assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
    }

    #[test]
    fn json_embeds_config() {
        let text = json(&[row()], "g = 0.5\n").unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["config"], "g = 0.5\n");
        assert_eq!(v["rows"][0]["observable"], "xx");
    }
}

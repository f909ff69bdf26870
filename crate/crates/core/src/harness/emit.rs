use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::runner::{SweepResult, SweepRow};

/// Output format of `emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl EmitFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(Error::domain(format!("unknown format '{other}'"))),
        }
    }
}

pub const CSV_HEADER: &str = "true_mi,repeat,estimate,ci_low,ci_high,seconds";

fn fmt17(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "NaN".to_string(),
    }
}

/// Rows as CSV with exactly the columns
/// `true_mi,repeat,estimate,ci_low,ci_high,seconds`; doubles carry 17
/// significant digits so a read-back reproduces them bit-exactly. Errored
/// cells print NaN estimates.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(Some(r.true_mi)),
            r.repeat,
            fmt17(r.estimate),
            fmt17(r.ci_low),
            fmt17(r.ci_high),
            fmt17(Some(r.seconds)),
        ));
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::Serialization("missing or wrong CSV header".into())),
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Serialization(format!(
                "expected 6 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Serialization(e.to_string()))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            let v = parse(s)?;
            Ok(if v.is_nan() { None } else { Some(v) })
        };
        rows.push(SweepRow {
            true_mi: parse(fields[0])?,
            repeat: fields[1]
                .parse::<usize>()
                .map_err(|e| Error::Serialization(e.to_string()))?,
            estimate: opt(fields[2])?,
            ci_low: opt(fields[3])?,
            ci_high: opt(fields[4])?,
            seconds: parse(fields[5])?,
            error: None,
        });
    }
    Ok(rows)
}

/// Write a sweep result to `<dir>/results.csv` or `<dir>/results.json`;
/// returns the file path.
pub fn emit(result: &SweepResult, dir: &Path, format: EmitFormat) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(match format {
        EmitFormat::Csv => "results.csv",
        EmitFormat::Json => "results.json",
    });
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    match format {
        EmitFormat::Csv => file.write_all(rows_to_csv(&result.rows).as_bytes())?,
        EmitFormat::Json => {
            let json = serde_json::to_string_pretty(result)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            file.write_all(json.as_bytes())?;
        }
    }
    file.flush()?;
    Ok(path)
}

pub fn read_json(path: &Path) -> Result<SweepResult> {
    serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::Serialization(e.to_string()))
}

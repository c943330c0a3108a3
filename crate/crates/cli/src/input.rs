use std::path::Path;

use curemix::{Dataset, Subject};

use crate::error::CliError;

/// Column layout of an input file.
#[derive(Debug, Clone)]
pub struct Columns {
    pub time: String,
    pub status: String,
    pub incidence: Vec<String>,
    pub latency: Vec<String>,
}

#[derive(Debug)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub n_dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

fn locate(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Input(format!("column '{name}' not found in header")))
}

/// Reads the referenced columns. Rows with a missing referenced cell are
/// dropped; any other non-numeric cell is an error naming its position.
pub fn load_dataset(path: &Path, cols: &Columns) -> Result<LoadedData, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .clone();
    let t_col = locate(&headers, &cols.time)?;
    let s_col = locate(&headers, &cols.status)?;
    let x_cols = cols
        .incidence
        .iter()
        .map(|c| locate(&headers, c))
        .collect::<Result<Vec<_>, _>>()?;
    let z_cols = cols
        .latency
        .iter()
        .map(|c| locate(&headers, c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut referenced = vec![t_col, s_col];
    referenced.extend(&x_cols);
    referenced.extend(&z_cols);

    let mut subjects = Vec::new();
    let mut n_dropped = 0;
    for (k, record) in rdr.records().enumerate() {
        // data rows start on line 2
        let line = k + 2;
        let record = record.map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        if referenced
            .iter()
            .any(|&c| record.get(c).is_none_or(is_missing))
        {
            n_dropped += 1;
            continue;
        }
        let num = |c: usize| -> Result<f64, CliError> {
            let cell = record.get(c).unwrap_or_default().trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Input(format!(
                        "line {line}, column '{}': '{cell}' is not a finite number",
                        &headers[c]
                    ))
                })
        };
        let time = num(t_col)?;
        if time <= 0.0 {
            return Err(CliError::Input(format!(
                "line {line}, column '{}': follow-up time must be positive, got {time}",
                &headers[t_col]
            )));
        }
        let event = match num(s_col)? {
            v if v == 0.0 => false,
            v if v == 1.0 => true,
            v => {
                return Err(CliError::Input(format!(
                    "line {line}, column '{}': status must be 0 or 1, got {v}",
                    &headers[s_col]
                )))
            }
        };
        let x = x_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?;
        let z = z_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?;
        subjects.push(Subject::new(time, event, x, z));
    }
    let dataset = Dataset::new(subjects).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(LoadedData { dataset, n_dropped })
}

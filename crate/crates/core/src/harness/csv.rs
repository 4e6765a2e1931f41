use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{SweepResult, SweepRow};
use crate::error::{SenseError, SenseResult};

pub const CSV_HEADER: &str = "sweep_value,pd,pfa,pd_ci,pfa_ci,mean_sigma_hat2,failed_trials";

/// Render `result` as CSV. Floats use Rust's shortest round-trip form.
pub fn write_results_to<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    let mut text = String::with_capacity(64 * (result.rows.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for row in &result.rows {
        let sigma = row.mean_sigma_hat2.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            row.sweep_value, row.pd, row.pfa, row.pd_ci, row.pfa_ci, sigma, row.failed_trials
        );
    }
    out.write_all(text.as_bytes())
}

pub fn write_results(result: &SweepResult, path: &Path) -> SenseResult<()> {
    let mut buf = Vec::new();
    write_results_to(result, &mut buf).map_err(|e| SenseError::io(path, e))?;
    fs::write(path, buf).map_err(|e| SenseError::io(path, e))
}

pub fn read_results(path: &Path) -> SenseResult<SweepResult> {
    let text = fs::read_to_string(path).map_err(|e| SenseError::io(path, e))?;
    read_results_from(&text, path)
}

/// Parse CSV text produced by [`write_results_to`]. `origin` only labels
/// error messages.
pub fn read_results_from(text: &str, origin: &Path) -> SenseResult<SweepResult> {
    let err = |line: usize, message: String| SenseError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(err(1, format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(lineno, format!("expected 7 fields, got {}", fields.len())));
        }
        let float = |idx: usize| -> SenseResult<f64> {
            fields[idx]
                .parse()
                .map_err(|_| err(lineno, format!("bad number {:?}", fields[idx])))
        };
        let mean_sigma_hat2 = if fields[5].is_empty() { None } else { Some(float(5)?) };
        rows.push(SweepRow {
            sweep_value: float(0)?,
            pd: float(1)?,
            pfa: float(2)?,
            pd_ci: float(3)?,
            pfa_ci: float(4)?,
            mean_sigma_hat2,
            failed_trials: fields[6]
                .parse()
                .map_err(|_| err(lineno, format!("bad count {:?}", fields[6])))?,
        });
    }
    Ok(SweepResult { rows })
}

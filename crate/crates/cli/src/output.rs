//! Rendering and writing of command output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

/// Seventeen significant digits: every double survives a round trip.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

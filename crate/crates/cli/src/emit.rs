//! Deterministic CSV/JSON emission. Float fields print as `{:.16e}`
//! (17 significant digits, locale-free); every CSV has a JSON twin with
//! the same values in the same order, and both embed the run manifest.

use std::path::Path;

use serde::Serialize;

use crate::manifest::RunManifest;
use crate::CliError;

/// 17-significant-digit scientific notation; round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty field for an absent value (e.g. a mode that was not requested).
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write manifest preamble + header + rows with CRLF line endings.
pub fn write_csv(
    path: &Path,
    manifest: &RunManifest,
    header: &str,
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut buf = String::new();
    for line in manifest.preamble() {
        buf.push_str(&line);
        buf.push_str("\r\n");
    }
    buf.push_str(header);
    buf.push_str("\r\n");
    for row in rows {
        let cooked: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        buf.push_str(&cooked.join(","));
        buf.push_str("\r\n");
    }
    std::fs::write(path, buf.as_bytes())?;
    Ok(())
}

/// Write `{ "manifest": ..., "rows": [...] }`, pretty-printed.
pub fn write_json<T: Serialize>(
    path: &Path,
    manifest: &RunManifest,
    rows: &[T],
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a RunManifest,
        rows: &'a [T],
    }
    let text = serde_json::to_string_pretty(&Doc { manifest, rows })?;
    std::fs::write(path, format!("{text}\n"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_num(1.0 / 3.0), "3.3333333333333331e-1");
        let x = 0.1928374650918273;
        let back: f64 = fmt_num(x).parse().unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn fields_with_separators_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn optional_fields_empty_when_absent() {
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_opt(Some(1.0)), "1.0000000000000000e0");
    }
}

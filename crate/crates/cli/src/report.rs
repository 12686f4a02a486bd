use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the instance's canonical text form.
pub fn digest(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes pretty JSON to stdout; a closed pipe is not an error.
pub fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a [String],
    error: String,
}

pub fn emit_error(echo: &[String], e: &anyhow::Error) {
    let msg = format!("{e:#}");
    eprintln!("error: {msg}");
    let report = ErrorReport {
        command: echo,
        error: msg,
    };
    let _ = print_json(&report);
}

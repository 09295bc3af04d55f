use serde_json::{json, Value};
use std::fmt;

/// A command result: the JSON document, an optional CSV rendering and the
/// process exit code.
pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
    pub exit_code: u8,
}

impl Output {
    pub fn json(json: Value) -> Self {
        Output { json, csv: None, exit_code: 0 }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, csv: bool) -> String {
        match (&self.csv, csv) {
            (Some(c), true) => c.clone(),
            _ => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialise");
                s.push('\n');
                s
            }
        }
    }
}

/// Errors surfaced to the command line.
#[derive(Debug)]
pub enum CliError {
    Core(homoflow_core::Error),
    Input(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "core",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<homoflow_core::Error> for CliError {
    fn from(e: homoflow_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("invalid JSON: {e}"))
    }
}

pub fn print_error(kind: &str, message: &str) {
    let v = json!({ "error": { "kind": kind, "message": message.trim() } });
    use std::io::Write;
    let text = serde_json::to_string_pretty(&v).expect("values serialise");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Joins already formatted fields, quoting those that need it.
pub fn csv_row(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    format!("{}\n", quoted.join(","))
}

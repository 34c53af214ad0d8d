use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// CSV text that opens with a `#` breadcrumb naming the tool version, the
/// subcommand and its parameters.
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(command: &str, params: &[(&str, String)]) -> Self {
        let mut text = format!("# wirange {} {command}", wirange::VERSION);
        for (k, v) in params {
            text.push_str(&format!(" {k}={v}"));
        }
        text.push('\n');
        Self { text }
    }

    pub fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: Display,
    {
        let cells: Vec<String> = fields.into_iter().map(|f| f.to_string()).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Writes to `out`, or to stdout when no path is given.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            Some(path) => write_file(path, self.text.as_bytes()),
            None => std::io::stdout()
                .lock()
                .write_all(self.text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn path_text(path: &Option<PathBuf>) -> String {
    path.as_ref().map_or_else(|| "-".into(), |p| p.display().to_string())
}

/// Empty cell for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

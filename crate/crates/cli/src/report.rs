use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::config::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

/// Text lines for people, one JSON record per verdict for scripts.
#[derive(Debug)]
pub struct Report {
    pub status: Status,
    pub lines: Vec<String>,
    pub records: Vec<Value>,
    /// What `-o` receives instead of the records, when set.
    pub artifact: Option<String>,
}

impl Report {
    pub fn new(status: Status) -> Self {
        Report {
            status,
            lines: Vec::new(),
            records: Vec::new(),
            artifact: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn record(&mut self, v: Value) {
        self.records.push(v);
    }

    fn json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn emit(&self, format: Format, output: Option<&Path>) -> io::Result<()> {
        let mut stdout = io::stdout().lock();
        match format {
            Format::Text => {
                for l in &self.lines {
                    writeln!(stdout, "{l}")?;
                }
            }
            Format::JsonLines => stdout.write_all(self.json_lines().as_bytes())?,
        }
        if let Some(path) = output {
            let body = self.artifact.clone().unwrap_or_else(|| self.json_lines());
            fs::write(path, body)?;
        }
        Ok(())
    }
}

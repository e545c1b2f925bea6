//! Self-describing output tables.
//!
//! CSV layout:
//!
//! ```text
//! # qht <command> config_hash=<sha256>
//! # config: {…canonical JSON…}
//! # summary: {…}
//! col_a,col_b,…
//! …rows…
//! ```
//!
//! The JSON layout holds the same fields in one document. Cells are
//! strings; floats are written in shortest round-trip scientific notation,
//! so equal runs give equal bytes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};
use crate::{Error, Result};

/// One output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    /// The producing configuration.
    pub config: ExperimentConfig,
    /// SHA-256 of the configuration's canonical JSON.
    pub config_hash: String,
    /// Column names.
    pub columns: Vec<String>,
    /// Rows, one cell per column.
    pub rows: Vec<Vec<String>>,
    /// Aggregates over the rows.
    pub summary: BTreeMap<String, String>,
}

/// Formats a float in shortest round-trip scientific notation.
pub fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

impl Table {
    /// An empty table for `config`.
    pub fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            config: config.clone(),
            config_hash: config.hash(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    /// Appends a row; its width must match the columns.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    /// Records an aggregate.
    pub fn summarize(&mut self, key: &str, value: impl ToString) {
        self.summary.insert(key.into(), value.to_string());
    }

    /// Cell `column` of row `i`.
    pub fn cell(&self, i: usize, column: &str) -> Option<&str> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.rows.get(i).map(|r| r[c].as_str())
    }

    /// Column `column` parsed as floats.
    pub fn column_f64(&self, column: &str) -> Result<Vec<f64>> {
        let c = self
            .columns
            .iter()
            .position(|n| n == column)
            .ok_or_else(|| Error::Format(format!("no column '{column}'")))?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|e| Error::Format(format!("column '{column}': {e}")))
            })
            .collect()
    }

    /// Encodes the table in the configured format.
    pub fn encode(&self) -> Result<Vec<u8>> {
        match self.config.format {
            Format::Csv => self.encode_csv(),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self)?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    fn encode_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(
            out,
            "# qht {} config_hash={}",
            self.config.command.name(),
            self.config_hash
        )?;
        writeln!(out, "# config: {}", self.config.to_json())?;
        writeln!(out, "# summary: {}", serde_json::to_string(&self.summary)?)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    /// Writes the encoded table to `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()?)?;
        Ok(())
    }

    /// Decodes either layout, checking the configuration hash.
    pub fn decode(bytes: &[u8]) -> Result<Table> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
        let table = if text.trim_start().starts_with('{') {
            serde_json::from_str::<Table>(text)?
        } else {
            Self::decode_csv(text)?
        };
        if table.config.hash() != table.config_hash {
            return Err(Error::Format("configuration hash does not match the header".into()));
        }
        if table.rows.iter().any(|r| r.len() != table.columns.len()) {
            return Err(Error::Format("row width differs from the header".into()));
        }
        Ok(table)
    }

    fn decode_csv(text: &str) -> Result<Table> {
        let mut lines = text.splitn(4, '\n');
        let mut next = |prefix: &str| -> Result<String> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(prefix))
                .map(str::to_owned)
                .ok_or_else(|| Error::Format(format!("expected a line starting with '{prefix}'")))
        };
        let first = next("# qht ")?;
        let hash = first
            .split_once("config_hash=")
            .map(|(_, h)| h.trim().to_owned())
            .ok_or_else(|| Error::Format("missing config_hash".into()))?;
        let config: ExperimentConfig = serde_json::from_str(&next("# config: ")?)?;
        let summary: BTreeMap<String, String> = serde_json::from_str(&next("# summary: ")?)?;
        let body = lines.next().unwrap_or("");
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Table {
            config,
            config_hash: hash,
            columns,
            rows,
            summary,
        })
    }

    /// Reads and decodes `path`.
    pub fn load(path: &Path) -> Result<Table> {
        Self::decode(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    fn sample_table(format: Format) -> Table {
        let mut config = ExperimentConfig::defaults(Command::Overlap);
        config.format = format;
        let mut t = Table::new(&config, &["n", "value", "note"]);
        t.push(vec!["0".into(), fmt_f(0.1), "plain".into()]);
        t.push(vec!["1".into(), fmt_f(1e-300), "with, comma \"quoted\"".into()]);
        t.summarize("rows", 2);
        t
    }

    #[test]
    fn both_layouts_round_trip() {
        for format in [Format::Csv, Format::Json] {
            let t = sample_table(format);
            let bytes = t.encode().unwrap();
            let back = Table::decode(&bytes).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.column_f64("value").unwrap(), vec![0.1, 1e-300]);
            assert_eq!(back.encode().unwrap(), bytes);
        }
    }

    #[test]
    fn tampered_config_is_rejected() {
        let t = sample_table(Format::Csv);
        let text = String::from_utf8(t.encode().unwrap()).unwrap();
        let tampered = text.replace("\"seed\":0", "\"seed\":1");
        assert_ne!(tampered, text);
        assert!(matches!(Table::decode(tampered.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn floats_use_shortest_round_trip_form() {
        assert_eq!(fmt_f(0.25), "2.5e-1");
        assert_eq!(fmt_f(0.0), "0e0");
        for x in [1.0 / 3.0, 6.02e23, -4.5e-17] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
        }
    }
}

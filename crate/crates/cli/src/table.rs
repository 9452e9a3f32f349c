//! Result tables and their CSV/JSON serialization with a run manifest.
//!
//! CSV: header row, comma separators, `.` decimal, LF line endings, UTF-8;
//! manifest lines are `#`-prefixed. Rerunning an identical scenario yields
//! byte-identical output except for the `# run:` manifest line (`run` field
//! in JSON), which carries the timestamp and wall time.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Clone, Debug)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub tool: String,
    pub scenario_name: String,
    pub scenario_sha256: String,
    pub timestamp_ms: u128,
    pub wall_ms: u128,
}

impl Manifest {
    pub fn new(scenario_name: String, scenario_sha256: String) -> Self {
        Manifest {
            tool: format!("eit {}", env!("CARGO_PKG_VERSION")),
            scenario_name,
            scenario_sha256,
            timestamp_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            wall_ms: 0,
        }
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

pub fn render_csv(table: &ResultTable, manifest: &Manifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", manifest.tool));
    out.push_str(&format!("# scenario: {}\n", manifest.scenario_name));
    out.push_str(&format!(
        "# scenario-sha256: {}\n",
        manifest.scenario_sha256
    ));
    out.push_str(&format!(
        "# run: {} wall-ms={}\n",
        manifest.timestamp_ms, manifest.wall_ms
    ));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(table: &ResultTable, manifest: &Manifest) -> String {
    let rows: Vec<Vec<serde_json::Value>> = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    if v.is_nan() {
                        serde_json::Value::Null
                    } else {
                        serde_json::json!(v)
                    }
                })
                .collect()
        })
        .collect();
    let doc = serde_json::json!({
        "manifest": {
            "tool": manifest.tool,
            "scenario_name": manifest.scenario_name,
            "scenario_sha256": manifest.scenario_sha256,
            "run": { "timestamp_ms": manifest.timestamp_ms, "wall_ms": manifest.wall_ms },
        },
        "columns": table.columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("tables serialize");
    text.push('\n');
    text
}

/// Write atomically: temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("output"),
        std::process::id()
    ));
    let result = (|| -> Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

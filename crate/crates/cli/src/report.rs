//! Report tables and the reproducibility stamp written above them.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Json,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Tsv => "tsv",
            Format::Json => "json",
            Format::Markdown => "md",
        }
    }
}

/// Columns that hold identifiers, kept as strings in JSON even when every
/// value looks numeric.
const TEXT_COLUMNS: &[&str] = &[
    "annotator",
    "better",
    "code",
    "doc_id",
    "location",
    "partner",
    "rater",
    "seg_id",
    "system",
    "system_a",
    "system_b",
    "worse",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Parses a header-first TSV as produced by the library's report writers.
    pub fn from_tsv(text: &str) -> Table {
        let mut lines = text.lines();
        let columns = lines.next().map(split).unwrap_or_default();
        Table {
            columns,
            rows: lines.map(split).collect(),
        }
    }

    /// Appends the rows of another TSV with the same header.
    pub fn extend_tsv(&mut self, text: &str) {
        let other = Table::from_tsv(text);
        if self.columns.is_empty() {
            self.columns = other.columns;
        }
        self.rows.extend(other.rows);
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn split(line: &str) -> Vec<String> {
    line.split('\t').map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to rerun a report and check that it matches.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub tool: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub excluded: Vec<String>,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digests of the store's files (top level and journal) plus any extra
/// input files, named relative to the store or by file name.
pub fn digest_inputs(root: &Path, extra: &[PathBuf]) -> std::io::Result<Vec<InputDigest>> {
    let mut out = Vec::new();
    for (dir, prefix) in [(root.to_path_buf(), ""), (root.join("log"), "log/")] {
        if !dir.is_dir() {
            continue;
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for path in files {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            out.push(InputDigest {
                file: format!("{prefix}{name}"),
                sha256: sha256_hex(&std::fs::read(&path)?),
            });
        }
    }
    for path in extra {
        out.push(InputDigest {
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            sha256: sha256_hex(&std::fs::read(path)?),
        });
    }
    Ok(out)
}

pub fn render(stamp: &Stamp, table: &Table, format: Format) -> String {
    match format {
        Format::Tsv => render_tsv(stamp, table),
        Format::Json => render_json(stamp, table),
        Format::Markdown => render_markdown(stamp, table),
    }
}

fn excluded_list(stamp: &Stamp) -> String {
    if stamp.excluded.is_empty() {
        "-".to_string()
    } else {
        stamp.excluded.join(",")
    }
}

fn render_tsv(stamp: &Stamp, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool\t{}", stamp.tool);
    let _ = writeln!(out, "# command\t{}", stamp.command);
    let _ = writeln!(out, "# config_hash\t{}", stamp.config_hash);
    let _ = writeln!(out, "# seed\t{}", stamp.seed);
    let _ = writeln!(out, "# trials\t{}", stamp.trials);
    let _ = writeln!(out, "# excluded\t{}", excluded_list(stamp));
    for i in &stamp.inputs {
        let _ = writeln!(out, "# input\t{}\t{}", i.file, i.sha256);
    }
    out.push_str(&table.columns.join("\t"));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn numeric_columns(table: &Table) -> Vec<bool> {
    (0..table.columns.len())
        .map(|i| {
            !TEXT_COLUMNS.contains(&table.columns[i].as_str())
                && table.rows.iter().all(|r| {
                    r.get(i)
                        .is_some_and(|v| v == "NA" || v.parse::<f64>().is_ok_and(f64::is_finite))
                })
        })
        .collect()
}

fn json_cell(value: &str, numeric: bool) -> Value {
    if numeric {
        if value == "NA" {
            return Value::Null;
        }
        if let Ok(i) = value.parse::<i64>() {
            return Value::Number(i.into());
        }
        if let Some(n) = value.parse::<f64>().ok().and_then(Number::from_f64) {
            return Value::Number(n);
        }
    }
    match value {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(value.to_string()),
    }
}

fn render_json(stamp: &Stamp, table: &Table) -> String {
    let numeric = numeric_columns(table);
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (i, col) in table.columns.iter().enumerate() {
                let cell = row.get(i).map(String::as_str).unwrap_or("");
                obj.insert(col.clone(), json_cell(cell, numeric[i]));
            }
            Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({
        "meta": stamp,
        "columns": table.columns,
        "rows": rows,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

fn render_markdown(stamp: &Stamp, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# mqmkit {}\n", stamp.command);
    let _ = writeln!(out, "- tool: {}", stamp.tool);
    let _ = writeln!(out, "- config hash: `{}`", stamp.config_hash);
    let _ = writeln!(out, "- seed: {}", stamp.seed);
    let _ = writeln!(out, "- trials: {}", stamp.trials);
    let _ = writeln!(out, "- excluded: {}", excluded_list(stamp));
    for i in &stamp.inputs {
        let _ = writeln!(out, "- input `{}`: `{}`", i.file, i.sha256);
    }
    out.push('\n');
    let _ = writeln!(out, "| {} |", table.columns.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(table.columns.len()));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

/// Writes `<dir>/<command>.<ext>` or, without a directory, standard output.
pub fn write_report(out: Option<&Path>, command: &str, format: Format, content: &str) -> std::io::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{command}.{}", format.extension())), content)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()
        }
    }
}

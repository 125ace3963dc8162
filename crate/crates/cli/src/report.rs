//! Command results and their three renderings.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use loss_aversion::scalar::parse_exact;
use loss_aversion::Exact;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{Map, Value};

pub const REPORT_SCHEMA: &str = "lossav/report";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "txt",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    exact: Vec<String>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            exact: Vec::new(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(cells.into_iter().map(|c| c.to_string()).collect());
    }

    /// Marks columns holding exact numbers; only these get a decimal companion.
    pub fn exact(mut self, columns: &[&str]) -> Self {
        self.exact = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    fn with_decimals(&self, digits: usize) -> Table {
        let marked: Vec<bool> = self.header.iter().map(|h| self.exact.contains(h)).collect();
        let widen = |cells: &[String], extra: &dyn Fn(&str) -> String| {
            let mut out = Vec::new();
            for (c, x) in cells.iter().enumerate() {
                out.push(x.clone());
                if marked.get(c) == Some(&true) {
                    out.push(extra(x));
                }
            }
            out
        };
        Table {
            name: self.name.clone(),
            header: widen(&self.header, &|h| format!("{h} ~{digits}dp (display only)")),
            rows: self
                .rows
                .iter()
                .map(|r| widen(r, &|x| parse_exact(x).map(|v| decimal(&v, digits)).unwrap_or_default()))
                .collect(),
            exact: Vec::new(),
        }
    }
}

/// `x` rounded half away from zero to `digits` places.
pub fn decimal(x: &Exact, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (x * Exact::from_integer(scale)).round().to_integer();
    let negative = scaled.is_negative() && !scaled.is_zero();
    let mut body = scaled.abs().to_string();
    if digits > 0 {
        if body.len() <= digits {
            body = format!("{}{body}", "0".repeat(digits + 1 - body.len()));
        }
        body.insert(body.len() - digits, '.');
    }
    if negative {
        body.insert(0, '-');
    }
    body
}

/// What a command produced: human tables, the authoritative JSON payload and
/// canonical documents that can be fed back into other commands.
#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub data: Map<String, Value>,
    pub notes: Vec<String>,
    pub artifacts: Vec<(String, String)>,
    /// Process exit status; non-zero when a checked claim failed.
    pub status: i32,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.data.insert(key.into(), value.into());
    }

    /// Embeds a JSON document produced by the library.
    pub fn embed(&mut self, key: &str, document: &str) {
        let value = serde_json::from_str(document).expect("library documents are valid JSON");
        self.data.insert(key.into(), value);
    }

    pub fn render(&self, format: Format, decimals: Option<usize>) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(decimals),
            Format::Table => self.render_table(decimals),
        }
    }

    fn render_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("schema".into(), REPORT_SCHEMA.into());
        doc.insert("version".into(), 1.into());
        doc.insert("command".into(), self.command.clone().into());
        doc.extend(self.data.clone());
        if !self.notes.is_empty() {
            doc.insert("notes".into(), self.notes.clone().into());
        }
        let mut out = serde_json::to_string_pretty(&Value::Object(doc)).expect("plain data");
        out.push('\n');
        out
    }

    fn shown(&self, decimals: Option<usize>) -> Vec<Table> {
        self.tables
            .iter()
            .map(|t| decimals.map_or_else(|| t.clone(), |d| t.with_decimals(d)))
            .collect()
    }

    fn render_csv(&self, decimals: Option<usize>) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        for t in self.shown(decimals) {
            w.write_record(std::iter::once("table").chain(t.header.iter().map(String::as_str)))
                .expect("in-memory write");
            for r in &t.rows {
                w.write_record(std::iter::once(t.name.as_str()).chain(r.iter().map(String::as_str)))
                    .expect("in-memory write");
            }
        }
        for n in &self.notes {
            w.write_record(["note", n.as_str()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    fn render_table(&self, decimals: Option<usize>) -> String {
        let mut out = format!("# {}\n", self.command);
        for t in self.shown(decimals) {
            let _ = writeln!(out, "\n[{}]", t.name);
            let widths: Vec<usize> = (0..t.header.len())
                .map(|c| {
                    t.rows
                        .iter()
                        .filter_map(|r| r.get(c))
                        .chain(std::iter::once(&t.header[c]))
                        .map(|x| x.chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for line in std::iter::once(&t.header).chain(&t.rows) {
                let cells: Vec<String> = line
                    .iter()
                    .enumerate()
                    .map(|(c, x)| format!("{x:<w$}", w = widths.get(c).copied().unwrap_or(0)))
                    .collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
        }
        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                let _ = writeln!(out, "note: {n}");
            }
        }
        out
    }

    /// Writes the rendered report and every artifact into `dir`.
    pub fn write_to(&self, dir: &Path, format: Format, decimals: Option<usize>) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("report.{}", format.extension())), self.render(format, decimals))?;
        for (name, text) in &self.artifacts {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use loss_aversion::scalar::rat;

    #[test]
    fn decimal_rounding() {
        assert_eq!(decimal(&rat(1, 3), 3), "0.333");
        assert_eq!(decimal(&rat(2, 3), 2), "0.67");
        assert_eq!(decimal(&rat(-1, 200), 2), "-0.01");
        assert_eq!(decimal(&rat(-1, 1000), 2), "0.00");
        assert_eq!(decimal(&rat(37, 2), 0), "19");
        assert_eq!(decimal(&rat(12345, 100), 1), "123.5");
    }

    #[test]
    fn decimal_columns_follow_numeric_ones() {
        let mut t = Table::new("t", &["name", "value"]).exact(&["value"]);
        t.row(["x", "1/3"]);
        t.row(["y", "clarke"]);
        let d = t.with_decimals(2);
        assert_eq!(d.header.len(), 3);
        assert_eq!(d.rows[0], vec!["x", "1/3", "0.33"]);
        assert_eq!(d.rows[1], vec!["y", "clarke", ""]);
    }

    #[test]
    fn renderings_are_stable() {
        let mut r = Report::new("demo");
        let mut t = Table::new("t", &["a", "b"]);
        t.row(["1", "x,y"]);
        r.tables.push(t);
        r.put("k", "v");
        assert_eq!(r.render(Format::Csv, None), "table,a,b\nt,1,\"x,y\"\n");
        assert_eq!(r.render(Format::Table, None), "# demo\n\n[t]\na  b\n1  x,y\n");
        assert!(r.render(Format::Json, None).contains("\"schema\": \"lossav/report\""));
    }
}

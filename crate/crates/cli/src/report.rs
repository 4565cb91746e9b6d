//! JSON reports: fixed field order, 17 significant digits, one timestamp field.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "hxray-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// value ≤ tolerance
    Le,
    /// value ≥ tolerance
    Ge,
    /// value = tolerance exactly (flags and integers)
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub config_key: String,
    pub pass: bool,
}

impl Assertion {
    pub fn new(name: &str, value: f64, comparison: Comparison, tolerance: f64, config_key: &str) -> Self {
        let pass = match comparison {
            Comparison::Le => value <= tolerance,
            Comparison::Ge => value >= tolerance,
            Comparison::Eq => value == tolerance,
        };
        Self { name: name.into(), value, tolerance, comparison, config_key: config_key.into(), pass }
    }

    pub fn le(name: &str, value: f64, tolerance: f64, config_key: &str) -> Self {
        Self::new(name, value, Comparison::Le, tolerance, config_key)
    }

    pub fn flag(name: &str, value: bool, expected: bool, config_key: &str) -> Self {
        Self::new(name, value as u8 as f64, Comparison::Eq, expected as u8 as f64, config_key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub subcommand: String,
    pub status: Status,
    /// Machine-readable cause when status is not `pass`.
    pub reason: Option<String>,
    pub detail: Option<String>,
    /// Unix seconds; the only field that differs between identical runs.
    pub timestamp: u64,
    pub config: Value,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    /// The skeleton every run starts from.
    pub fn empty(subcommand: &str) -> Self {
        Self {
            schema: SCHEMA,
            subcommand: subcommand.into(),
            status: Status::Pass,
            reason: None,
            detail: None,
            timestamp: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config: Value::Null,
            results: Value::Object(Default::default()),
            assertions: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Sets status from the assertions unless an error was already recorded.
    pub fn settle(&mut self) {
        if self.status == Status::Error {
            return;
        }
        match self.assertions.iter().find(|a| !a.pass) {
            Some(a) => {
                self.status = Status::Fail;
                self.reason = Some(format!("tolerance.{}", a.name));
                let failed: Vec<&str> = self.assertions.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect();
                self.detail = Some(format!("failed: {}", failed.join(", ")));
            }
            None => {
                self.status = Status::Pass;
                self.reason = None;
            }
        }
    }

    pub fn error(&mut self, reason: &str, detail: String) {
        self.status = Status::Error;
        self.reason = Some(reason.into());
        self.detail = Some(detail);
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// serde_json's pretty printer with every float written as `{:.16e}`. Non-finite
/// values never get here: serde_json writes them as `null`.
struct Digits17<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(serde_json::ser::PrettyFormatter::new()));
    v.serialize(&mut ser).expect("in-memory JSON serialisation");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Report plus side files, written under one directory.
pub fn emit_report(dir: &Path, report: &Report, files: &[(String, String)]) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    let path = dir.join(format!("{}.json", report.subcommand));
    std::fs::write(&path, report.to_json())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_a_valid_skeleton() {
        let mut r = Report::empty("selftest");
        r.settle();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["assertions"], Value::Array(vec![]));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 10);
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let a = Assertion::le("x", 0.1, 1.0 / 3.0, "k");
        let s = to_json(&a);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["tolerance"].as_f64(), Some(1.0 / 3.0));
        assert_eq!(to_json(&f64::NAN), "null\n");
    }

    #[test]
    fn first_failed_assertion_sets_the_reason() {
        let mut r = Report::empty("spectrum");
        r.assertions = vec![Assertion::le("a", 1.0, 2.0, "k"), Assertion::flag("b", true, false, "f"), Assertion::le("c", 3.0, 2.0, "k")];
        r.settle();
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.reason.as_deref(), Some("tolerance.b"));
        assert_eq!(r.detail.as_deref(), Some("failed: b, c"));
    }
}

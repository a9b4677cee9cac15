//! Run reports and their JSON encoding.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    /// Wall-clock seconds; excluded from the reproducibility contract.
    pub timing: f64,
    pub seed: u64,
    pub tool_version: String,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, outputs: Value, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            outputs,
            timing: 0.0,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// The reproducible part of the report.
    pub fn outputs_json(&self) -> String {
        to_json(&self.outputs)
    }
}

/// Pretty JSON whose floats carry 17 significant digits, so every value
/// parses back to the identical `f64`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats::default());
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[derive(Default)]
struct ExactFloats {
    inner: PrettyFormatter<'static>,
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_exactly() {
        let values = [1.0 / 3.0, 2.0 / 3.0, 0.1, 1e-300, 5e-324, f64::MAX, -0.0, 0.0, 123456.789];
        let text = to_json(&json!({ "x": values }));
        let back: Value = serde_json::from_str(&text).unwrap();
        for (orig, parsed) in values.iter().zip(back["x"].as_array().unwrap()) {
            assert_eq!(orig.to_bits(), parsed.as_f64().unwrap().to_bits(), "{orig}");
        }
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let text = to_json(&json!(1.0 / 3.0));
        assert_eq!(text.trim(), "3.3333333333333331e-1");
    }

    #[test]
    fn integers_stay_integers() {
        assert_eq!(to_json(&json!({ "n": 3 })), "{\n  \"n\": 3\n}\n");
    }

    #[test]
    fn report_is_valid_json() {
        let r = RunReport::new("index", json!({ "graph": "g.txt" }), json!({ "index": 0.5 }), 7);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["command"], "index");
        assert_eq!(v["seed"], 7);
        assert!(v["tool_version"].is_string());
    }
}

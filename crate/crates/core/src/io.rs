//! Wire formats: JSON-Lines event streams, match lines and automaton files.
//!
//! A stream line is `{"type": "T", "attrs": {"temp": 45}, "ts": "1.33"}`.
//! Timestamps are decimal strings read exactly; attribute numbers become
//! integers when written without a fraction or exponent and exact
//! rationals otherwise.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::cea::TimedCea;
use crate::model::{ComplexEvent, Event, TimedStream, Value};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp {current} does not exceed the previous one ({previous})")]
    NonIncreasing { line: usize, previous: Rational, current: Rational },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    #[serde(rename = "type")]
    ty: String,
    #[serde(default)]
    attrs: BTreeMap<String, serde_json::Value>,
    ts: String,
}

fn attr_value(v: &serde_json::Value) -> Result<Value, String> {
    match v {
        serde_json::Value::String(s) => Ok(Value::Str(s.clone())),
        serde_json::Value::Number(n) => {
            let text = n.to_string();
            if let Ok(i) = text.parse::<i64>() {
                Ok(Value::Int(i))
            } else {
                Rational::parse_decimal(&text).map(Value::Rat).map_err(|e| e.to_string())
            }
        }
        other => Err(format!("unsupported attribute value {other}")),
    }
}

fn parse_line(text: &str, line: usize) -> Result<(Event, Rational), InputError> {
    let malformed = |message: String| InputError::Malformed { line, message };
    let raw: Line = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let ts = Rational::parse_decimal(&raw.ts).map_err(|e| malformed(format!("timestamp: {e}")))?;
    let mut event = Event::new(raw.ty);
    for (k, v) in &raw.attrs {
        event.attrs.insert(k.clone(), attr_value(v).map_err(|m| malformed(format!("attribute {k}: {m}")))?);
    }
    Ok((event, ts))
}

/// Pull-based reader: each call yields the next timed event, `None` at the
/// end of input. Blank lines are skipped.
pub struct StreamReader<R> {
    input: R,
    line: usize,
    last: Option<Rational>,
    buf: String,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(input: R) -> StreamReader<R> {
        StreamReader { input, line: 0, last: None, buf: String::new() }
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<(Event, Rational), InputError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            if self.buf.trim().is_empty() {
                continue;
            }
            let item = parse_line(self.buf.trim(), self.line).and_then(|(e, t)| match self.last {
                Some(previous) if t <= previous => {
                    Err(InputError::NonIncreasing { line: self.line, previous, current: t })
                }
                _ => {
                    self.last = Some(t);
                    Ok((e, t))
                }
            });
            return Some(item);
        }
    }
}

pub fn read_stream(input: impl BufRead) -> Result<TimedStream, InputError> {
    let items = StreamReader::new(input).collect::<Result<Vec<_>, _>>()?;
    Ok(TimedStream::from_items(items).expect("reader enforces increasing timestamps"))
}

pub fn read_stream_str(text: &str) -> Result<TimedStream, InputError> {
    read_stream(text.as_bytes())
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(i) => json!(i),
        Value::Str(s) => json!(s),
        Value::Rat(r) => match r.to_decimal() {
            Some(d) => serde_json::from_str(&d).expect("decimal literal"),
            None => json!(r.to_string()),
        },
    }
}

/// One stream line; the inverse of the reader for decimal timestamps.
pub fn event_line(e: &Event, ts: Rational) -> String {
    let attrs: serde_json::Map<String, serde_json::Value> =
        e.attrs.iter().map(|(k, v)| (k.clone(), value_json(v))).collect();
    let ts = ts.to_decimal().unwrap_or_else(|| panic!("timestamp {ts} has no finite decimal form"));
    json!({ "type": e.ty, "attrs": attrs, "ts": ts }).to_string()
}

pub fn write_stream(s: &TimedStream) -> String {
    s.iter().map(|(e, t)| event_line(e, *t) + "\n").collect()
}

/// `{"start": i, "end": j, "bindings": {var: [indices]}, "pos": j}`.
pub fn match_line(c: &ComplexEvent) -> String {
    json!({ "start": c.start, "end": c.end, "bindings": c.binding, "pos": c.end }).to_string()
}

pub fn read_automaton(text: &str) -> Result<TimedCea, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn write_automaton(a: &TimedCea) -> String {
    serde_json::to_string_pretty(a).expect("automata serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::sensor_stream;

    #[test]
    fn round_trips_the_sensor_stream() {
        let s = sensor_stream();
        let text = write_stream(&s);
        assert_eq!(read_stream_str(&text).unwrap(), s);
        assert_eq!(s.ts(2), Rational::new(133, 100));
    }

    #[test]
    fn empty_input_is_an_empty_stream() {
        assert!(read_stream_str("").unwrap().is_empty());
    }

    #[test]
    fn equal_timestamps_are_rejected_with_the_line() {
        let text = "{\"type\":\"A\",\"ts\":\"1\"}\n{\"type\":\"A\",\"ts\":\"1.0\"}\n";
        match read_stream_str(text) {
            Err(InputError::NonIncreasing { line: 2, previous, current }) => {
                assert_eq!(previous, current);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines_name_their_line() {
        let text = "{\"type\":\"A\",\"ts\":\"1\"}\nnot json\n";
        assert!(matches!(read_stream_str(text), Err(InputError::Malformed { line: 2, .. })));
    }

    #[test]
    fn fractional_attributes_are_exact() {
        let s = read_stream_str("{\"type\":\"A\",\"attrs\":{\"v\":0.1,\"n\":3},\"ts\":\"0.5\"}").unwrap();
        assert_eq!(s.event(1).attrs["v"], Value::Rat(Rational::new(1, 10)));
        assert_eq!(s.event(1).attrs["n"], Value::Int(3));
    }

    #[test]
    fn match_lines_list_bindings() {
        let mut c = ComplexEvent::new(4, 8);
        c.bind("T", 5);
        c.bind("T", 6);
        assert_eq!(match_line(&c), r#"{"bindings":{"T":[5,6]},"end":8,"pos":8,"start":4}"#);
    }
}

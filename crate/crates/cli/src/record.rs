//! JSON-lines result records.
//!
//! A record serializes to one line of JSON with keys sorted at every level.
//! Non-finite floats are written as the strings `"inf"`, `"-inf"` and `"nan"`
//! and read back as floats, so [`ResultRecord::parse`] followed by
//! [`ResultRecord::to_json_line`] reproduces the input byte for byte.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Val>),
}

impl Val {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Val::Float(v) => Some(v),
            Val::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Val::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Infers a typed value from a command-line string.
    pub fn infer(raw: &str) -> Val {
        if let Ok(i) = raw.parse::<i64>() {
            Val::Int(i)
        } else if let Ok(f) = raw.parse::<f64>() {
            Val::Float(f)
        } else {
            Val::Str(raw.to_string())
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Val::Bool(b) => Value::Bool(*b),
            Val::Int(i) => Value::Number((*i).into()),
            Val::Float(f) => match Number::from_f64(*f) {
                Some(n) => Value::Number(n),
                None if f.is_nan() => Value::String("nan".into()),
                None if *f > 0.0 => Value::String("inf".into()),
                None => Value::String("-inf".into()),
            },
            Val::Str(s) => Value::String(s.clone()),
            Val::List(items) => Value::Array(items.iter().map(Val::to_json).collect()),
        }
    }

    fn from_json(v: &Value) -> Result<Val, String> {
        Ok(match v {
            Value::Bool(b) => Val::Bool(*b),
            Value::Number(n) if n.is_i64() => Val::Int(n.as_i64().unwrap()),
            Value::Number(n) if n.is_f64() => Val::Float(n.as_f64().unwrap()),
            Value::Number(n) => return Err(format!("integer {n} out of range")),
            Value::String(s) => match s.as_str() {
                "nan" => Val::Float(f64::NAN),
                "inf" => Val::Float(f64::INFINITY),
                "-inf" => Val::Float(f64::NEG_INFINITY),
                _ => Val::Str(s.clone()),
            },
            Value::Array(items) => Val::List(items.iter().map(Val::from_json).collect::<Result<_, _>>()?),
            other => return Err(format!("unexpected value {other}")),
        })
    }
}

impl From<f64> for Val {
    fn from(v: f64) -> Val {
        Val::Float(v)
    }
}

impl From<u64> for Val {
    fn from(v: u64) -> Val {
        i64::try_from(v).map(Val::Int).unwrap_or(Val::Float(v as f64))
    }
}

impl From<usize> for Val {
    fn from(v: usize) -> Val {
        Val::from(v as u64)
    }
}

impl From<u32> for Val {
    fn from(v: u32) -> Val {
        Val::Int(v as i64)
    }
}

impl From<i64> for Val {
    fn from(v: i64) -> Val {
        Val::Int(v)
    }
}

impl From<bool> for Val {
    fn from(v: bool) -> Val {
        Val::Bool(v)
    }
}

impl From<&str> for Val {
    fn from(v: &str) -> Val {
        Val::Str(v.to_string())
    }
}

impl From<String> for Val {
    fn from(v: String) -> Val {
        Val::Str(v)
    }
}

impl<T: Into<Val>> From<Vec<T>> for Val {
    fn from(v: Vec<T>) -> Val {
        Val::List(v.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Runtime {
    pub threads: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub schema_version: String,
    pub command: String,
    pub params: BTreeMap<String, Val>,
    pub seed: u64,
    pub values: BTreeMap<String, Val>,
    pub ci: Option<(f64, f64)>,
    pub runtime: Runtime,
}

impl ResultRecord {
    pub fn new(command: &str, seed: u64) -> ResultRecord {
        ResultRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            params: BTreeMap::new(),
            seed,
            values: BTreeMap::new(),
            ci: None,
            runtime: Runtime::default(),
        }
    }

    pub fn value(mut self, key: &str, v: impl Into<Val>) -> ResultRecord {
        self.values.insert(key.to_string(), v.into());
        self
    }

    pub fn set(&mut self, key: &str, v: impl Into<Val>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> ResultRecord {
        self.ci = Some((lo, hi));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Val> {
        self.values.get(key)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), Value::String(self.schema_version.clone()));
        obj.insert("command".into(), Value::String(self.command.clone()));
        obj.insert("params".into(), Value::Object(self.params.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()));
        obj.insert("seed".into(), Value::Number(self.seed.into()));
        obj.insert("values".into(), Value::Object(self.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()));
        if let Some((lo, hi)) = self.ci {
            obj.insert("ci_low".into(), Val::Float(lo).to_json());
            obj.insert("ci_high".into(), Val::Float(hi).to_json());
        }
        let mut rt = Map::new();
        rt.insert("threads".into(), Value::Number(self.runtime.threads.into()));
        rt.insert("wall_time_ms".into(), Value::Number(self.runtime.wall_time_ms.into()));
        obj.insert("runtime".into(), Value::Object(rt));
        Value::Object(obj)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("records always serialize")
    }

    /// The record line without its `runtime` object.
    pub fn payload_line(&self) -> String {
        let mut v = self.to_json();
        v.as_object_mut().unwrap().remove("runtime");
        serde_json::to_string(&v).expect("records always serialize")
    }

    pub fn parse(line: &str) -> Result<ResultRecord, String> {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let obj = v.as_object().ok_or("record is not a JSON object")?;
        let str_field = |k: &str| obj.get(k).and_then(Value::as_str).map(str::to_string).ok_or(format!("missing string field {k}"));
        let map_field = |k: &str| -> Result<BTreeMap<String, Val>, String> {
            obj.get(k)
                .and_then(Value::as_object)
                .ok_or(format!("missing object field {k}"))?
                .iter()
                .map(|(k, v)| Ok((k.clone(), Val::from_json(v)?)))
                .collect()
        };
        let float_field = |k: &str| -> Result<Option<f64>, String> {
            match obj.get(k) {
                None => Ok(None),
                Some(v) => Val::from_json(v)?.as_f64().map(Some).ok_or(format!("{k} is not numeric")),
            }
        };
        let ci = match (float_field("ci_low")?, float_field("ci_high")?) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err("ci_low and ci_high must appear together".into()),
        };
        let rt = obj.get("runtime").and_then(Value::as_object).ok_or("missing runtime")?;
        let rt_field = |k: &str| rt.get(k).and_then(Value::as_u64).ok_or(format!("missing runtime.{k}"));
        Ok(ResultRecord {
            schema_version: str_field("schema_version")?,
            command: str_field("command")?,
            params: map_field("params")?,
            seed: obj.get("seed").and_then(Value::as_u64).ok_or("missing seed")?,
            values: map_field("values")?,
            ci,
            runtime: Runtime { threads: rt_field("threads")?, wall_time_ms: rt_field("wall_time_ms")? },
        })
    }
}

/// The structured error line written to stderr.
pub fn error_line(kind: &str, message: &str, exit_code: i32, command: Option<&str>) -> String {
    let mut err = Map::new();
    err.insert("kind".into(), Value::String(kind.into()));
    err.insert("message".into(), Value::String(message.into()));
    err.insert("exit_code".into(), Value::Number(exit_code.into()));
    let mut obj = Map::new();
    obj.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
    obj.insert("error".into(), Value::Object(err));
    if let Some(c) = command {
        obj.insert("command".into(), Value::String(c.into()));
    }
    serde_json::to_string(&Value::Object(obj)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRecord {
        let mut r = ResultRecord::new("mc positivity", u64::MAX)
            .value("estimate", 0.1 + 0.2)
            .value("passed", 12u64)
            .value("odd", f64::NEG_INFINITY)
            .value("nan", f64::NAN)
            .value("label", "7/8")
            .value("list", vec![1.5, -0.0, 1e-310])
            .with_ci(0.25, 1.0);
        r.params.insert("sigma".into(), Val::infer("0.75"));
        r.params.insert("mode".into(), Val::infer("squarefree"));
        r.runtime = Runtime { threads: 4, wall_time_ms: 17 };
        r
    }

    #[test]
    fn round_trip_is_lossless() {
        let line = sample().to_json_line();
        let back = ResultRecord::parse(&line).unwrap();
        assert_eq!(back.to_json_line(), line);
        assert_eq!(back.get("estimate"), Some(&Val::Float(0.1 + 0.2)));
        assert_eq!(back.get("passed"), Some(&Val::Int(12)));
        assert!(line.contains("\"ci_low\":0.25") && line.contains("\"ci_high\":1.0"));
    }

    #[test]
    fn keys_sorted_and_stable() {
        let line = sample().to_json_line();
        let keys = ["\"ci_high\"", "\"ci_low\"", "\"command\"", "\"params\"", "\"runtime\"", "\"schema_version\"", "\"seed\"", "\"values\""];
        let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
        assert_eq!(line, sample().to_json_line());
        assert!(!sample().payload_line().contains("runtime"));
    }

    #[test]
    fn infer_types() {
        assert_eq!(Val::infer("12"), Val::Int(12));
        assert_eq!(Val::infer("0.5"), Val::Float(0.5));
        assert_eq!(Val::infer("exact"), Val::Str("exact".into()));
    }
}

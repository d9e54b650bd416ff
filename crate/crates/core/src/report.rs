//! Machine-readable check reports.
//!
//! Every verification in the crate returns a [`Report`] with the fixed shape
//! `{check, pass, max_deviation, details}`. Detail values are a small typed
//! tree rather than raw JSON so that non-finite numbers can be rejected
//! before anything reaches disk.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Detail {
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
    List(Vec<Detail>),
    Map(BTreeMap<String, Detail>),
}

impl Detail {
    fn first_non_finite(&self, path: &str) -> Option<String> {
        match self {
            Detail::Num(x) if !x.is_finite() => Some(path.to_string()),
            Detail::List(items) => items
                .iter()
                .enumerate()
                .find_map(|(i, d)| d.first_non_finite(&format!("{path}[{i}]"))),
            Detail::Map(m) => m
                .iter()
                .find_map(|(k, d)| d.first_non_finite(&format!("{path}.{k}"))),
            _ => None,
        }
    }
}

impl From<bool> for Detail {
    fn from(v: bool) -> Self {
        Detail::Bool(v)
    }
}

impl From<usize> for Detail {
    fn from(v: usize) -> Self {
        Detail::Int(v as i64)
    }
}

impl From<i64> for Detail {
    fn from(v: i64) -> Self {
        Detail::Int(v)
    }
}

impl From<f64> for Detail {
    fn from(v: f64) -> Self {
        Detail::Num(v)
    }
}

impl From<&str> for Detail {
    fn from(v: &str) -> Self {
        Detail::Text(v.to_string())
    }
}

impl From<String> for Detail {
    fn from(v: String) -> Self {
        Detail::Text(v)
    }
}

impl<T: Into<Detail>> From<Vec<T>> for Detail {
    fn from(v: Vec<T>) -> Self {
        Detail::List(v.into_iter().map(Into::into).collect())
    }
}

impl From<BTreeMap<String, Detail>> for Detail {
    fn from(v: BTreeMap<String, Detail>) -> Self {
        Detail::Map(v)
    }
}

impl From<serde_json::Value> for Detail {
    /// `null` becomes the text `"null"`; integers that fit `i64` stay integers.
    fn from(v: serde_json::Value) -> Self {
        use serde_json::Value;
        match v {
            Value::Null => Detail::Text("null".into()),
            Value::Bool(b) => Detail::Bool(b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Detail::Int(i),
                None => Detail::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Detail::Text(s),
            Value::Array(items) => Detail::List(items.into_iter().map(Detail::from).collect()),
            Value::Object(m) => Detail::Map(m.into_iter().map(|(k, v)| (k, Detail::from(v))).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    pub max_deviation: f64,
    pub details: BTreeMap<String, Detail>,
}

impl Report {
    pub fn new(check: impl Into<String>, pass: bool, max_deviation: f64) -> Self {
        Self {
            check: check.into(),
            pass,
            max_deviation,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Detail>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Detail>) {
        self.details.insert(key.to_string(), value.into());
    }

    /// Rejects NaN and infinities anywhere in the report.
    pub fn validate(&self) -> Result<()> {
        if !self.max_deviation.is_finite() {
            return Err(Error::NonFinite("max_deviation".into()));
        }
        for (k, d) in &self.details {
            if let Some(path) = d.first_non_finite(&format!("details.{k}")) {
                return Err(Error::NonFinite(path));
            }
        }
        Ok(())
    }

    /// One report whose details hold each part under its check name.
    /// Passes iff every part passes; the deviation is the largest part deviation.
    pub fn combine(check: impl Into<String>, parts: Vec<Report>) -> Self {
        let pass = parts.iter().all(|r| r.pass);
        let worst = parts.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
        let mut out = Report::new(check, pass, worst);
        for p in parts {
            let mut m = BTreeMap::new();
            m.insert("pass".to_string(), Detail::Bool(p.pass));
            m.insert("max_deviation".to_string(), Detail::Num(p.max_deviation));
            m.insert("details".to_string(), Detail::Map(p.details));
            out.details.insert(p.check, Detail::Map(m));
        }
        out
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Largest absolute entry of a slice, 0 for an empty slice.
pub(crate) fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

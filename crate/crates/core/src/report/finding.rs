use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::catalog::fix_for;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Data,
    Model,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Data => "data",
            Stage::Model => "model",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a finding points: the whole input, one feature column, or one layer.
///
/// Together with the check id this is the finding's identity for voting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Locus {
    Global,
    Column { index: usize, name: String },
    Layer { index: usize },
}

impl Locus {
    /// Column or layer index used for ordering; global findings sort first.
    pub fn index(&self) -> Option<usize> {
        match self {
            Locus::Global => None,
            Locus::Column { index, .. } | Locus::Layer { index } => Some(*index),
        }
    }
}

/// Structured details of a finding, keyed by name in sorted order.
pub type Evidence = Map<String, Value>;

/// JSON-safe number: non-finite values are kept as their text form
/// (`"NaN"`, `"inf"`, `"-inf"`) instead of collapsing to null.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Finding {
    pub check_id: String,
    pub stage: Stage,
    pub severity: Severity,
    pub locus: Locus,
    pub message: String,
    pub fix: String,
    pub evidence: Evidence,
}

impl Finding {
    /// Builds a finding, attaching the catalog's fix and stage for `check_id`.
    pub fn new(
        check_id: &str,
        severity: Severity,
        locus: Locus,
        message: impl Into<String>,
        evidence: Evidence,
    ) -> Result<Self> {
        let entry = super::catalog::catalog_entry(check_id)?;
        Ok(Finding {
            check_id: check_id.to_string(),
            stage: entry.stage,
            severity,
            locus,
            message: message.into(),
            fix: fix_for(check_id)?.to_string(),
            evidence,
        })
    }

    /// Identity used by majority voting.
    pub fn key(&self) -> (&str, &Locus) {
        (&self.check_id, &self.locus)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Sorts findings by check id, then by column/layer index.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        (a.check_id.as_str(), a.locus.index(), &a.locus).cmp(&(
            b.check_id.as_str(),
            b.locus.index(),
            &b.locus,
        ))
    });
}

/// Conversion into an evidence value; floats go through [`number`].
pub trait EvidenceValue {
    fn into_value(self) -> Value;
}

impl EvidenceValue for f64 {
    fn into_value(self) -> Value {
        number(self)
    }
}

macro_rules! plain_evidence {
    ($($t:ty),*) => {$(
        impl EvidenceValue for $t {
            fn into_value(self) -> Value {
                Value::from(self)
            }
        }
    )*};
}

plain_evidence!(usize, u64, i64, bool, String, &str);

impl<T: EvidenceValue> EvidenceValue for Vec<T> {
    fn into_value(self) -> Value {
        Value::Array(self.into_iter().map(EvidenceValue::into_value).collect())
    }
}

impl EvidenceValue for Value {
    fn into_value(self) -> Value {
        self
    }
}

/// Builds an [`Evidence`] map from key/value pairs.
#[macro_export]
macro_rules! evidence {
    ($($key:expr => $value:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut map = $crate::report::Evidence::new();
        $(map.insert(($key).to_string(), $crate::report::EvidenceValue::into_value($value));)*
        map
    }};
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::catalog;

    #[test]
    fn new_attaches_catalog_fix_and_stage() {
        let f = Finding::new(
            catalog::LEARNING_RATE,
            Severity::Warning,
            Locus::Global,
            "lr 5 is large",
            Evidence::new(),
        )
        .unwrap();
        assert_eq!(f.stage, Stage::Model);
        assert_eq!(f.fix, catalog::fix_for(catalog::LEARNING_RATE).unwrap());
        assert!(Finding::new("bogus", Severity::Error, Locus::Global, "", Evidence::new()).is_err());
    }

    #[test]
    fn non_finite_numbers_survive_json() {
        assert_eq!(number(f64::NAN), Value::from("NaN"));
        assert_eq!(number(f64::INFINITY), Value::from("inf"));
        assert_eq!(number(1.5), Value::from(1.5));
    }

    #[test]
    fn sorted_by_id_then_index() {
        let mk = |id: &str, locus: Locus| {
            Finding::new(id, Severity::Error, locus, "m", Evidence::new()).unwrap()
        };
        let col = |i: usize| Locus::Column { index: i, name: format!("c{i}") };
        let mut v = vec![
            mk(catalog::MISSING_VALUES, col(3)),
            mk(catalog::MISSING_ENCODING, col(5)),
            mk(catalog::MISSING_VALUES, col(1)),
            mk(catalog::MISSING_LABELS, Locus::Global),
        ];
        sort_findings(&mut v);
        let order: Vec<_> = v.iter().map(|f| (f.check_id.as_str(), f.locus.index())).collect();
        assert_eq!(
            order,
            vec![
                ("missing_encoding", Some(5)),
                ("missing_labels", None),
                ("missing_values", Some(1)),
                ("missing_values", Some(3)),
            ]
        );
    }
}

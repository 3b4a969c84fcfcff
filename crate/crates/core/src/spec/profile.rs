use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DataKind;

/// Cell tokens read as missing, compared case-insensitively after trimming.
pub const MISSING_TOKENS: [&str; 6] = ["", "nan", "na", "n/a", "null", "?"];

/// Share of non-missing cells that must parse as numbers for a numeric column.
pub const NUMERIC_SHARE: f64 = 0.9;

pub fn is_missing_token(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_TOKENS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Summary of one CSV column.
///
/// Statistics are taken over non-missing numeric cells only and are `None`
/// when no such cell exists. `std` is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub kind: DataKind,
    pub missing_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub distinct_count: usize,
    /// Every cell is missing.
    pub all_missing: bool,
    /// Numeric cells exist and all share one value.
    pub zero_variance: bool,
}

struct Stats {
    min: f64,
    max: f64,
    mean: f64,
    std: f64,
}

/// Summation runs over sorted values so the result does not depend on row
/// order.
fn stats(values: &mut [f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(Stats {
        min: values[0],
        max: values[values.len() - 1],
        mean,
        std: var.sqrt(),
    })
}

fn numeric_key(v: f64) -> u64 {
    // -0.0 and 0.0 are the same value.
    (if v == 0.0 { 0.0 } else { v }).to_bits()
}

/// Profiles a column of raw cells and returns the numeric view of its cells
/// (NaN where a cell is missing or unusable as a number).
///
/// In a numeric column, stray non-numeric cells count as missing. Categorical
/// columns have an all-NaN numeric view.
pub fn classify_column(name: &str, cells: &[String]) -> (ColumnProfile, Vec<f64>) {
    let parsed: Vec<Option<f64>> = cells
        .iter()
        .map(|c| if is_missing_token(c) { None } else { parse_number(c) })
        .collect();
    let present: Vec<&str> = cells
        .iter()
        .filter(|c| !is_missing_token(c))
        .map(|c| c.trim())
        .collect();
    let numeric = parsed.iter().flatten().count();
    let token_missing = cells.len() - present.len();
    let kind = if present.is_empty() || numeric as f64 >= NUMERIC_SHARE * present.len() as f64 {
        DataKind::Numeric
    } else if numeric == 0 {
        DataKind::Categorical
    } else {
        DataKind::Mixed
    };

    let column: Vec<f64> = match kind {
        DataKind::Categorical => vec![f64::NAN; cells.len()],
        _ => parsed.iter().map(|p| p.unwrap_or(f64::NAN)).collect(),
    };
    let (missing_count, distinct_count) = match kind {
        DataKind::Numeric => {
            let distinct: BTreeSet<u64> = parsed.iter().flatten().map(|&v| numeric_key(v)).collect();
            (cells.len() - numeric, distinct.len())
        }
        _ => {
            let distinct: BTreeSet<&str> = present.iter().copied().collect();
            (token_missing, distinct.len())
        }
    };
    let mut values: Vec<f64> = column.iter().copied().filter(|v| !v.is_nan()).collect();
    let profile = build_profile(
        name,
        kind,
        missing_count,
        distinct_count,
        present.is_empty(),
        &mut values,
    );
    (profile, column)
}

/// Profiles a column of numbers where NaN marks a missing cell.
pub fn profile_numeric(name: &str, column: &[f64]) -> ColumnProfile {
    let mut values: Vec<f64> = column.iter().copied().filter(|v| !v.is_nan()).collect();
    let distinct: BTreeSet<u64> = values.iter().map(|&v| numeric_key(v)).collect();
    let missing = column.len() - values.len();
    build_profile(name, DataKind::Numeric, missing, distinct.len(), values.is_empty(), &mut values)
}

fn build_profile(
    name: &str,
    kind: DataKind,
    missing_count: usize,
    distinct_count: usize,
    all_missing: bool,
    values: &mut [f64],
) -> ColumnProfile {
    let s = stats(values);
    ColumnProfile {
        name: name.to_string(),
        kind,
        missing_count,
        min: s.as_ref().map(|s| s.min),
        max: s.as_ref().map(|s| s.max),
        mean: s.as_ref().map(|s| s.mean),
        std: s.as_ref().map(|s| s.std),
        distinct_count,
        all_missing,
        zero_variance: s.as_ref().is_some_and(|s| s.max == s.min),
    }
}

/// Profiles a list of raw cells.
pub fn infer_column_profile(name: &str, cells: &[String]) -> ColumnProfile {
    classify_column(name, cells).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn numeric_with_nan_token() {
        let p = infer_column_profile("x", &cells(&["1", "2", "NaN"]));
        assert_eq!(p.kind, DataKind::Numeric);
        assert_eq!(p.missing_count, 1);
        assert_eq!(p.mean, Some(1.5));
        assert_eq!(p.distinct_count, 2);
    }

    #[test]
    fn strings_are_categorical() {
        let p = infer_column_profile("c", &cells(&["a", "b", "a"]));
        assert_eq!(p.kind, DataKind::Categorical);
        assert_eq!(p.distinct_count, 2);
        assert_eq!(p.mean, None);
    }

    #[test]
    fn partly_numeric_is_mixed() {
        let p = infer_column_profile("m", &cells(&["1", "x", "2"]));
        assert_eq!(p.kind, DataKind::Mixed);
        assert_eq!(p.missing_count, 0);
    }

    #[test]
    fn missing_tokens_case_insensitive() {
        for t in ["", " ", "NA", "n/a", "NULL", "?", "nan", "NaN"] {
            assert!(is_missing_token(t), "{t:?}");
        }
        assert!(!is_missing_token("0"));
        assert!(!is_missing_token("none"));
    }

    #[test]
    fn stray_token_in_numeric_column_counts_as_missing() {
        let mut v: Vec<String> = (0..19).map(|i| i.to_string()).collect();
        v.push("oops".into());
        let (p, col) = classify_column("n", &v);
        assert_eq!(p.kind, DataKind::Numeric);
        assert_eq!(p.missing_count, 1);
        assert!(col[19].is_nan());
    }

    #[test]
    fn all_missing_column_is_flagged_without_stats() {
        let p = infer_column_profile("e", &cells(&["", "NA", "?"]));
        assert!(p.all_missing);
        assert_eq!(p.missing_count, 3);
        assert_eq!((p.min, p.max, p.mean, p.std), (None, None, None, None));
    }

    #[test]
    fn population_std_and_zero_variance() {
        let p = profile_numeric("s", &[0.0, 10.0]);
        assert_eq!(p.mean, Some(5.0));
        assert_eq!(p.std, Some(5.0));
        assert!(!p.zero_variance);
        assert!(profile_numeric("k", &[3.0, 3.0, f64::NAN]).zero_variance);
    }
}

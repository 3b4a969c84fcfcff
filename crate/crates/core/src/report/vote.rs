use std::collections::HashSet;

use super::finding::{sort_findings, Finding};
use crate::error::{Error, Result};

/// Checks that a run count can produce a strict majority.
pub fn validate_runs(runs: usize) -> Result<()> {
    if runs == 0 || runs % 2 == 0 {
        return Err(Error::contract(format!("runs must be a positive odd number, got {runs}")));
    }
    Ok(())
}

/// Keeps each finding (identified by check id and locus) that appears in more
/// than half of the runs.
///
/// A finding repeated within a single run counts once for that run. The
/// surviving finding is taken from the earliest run that reported it, and the
/// result is sorted by check id and locus index.
pub fn majority_vote(per_run: &[Vec<Finding>], runs: usize) -> Result<Vec<Finding>> {
    validate_runs(runs)?;
    if per_run.len() != runs {
        return Err(Error::contract(format!(
            "majority vote expected findings from {runs} runs, got {}",
            per_run.len()
        )));
    }
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for (i, run) in per_run.iter().enumerate() {
        for finding in run {
            if !seen.insert(finding.key()) {
                continue;
            }
            let votes = 1 + per_run[i + 1..]
                .iter()
                .filter(|later| later.iter().any(|f| f.key() == finding.key()))
                .count();
            if votes * 2 > runs {
                kept.push(finding.clone());
            }
        }
    }
    sort_findings(&mut kept);
    Ok(kept)
}

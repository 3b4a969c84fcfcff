use std::thread;
use std::time::Instant;

use crate::error::Result;
use crate::report::{majority_vote, Finding, RunRecord, Timing};

/// Findings of a stochastic check across seeded runs, before and after voting.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOutcome {
    pub runs: Vec<RunRecord>,
    pub findings: Vec<Finding>,
}

/// Runs `check` once per seed `seed + i` for `i in 0..runs` (concurrently)
/// and keeps the findings reported by a strict majority of runs.
pub fn run_seeded<F>(runs: usize, seed: u64, check: F) -> Result<StochasticOutcome>
where
    F: Fn(u64) -> Result<Vec<Finding>> + Sync,
{
    crate::report::validate_runs(runs)?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed.wrapping_add(i)).collect();
    let results: Vec<Result<Vec<Finding>>> = thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&s| {
                let check = &check;
                scope.spawn(move || check(s))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|panic| std::panic::resume_unwind(panic)))
            .collect()
    });
    let mut records = Vec::with_capacity(runs);
    for (run, (result, seed)) in results.into_iter().zip(seeds).enumerate() {
        records.push(RunRecord {
            run,
            seed,
            findings: result?,
        });
    }
    let per_run: Vec<Vec<Finding>> = records.iter().map(|r| r.findings.clone()).collect();
    let findings = majority_vote(&per_run, runs)?;
    Ok(StochasticOutcome {
        runs: records,
        findings,
    })
}

/// Collects per-check wall-clock timings.
#[derive(Debug, Default)]
pub(crate) struct Stopwatch {
    timings: Vec<Timing>,
}

impl Stopwatch {
    pub(crate) fn time<T>(&mut self, check: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing {
            check: check.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    pub(crate) fn into_timings(self) -> Vec<Timing> {
        self.timings
    }
}

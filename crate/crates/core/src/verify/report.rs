use super::checks::{Check, Instance, Outcome, Trace};
use super::Corpus;
use crate::error::{Error, Result};
use crate::search::Budget;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::{Duration, Instant};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    /// Position of the instance within its check.
    pub index: usize,
    pub message: String,
    pub witness: Instance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub citation: String,
    pub instances: usize,
    pub passes: usize,
    pub vacuous: usize,
    /// Instances with a noteworthy but allowed result.
    pub observed: Vec<(usize, String)>,
    /// Instances that ran out of time or nodes: index and reason.
    pub limited: Vec<(usize, String)>,
    pub failures: Vec<Failure>,
    /// Kept out of the JSON so reports are byte-stable.
    #[serde(skip)]
    pub wall: Duration,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub cap: usize,
    pub counts: BTreeMap<String, usize>,
    pub checks: Vec<CheckReport>,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures.len()).sum()
    }

    pub fn limited(&self) -> usize {
        self.checks.iter().map(|c| c.limited.len()).sum()
    }

    pub fn instances(&self) -> usize {
        self.checks.iter().map(|c| c.instances).sum()
    }

    pub fn ok(&self) -> bool {
        self.failures() == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs the selected checks in the order given, instances in parallel.
/// Instances starting after the suite deadline are recorded as limited.
pub fn run_suite(corpus: &Corpus, checks: &[Check]) -> VerificationReport {
    let cfg = &corpus.config;
    let suite_deadline = Instant::now() + Duration::from_millis(cfg.suite_timeout_ms);
    let per_instance = Duration::from_millis(cfg.instance_timeout_ms);
    let mut reports = Vec::new();
    for &check in checks {
        let start = Instant::now();
        let instances = check.instances(corpus);
        let outcomes: Vec<Outcome> = instances
            .par_iter()
            .map(|inst| {
                if Instant::now() > suite_deadline {
                    return Outcome::Limit("suite deadline passed".into());
                }
                inst.evaluate(Budget::nodes(cfg.max_nodes).within(per_instance))
            })
            .collect();
        let mut rep = CheckReport {
            name: check.name().into(),
            citation: check.citation().into(),
            instances: instances.len(),
            passes: 0,
            vacuous: 0,
            observed: Vec::new(),
            limited: Vec::new(),
            failures: Vec::new(),
            wall: Duration::ZERO,
        };
        for (index, (inst, out)) in instances.into_iter().zip(outcomes).enumerate() {
            match out {
                Outcome::Pass => rep.passes += 1,
                Outcome::Vacuous => rep.vacuous += 1,
                Outcome::Observed(m) => rep.observed.push((index, m)),
                Outcome::Limit(m) => rep.limited.push((index, m)),
                Outcome::Fail(message) => rep.failures.push(Failure { index, message, witness: inst }),
            }
        }
        rep.wall = start.elapsed();
        reports.push(rep);
    }
    VerificationReport { cap: cfg.cap, counts: corpus.counts(), checks: reports }
}

pub fn render_table(report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<30} {:>9} {:>7} {:>7} {:>8} {:>7} {:>8} {:>9}", "check", "instances", "pass", "vacuous", "observed", "limited", "failures", "wall");
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{:<30} {:>9} {:>7} {:>7} {:>8} {:>7} {:>8} {:>8.2}s",
            c.name,
            c.instances,
            c.passes,
            c.vacuous,
            c.observed.len(),
            c.limited.len(),
            c.failures.len(),
            c.wall.as_secs_f64()
        );
    }
    let _ = writeln!(s, "total: {} instances, {} failures, {} limited", report.instances(), report.failures(), report.limited());
    s
}

/// Re-runs one recorded failure with a trace of intermediate verdicts.
pub fn explain_failure(report: &VerificationReport, check: &str, index: usize) -> Result<String> {
    let c = report.check(check).ok_or_else(|| Error::Precondition(format!("no check `{check}` in the report")))?;
    if c.failures.is_empty() {
        return Ok("no failure".into());
    }
    let f = c.failures.get(index).ok_or_else(|| {
        Error::Precondition(format!("failure index {index} out of range: `{check}` has {}", c.failures.len()))
    })?;
    let mut t = Trace::verbose();
    let outcome = f.witness.evaluate_traced(Budget::default(), &mut t);
    let mut s = format!("{check} instance {}: {}\n", f.index, c.citation);
    for line in t.into_lines() {
        let _ = writeln!(s, "  {line}");
    }
    let _ = match outcome {
        Outcome::Fail(m) => writeln!(s, "failed: {m}"),
        Outcome::Limit(m) => writeln!(s, "inconclusive: {m}"),
        Outcome::Pass | Outcome::Vacuous | Outcome::Observed(_) => writeln!(s, "passes on re-run; recorded failure: {}", f.message),
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{build_corpus, CorpusConfig};

    #[test]
    fn empty_selection_is_empty() {
        let c = build_corpus(&CorpusConfig::with_cap(2)).unwrap();
        let r = run_suite(&c, &[]);
        assert!(r.checks.is_empty() && r.ok());
    }

    #[test]
    fn small_full_suite_passes_and_explains_nothing() {
        let c = build_corpus(&CorpusConfig::with_cap(3)).unwrap();
        let r = run_suite(&c, &Check::ALL);
        assert!(r.ok(), "{}", render_table(&r));
        assert_eq!(r.limited(), 0);
        assert_eq!(explain_failure(&r, "double-dual", 0).unwrap(), "no failure");
        assert!(explain_failure(&r, "missing", 0).is_err());
    }

    #[test]
    fn json_omits_timings() {
        let c = build_corpus(&CorpusConfig::with_cap(2)).unwrap();
        let a = serde_json::to_string(&run_suite(&c, &[Check::DoubleDual])).unwrap();
        let b = serde_json::to_string(&run_suite(&c, &[Check::DoubleDual])).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("wall"));
    }
}

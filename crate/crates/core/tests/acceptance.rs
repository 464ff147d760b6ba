//! Acceptance run: one line per criterion, non-zero exit if any fails.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabcan::syntax::{parse_rule, Sig};
use stabcan::verify::*;
use std::time::{Duration, Instant};

const OWN_SCR_CAP: usize = 6;
const AXIOM_CAP: usize = 5;
const SUITE_CAP: usize = 4;
const MIN_DUAL_PAIRS: usize = 200;
const CORRUPTIONS: usize = 25;
const FAULT_SEED: u64 = 20;
const TIME_LIMIT: Duration = Duration::from_secs(15 * 60);

struct Line {
    passed: bool,
    detail: String,
}

fn suite(corpus: &Corpus, checks: &[Check]) -> Line {
    summarize(&run_suite(corpus, checks))
}

fn summarize(r: &VerificationReport) -> Line {
    let mut detail = Vec::new();
    for c in &r.checks {
        detail.push(format!("{} {}/{}", c.name, c.passes + c.vacuous, c.instances));
        for f in c.failures.iter().take(2) {
            detail.push(format!("FAIL {}#{}: {}", c.name, f.index, f.message));
        }
        for (i, m) in c.limited.iter().take(2) {
            detail.push(format!("LIMIT {}#{}: {}", c.name, i, m));
        }
    }
    let nonempty = r.checks.iter().all(|c| c.instances > 0);
    Line { passed: r.ok() && r.limited() == 0 && nonempty, detail: detail.join(", ") }
}

fn main() {
    let start = Instant::now();
    let small = build_corpus(&CorpusConfig::with_cap(SUITE_CAP)).expect("cap-4 corpus");
    let mut lines: Vec<(u8, &str, Line)> = Vec::new();

    let big = build_corpus(&CorpusConfig::with_cap(OWN_SCR_CAP)).expect("cap-6 corpus");
    lines.push((1, "patterns refute their own rules", suite(&big, &[Check::OwnScr])));
    drop(big);

    let r2 = run_suite(&small, &[Check::DualPath]);
    let mut l = summarize(&r2);
    let pairs = r2.instances();
    l.passed &= pairs >= MIN_DUAL_PAIRS;
    l.detail.push_str(&format!(" (need >= {MIN_DUAL_PAIRS})"));
    lines.push((2, "syntactic and embedding refutation agree", l));

    let mid = build_corpus(&CorpusConfig::with_cap(AXIOM_CAP)).expect("cap-5 corpus");
    let mut l = suite(&mid, &[Check::Axiomatization]);
    let required = ["./p \\/ (p -> F)", "p / box p", "./p"].map(|t| parse_rule(t, Sig::Im).unwrap());
    let covered = required.iter().all(|r| mid.rules.contains(r));
    l.passed &= covered;
    l.detail.push_str(&format!(" (required rules covered: {covered})"));
    lines.push((3, "rules match their generated axiomatizations", l));
    drop(mid);

    lines.push((
        4,
        "finite duality",
        suite(&small, &[Check::DoubleDual, Check::FrameValidity, Check::BoxAbsorption]),
    ));
    lines.push((
        5,
        "sigma and rho",
        suite(
            &small,
            &[
                Check::RhoSigmaAlgebra,
                Check::RhoSigmaFrame,
                Check::SigmaRhoEmbedding,
                Check::TranslationEquivalence,
                Check::TranslationEquivalenceFrame,
                Check::GrzCollapse,
                Check::GrzFrameProperties,
            ],
        ),
    ));

    let r6 = run_suite(&small, &[Check::RuleCollapse, Check::RuleTranslation, Check::SplitClusters]);
    let mut l = summarize(&r6);
    let built = r6.checks[2].passes;
    l.passed &= built > 0;
    l.detail.push_str(&format!(" ({built} split instances constructed)"));
    lines.push((6, "cluster collapse, translation and splitting", l));

    lines.push((7, "geometric refutation criteria", suite(&small, &[Check::Geometric])));

    let base = run_suite(&small, &[Check::CorpusIntegrity]);
    let mut rng = ChaCha8Rng::seed_from_u64(FAULT_SEED);
    let mut caught = 0;
    let mut missed = Vec::new();
    for _ in 0..CORRUPTIONS {
        let k = random_corruption(&small, &mut rng);
        let d = detect_corruption(&small, &k);
        let witnessed = !d.failures.is_empty() && d.failures.iter().all(|f| serde_json::to_string(&f.witness).is_ok());
        if d.detected() && witnessed {
            caught += 1;
        } else {
            missed.push(format!("{k:?}"));
        }
    }
    lines.push((
        8,
        "single-entry corruptions are detected",
        Line {
            passed: base.ok() && caught == CORRUPTIONS,
            detail: format!("{caught}/{CORRUPTIONS} caught, clean corpus ok: {}{}", base.ok(), missed.join("; ")),
        },
    ));

    let elapsed = start.elapsed();
    let mut all = true;
    for (n, name, l) in &lines {
        all &= l.passed;
        println!("criterion {n} [{}] {name}: {}", if l.passed { "PASS" } else { "FAIL" }, l.detail);
    }
    let in_time = elapsed <= TIME_LIMIT;
    println!("elapsed {:.1}s [{}]", elapsed.as_secs_f64(), if in_time { "PASS" } else { "FAIL" });
    if !(all && in_time) {
        std::process::exit(1);
    }
}

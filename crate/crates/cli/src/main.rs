use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use stabcan::algebra::{validate, validates_rule, AlgebraSpec, Flavor, FiniteAlgebra, Logic, Verdict};
use stabcan::duality::{dual_algebra, dual_frame, frame_validates_rule, world_list, FiniteFrame, FrameKind};
use stabcan::filtration::{filtrate, RefutationPattern};
use stabcan::rules::{axiomatize, build_scr, corpus_for, StableCanonicalRule};
use stabcan::search::{Budget, DEFAULT_MAX_NODES};
use stabcan::syntax::{
    godel_translate, godel_translate_rule, parse_formula, parse_rule, print_formula, print_rule, Sig,
};
use stabcan::translate::{modal_companion_check, rho_algebra, rho_frame, sigma_algebra, sigma_frame};
use stabcan::verify::{
    build_corpus, corpus_from, detect_corruption, explain_failure, random_corruption, render_table, run_suite, Check,
    CorpusConfig, VerificationReport,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stabcan", version, about = "Stable canonical rules on finite algebras and frames")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Node budget for each exhaustive search.
    #[arg(long, global = true, env = "STABCAN_BUDGET", default_value_t = DEFAULT_MAX_NODES)]
    budget: u64,
    /// Worker threads for parallel checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write JSON here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Target {
    #[arg(long, conflicts_with = "frame")]
    algebra: Option<PathBuf>,
    #[arg(long)]
    frame: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula or rule and print it back.
    Parse {
        text: String,
        #[arg(long, default_value = "im")]
        sig: Sig,
    },
    /// Check the axioms of an algebra file.
    Validate { algebra: PathBuf },
    /// Decide a rule on an algebra or frame.
    Check {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        rule: String,
    },
    /// Filtrate a refutation of a rule into a refutation pattern.
    Filtrate {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        rule: String,
        /// JSON object from variables to element indices; defaults to the
        /// first countervaluation.
        #[arg(long)]
        valuation: Option<String>,
    },
    /// Build the stable canonical rule of a pattern.
    Scr {
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Stable canonical rules of every filtrated refutation up to a size.
    Axiomatize {
        #[arg(long)]
        rule: String,
        #[arg(long, default_value = "im")]
        sig: Sig,
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Dual frame of an algebra, or dual algebra of a frame.
    Dualize {
        #[command(flatten)]
        target: Target,
    },
    /// Translate an intuitionistic modal formula or rule into bimodal.
    Translate { text: String },
    /// Read an im frame or modal Heyting algebra bimodally.
    Sigma {
        #[command(flatten)]
        target: Target,
    },
    /// Collapse the first-relation clusters of a bimodal frame or algebra.
    Rho {
        #[command(flatten)]
        target: Target,
    },
    /// Compare im models of L with rho images of bimodal models of M.
    CompanionCheck {
        #[arg(long = "l")]
        l: Vec<String>,
        #[arg(long = "m")]
        m: Vec<String>,
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Rule collapse, rule translation and cluster splitting over a corpus.
    DummettLemmonCheck {
        /// Directory of algebra and frame JSON files; the enumerated
        /// corpus is used when absent.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Run the verification suite, or explain a recorded failure.
    Verify {
        #[arg(long, default_value_t = 4)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated check names; all checks when absent.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Also run this many seeded single-entry corruptions.
        #[arg(long, default_value_t = 0)]
        faults: usize,
        /// Read a report instead of running; use with --explain.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, requires = "report")]
        explain: Option<String>,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

enum Failure {
    Input(String),
    Alarm(String),
}

impl From<stabcan::Error> for Failure {
    fn from(e: stabcan::Error) -> Failure {
        match e {
            stabcan::Error::Alarm(_) => Failure::Alarm(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::Input(format!("bad JSON: {e}"))
    }
}

type Outcome = Result<bool, Failure>;

struct Ctx {
    budget: Budget,
    output: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, v: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(v)? + "\n";
        self.emit_text(&text)
    }

    fn emit_text(&self, text: &str) -> Result<(), Failure> {
        match &self.output {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
}

fn sig_of_algebra(a: &FiniteAlgebra) -> Sig {
    if a.flavor().is_boolean() {
        Sig::Bi
    } else {
        Sig::Im
    }
}

fn sig_of_frame(f: &FiniteFrame) -> Sig {
    match f.kind() {
        FrameKind::Im => Sig::Im,
        FrameKind::Bi => Sig::Bi,
    }
}

fn scr_json(s: &StableCanonicalRule) -> Value {
    json!({ "pattern": s.source, "sig": s.sig(), "rule": print_rule(&s.rule), "varmap": s.varmap })
}

/// A frame's JSON with extra keys; frame readers ignore them.
fn with_fields(f: &FiniteFrame, extra: Value) -> Result<Value, Failure> {
    let mut v = serde_json::to_value(f)?;
    if let (Some(o), Value::Object(e)) = (v.as_object_mut(), extra) {
        o.extend(e);
    }
    Ok(v)
}

fn verdict_json(v: &Verdict) -> Value {
    json!({ "valid": v.is_valid(), "countervaluation": v.countervaluation() })
}

fn target_missing() -> Failure {
    Failure::Input("give --algebra or --frame".into())
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx { budget: Budget::nodes(cli.common.budget), output: cli.common.output };
    let budget = ctx.budget;
    match cli.cmd {
        Cmd::Parse { text, sig } => {
            let out = if text.contains('/') {
                let r = parse_rule(&text, sig)?;
                json!({ "sig": sig, "kind": "rule", "text": print_rule(&r), "vars": r.vars() })
            } else {
                let f = parse_formula(&text, sig)?;
                json!({ "sig": sig, "kind": "formula", "text": print_formula(&f), "vars": f.vars() })
            };
            ctx.emit(&out)?;
            Ok(true)
        }
        Cmd::Validate { algebra } => {
            let spec: AlgebraSpec = read_json(&algebra)?;
            let rep = validate(&spec);
            ctx.emit(&json!({ "ok": rep.ok(), "failures": rep.failures }))?;
            Ok(rep.ok())
        }
        Cmd::Check { target, rule } => match (target.algebra, target.frame) {
            (Some(p), _) => {
                let a: FiniteAlgebra = read_json(&p)?;
                let v = validates_rule(&a, &parse_rule(&rule, sig_of_algebra(&a))?, budget)?;
                ctx.emit(&verdict_json(&v))?;
                Ok(v.is_valid())
            }
            (None, Some(p)) => {
                let f: FiniteFrame = read_json(&p)?;
                let v = frame_validates_rule(&f, &parse_rule(&rule, sig_of_frame(&f))?, budget)?;
                ctx.emit(&json!({ "valid": v.is_valid(), "verdict": v }))?;
                Ok(v.is_valid())
            }
            (None, None) => Err(target_missing()),
        },
        Cmd::Filtrate { algebra, rule, valuation } => {
            let a: FiniteAlgebra = read_json(&algebra)?;
            let r = parse_rule(&rule, sig_of_algebra(&a))?;
            let v = match valuation {
                Some(text) => serde_json::from_str(&text)?,
                None => match validates_rule(&a, &r, budget)? {
                    Verdict::Refuted(v) => v,
                    Verdict::Valid => {
                        ctx.emit(&json!({ "valid": true, "pattern": null }))?;
                        return Ok(false);
                    }
                },
            };
            ctx.emit(&filtrate(&a, &v, &r)?)?;
            Ok(true)
        }
        Cmd::Scr { pattern } => {
            let p: RefutationPattern = read_json(&pattern)?;
            ctx.emit(&scr_json(&build_scr(&p)?))?;
            Ok(true)
        }
        Cmd::Axiomatize { rule, sig, cap } => {
            let r = parse_rule(&rule, sig)?;
            let scrs = axiomatize(&r, cap, budget)?;
            let list: Vec<Value> = scrs.iter().map(scr_json).collect();
            ctx.emit(&json!({ "rule": print_rule(&r), "sig": sig, "cap": cap, "scrs": list }))?;
            Ok(true)
        }
        Cmd::Dualize { target } => match (target.algebra, target.frame) {
            (Some(p), _) => {
                let a: FiniteAlgebra = read_json(&p)?;
                let d = dual_frame(&a)?;
                let beta: Vec<Vec<usize>> = d.beta.iter().map(|&m| world_list(m)).collect();
                ctx.emit(&with_fields(&d.frame, json!({ "beta": beta, "generators": d.generators }))?)?;
                Ok(true)
            }
            (None, Some(p)) => {
                let f: FiniteFrame = read_json(&p)?;
                ctx.emit(&dual_algebra(&f)?)?;
                Ok(true)
            }
            (None, None) => Err(target_missing()),
        },
        Cmd::Translate { text } => {
            let (kind, out) = if text.contains('/') {
                ("rule", print_rule(&godel_translate_rule(&parse_rule(&text, Sig::Im)?)?))
            } else {
                ("formula", print_formula(&godel_translate(&parse_formula(&text, Sig::Im)?)?))
            };
            ctx.emit(&json!({ "kind": kind, "sig": Sig::Bi, "text": out }))?;
            Ok(true)
        }
        Cmd::Sigma { target } => match (target.algebra, target.frame) {
            (Some(p), _) => {
                ctx.emit(&sigma_algebra(&read_json(&p)?)?)?;
                Ok(true)
            }
            (None, Some(p)) => {
                ctx.emit(&sigma_frame(&read_json(&p)?)?)?;
                Ok(true)
            }
            (None, None) => Err(target_missing()),
        },
        Cmd::Rho { target } => match (target.algebra, target.frame) {
            (Some(p), _) => {
                ctx.emit(&rho_algebra(&read_json(&p)?)?)?;
                Ok(true)
            }
            (None, Some(p)) => {
                let q = rho_frame(&read_json(&p)?)?;
                ctx.emit(&with_fields(&q.result, json!({ "classes": q.classes, "projection": q.projection }))?)?;
                Ok(true)
            }
            (None, None) => Err(target_missing()),
        },
        Cmd::CompanionCheck { l, m, cap } => {
            let l = l.iter().map(|t| parse_rule(t, Sig::Im)).collect::<Result<Vec<_>, _>>()?;
            let m = m.iter().map(|t| parse_rule(t, Sig::Bi)).collect::<Result<Vec<_>, _>>()?;
            let bimodal = stabcan::algebra::enumerate_algebras(Flavor::Bimodal, cap, &|a| {
                stabcan::algebra::check_logic(a, Logic::S4K).unwrap_or(false)
            })?;
            let im = corpus_for(Sig::Im, cap)?;
            let rep = modal_companion_check(&l, &m, &bimodal, &im, budget)?;
            ctx.emit(&rep)?;
            Ok(rep.holds())
        }
        Cmd::DummettLemmonCheck { dir, cap } => {
            let config = CorpusConfig { max_nodes: budget.max_nodes, ..CorpusConfig::with_cap(cap) };
            let corpus = match dir {
                None => build_corpus(&config)?,
                Some(d) => {
                    let (algebras, frames) = load_dir(&d)?;
                    corpus_from(&config, algebras, frames)?
                }
            };
            let rep = run_suite(&corpus, &[Check::RuleCollapse, Check::RuleTranslation, Check::SplitClusters]);
            eprint!("{}", render_table(&rep));
            ctx.emit(&rep)?;
            Ok(rep.ok())
        }
        Cmd::Verify { cap, seed, checks, faults, report, explain, index } => {
            if let Some(p) = report {
                let rep: VerificationReport = read_json(&p)?;
                return match explain {
                    Some(check) => {
                        ctx.emit_text(&explain_failure(&rep, &check, index)?)?;
                        Ok(true)
                    }
                    None => {
                        eprint!("{}", render_table(&rep));
                        Ok(rep.ok())
                    }
                };
            }
            let selection = if checks.is_empty() {
                Check::ALL.to_vec()
            } else {
                checks.iter().map(|c| Check::from_name(c)).collect::<Result<Vec<_>, _>>()?
            };
            let config = CorpusConfig { seed, max_nodes: budget.max_nodes, ..CorpusConfig::with_cap(cap) };
            let corpus = build_corpus(&config)?;
            let rep = run_suite(&corpus, &selection);
            eprint!("{}", render_table(&rep));
            if faults == 0 {
                ctx.emit(&rep)?;
                return Ok(rep.ok());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let detections: Vec<_> =
                (0..faults).map(|_| detect_corruption(&corpus, &random_corruption(&corpus, &mut rng))).collect();
            let caught = detections.iter().filter(|d| d.detected()).count();
            eprintln!("faults: {caught}/{faults} detected");
            ctx.emit(&json!({ "report": rep, "faults": detections }))?;
            Ok(rep.ok() && caught == faults)
        }
    }
}

/// Algebra and frame files of a directory, in file name order; frames are
/// told apart by their `kind` field.
fn load_dir(dir: &Path) -> Result<(Vec<FiniteAlgebra>, Vec<FiniteFrame>), Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let (mut algebras, mut frames) = (Vec::new(), Vec::new());
    for p in paths {
        let v: BTreeMap<String, Value> = read_json(&p)?;
        if v.contains_key("kind") {
            frames.push(read_json(&p)?);
        } else {
            algebras.push(read_json(&p)?);
        }
    }
    Ok((algebras, frames))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Alarm(m)) => {
            eprintln!("alarm: {m}");
            ExitCode::from(3)
        }
    }
}

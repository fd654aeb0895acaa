use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use faultsat_core::bmc::{generate_counterexamples, Target};
use faultsat_core::encode::{assign_loop_weights, build_instance, export_wcnf, import_wcnf, Granularity};
use faultsat_core::exec::{execute, TestInput, Verdict};
use faultsat_core::lang::{compile, AssertKind, LowerOptions, Program};
use faultsat_core::localize::{
    failing_assertion, localize, rank, LocalizationReport, LocalizeError, LocalizeOptions, TestSource,
};
use faultsat_core::maxsat::{solve_pmaxsat, MaxSatError, MaxSatOptions};
use faultsat_core::repair::{repair, Families, RepairError};
use faultsat_core::report::{
    to_json, AssertionJson, CheckJson, CounterexampleJson, LocalizeJson, Meta, RepairJson,
};
use faultsat_core::sat::dimacs::parse_cnf;
use faultsat_core::sat::{solve, Status};

/// Fault localization and repair for MiniC programs.
#[derive(Parser)]
#[command(name = "faultsat", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for an assertion violation within the unrolling bound.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Number of distinct counterexamples to report.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Enumerate potential bug locations for one failing test.
    Localize {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tests: Tests,
    },
    /// Localize several failing tests and rank locations by frequency.
    Rank {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tests: Tests,
        /// Generate this many failing tests by model checking (used when no
        /// tests are given).
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Try constant ±1 and operator mutations on localized lines.
    Repair {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        off_by_one: bool,
        #[arg(long)]
        operator: bool,
    },
    /// Write the localization instance of a failing test as DIMACS WCNF.
    ExportWcnf {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tests: Tests,
    },
    /// Execute the program on the given tests.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tests: Tests,
    },
    /// Solve a DIMACS WCNF instance.
    Maxsat {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a DIMACS CNF instance.
    Sat {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Loop unrolling bound.
    #[arg(short = 'k', long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    bound: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bit width of `int` (4, 8, 16 or 32).
    #[arg(long, default_value_t = 8, value_parser = parse_width)]
    width: u32,
    /// Base weight of a statement's soft clause.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    alpha: u64,
    /// One selector per loop iteration, weighted towards later iterations.
    #[arg(long)]
    iter_granularity: bool,
    #[arg(long, default_value_t = 32)]
    max_iters: usize,
    /// Function whose statements are never blamed (repeatable).
    #[arg(long)]
    trusted: Vec<String>,
    #[arg(long)]
    json: bool,
    /// Write the report here instead of standard output.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Include per-call solver times in JSON reports.
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Clone)]
struct Tests {
    /// Test input such as `x=1 a=[2,3]` (repeatable).
    #[arg(long = "test")]
    test: Vec<String>,
    /// JSON file holding an array of tests, e.g. `[{"x": 1}]`.
    #[arg(long)]
    tests_file: Option<PathBuf>,
}

fn parse_width(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(w) if faultsat_core::lang::WIDTHS.contains(&w) => Ok(w),
        _ => Err("width must be one of 4, 8, 16, 32".into()),
    }
}

/// Outcome of a command: report text and whether anything was found.
struct Outcome {
    text: String,
    found: bool,
}

/// Errors that map to exit code 1 rather than 2.
#[derive(Debug)]
struct NoResult(String);

impl std::fmt::Display for NoResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NoResult {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok((out, outcome)) => {
            if let Err(e) = emit(out.as_deref(), &outcome.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.found { 0 } else { 1 })
        }
        Err(e) => {
            if let Some(n) = e.downcast_ref::<NoResult>() {
                println!("{n}");
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(Option<PathBuf>, Outcome)> {
    match cmd {
        Cmd::Check { file, common, count } => Ok((common.output.clone(), cmd_check(&file, &common, count)?)),
        Cmd::Localize { file, common, tests } => Ok((common.output.clone(), cmd_localize(&file, &common, &tests)?)),
        Cmd::Rank {
            file,
            common,
            tests,
            count,
        } => Ok((common.output.clone(), cmd_rank(&file, &common, &tests, count)?)),
        Cmd::Repair {
            file,
            common,
            off_by_one,
            operator,
        } => {
            let families = if off_by_one || operator {
                Families { off_by_one, operator }
            } else {
                Families {
                    off_by_one: true,
                    operator: true,
                }
            };
            Ok((common.output.clone(), cmd_repair(&file, &common, families)?))
        }
        Cmd::ExportWcnf { file, common, tests } => Ok((common.output.clone(), cmd_export(&file, &common, &tests)?)),
        Cmd::Run { file, common, tests } => Ok((common.output.clone(), cmd_run(&file, &common, &tests)?)),
        Cmd::Maxsat { file, seed } => Ok((None, cmd_maxsat(&file, seed)?)),
        Cmd::Sat { file, seed } => Ok((None, cmd_sat(&file, seed)?)),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn lower_options(file: &Path, c: &Common) -> LowerOptions {
    LowerOptions {
        bound: c.bound,
        width: c.width,
        trusted: c.trusted.clone(),
        file: file.display().to_string(),
    }
}

fn load(file: &Path, c: &Common) -> Result<(String, Program)> {
    let src = read(file)?;
    let p = compile(&src, &lower_options(file, c)).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    Ok((src, p))
}

fn granularity(c: &Common) -> Granularity {
    if c.iter_granularity {
        Granularity::Iteration
    } else {
        Granularity::Statement
    }
}

fn localize_options(c: &Common) -> LocalizeOptions {
    LocalizeOptions {
        granularity: granularity(c),
        alpha: c.alpha,
        max_iterations: c.max_iters,
        seed: c.seed,
        ..LocalizeOptions::default()
    }
}

fn meta(c: &Common) -> Meta {
    Meta {
        seed: c.seed,
        bound: c.bound,
        width: c.width,
        granularity: granularity(c),
        alpha: c.alpha,
        max_iterations: c.max_iters,
        times_ms: c.timings.then(Vec::new),
    }
}

fn collect_tests(t: &Tests, p: &Program) -> Result<Vec<TestInput>> {
    let mut out = Vec::new();
    for spec in &t.test {
        out.push(TestInput::parse_spec(spec)?);
    }
    if let Some(path) = &t.tests_file {
        let text = read(path)?;
        let more: Vec<TestInput> =
            serde_json::from_str(&text).with_context(|| format!("parsing tests in {}", path.display()))?;
        out.extend(more);
    }
    for t in &out {
        t.validate(p).with_context(|| format!("test `{}`", t.describe()))?;
    }
    Ok(out)
}

/// The first supplied test that fails, or a counterexample when none were
/// supplied.
fn failing_test(p: &Program, c: &Common, t: &Tests) -> Result<TestInput> {
    let tests = collect_tests(t, p)?;
    if tests.is_empty() {
        let cx = generate_counterexamples(p, Target::Any, c.seed, 1)?;
        return cx
            .into_iter()
            .next()
            .map(|cx| cx.test)
            .ok_or_else(|| NoResult("No counterexample to p found".into()).into());
    }
    tests
        .into_iter()
        .find(|t| failing_assertion(p, t).is_some())
        .ok_or_else(|| NoResult("No failing test among those given".into()).into())
}

fn assertion_json(p: &Program, id: faultsat_core::lang::AssertId) -> AssertionJson {
    let a = p.assertion(id);
    AssertionJson {
        line: a.line,
        column: a.column,
        kind: match a.kind {
            AssertKind::Explicit => "assertion",
            AssertKind::ArrayBounds => "array-bounds",
            AssertKind::DivisionGuard => "division-guard",
        },
        text: a.text.clone(),
    }
}

fn cmd_check(file: &Path, c: &Common, count: usize) -> Result<Outcome> {
    let (_, p) = load(file, c)?;
    let cxs = generate_counterexamples(&p, Target::Any, c.seed, count.max(1))?;
    let found = !cxs.is_empty();
    let items: Vec<CounterexampleJson> = cxs
        .iter()
        .map(|cx| {
            let mut lines: Vec<u32> = Vec::new();
            for &t in &cx.trace {
                let tr = p.transition(t);
                let l = tr.line;
                if tr.stmt.is_some() && lines.last() != Some(&l) {
                    lines.push(l);
                }
            }
            CounterexampleJson {
                test: cx.test.clone(),
                assertion: assertion_json(&p, cx.assertion),
                trace_lines: lines,
            }
        })
        .collect();
    if c.json {
        let j = CheckJson {
            file: p.file.clone(),
            counterexamples: items,
            meta: meta(c),
        };
        return Ok(Outcome { text: to_json(&j), found });
    }
    let mut text = String::new();
    if !found {
        text.push_str("No counterexample to p found\n");
    }
    for cx in &items {
        text.push_str(&format!(
            "Counterexample: {}\n  violates {} at {}:{}:{}: {}\n  trace lines: {}\n",
            display_test(&cx.test),
            cx.assertion.kind,
            p.file,
            cx.assertion.line,
            cx.assertion.column,
            cx.assertion.text,
            cx.trace_lines.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
        ));
    }
    Ok(Outcome { text, found })
}

fn display_test(t: &TestInput) -> String {
    if t.values.is_empty() {
        "(no inputs)".into()
    } else {
        t.describe()
    }
}

fn localize_text(r: &LocalizationReport) -> String {
    let mut text = String::new();
    for (i, comss) in r.iterations.iter().enumerate() {
        let locs: Vec<String> = comss.statements.iter().map(|s| s.to_string()).collect();
        text.push_str(&format!("  CoMSS {}: {}  (cost {})\n", i + 1, locs.join(", "), comss.cost));
    }
    if r.exhausted {
        text.push_str("No more suspects.\n");
    } else {
        text.push_str(&format!("Stopped after {} iterations.\n", r.iterations.len()));
    }
    text
}

fn map_localize(e: LocalizeError) -> anyhow::Error {
    match e {
        LocalizeError::NotAFailingTest => NoResult("The test does not fail".into()).into(),
        LocalizeError::NoFailingTests => NoResult("No failing tests".into()).into(),
        e => e.into(),
    }
}

fn cmd_localize(file: &Path, c: &Common, t: &Tests) -> Result<Outcome> {
    let (_, p) = load(file, c)?;
    let test = failing_test(&p, c, t)?;
    let a = failing_assertion(&p, &test).expect("failing test");
    let r = localize(&p, a, &test, &localize_options(c)).map_err(map_localize)?;
    let found = !r.iterations.is_empty();
    if c.json {
        let j = LocalizeJson::new(&p.file, Some(&test), &r, meta(c));
        return Ok(Outcome { text: to_json(&j), found });
    }
    let mut text = format!("Potential bug locations in {} for test {}:\n", p.file, display_test(&test));
    text.push_str(&localize_text(&r));
    Ok(Outcome { text, found })
}

fn cmd_rank(file: &Path, c: &Common, t: &Tests, count: usize) -> Result<Outcome> {
    let (_, p) = load(file, c)?;
    let tests = collect_tests(t, &p)?;
    let source = if tests.is_empty() {
        TestSource::Generated { count }
    } else {
        TestSource::Given(tests)
    };
    let r = rank(&p, Target::Any, &source, &localize_options(c)).map_err(map_localize)?;
    if c.json {
        let j = LocalizeJson::new(&p.file, None, &r, meta(c));
        return Ok(Outcome {
            text: to_json(&j),
            found: true,
        });
    }
    let mut text = format!("Ranking over {} failing tests in {}:\n", r.per_test_runs.len(), p.file);
    for e in &r.ranking {
        text.push_str(&format!("  {}:{}  {}\n", e.file, e.line, e.count));
    }
    Ok(Outcome { text, found: true })
}

fn cmd_repair(file: &Path, c: &Common, families: Families) -> Result<Outcome> {
    let src = read(file)?;
    let lower = lower_options(file, c);
    let r = match repair(&src, &lower, &localize_options(c), families) {
        Ok(r) => r,
        Err(RepairError::NotAFailingProgram) => bail!(NoResult("No counterexample to p found".into())),
        Err(RepairError::Localize(e)) => return Err(map_localize(e)),
        Err(e) => return Err(e.into()),
    };
    let found = r.primary().is_some();
    if c.json {
        let j = RepairJson::new(&lower.file, &r, meta(c));
        return Ok(Outcome { text: to_json(&j), found });
    }
    let mut text = format!(
        "Failing test {}; localized lines {}\n",
        display_test(&r.test),
        r.lines.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
    );
    if !found {
        text.push_str("No repair found\n");
    }
    for (i, cand) in r.verified().enumerate() {
        text.push_str(&format!(
            "{} repair at {}:{}: {} -> {}\n{}",
            if i == 0 { "Primary" } else { "Alternative" },
            cand.file,
            cand.line,
            cand.original,
            cand.replacement,
            cand.patch
        ));
    }
    let rejected = r.candidates.iter().filter(|c| !c.verified).count();
    text.push_str(&format!("{rejected} other candidates did not verify\n"));
    Ok(Outcome { text, found })
}

fn cmd_export(file: &Path, c: &Common, t: &Tests) -> Result<Outcome> {
    let (_, p) = load(file, c)?;
    let test = failing_test(&p, c, t)?;
    let a = failing_assertion(&p, &test).expect("failing test");
    let mut inst = build_instance(&p, &test, a, granularity(c), c.alpha)?;
    if c.iter_granularity {
        assign_loop_weights(&mut inst, c.alpha, c.bound)?;
    }
    Ok(Outcome {
        text: export_wcnf(&inst),
        found: true,
    })
}

fn cmd_run(file: &Path, c: &Common, t: &Tests) -> Result<Outcome> {
    let (_, p) = load(file, c)?;
    let mut tests = collect_tests(t, &p)?;
    if tests.is_empty() {
        tests.push(TestInput::new());
        tests[0].validate(&p).context("the program has inputs; pass --test")?;
    }
    let mut rows = Vec::new();
    let mut text = String::new();
    for test in &tests {
        let r = execute(&p, test);
        let state = r.named_state(&p);
        let verdict = match r.verdict {
            Verdict::Pass => "pass".to_string(),
            Verdict::Fail { line, .. } => format!("fail at line {line}"),
            Verdict::BoundExceeded => "bound exceeded".to_string(),
            Verdict::Blocked => "blocked by assume".to_string(),
        };
        text.push_str(&format!("{}: {verdict}\n", display_test(test)));
        for (k, v) in &state {
            text.push_str(&format!("  {k} = {v}\n"));
        }
        rows.push(serde_json::json!({ "test": test, "verdict": r.verdict, "state": state }));
    }
    if c.json {
        text = serde_json::to_string_pretty(&rows)? + "\n";
    }
    Ok(Outcome { text, found: true })
}

fn cmd_maxsat(file: &Path, seed: u64) -> Result<Outcome> {
    let inst = import_wcnf(&read(file)?)?;
    match solve_pmaxsat(
        &inst,
        &MaxSatOptions {
            seed,
            ..MaxSatOptions::default()
        },
    ) {
        Ok(sol) => {
            let mut text = format!("o {}\ns OPTIMUM FOUND\n", sol.cost);
            for (sel, g) in sol.comss.selectors.iter().zip(&sol.comss.groups) {
                match &inst.groups[*g].location {
                    Some(loc) => text.push_str(&format!("c comss {} {loc}\n", sel.pos())),
                    None => text.push_str(&format!("c comss {}\n", sel.pos())),
                }
            }
            Ok(Outcome { text, found: true })
        }
        Err(MaxSatError::HardUnsat) => Ok(Outcome {
            text: "s UNSATISFIABLE\n".into(),
            found: false,
        }),
        Err(e) => Err(e.into()),
    }
}

fn cmd_sat(file: &Path, seed: u64) -> Result<Outcome> {
    let cnf = parse_cnf(&read(file)?)?;
    let r = solve(&cnf, &[], seed);
    match r.status {
        Status::Sat => {
            let lits: Vec<String> = (0..cnf.var_count())
                .map(|i| {
                    let v = i as i64 + 1;
                    if r.model[i] { v } else { -v }.to_string()
                })
                .collect();
            Ok(Outcome {
                text: format!("s SATISFIABLE\nv {} 0\n", lits.join(" ")),
                found: true,
            })
        }
        Status::Unsat => Ok(Outcome {
            text: "s UNSATISFIABLE\n".into(),
            found: false,
        }),
        Status::Unknown => Ok(Outcome {
            text: "s UNKNOWN\n".into(),
            found: false,
        }),
    }
}

//! Command line interface.
//!
//! Subcommands: `e` prints one polynomial, `monk` expands a product by the
//! combinatorial rules, `opform` expands it through the intertwiner
//! operators, `verify` sweeps the rules against the oracle over a grid, and
//! `cache` manages polynomial cache files.  A cache file is taken from
//! `--cache` or the `MACMONK_CACHE` environment variable; commands other
//! than `cache warm` treat it as read-only.
//!
//! Exit codes: 0 on success, 1 when a verification fails or a computation
//! errors, 2 on bad usage.

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::laurent::JsonTerm;
use crate::macdonald::{cache_file_info, ECache};
use crate::monk::{
    monk_expand, opform_terms, Conventions, JsonMergedTerm, MonkExpansion, MonkRule,
};
use crate::oracle::{
    expand_in_e, expand_with_cross_check, random_homogeneous, rank_grid, sweep_grid,
    sweep_records, verify_monk, verify_opform_poly_multi, CheckRecord,
};
use crate::scalar::Specialization;
use crate::specialize::{monk_specialized_expansion, specialize_expansion};
use crate::Error;
use rand::SeedableRng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const CACHE_ENV: &str = "MACMONK_CACHE";

#[derive(Parser)]
#[command(
    name = "macmonk",
    version,
    about = "Exact nonsymmetric Macdonald polynomials and their expansion rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the polynomial E indexed by one composition.
    E(EArgs),
    /// Expand a product against E by the combinatorial subset rules.
    Monk(MonkArgs),
    /// Expand the same product through the intertwiner operator route.
    Opform(OpformArgs),
    /// Sweep the expansion rules against independent oracle expansions.
    Verify(VerifyArgs),
    /// Inspect, build, or check polynomial cache files.
    Cache(CacheArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Parser)]
struct EArgs {
    /// Rank; inferred from --mu when omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Composition, comma separated, e.g. 0,1 or -1,0.
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Cache file to preload (read-only here).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Parser)]
struct MonkArgs {
    /// Rule tag: a = x_j, b = prefix sum, c = raising eps, d = 1/x_j,
    /// e = inverse suffix sum, f = lowering eps.
    #[arg(long)]
    rule: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    /// Variable index of the rule, 1-based.
    #[arg(long)]
    j: usize,
    /// Specialize the expansion: q0, t0, or q0t0 (rule a only).
    #[arg(long)]
    specialize: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Check the expansion against the oracle; prints PASS or FAIL.
    #[arg(long)]
    verify: bool,
    /// During verification, confirm the oracle expansion by an independent
    /// triangular solve as well (implies --verify).
    #[arg(long)]
    cross_check: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Parser)]
struct OpformArgs {
    #[arg(long)]
    rule: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    #[arg(long)]
    j: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Check the operator route against the combinatorial expansion and the
    /// direct product; prints PASS or FAIL.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Parser)]
struct VerifyArgs {
    /// Largest rank to sweep; every rank from 2 up is included.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Largest entry of the base grid; entrywise -1 shifts are added.
    #[arg(long, default_value_t = 2)]
    max_part: i64,
    /// Comma separated rule tags to check.
    #[arg(long, default_value = "a,b,c,d,e,f")]
    rules: String,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also check the operator route (rules a and d beyond rank 2).
    #[arg(long)]
    opform: bool,
    /// Seed for random-input operator spot checks (implies --opform).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Parser)]
struct CacheArgs {
    #[command(subcommand)]
    action: CacheAction,
}

#[derive(Subcommand)]
enum CacheAction {
    /// Print a cache file's header without verifying its entries.
    Info {
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Compute every polynomial of one rank over a grid and write the file.
    Warm {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        max_part: i64,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Load a cache file, re-verifying every entry.
    Check {
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

/// A command failure: exit code plus an optional message for stderr.
/// Messages already printed to stdout (FAIL lines) use `silent`.
struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: Some(message.into()),
        }
    }

    fn silent(code: u8) -> Failure {
        Failure {
            code,
            message: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            Error::InvalidArgument(_) | Error::Parse(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: Some(err.to_string()),
        }
    }
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(message) = &failure.message {
                eprintln!("error: {message}");
            }
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::E(args) => cmd_e(args),
        Command::Monk(args) => cmd_monk(args),
        Command::Opform(args) => cmd_opform(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Cache(args) => cmd_cache(args),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn parse_composition(n_flag: Option<usize>, text: &str) -> Result<Vec<i64>, Failure> {
    let mu: Vec<i64> = text
        .split(',')
        .map(|part| part.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("cannot parse composition '{text}'")))?;
    if mu.is_empty() {
        return Err(Failure::usage("empty composition"));
    }
    if let Some(n) = n_flag {
        if n != mu.len() {
            return Err(Failure::usage(format!(
                "--n {n} disagrees with a composition of length {}",
                mu.len()
            )));
        }
    }
    Ok(mu)
}

fn parse_rule(text: &str) -> Result<MonkRule, Failure> {
    MonkRule::parse(text).map_err(|_| Failure::usage(format!("unknown rule '{text}', expected a..f")))
}

fn parse_rules(text: &str) -> Result<Vec<MonkRule>, Failure> {
    let mut rules = Vec::new();
    for part in text.split(',') {
        let rule = parse_rule(part.trim())?;
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    if rules.is_empty() {
        return Err(Failure::usage("empty rule list"));
    }
    Ok(rules)
}

fn cache_path(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

fn required_cache_path(flag: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    cache_path(flag).ok_or_else(|| {
        Failure::usage(format!("no cache file given; pass --cache or set {CACHE_ENV}"))
    })
}

/// Fresh cache, preloaded from the configured file when one exists.
fn load_cache(flag: &Option<PathBuf>) -> Result<ECache, Failure> {
    let cache = ECache::new();
    if let Some(path) = cache_path(flag) {
        if path.exists() {
            cache.load(&path)?;
        }
    }
    Ok(cache)
}

fn comp_label(mu: &[i64]) -> String {
    let parts: Vec<String> = mu.iter().map(|x| x.to_string()).collect();
    format!("E[{}]", parts.join(","))
}

fn subset_label(c: &[usize]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// "coeff*E[target]" with the coefficient parenthesized when composite and
/// dropped when it is 1.
fn scaled_label(coeff: &str, target: &[i64]) -> String {
    let label = comp_label(target);
    if coeff == "1" {
        label
    } else if coeff == "-1" {
        format!("-{label}")
    } else if coeff.contains(['+', '*', '/']) || coeff[1..].contains('-') {
        format!("({coeff})*{label}")
    } else {
        format!("{coeff}*{label}")
    }
}

fn print_expansion_text(expansion: &MonkExpansion, mode: Option<Specialization>) {
    let multiplier = expansion
        .rule
        .multiplier(expansion.mu.len(), expansion.j)
        .to_string();
    let lhs = if multiplier.contains(" + ") {
        format!("({multiplier})")
    } else {
        multiplier
    };
    let suffix = match mode {
        Some(m) => format!(" at {m}"),
        None => String::new(),
    };
    println!("{lhs} * {}{suffix}", comp_label(&expansion.mu));
    for term in &expansion.terms {
        println!(
            "  C = {}: {}",
            subset_label(&term.c),
            scaled_label(&term.coeff.to_string(), &term.target)
        );
    }
    let merged = expansion.merged();
    if merged.is_empty() {
        println!("  = 0");
    } else {
        let mut line = String::from("  =");
        for (i, (target, coeff)) in merged.iter().enumerate() {
            let part = scaled_label(&coeff.to_string(), target);
            if i == 0 {
                line.push(' ');
                line.push_str(&part);
            } else if let Some(rest) = part.strip_prefix('-') {
                line.push_str(" - ");
                line.push_str(rest);
            } else {
                line.push_str(" + ");
                line.push_str(&part);
            }
        }
        println!("{line}");
    }
}

fn print_expansion(
    expansion: &MonkExpansion,
    mode: Option<Specialization>,
    format: OutputFormat,
) -> Result<(), Failure> {
    match format {
        OutputFormat::Text => print_expansion_text(expansion, mode),
        OutputFormat::Json => {
            let mut json = expansion.to_json();
            json.mode = mode.map(|m| m.to_string());
            println!("{}", serde_json::to_string_pretty(&json).map_err(Error::from)?);
        }
    }
    Ok(())
}

/// Report a verification outcome on one expansion.  PASS/FAIL goes to
/// stdout in text mode and stderr in JSON mode so JSON output stays clean.
fn report_verdict(result: Result<(), Error>, format: OutputFormat) -> Result<(), Failure> {
    match result {
        Ok(()) => {
            match format {
                OutputFormat::Text => println!("PASS"),
                OutputFormat::Json => eprintln!("PASS"),
            }
            Ok(())
        }
        Err(err) => {
            match format {
                OutputFormat::Text => println!("FAIL: {err}"),
                OutputFormat::Json => eprintln!("FAIL: {err}"),
            }
            Err(Failure::silent(1))
        }
    }
}

// ---------------------------------------------------------------------------
// e
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EJson {
    n: usize,
    mu: Vec<i64>,
    terms: Vec<JsonTerm>,
}

fn cmd_e(args: EArgs) -> Result<(), Failure> {
    let mu = parse_composition(args.n, &args.mu)?;
    let cache = load_cache(&args.cache)?;
    let poly = cache.e(&mu).map_err(Failure::from)?;
    match args.format {
        OutputFormat::Text => println!("{} = {poly}", comp_label(&mu)),
        OutputFormat::Json => {
            let json = EJson {
                n: mu.len(),
                mu: mu.clone(),
                terms: poly.to_json_terms(),
            };
            println!("{}", serde_json::to_string_pretty(&json).map_err(Error::from)?);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// monk
// ---------------------------------------------------------------------------

fn cmd_monk(args: MonkArgs) -> Result<(), Failure> {
    let rule = parse_rule(&args.rule)?;
    let mu = parse_composition(args.n, &args.mu)?;
    let mode = args
        .specialize
        .as_deref()
        .map(Specialization::parse_mode)
        .transpose()
        .map_err(|err| Failure::usage(err.to_string()))?;
    if mode.is_some() && rule != MonkRule::X {
        return Err(Failure::usage(
            "--specialize applies to rule a; the other rules have no specialized form",
        ));
    }
    let conv = Conventions::default();
    let expansion = match mode {
        None => monk_expand(rule, &mu, args.j, &conv)?,
        Some(m) => monk_specialized_expansion(&mu, args.j, m)?,
    };
    print_expansion(&expansion, mode, args.format)?;
    if args.verify || args.cross_check {
        let cache = load_cache(&args.cache)?;
        let result = verify_monk_command(rule, &mu, args.j, mode, args.cross_check, &conv, &cache);
        report_verdict(result, args.format)?;
    }
    Ok(())
}

fn verify_monk_command(
    rule: MonkRule,
    mu: &[i64],
    j: usize,
    mode: Option<Specialization>,
    cross_check: bool,
    conv: &Conventions,
    cache: &ECache,
) -> Result<(), Error> {
    verify_monk(rule, mu, j, conv, cache)?;
    if cross_check {
        let e_mu = cache.e(mu)?;
        let product = rule.multiplier(mu.len(), j).mul(&e_mu);
        expand_with_cross_check(&product, cache)?;
    }
    if let Some(m) = mode {
        let exact = monk_expand(rule, mu, j, conv)?;
        let via_exact = specialize_expansion(&exact, m)?;
        let direct = monk_specialized_expansion(mu, j, m)?.merged();
        if via_exact != direct {
            return Err(Error::Verification(format!(
                "specialized expansion at {m} differs from the specialized exact expansion"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// opform
// ---------------------------------------------------------------------------

fn cmd_opform(args: OpformArgs) -> Result<(), Failure> {
    let rule = parse_rule(&args.rule)?;
    let mu = parse_composition(args.n, &args.mu)?;
    let conv = Conventions::default();
    let cache = load_cache(&args.cache)?;
    let expansion = opform_terms(rule, &mu, args.j, &conv, &cache)?;
    print_expansion(&expansion, None, args.format)?;
    if args.verify {
        let result = verify_opform_command(rule, &mu, args.j, &expansion, &conv, &cache);
        report_verdict(result, args.format)?;
    }
    Ok(())
}

fn verify_opform_command(
    rule: MonkRule,
    mu: &[i64],
    j: usize,
    operator: &MonkExpansion,
    conv: &Conventions,
    cache: &ECache,
) -> Result<(), Error> {
    let combinatorial = monk_expand(rule, mu, j, conv)?;
    let to_map = |e: &MonkExpansion| -> BTreeMap<Vec<usize>, (Vec<i64>, String)> {
        e.terms
            .iter()
            .map(|t| (t.c.clone(), (t.target.clone(), t.coeff.to_string())))
            .collect()
    };
    if to_map(operator) != to_map(&combinatorial) {
        return Err(Error::Verification(format!(
            "rule {rule}: operator terms at mu = {mu:?}, j = {j} differ from the combinatorial terms"
        )));
    }
    let e_mu = cache.e(mu)?;
    let product = rule.multiplier(mu.len(), j).mul(&e_mu);
    let rebuilt = operator.evaluate(cache)?;
    if rebuilt != product {
        return Err(Error::Verification(format!(
            "rule {rule}: operator expansion at mu = {mu:?}, j = {j} does not reconstitute the product"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckLine<'a> {
    kind: &'static str,
    rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<&'a [i64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expansion: Option<Vec<JsonMergedTerm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<JsonMergedTerm>>,
}

fn merged_json(terms: Vec<(Vec<i64>, crate::scalar::QTScalar)>) -> Vec<JsonMergedTerm> {
    terms
        .into_iter()
        .map(|(target, coeff)| JsonMergedTerm {
            target,
            coeff: coeff.to_string(),
        })
        .collect()
}

/// Both sides of a failed check, recomputed best-effort for the report.
fn failure_detail(
    rule: MonkRule,
    mu: &[i64],
    j: usize,
    conv: &Conventions,
    cache: &ECache,
) -> (Option<Vec<JsonMergedTerm>>, Option<Vec<JsonMergedTerm>>) {
    let expansion = monk_expand(rule, mu, j, conv)
        .ok()
        .map(|e| merged_json(e.merged()));
    let oracle = cache
        .e(mu)
        .ok()
        .map(|e_mu| rule.multiplier(mu.len(), j).mul(&e_mu))
        .and_then(|product| expand_in_e(&product, cache).ok())
        .map(|e| merged_json(e.into_terms()));
    (expansion, oracle)
}

fn emit_check_line(line: &CheckLine) -> Result<(), Failure> {
    println!("{}", serde_json::to_string(line).map_err(Error::from)?);
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.n < 2 {
        return Err(Failure::usage("--n must be at least 2"));
    }
    if args.max_part < 0 {
        return Err(Failure::usage("--max-part must be nonnegative"));
    }
    let rules = parse_rules(&args.rules)?;
    let jobs = args.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    });
    let conv = Conventions::default();
    let cache = load_cache(&args.cache)?;
    let json = args.format == OutputFormat::Json;

    let records = sweep_records(args.n, args.max_part, &rules, &conv, jobs, &cache);
    let grid = sweep_grid(args.n, args.max_part);
    let negative_mu = grid.iter().filter(|mu| mu.iter().any(|&x| x < 0)).count();
    let mut checks = records.len();
    let mut failures = 0usize;
    for record in &records {
        let failed = record.error.is_some();
        if failed {
            failures += 1;
        }
        if json {
            let (expansion, oracle) = if failed {
                failure_detail(record.rule, &record.mu, record.j, &conv, &cache)
            } else {
                (None, None)
            };
            emit_check_line(&CheckLine {
                kind: "monk",
                rule: record.rule.to_string(),
                mu: Some(&record.mu),
                n: None,
                degree: None,
                j: Some(record.j),
                status: if failed { "fail" } else { "pass" },
                error: record.error.clone(),
                expansion,
                oracle,
            })?;
        } else if let Some(error) = &record.error {
            println!("FAIL rule {} mu {:?} j {}: {error}", record.rule, record.mu, record.j);
        }
    }

    let run_opform = args.opform || args.seed.is_some();
    if run_opform {
        let opform_records = opform_sweep(&grid, &rules, &conv, &cache);
        for record in &opform_records {
            checks += 1;
            let failed = record.error.is_some();
            if failed {
                failures += 1;
            }
            if json {
                emit_check_line(&CheckLine {
                    kind: "opform",
                    rule: record.rule.to_string(),
                    mu: Some(&record.mu),
                    n: None,
                    degree: None,
                    j: Some(record.j),
                    status: if failed { "fail" } else { "pass" },
                    error: record.error.clone(),
                    expansion: None,
                    oracle: None,
                })?;
            } else if let Some(error) = &record.error {
                println!(
                    "FAIL opform rule {} mu {:?} j {}: {error}",
                    record.rule, record.mu, record.j
                );
            }
        }
    }

    if let Some(seed) = args.seed {
        if json {
            println!("{{\"seed\":{seed}}}");
        } else {
            println!("seed {seed}");
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let random_rules: Vec<MonkRule> = rules
            .iter()
            .copied()
            .filter(|r| matches!(r, MonkRule::X | MonkRule::XInv))
            .collect();
        let rule_label = random_rules
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",");
        for n in 2..=args.n.min(3) {
            for sample in 0..3u32 {
                let degree = i64::from(sample);
                let terms = if n == 2 { 3 } else { 2 };
                let f = random_homogeneous(n, degree, terms, &mut rng);
                let result = verify_opform_poly_multi(&random_rules, &f, &conv, &cache);
                let error = match &result {
                    Ok(count) => {
                        checks += count;
                        None
                    }
                    Err(e) => {
                        checks += 1;
                        failures += 1;
                        Some(e.to_string())
                    }
                };
                if json {
                    emit_check_line(&CheckLine {
                        kind: "opform-random",
                        rule: rule_label.clone(),
                        mu: None,
                        n: Some(n),
                        degree: Some(degree),
                        j: None,
                        status: if error.is_some() { "fail" } else { "pass" },
                        error: error.clone(),
                        expansion: None,
                        oracle: None,
                    })?;
                } else if let Some(error) = &error {
                    println!("FAIL opform rules {rule_label} on random input (n = {n}, degree = {degree}): {error}");
                }
            }
        }
    }

    if failures == 0 {
        if !json {
            println!(
                "all {checks} checks passed ({} compositions, {negative_mu} with negative entries)",
                grid.len()
            );
        }
        Ok(())
    } else {
        if !json {
            println!("{failures} of {checks} checks failed");
        }
        Err(Failure::silent(1))
    }
}

/// Operator-route checks over the sweep grid: every requested rule at rank
/// 2, rules a and d beyond.  Deterministic order.
fn opform_sweep(
    grid: &[Vec<i64>],
    rules: &[MonkRule],
    conv: &Conventions,
    cache: &ECache,
) -> Vec<CheckRecord> {
    let mut records = Vec::new();
    for mu in grid {
        for &rule in rules {
            if mu.len() > 2 && !matches!(rule, MonkRule::X | MonkRule::XInv) {
                continue;
            }
            for j in 1..=mu.len() {
                let error = opform_check(rule, mu, j, conv, cache)
                    .err()
                    .map(|e| e.to_string());
                records.push(CheckRecord {
                    rule,
                    mu: mu.clone(),
                    j,
                    error,
                });
            }
        }
    }
    records
}

fn opform_check(
    rule: MonkRule,
    mu: &[i64],
    j: usize,
    conv: &Conventions,
    cache: &ECache,
) -> Result<(), Error> {
    let operator = opform_terms(rule, mu, j, conv, cache)?;
    verify_opform_command(rule, mu, j, &operator, conv, cache)
}

// ---------------------------------------------------------------------------
// cache
// ---------------------------------------------------------------------------

fn cmd_cache(args: CacheArgs) -> Result<(), Failure> {
    match args.action {
        CacheAction::Info { cache } => {
            let path = required_cache_path(&cache)?;
            let (version, n, entries) = cache_file_info(&path)?;
            println!(
                "{}: version {version}, rank {n}, {entries} entries",
                path.display()
            );
            Ok(())
        }
        CacheAction::Warm { n, max_part, cache } => {
            if n == 0 {
                return Err(Failure::usage("--n must be at least 1"));
            }
            if max_part < 0 {
                return Err(Failure::usage("--max-part must be nonnegative"));
            }
            let path = required_cache_path(&cache)?;
            let store = ECache::new();
            if path.exists() {
                let (loaded_n, _) = store.load(&path)?;
                if loaded_n != n {
                    return Err(Failure::usage(format!(
                        "cache file holds rank {loaded_n}; rewriting it with --n {n} would drop those entries"
                    )));
                }
            }
            for mu in rank_grid(n, max_part) {
                store.e(&mu).map_err(Failure::from)?;
            }
            let count = store.save(n, &path)?;
            println!("cached {count} polynomials of rank {n} to {}", path.display());
            Ok(())
        }
        CacheAction::Check { cache } => {
            let path = required_cache_path(&cache)?;
            let store = ECache::new();
            let (n, entries) = store.load(&path)?;
            println!("verified {entries} entries of rank {n}");
            Ok(())
        }
    }
}

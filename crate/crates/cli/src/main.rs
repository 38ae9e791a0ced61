mod config;

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mtrap::formulas::{
    brute_force_count, gt_count, gt_weyl, k_var, mt_count, CountResult, CountValue, HiddenChoice, Provenance,
};
use mtrap::multipoly::MultiPoly;
use mtrap::pfaffian::{pfaffian, TriArray};
use mtrap::powerseries::{check_equation, BiSeries};
use mtrap::trapezoids::{enumerate_gt_capped, enumerate_gt_stream, to_sign_matrix};
use mtrap::verify::{parse_candidate, run_check, run_jobs, suite, CheckReport};
use mtrap::{Error, Result};
use num_bigint::BigInt;
use serde_json::{json, Value};

use config::{Config, Format};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "mtrap", version, about = "Counts Gelfand-Tsetlin and monotone trapezoids")]
struct Cli {
    /// Configuration file (key=value lines or a JSON object).
    #[arg(long, env = "MTRAP_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Output format; overrides the configuration file.
    #[arg(long, global = true)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum GtMethod {
    Pfaffian,
    Weyl,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum MtMethod {
    Formula,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(clap::Args, Debug)]
struct CountArgs {
    #[arg(long)]
    h: usize,
    /// Length of the bottom row; defaults to the length of --bottom.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bottom: Option<Vec<i64>>,
    #[arg(long)]
    symbolic: bool,
    /// With --symbolic, also evaluate the polynomial at this bottom row.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eval_at: Option<Vec<i64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gelfand-Tsetlin trapezoids.
    Gt {
        #[command(flatten)]
        args: CountArgs,
        #[arg(long, value_enum, default_value = "pfaffian")]
        method: GtMethod,
    },
    /// Monotone trapezoids from the operator formula.
    Mt {
        #[command(flatten)]
        args: CountArgs,
        /// Hidden series: p0a, p0b, sqrt_a, sqrt_b, q_a, q_b, none, or variant+factor.
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long, value_enum, default_value = "formula")]
        method: MtMethod,
    },
    /// Count or list trapezoids by brute force.
    Enumerate {
        #[arg(long)]
        h: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bottom: Vec<i64>,
        #[arg(long)]
        monotone: bool,
        /// Stream every trapezoid as a JSON list of rows, top row first.
        #[arg(long)]
        emit: bool,
    },
    /// Sign matrices of all monotone trapezoids with a given bottom row.
    Asm {
        #[arg(long)]
        h: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bottom: Vec<i64>,
    },
    /// Pfaffian of a triangular array given as JSON rows (file, or stdin with -).
    Pfaffian {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Series criteria of a hidden series.
    Hidden {
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Also print the coefficient table.
        #[arg(long)]
        dump: bool,
    },
    /// Run identity checks.
    Verify {
        #[arg(long, value_enum, conflicts_with = "check")]
        suite: Option<SuiteArg>,
        #[arg(long)]
        check: Option<String>,
        /// JSON object of check parameters.
        #[arg(long, requires = "check")]
        params: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare the formulas with brute force on a small grid.
    Selftest,
}

struct Output {
    format: Format,
    command: &'static str,
    start: Instant,
}

impl Output {
    fn emit(&self, result: Value, text: &str) {
        match self.format {
            Format::Text => println!("{text}"),
            Format::Json => {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.command,
                    "result": result,
                    "timings": { "elapsed_ms": self.start.elapsed().as_secs_f64() * 1e3 },
                });
                println!("{doc}");
            }
        }
    }
}

/// Failure of a command: library error or a failed check.
enum Failure {
    Lib(Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        };
    }
    let out = |command| Output { format: cfg.format, command, start: Instant::now() };
    match cli.command {
        Command::Gt { args, method } => cmd_gt(&cfg, &out("gt"), &args, method)?,
        Command::Mt { args, a, method } => {
            let choice: HiddenChoice = a.as_deref().unwrap_or(&cfg.default_a).parse()?;
            cmd_mt(&cfg, &out("mt"), &args, choice, method)?
        }
        Command::Enumerate { h, bottom, monotone, emit } => cmd_enumerate(&cfg, &out("enumerate"), h, &bottom, monotone, emit)?,
        Command::Asm { h, bottom } => cmd_asm(&cfg, &out("asm"), h, &bottom)?,
        Command::Pfaffian { input } => cmd_pfaffian(&cfg, &out("pfaffian"), &input)?,
        Command::Hidden { a, order, dump } => {
            let id = a.unwrap_or_else(|| cfg.default_a.clone());
            cmd_hidden(&out("hidden"), &id, order + cfg.truncation_margin, dump)?
        }
        Command::Verify { suite: s, check, params, threads } => {
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            return cmd_verify(&out("verify"), s, check, params, threads);
        }
        Command::Selftest => return cmd_selftest(&out("selftest")),
    }
    Ok(())
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Resolves `n` and checks the flag combinations shared by `gt` and `mt`.
fn count_shape(args: &CountArgs) -> Result<usize> {
    if args.symbolic && args.bottom.is_some() {
        return usage("--symbolic does not take --bottom; use --eval-at to evaluate the polynomial");
    }
    if args.eval_at.is_some() && !args.symbolic {
        return usage("--eval-at needs --symbolic");
    }
    if !args.symbolic && args.bottom.is_none() {
        return usage("give --bottom or --symbolic");
    }
    let n = match (args.n, &args.bottom) {
        (Some(n), _) => n,
        (None, Some(b)) => b.len(),
        (None, None) => return usage("--n is required with --symbolic"),
    };
    if let Some(b) = args.bottom.as_ref().or(args.eval_at.as_ref()) {
        if b.len() != n {
            return usage(format!("bottom row has {} entries, expected {n}", b.len()));
        }
    }
    Ok(n)
}

fn check_order(cfg: &Config, h: usize, n: usize) -> Result<()> {
    let order = n + h + (n + h) % 2;
    if order > cfg.pfaffian_cap {
        return Err(Error::Resource(format!("Pfaffian of order {order} exceeds pfaffian_cap {}", cfg.pfaffian_cap)));
    }
    Ok(())
}

fn eval_poly(p: &MultiPoly, at: &[i64]) -> Result<BigInt> {
    let assignment: BTreeMap<String, i64> = at.iter().enumerate().map(|(i, &v)| (k_var(i + 1), v)).collect();
    p.eval_integer(&assignment)
}

fn emit_count(out: &Output, r: &CountResult, eval_at: Option<&[i64]>) -> Result<()> {
    let mut json = r.to_json();
    let mut text = r.value.to_string();
    if let (Some(at), CountValue::Polynomial(p)) = (eval_at, &r.value) {
        let v = eval_poly(p, at)?;
        json["value"] = json!(v.to_string());
        text = format!("{text}\n{v}");
    }
    out.emit(json, &text);
    Ok(())
}

fn brute(cfg: &Config, h: usize, bottom: &[i64], monotone: bool) -> Result<CountResult> {
    let c = enumerate_gt_capped(h, bottom, monotone, cfg.count_cap as u128)?;
    Ok(CountResult { value: CountValue::Integer(BigInt::from(c)), provenance: Provenance::BruteForce })
}

fn cmd_gt(cfg: &Config, out: &Output, args: &CountArgs, method: GtMethod) -> Result<()> {
    let n = count_shape(args)?;
    let bottom = args.bottom.as_deref();
    let r = match method {
        GtMethod::Pfaffian => {
            check_order(cfg, args.h, n)?;
            gt_count(args.h, n, args.symbolic, bottom)?
        }
        GtMethod::Weyl => {
            if args.h + 1 < n || args.h > n {
                return usage("the Weyl product counts full patterns; it needs h = n - 1 or h = n");
            }
            gt_weyl(n, bottom)?
        }
        GtMethod::Brute => match bottom {
            Some(b) => brute(cfg, args.h, b, false)?,
            None => return usage("--method brute needs --bottom"),
        },
    };
    emit_count(out, &r, args.eval_at.as_deref())
}

fn cmd_mt(cfg: &Config, out: &Output, args: &CountArgs, choice: HiddenChoice, method: MtMethod) -> Result<()> {
    let n = count_shape(args)?;
    let bottom = args.bottom.as_deref();
    let r = match method {
        MtMethod::Formula => {
            check_order(cfg, args.h, n)?;
            mt_count(args.h, n, choice, args.symbolic, bottom)?
        }
        MtMethod::Brute => match bottom {
            Some(b) => brute(cfg, args.h, b, true)?,
            None => return usage("--method brute needs --bottom"),
        },
    };
    emit_count(out, &r, args.eval_at.as_deref())
}

fn cmd_enumerate(cfg: &Config, out: &Output, h: usize, bottom: &[i64], monotone: bool, emit: bool) -> Result<()> {
    if !emit {
        let c = enumerate_gt_capped(h, bottom, monotone, cfg.count_cap as u128)?;
        out.emit(json!({ "count": c.to_string(), "monotone": monotone }), &c.to_string());
        return Ok(());
    }
    let stdout = io::stdout();
    let mut lock = io::BufWriter::new(stdout.lock());
    let mut write_err = None;
    enumerate_gt_stream(h, bottom, monotone, cfg.count_cap as u128, &mut |t| {
        if write_err.is_none() {
            if let Err(e) = writeln!(lock, "{}", json!(t.rows)) {
                write_err = Some(e);
            }
        }
    })?;
    lock.flush().ok();
    Ok(())
}

fn cmd_asm(cfg: &Config, out: &Output, h: usize, bottom: &[i64]) -> Result<()> {
    let mut mats = Vec::new();
    let mut failure = None;
    enumerate_gt_stream(h, bottom, true, cfg.count_cap as u128, &mut |t| {
        match to_sign_matrix(t) {
            Ok(m) => mats.push(m),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let text: Vec<String> = mats
        .iter()
        .map(|m| {
            m.entries
                .iter()
                .map(|row| row.iter().map(|v| format!("{v:>2}")).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    let result = json!({
        "count": mats.len(),
        "matrices": mats.iter().map(|m| json!({ "entries": m.entries, "positions": m.positions })).collect::<Vec<_>>(),
    });
    out.emit(result, &text.join("\n\n"));
    Ok(())
}

fn read_input(input: &str) -> Result<String> {
    if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(s)
    } else if input.trim_start().starts_with('[') {
        Ok(input.to_string())
    } else {
        std::fs::read_to_string(input).map_err(|e| Error::Parse(format!("{input}: {e}")))
    }
}

fn cmd_pfaffian(cfg: &Config, out: &Output, input: &str) -> Result<()> {
    let v: Value = serde_json::from_str(&read_input(input)?).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = v.as_array().ok_or_else(|| Error::Parse("expected a JSON list of rows".into()))?;
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row.as_array().ok_or_else(|| Error::Parse("each row must be a list".into()))?;
        let entries: Result<Vec<MultiPoly>> = row
            .iter()
            .map(|e| match e {
                Value::Number(n) => n
                    .as_i64()
                    .map(MultiPoly::from_int)
                    .ok_or_else(|| Error::Parse(format!("entry {n} is not an integer"))),
                Value::String(s) => s.parse::<MultiPoly>(),
                _ => Err(Error::Parse(format!("entry {e} is neither an integer nor a polynomial"))),
            })
            .collect();
        parsed.push(entries?);
    }
    let a = TriArray::from_rows(parsed)?;
    if a.order() > cfg.pfaffian_cap {
        return Err(Error::Resource(format!("order {} exceeds pfaffian_cap {}", a.order(), cfg.pfaffian_cap)));
    }
    let p = pfaffian(&a);
    out.emit(json!({ "order": a.order(), "pfaffian": p.to_string(), "polynomial": p.to_json() }), &p.to_string());
    Ok(())
}

fn cmd_hidden(out: &Output, id: &str, order: usize, dump: bool) -> Result<()> {
    let a: BiSeries = parse_candidate(id, order)?;
    let report = check_equation(&a)?;
    let mut result = json!({ "A": id, "order": order, "criteria": report, "passed": report.passed() });
    let mut text = format!(
        "A = {id}, order {order}\nconstant term one: {}\nsymmetric: {}\nA(x, iota(x)) = 1: {}\nfourfold product: {}",
        report.constant_term_one, report.symmetric, report.diagonal_iota_is_one, report.fourfold_product
    );
    if dump {
        let d = a.dump();
        text.push_str(&format!("\norders {} {}", d.order_x, d.order_y));
        for (i, row) in d.rows.iter().enumerate() {
            text.push_str(&format!("\nx^{i}: {}", row.join(", ")));
        }
        result["dump"] = json!(d);
    }
    out.emit(result, &text);
    Ok(())
}

fn report_line(r: &CheckReport) -> String {
    let status = if r.passed { "PASS" } else { "FAIL" };
    let mut line = format!("{status} {} {}", r.check_id, Value::Object(r.params.clone()));
    if let Some(c) = &r.constant {
        line.push_str(&format!(" constant={c}"));
    }
    if let Some(w) = &r.witness {
        line.push_str(&format!(" -- {w}"));
    }
    line
}

fn cmd_verify(
    out: &Output,
    s: Option<SuiteArg>,
    check: Option<String>,
    params: Option<String>,
    threads: usize,
) -> std::result::Result<(), Failure> {
    let reports: Vec<CheckReport> = match check {
        Some(id) => {
            let p: Value = match params {
                Some(text) => serde_json::from_str(&text).map_err(|e| Error::Parse(format!("--params: {e}")))?,
                None => json!({}),
            };
            vec![run_check(&id, &p)?]
        }
        None => {
            let name = match s.unwrap_or(SuiteArg::Fast) {
                SuiteArg::Fast => "fast",
                SuiteArg::Full => "full",
            };
            let jobs = suite(name)?;
            run_jobs(&jobs, threads).into_iter().collect::<Result<_>>()?
        }
    };
    let json: Vec<Value> = reports.iter().map(CheckReport::to_json).collect();
    let text: Vec<String> = reports.iter().map(report_line).collect();
    let failed = reports.iter().filter(|r| !r.passed).count();
    out.emit(json!(json), &format!("{}\n{} checks, {failed} failed", text.join("\n"), reports.len()));
    if failed > 0 {
        return Err(Failure::Checks);
    }
    Ok(())
}

/// Strictly increasing rows of length `n` starting at 0 with `k_n <= spread`.
fn rows_with_spread(n: usize, spread: i64, limit: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64];
    fn rec(n: usize, spread: i64, limit: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if out.len() >= limit {
            return;
        }
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let last = *cur.last().unwrap();
        for v in last + 1..=spread {
            cur.push(v);
            rec(n, spread, limit, cur, out);
            cur.pop();
        }
    }
    rec(n, spread, limit, &mut cur, &mut out);
    out
}

fn cmd_selftest(out: &Output) -> std::result::Result<(), Failure> {
    let mut cells = Vec::new();
    let mut mismatches = Vec::new();
    for n in 1..=5usize {
        for h in 0..=n.min(2) {
            let rows = rows_with_spread(n, n as i64 + 2, 8);
            for b in &rows {
                let gt = gt_count(h, n, false, Some(b))?;
                let gt_bf = brute_force_count(h, b, false)?;
                let mt = mt_count(h, n, "p0a".parse::<HiddenChoice>()?, false, Some(b))?;
                let mt_bf = brute_force_count(h, b, true)?;
                if gt.value != gt_bf.value || mt.value != mt_bf.value {
                    mismatches.push(json!({ "h": h, "n": n, "bottom": b }));
                }
            }
            cells.push(json!({ "h": h, "n": n, "rows": rows.len() }));
        }
    }
    let ok = mismatches.is_empty();
    let text = format!("{} cells, {} mismatches", cells.len(), mismatches.len());
    out.emit(json!({ "cells": cells, "mismatches": mismatches, "passed": ok }), &text);
    if ok {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

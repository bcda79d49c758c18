//! Command-line front end: argument parsing, dispatch and report rendering.
//!
//! Exit codes: 0 on success, 1 when an analysis fails or a verification
//! disagrees, 2 on usage or input errors. Data goes to the output stream and
//! diagnostics to the error stream.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::block_engine::{
    anatomy_of, collect_evolutions, local_context, origin_closure, BlockIndex, Case,
};
use crate::complexity_meter::{cross_check, factor_counts, ComplexityTable, CrossCheckReport, MeterError, Tolerances};
use crate::evolution_classifier::{classify_normalized, ClassifierParams, ComplexityVerdict};
use crate::normalization::{normalize, Normalized};
use crate::order_analysis::{LetterProfiles, Periodicity};
use crate::word_model::MorphicSystem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => EXIT_ANALYSIS,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

fn analysis<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Analysis(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "morphic", about = "Structure and subword complexity of morphic sequences")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ClassifyArgs {
    /// Letters of each bounding sequence checked for periodicity.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
    /// Stable members checked for weak periodicity.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
    pub window: u64,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub prefix_len: u64,
}

impl ClassifyArgs {
    fn params(&self) -> ClassifierParams {
        ClassifierParams {
            window: self.window as usize,
            horizon: self.horizon as usize,
            prefix_len: self.prefix_len as usize,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct MeasureArgs {
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub prefix_len: u64,
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024")]
    pub ns: Vec<usize>,
    /// Count lengths beyond 1/50 of the prefix anyway.
    #[arg(long)]
    pub override_guard: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Letter orders and periodicity.
    Orders { spec: PathBuf },
    /// Normalizing power, added letters, flags and final periods.
    Normalize {
        spec: PathBuf,
        /// Print the normalized system in spec-file format.
        #[arg(long)]
        emit: bool,
    },
    /// k-block decomposition, evolutions and anatomy digests.
    Blocks {
        spec: PathBuf,
        #[arg(short = 'k', value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
        prefix_len: u64,
        #[arg(long)]
        json: bool,
    },
    /// Predicted complexity class.
    Classify {
        spec: PathBuf,
        #[command(flatten)]
        args: ClassifyArgs,
        #[arg(long)]
        json: bool,
    },
    /// Distinct factor counts of a prefix.
    Measure {
        spec: PathBuf,
        #[command(flatten)]
        args: MeasureArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Classification cross-checked against measured counts.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
        window: u64,
        #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: u64,
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 0.2)]
        tol_slope: f64,
        #[arg(long)]
        json: bool,
    },
}

pub fn load_system(path: &PathBuf) -> Result<MorphicSystem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match run(&config.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn run(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Orders { spec } => {
            let system = load_system(spec)?;
            out.write_all(render_orders(&system).as_bytes())?;
        }
        Command::Normalize { spec, emit } => {
            let system = load_system(spec)?;
            let n = normalize(&system).map_err(analysis)?;
            let text = if *emit {
                n.system.to_spec_text()
            } else {
                render_normalization(&n)
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Blocks {
            spec,
            k,
            prefix_len,
            json,
        } => {
            let system = load_system(spec)?;
            let report = blocks_report(&system, *k as usize, *prefix_len as usize)?;
            if *json {
                write_json(out, &report)?;
            } else {
                out.write_all(render_blocks(&report).as_bytes())?;
            }
        }
        Command::Classify { spec, args, json } => {
            let system = load_system(spec)?;
            let report = classify_report(&system, &args.params())?;
            if *json {
                write_json(out, &report)?;
            } else {
                out.write_all(render_classify(&report).as_bytes())?;
            }
        }
        Command::Measure {
            spec,
            args,
            out: path,
            format,
        } => {
            let system = load_system(spec)?;
            let table = measure(&system, args)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => json_string(&MeasureReport::from(&table))?,
            };
            match path {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Verify {
            spec,
            window,
            horizon,
            measure: margs,
            tol_slope,
            json,
        } => {
            let system = load_system(spec)?;
            let params = ClassifierParams {
                window: *window as usize,
                horizon: *horizon as usize,
                prefix_len: margs.prefix_len as usize,
            };
            let report = verify(&system, &params, margs, *tol_slope)?;
            if *json {
                write_json(out, &report)?;
            } else {
                out.write_all(render_verify(&report).as_bytes())?;
            }
            return Ok(if report.passed { EXIT_OK } else { EXIT_ANALYSIS });
        }
    }
    Ok(EXIT_OK)
}

fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(analysis)?;
    s.push('\n');
    Ok(s)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    out.write_all(json_string(value)?.as_bytes())?;
    Ok(())
}

pub fn render_orders(system: &MorphicSystem) -> String {
    let profiles = LetterProfiles::of(system);
    let width = system.names().iter().map(String::len).max().unwrap_or(1).max(6);
    let mut s = format!("{:<width$}  {:>5}  periodicity\n", "letter", "order");
    for p in &profiles.profiles {
        let periodicity = match p.periodicity {
            Periodicity::Periodic => "periodic",
            Periodicity::Preperiodic => "preperiodic",
            Periodicity::NotApplicable => "-",
        };
        let _ = writeln!(
            s,
            "{:<width$}  {:>5}  {periodicity}",
            system.name(p.letter),
            p.order.to_string()
        );
    }
    s
}

pub fn render_normalization(n: &Normalized) -> String {
    let s = &n.system;
    let mut out = format!("power: {}\n", n.report.power);
    let added: Vec<String> = n
        .report
        .added_letters
        .iter()
        .map(|(b, role)| format!("{} ({role:?})", s.name(*b)))
        .collect();
    let _ = writeln!(out, "added letters: {}", if added.is_empty() { "none".into() } else { added.join(", ") });
    let f = n.report.flags;
    let _ = writeln!(
        out,
        "weakly 1-periodic: {}\nstrongly 1-periodic: {}\nlong images: {}",
        f.weakly_1_periodic, f.strongly_1_periodic, f.long_images
    );
    let finals: Vec<String> = n.final_periods.periods.iter().map(|p| s.render(p)).collect();
    let _ = writeln!(out, "final periods: {{{}}}", finals.join(", "));
    let _ = writeln!(out, "longest final period: {}", n.final_periods.max_len);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AnatomyDigest {
    pub seq: usize,
    pub block: String,
    pub left_preperiod: String,
    pub right_preperiod: String,
    pub central_kernels: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionDigest {
    pub origin: String,
    pub observed_members: Option<usize>,
    pub case_left: Option<Case>,
    pub case_right: Option<Case>,
    /// First stable member, grown outside the prefix; absent when it cannot be formed.
    pub anatomy: Option<AnatomyDigest>,
    pub anatomy_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlocksReport {
    pub k: usize,
    pub prefix_len: usize,
    pub covered: usize,
    pub items: usize,
    pub blocks: usize,
    pub high_letters: usize,
    pub observed_evolutions: usize,
    pub closure_evolutions: usize,
    pub evolutions: Vec<EvolutionDigest>,
}

pub fn blocks_report(system: &MorphicSystem, k: usize, prefix_len: usize) -> Result<BlocksReport, CliError> {
    let profiles = LetterProfiles::of(system);
    if !profiles.order(system.axiom()).exceeds(k) {
        return Err(CliError::Analysis(format!(
            "the axiom has order {}, which does not exceed {k}",
            profiles.order(system.axiom())
        )));
    }
    let prefix = system.generate_prefix(prefix_len).map_err(analysis)?;
    let index = BlockIndex::new(prefix, profiles.clone(), k).map_err(analysis)?;
    let level = index.level(k);
    let observed = collect_evolutions(&index, k).map_err(analysis)?;
    let closure = origin_closure(system, &profiles, k);
    let mut evolutions = Vec::with_capacity(closure.len());
    for origin in &closure {
        let key = (origin.left_border, origin.word.clone(), origin.right_border);
        let seen: Vec<_> = observed.iter().filter(|e| e.abstract_key() == key).collect();
        let observed_members = seen.iter().map(|e| e.members.len()).max();
        let mut digest = EvolutionDigest {
            origin: format!(
                "{}[{}]{}",
                system.name(origin.left_border),
                system.render(&origin.word),
                system.name(origin.right_border)
            ),
            observed_members,
            case_left: None,
            case_right: None,
            anatomy: None,
            anatomy_error: None,
        };
        let grown = local_context(system, &profiles, origin, 3 * k)
            .and_then(|ctx| anatomy_of(&ctx.index, k, &ctx.chain, 3 * k).map(|a| (ctx, a)));
        match grown {
            Ok((ctx, a)) => {
                let text = |occ| system.render(ctx.index.prefix().slice(occ));
                digest.case_left = Some(a.case_left);
                digest.case_right = Some(a.case_right);
                digest.anatomy = Some(AnatomyDigest {
                    seq: a.seq,
                    block: text(a.block),
                    left_preperiod: text(a.left_preperiod.fg),
                    right_preperiod: text(a.right_preperiod.fg),
                    central_kernels: a.central_kernels.iter().map(|&o| text(o)).collect(),
                });
            }
            Err(e) => digest.anatomy_error = Some(e.to_string()),
        }
        evolutions.push(digest);
    }
    let distinct: std::collections::BTreeSet<_> = observed.iter().map(|e| e.abstract_key()).collect();
    Ok(BlocksReport {
        k,
        prefix_len,
        covered: level.covered,
        items: level.items.len(),
        blocks: level.blocks().count(),
        high_letters: level.items.len() - level.blocks().count(),
        observed_evolutions: distinct.len(),
        closure_evolutions: closure.len(),
        evolutions,
    })
}

pub fn render_blocks(r: &BlocksReport) -> String {
    let mut s = format!(
        "k = {}\nprefix: {} letters, {} covered\nitems: {} ({} blocks, {} high letters)\nevolutions: {} observed, {} in origin closure\n",
        r.k, r.prefix_len, r.covered, r.items, r.blocks, r.high_letters, r.observed_evolutions, r.closure_evolutions
    );
    for e in &r.evolutions {
        let case = |c: Option<Case>| match c {
            Some(Case::CaseI) => "I",
            Some(Case::CaseII) => "II",
            None => "?",
        };
        let _ = writeln!(
            s,
            "  {}  members seen: {}  cases: ({}, {})",
            e.origin,
            e.observed_members.map_or("0".into(), |m| m.to_string()),
            case(e.case_left),
            case(e.case_right)
        );
        if let Some(a) = &e.anatomy {
            let _ = writeln!(
                s,
                "    E_{}: |block| = {}, LpreP = {:?}, RpreP = {:?}, central kernels = {:?}",
                a.seq,
                a.block.len(),
                a.left_preperiod,
                a.right_preperiod,
                a.central_kernels
            );
        }
        if let Some(err) = &e.anatomy_error {
            let _ = writeln!(s, "    anatomy unavailable: {err}");
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Horizons {
    pub window: usize,
    pub horizon: usize,
    pub prefix_len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub class: String,
    pub exponent: Option<String>,
    pub fired_rule: String,
    pub k_star: Option<usize>,
    pub horizons: Horizons,
    pub counterexample: Option<crate::evolution_classifier::Counterexample>,
    pub normalization_power: usize,
    pub boundary_case: bool,
    pub levels: Vec<crate::evolution_classifier::LevelSummary>,
    pub evolutions: Vec<crate::evolution_classifier::EvolutionSummary>,
}

impl From<&ComplexityVerdict> for ClassifyReport {
    fn from(v: &ComplexityVerdict) -> Self {
        ClassifyReport {
            class: v.class.name().to_string(),
            exponent: v.class.exponent_text(),
            fired_rule: format!("{:?}", v.fired_rule),
            k_star: v.k_star,
            horizons: Horizons {
                window: v.params.window,
                horizon: v.params.horizon,
                prefix_len: v.params.prefix_len,
            },
            counterexample: v.counterexample.clone(),
            normalization_power: v.normalization_power,
            boundary_case: v.boundary_case,
            levels: v.levels.clone(),
            evolutions: v.evolutions.clone(),
        }
    }
}

pub fn classify_report(system: &MorphicSystem, params: &ClassifierParams) -> Result<ClassifyReport, CliError> {
    let n = normalize(system).map_err(analysis)?;
    let verdict = classify_normalized(&n, params).map_err(analysis)?;
    Ok(ClassifyReport::from(&verdict))
}

pub fn render_classify(r: &ClassifyReport) -> String {
    let mut s = format!("class: {}", r.class);
    if let Some(e) = &r.exponent {
        let _ = write!(s, " (n^{e})");
    }
    let _ = writeln!(s, "\nrule: {}", r.fired_rule);
    if let Some(k) = r.k_star {
        let _ = writeln!(s, "k*: {k}");
    }
    let _ = writeln!(
        s,
        "normalizing power: {}\nwindow: {}, horizon: {}, prefix: {}",
        r.normalization_power, r.horizons.window, r.horizons.horizon, r.horizons.prefix_len
    );
    if r.boundary_case {
        s.push_str("boundary case: no letter of finite order occurs in the fixed point\n");
    }
    for level in &r.levels {
        let observed = level
            .observed_evolutions
            .map_or("n/a".to_string(), |c| c.to_string());
        let _ = writeln!(
            s,
            "level {}: {} evolutions ({} observed), all continuously periodic: {}",
            level.k, level.closure_evolutions, observed, level.all_continuously_periodic
        );
    }
    for e in &r.evolutions {
        let periods = match (&e.left_period, &e.right_period) {
            (Some(l), Some(r)) => format!(" index {} periods ({l:?}, {r:?})", e.witness_index.unwrap_or(0)),
            _ => String::new(),
        };
        let _ = writeln!(
            s,
            "  k={} {} cases ({:?}, {:?}) ncker {}: {}{periods}",
            e.k,
            e.origin,
            e.case_left,
            e.case_right,
            e.ncker,
            if e.continuously_periodic { "continuously periodic" } else { "not continuously periodic" }
        );
    }
    if let Some(c) = &r.counterexample {
        let _ = writeln!(s, "counterexample: {}-evolution {}", c.k, c.origin);
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureEntry {
    pub n: usize,
    pub p_n: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub prefix_len: usize,
    pub entries: Vec<MeasureEntry>,
}

impl From<&ComplexityTable> for MeasureReport {
    fn from(t: &ComplexityTable) -> Self {
        MeasureReport {
            prefix_len: t.prefix_len,
            entries: t.entries.iter().map(|&(n, p_n)| MeasureEntry { n, p_n }).collect(),
        }
    }
}

/// Counts factors of the coded prefix of length `prefix_len`.
pub fn measure(system: &MorphicSystem, args: &MeasureArgs) -> Result<ComplexityTable, CliError> {
    let len = args.prefix_len as usize;
    let max_n = args.ns.iter().copied().max().unwrap_or(0);
    if !args.override_guard && max_n * crate::complexity_meter::GUARD_RATIO > len {
        return Err(CliError::Usage(
            MeterError::Range {
                n: max_n,
                len,
                ratio: crate::complexity_meter::GUARD_RATIO,
            }
            .to_string(),
        ));
    }
    let prefix = system.generate_prefix(len).map_err(analysis)?;
    let word = system.apply_coding(&prefix.text[..len.min(prefix.len())]);
    factor_counts(&word, system.alphabet_size(), &args.ns, args.override_guard).map_err(|e| match e {
        MeterError::Range { .. } => CliError::Usage(e.to_string()),
        other => analysis(other),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub classification: ClassifyReport,
    pub measurement: MeasureReport,
    pub cross_check: CrossCheckReport,
    pub passed: bool,
}

pub fn verify(
    system: &MorphicSystem,
    params: &ClassifierParams,
    margs: &MeasureArgs,
    tol_slope: f64,
) -> Result<VerifyReport, CliError> {
    let n = normalize(system).map_err(analysis)?;
    let verdict = classify_normalized(&n, params).map_err(analysis)?;
    let table = measure(system, margs)?;
    let tol = Tolerances {
        slope: tol_slope,
        ..Tolerances::default()
    };
    let check = cross_check(verdict.class, &table, &tol);
    Ok(VerifyReport {
        classification: ClassifyReport::from(&verdict),
        measurement: MeasureReport::from(&table),
        passed: check.passed(),
        cross_check: check,
    })
}

pub fn render_verify(r: &VerifyReport) -> String {
    let mut s = render_classify(&r.classification);
    s.push_str("n,p_n\n");
    for e in &r.measurement.entries {
        let _ = writeln!(s, "{},{}", e.n, e.p_n);
    }
    if let Some(f) = &r.cross_check.fit {
        let _ = writeln!(s, "fitted slope: {:.4} over [{}, {}]", f.slope, f.range.0, f.range.1);
    }
    for line in &r.cross_check.lines {
        let _ = writeln!(
            s,
            "{} {}: {}",
            if line.passed { "PASS" } else { "FAIL" },
            line.criterion,
            line.detail
        );
    }
    let _ = writeln!(s, "verdict and measurement {}", if r.passed { "agree" } else { "disagree" });
    s
}

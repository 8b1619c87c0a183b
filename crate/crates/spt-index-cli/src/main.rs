//! Command-line front end for the boundary-index pipelines.
//!
//! Three command families mirror the library's layers:
//!
//! - `cocycle make|check|compare|level` — exact 3-cocycle algebra: build the
//!   standard cyclic representative, scan the cocycle identity, decide
//!   cohomology of two tables, identify a cyclic class level.
//! - `index` — run the boundary-chain pipeline (compensators → υ → splitting →
//!   counterterm → ι) and report the extracted H³ table.
//! - `verify invariance|stacking|patch` — re-derive the table under varied
//!   choices, confirm stacking multiplies indices entrywise, or cross-check
//!   against the 2d microscopic patch model.
//!
//! The machine-readable JSON report goes to standard output and a short human
//! summary to standard error; `--format text` swaps the two streams. Exit
//! codes partition outcomes: 0 success, 1 mathematical failure (a checked
//! identity does not hold), 2 usage or input error. For a fixed configuration
//! and seed the JSON report is byte-identical across runs, apart from the
//! `timings_ms` field.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spt_index::{
    arc_index_crosscheck, build_compensators, choice_invariance_suite, identify_cyclic_level,
    parse_group_shorthand, resolve_cocycle_spec, resolve_group_spec, same_class, stack_models,
    verify_compensation, Cochain3, CocycleFile, CocycleSpec, Error, FiniteGroup, GroupSpec,
    IndexPipeline, LinkAssignment, PatchConfig, PatchGeometry, Phase, ScanStatus, WitnessFile,
};

#[derive(Parser)]
#[command(name = "spt-index", version, about = "Exact H³ index of 2d SPT states")]
struct Cli {
    /// Where the JSON report goes: `json` prints it on stdout with a text
    /// summary on stderr, `text` swaps the two streams.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build, check, compare, and classify 3-cocycles.
    #[command(subcommand)]
    Cocycle(CocycleCmd),
    /// Run the boundary-chain pipeline and report the extracted table.
    Index(IndexArgs),
    /// Invariance suites, stacking multiplicativity, and the 2d patch oracle.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum CocycleCmd {
    /// Emit the standard representative of H³(Z_n, U(1)) at a given level.
    Make {
        /// Cyclic group shorthand, e.g. `z3`.
        #[arg(long)]
        group: String,
        /// Class level p ∈ {0, …, n−1}.
        #[arg(long)]
        level: usize,
        /// Also write the cocycle file here (the report always carries it).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively scan the cocycle identity of a 3-cochain.
    Check {
        /// Cocycle spec: `zN:p` shorthand or a path to a cocycle file.
        cocycle: String,
    },
    /// Decide whether two cocycles are cohomologous; exit 1 if distinct.
    Compare {
        /// First cocycle spec (`zN:p` or file path).
        a: String,
        /// Second cocycle spec over the same group.
        b: String,
    },
    /// Identify the level of a cocycle's class over a cyclic group.
    Level {
        /// Cocycle spec: `zN:p` shorthand or a path to a cocycle file.
        cocycle: String,
    },
}

/// Flags shared by every command that needs a (group, cocycle) pair: either
/// `--cocycle` alone, or `--group zN --level p` for the standard cyclic
/// representative.
#[derive(Args)]
struct InputArgs {
    /// Group spec: `zN`, `zN*zM`, or a path to a group file.
    #[arg(long)]
    group: Option<String>,
    /// Level of the standard cyclic representative (needs `--group zN`).
    #[arg(long, conflicts_with = "cocycle")]
    level: Option<usize>,
    /// Cocycle spec: `zN:p` shorthand or a path to a cocycle file.
    #[arg(long)]
    cocycle: Option<String>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Chain length M (number of blocks); the cut defaults to M/2.
    #[arg(long, default_value_t = 6)]
    length: usize,
    /// Cut position p within a block, 0 ≤ p < M.
    #[arg(long)]
    cut: Option<usize>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Re-run the pipeline under every admissible change of choice and demand
    /// the extracted table stay entrywise identical.
    Invariance {
        #[command(flatten)]
        input: InputArgs,
        /// Chain length M for the baseline run.
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// Seed for the randomized regaugings and the transport unitary.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stack two cyclic models and confirm the index multiplies entrywise.
    Stacking {
        /// Cyclic group shorthand, e.g. `z3`.
        #[arg(long)]
        group: String,
        /// The two class levels to stack, e.g. `1,2`.
        #[arg(long, value_parser = parse_level_pair)]
        levels: (usize, usize),
        /// Chain length M for both models.
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// 2d patch oracle: compensation overlaps on a torus and the arc
    /// cross-check against the boundary-chain table.
    Patch {
        #[command(flatten)]
        input: InputArgs,
        /// Torus width (boundary links per row); at least 4.
        #[arg(long = "W")]
        w: Option<usize>,
        /// Torus height (rows); even, at least 2.
        #[arg(long = "H")]
        h: Option<usize>,
        /// Link assignment: `auto` tries every candidate pairing.
        #[arg(long, default_value = "auto")]
        assignment: String,
        /// JSON run configuration; replaces the individual flags.
        #[arg(long, conflicts_with_all = ["group", "level", "cocycle", "w", "h", "assignment"])]
        config: Option<PathBuf>,
    },
}

fn parse_level_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated levels, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("level {t:?} is not a non-negative integer"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// A finished command: the JSON report, its one-paragraph human summary, and
/// the process exit code.
struct Outcome {
    report: Value,
    summary: String,
    code: u8,
}

impl Outcome {
    fn pass(report: Value, summary: String) -> Outcome {
        Outcome { report, summary, code: 0 }
    }

    fn fail(report: Value, summary: String) -> Outcome {
        Outcome { report, summary, code: 1 }
    }
}

/// Usage and input problems exit with 2; failed mathematical properties with 1.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidOrder(_)
        | Error::OrderCap { .. }
        | Error::MalformedTable(_)
        | Error::GroupMismatch
        | Error::LevelOutOfRange { .. }
        | Error::ZeroDenominator
        | Error::RegisterOutOfRange { .. }
        | Error::LinkAcrossBlocks(_)
        | Error::TableSize { .. }
        | Error::ChainMismatch
        | Error::ChainGeometry(_)
        | Error::BudgetExceeded(_)
        | Error::PatchGeometry(_)
        | Error::Unsupported(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli.command) {
        Ok(outcome) => outcome,
        Err(err) => Outcome {
            report: json!({ "error": err.to_string() }),
            summary: format!("error: {err}"),
            code: exit_code_for(&err),
        },
    };
    let report = serde_json::to_string_pretty(&outcome.report)
        .expect("reports are plain JSON values");
    match cli.format {
        Format::Json => {
            println!("{report}");
            eprintln!("{}", outcome.summary);
        }
        Format::Text => {
            println!("{}", outcome.summary);
            eprintln!("{report}");
        }
    }
    ExitCode::from(outcome.code)
}

fn run(command: &Command) -> spt_index::Result<Outcome> {
    match command {
        Command::Cocycle(cmd) => run_cocycle(cmd),
        Command::Index(args) => run_index(args),
        Command::Verify(cmd) => run_verify(cmd),
    }
}

/// Resolves the shared input flags to (group, cocycle, group label, cocycle
/// label): `--cocycle` alone, or `--group zN --level p` for the standard
/// cyclic representative.
fn resolve_inputs(input: &InputArgs) -> spt_index::Result<(FiniteGroup, Cochain3, String, String)> {
    if let Some(spec) = &input.cocycle {
        let omega = resolve_cocycle_spec(&CocycleSpec::Text(spec.clone()))?;
        let group = omega.group().clone();
        if let Some(gspec) = &input.group {
            let named = resolve_group_spec(&GroupSpec::Text(gspec.clone()))?;
            if named != group {
                return Err(Error::GroupMismatch);
            }
        }
        let group_label = input.group.clone().unwrap_or_else(|| format!("|G|={}", group.order()));
        return Ok((group, omega, group_label, spec.clone()));
    }
    let gspec = input.group.as_deref().ok_or_else(|| {
        Error::Unsupported("provide --cocycle, or --group together with --level".into())
    })?;
    let group = resolve_group_spec(&GroupSpec::Text(gspec.to_string()))?;
    let level = input.level.ok_or_else(|| {
        Error::Unsupported("provide --level with --group, or use --cocycle".into())
    })?;
    if group.cyclic_generator() != Some(1) {
        return Err(Error::Unsupported(format!(
            "--level needs a cyclic group in standard form (zN); got {gspec:?}"
        )));
    }
    let omega = Cochain3::standard_cyclic(group.order(), level)?;
    Ok((group, omega, gspec.to_string(), format!("{gspec}:{level}")))
}

/// Exponent of a phase as the reduced fraction of 2π, e.g. "1/3"; "0" is 1.
fn phase_exponent(p: Phase) -> String {
    if p.is_one() {
        "0".to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

/// Human form of a phase: 1, -1, or e(q) = exp(2πi·q).
fn phase_human(p: Phase) -> String {
    if p.is_one() {
        "1".to_string()
    } else if p == Phase::MINUS_ONE {
        "-1".to_string()
    } else {
        format!("e({}/{})", p.numer(), p.denom())
    }
}

fn scan_label(status: ScanStatus) -> String {
    match status {
        ScanStatus::Exhaustive => "exhaustive".to_string(),
        ScanStatus::Sampled(count) => format!("sampled({count})"),
    }
}

/// The nontrivial entries of a 3-cochain as human-readable lines.
fn table_lines(omega: &Cochain3) -> Vec<String> {
    let group = omega.group();
    let mut lines = Vec::new();
    for g in group.elements() {
        for h in group.elements() {
            for k in group.elements() {
                let value = omega.get(g, h, k);
                if !value.is_one() {
                    lines.push(format!("ω({g},{h},{k}) = {}", phase_human(value)));
                }
            }
        }
    }
    if lines.is_empty() {
        lines.push("all entries 1 (trivial table)".to_string());
    }
    lines
}

fn cocycle_file_value(omega: &Cochain3, group_label: &str) -> spt_index::Result<Value> {
    let file = CocycleFile::from_cochain(omega, GroupSpec::Text(group_label.to_string()))?;
    Ok(serde_json::to_value(&file)?)
}

fn run_cocycle(cmd: &CocycleCmd) -> spt_index::Result<Outcome> {
    match cmd {
        CocycleCmd::Make { group, level, out } => {
            let g = parse_group_shorthand(group)?;
            if g.cyclic_generator() != Some(1) {
                return Err(Error::Unsupported(format!(
                    "standard representatives exist per cyclic group; got {group:?}"
                )));
            }
            let omega = Cochain3::standard_cyclic(g.order(), *level)?;
            let file = cocycle_file_value(&omega, group)?;
            if let Some(path) = out {
                std::fs::write(path, format!("{:#}\n", file))?;
            }
            let report = json!({
                "command": "cocycle make",
                "group": group,
                "level": level,
                "cocycle": file,
                "written_to": out.as_ref().map(|p| p.display().to_string()),
            });
            let mut summary = format!(
                "standard representative of H³(Z_{}) at level {level}:\n  {}",
                g.order(),
                table_lines(&omega).join("\n  ")
            );
            if let Some(path) = out {
                summary.push_str(&format!("\nwritten to {}", path.display()));
            }
            Ok(Outcome::pass(report, summary))
        }
        CocycleCmd::Check { cocycle } => {
            let omega = resolve_cocycle_spec(&CocycleSpec::Text(cocycle.clone()))?;
            let violation = omega.check_cocycle().err();
            let normalized = omega.is_normalized();
            let report = json!({
                "command": "cocycle check",
                "cocycle": cocycle,
                "group_order": omega.group().order(),
                "cocycle_identity": violation.is_none(),
                "violation": violation.as_ref().map(|v| format!("{v:?}")),
                "normalized": normalized,
            });
            match violation {
                None => {
                    let note = if normalized { "" } else { " (not normalized)" };
                    Ok(Outcome::pass(report, format!("pass: cocycle identity holds{note}")))
                }
                Some(v) => Ok(Outcome::fail(report, format!("fail: {v:?}"))),
            }
        }
        CocycleCmd::Compare { a, b } => {
            let wa = resolve_cocycle_spec(&CocycleSpec::Text(a.clone()))?;
            let wb = resolve_cocycle_spec(&CocycleSpec::Text(b.clone()))?;
            let witness = same_class(&wa, &wb)?;
            let witness_value = match &witness {
                Some(mu) => {
                    let label = GroupSpec::Text(format!("|G|={}", wa.group().order()));
                    Some(serde_json::to_value(&WitnessFile::from_cochain(mu, label)?)?)
                }
                None => None,
            };
            let report = json!({
                "command": "cocycle compare",
                "a": a,
                "b": b,
                "same_class": witness.is_some(),
                "witness": witness_value,
            });
            match witness {
                Some(_) => Ok(Outcome::pass(report, "same class: coboundary witness found".into())),
                None => Ok(Outcome::fail(report, "distinct classes: no coboundary connects the two tables".into())),
            }
        }
        CocycleCmd::Level { cocycle } => {
            let omega = resolve_cocycle_spec(&CocycleSpec::Text(cocycle.clone()))?;
            let generator = omega.group().cyclic_generator().ok_or_else(|| {
                Error::Unsupported("level classification needs a cyclic group".into())
            })?;
            omega.require_cocycle()?;
            let level = identify_cyclic_level(&omega, generator)?;
            let n = omega.group().order();
            let report = json!({
                "command": "cocycle level",
                "cocycle": cocycle,
                "group_order": n,
                "level": level,
            });
            Ok(Outcome::pass(report, format!("class level {level} in H³(Z_{n}) ≅ Z_{n}")))
        }
    }
}

fn run_index(args: &IndexArgs) -> spt_index::Result<Outcome> {
    let (_, omega, group_label, cocycle_label) = resolve_inputs(&args.input)?;
    let cut = args.cut.unwrap_or(args.length / 2);
    let pipeline = IndexPipeline::new(build_compensators(&omega, args.length, cut)?)?;
    let table = pipeline.extract_table()?;
    let report = pipeline.report(&group_label, &cocycle_label)?;
    let passed = report.cocycle_check && report.class.matches_input;

    let mut value = serde_json::to_value(&report)?;
    let fields = value.as_object_mut().expect("IndexReport serializes to an object");
    fields.insert("command".into(), json!("index"));
    fields.insert("length".into(), json!(args.length));
    fields.insert("cut".into(), json!(cut));

    let mut lines = vec![format!(
        "extracted table for {cocycle_label} on a length-{} chain, cut {cut}:",
        args.length
    )];
    lines.extend(table_lines(&table).into_iter().map(|l| format!("  {l}")));
    lines.push(format!(
        "cocycle identity: {}; matches input class: {}{}",
        if report.cocycle_check { "pass" } else { "FAIL" },
        if report.class.matches_input { "yes" } else { "NO" },
        report
            .class
            .cyclic_level
            .map(|p| format!("; cyclic level {p}"))
            .unwrap_or_default(),
    ));
    let summary = lines.join("\n");
    if passed {
        Ok(Outcome::pass(value, summary))
    } else {
        Ok(Outcome::fail(value, summary))
    }
}

fn run_verify(cmd: &VerifyCmd) -> spt_index::Result<Outcome> {
    match cmd {
        VerifyCmd::Invariance { input, length, seed } => {
            let (_, omega, _, cocycle_label) = resolve_inputs(input)?;
            let checks = choice_invariance_suite(&omega, *length, *seed)?;
            let report = json!({
                "command": "verify invariance",
                "cocycle": cocycle_label,
                "length": length,
                "seed": seed,
                "checks": checks,
                "pass": true,
            });
            let summary = format!(
                "seed {seed}: table entrywise identical under {} varied choices:\n  {}",
                checks.len(),
                checks.join("\n  ")
            );
            Ok(Outcome::pass(report, summary))
        }
        VerifyCmd::Stacking { group, levels, length } => {
            let g = parse_group_shorthand(group)?;
            if g.cyclic_generator() != Some(1) {
                return Err(Error::Unsupported(format!(
                    "stacking levels are defined for cyclic groups; got {group:?}"
                )));
            }
            let n = g.order();
            let (pa, pb) = *levels;
            let cut = length / 2;
            let build = |p: usize| -> spt_index::Result<IndexPipeline> {
                let omega = Cochain3::standard_cyclic(n, p)?;
                IndexPipeline::new(build_compensators(&omega, *length, cut)?)
            };
            let pipe_a = build(pa)?;
            let pipe_b = build(pb)?;
            let table_a = pipe_a.extract_table()?;
            let table_b = pipe_b.extract_table()?;
            let stacked = stack_models(&pipe_a, &pipe_b)?.extract_table()?;
            let product = table_a.mul(&table_b)?;
            let multiplicative = stacked == product;
            let level = identify_cyclic_level(&stacked, 1)?;
            let certified =
                same_class(&stacked, &Cochain3::standard_cyclic(n, (pa + pb) % n)?)?.is_some();
            let report = json!({
                "command": "verify stacking",
                "group": group,
                "levels": [pa, pb],
                "length": length,
                "entrywise_product": multiplicative,
                "stacked_level": level,
                "certified_level_sum": certified,
            });
            let class_text = if level == 0 {
                "product class trivial".to_string()
            } else {
                format!("product class at level {level}")
            };
            let summary = format!(
                "stacked level-{pa} and level-{pb} models over Z_{n}: extracted table {} the entrywise product; {}",
                if multiplicative { "equals" } else { "DIFFERS FROM" },
                class_text,
            );
            if multiplicative && certified {
                Ok(Outcome::pass(report, summary))
            } else {
                Ok(Outcome::fail(report, summary))
            }
        }
        VerifyCmd::Patch { input, w, h, assignment, config } => {
            let (omega, cocycle_label, w, h, chosen) = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let cfg: PatchConfig = serde_json::from_str(&text)?;
                    if cfg.bc != "torus" {
                        return Err(Error::Unsupported(format!(
                            "boundary condition {:?}: only \"torus\" is supported",
                            cfg.bc
                        )));
                    }
                    let omega = resolve_cocycle_spec(&cfg.cocycle)?;
                    let group = resolve_group_spec(&cfg.group)?;
                    if *omega.group() != group {
                        return Err(Error::GroupMismatch);
                    }
                    let chosen = match cfg.link_assignment.as_str() {
                        "auto" => None,
                        name => Some(LinkAssignment::from_name(name)?),
                    };
                    (omega, path.display().to_string(), cfg.w, cfg.h, chosen)
                }
                None => {
                    let (_, omega, _, cocycle_label) = resolve_inputs(input)?;
                    let w = w.ok_or_else(|| Error::Unsupported("provide --W (or --config)".into()))?;
                    let h = h.ok_or_else(|| Error::Unsupported("provide --H (or --config)".into()))?;
                    let chosen = match assignment.as_str() {
                        "auto" => None,
                        name => Some(LinkAssignment::from_name(name)?),
                    };
                    (omega, cocycle_label, w, h, chosen)
                }
            };
            if w < 4 {
                return Err(Error::PatchGeometry(format!(
                    "width {w} < 4: the cross-check arc needs at least 2 of the W boundary links"
                )));
            }
            if h % 2 != 0 {
                return Err(Error::PatchGeometry(format!(
                    "height {h} is odd: the restricted region spans the lower half of the torus"
                )));
            }
            let geom = PatchGeometry::torus(w, h)?;
            let compensation = verify_compensation(&omega, geom, chosen)?;
            let overlaps_one = compensation.overlaps.iter().all(|p| p.is_one());

            let arc = (0, w / 2);
            let chain_table =
                IndexPipeline::new(build_compensators(&omega, w, w / 2)?)?.extract_table()?;
            let (arc_table, arc_status) =
                arc_index_crosscheck(&omega, geom, compensation.assignment, arc)?;
            let matches_chain = arc_table == chain_table;

            let report = json!({
                "command": "verify patch",
                "cocycle": cocycle_label,
                "W": w,
                "H": h,
                "assignment": compensation.assignment.name(),
                "candidates": compensation
                    .candidate_outcomes
                    .iter()
                    .map(|(a, line)| json!([a.name(), line]))
                    .collect::<Vec<_>>(),
                "compensation_overlaps": compensation
                    .overlaps
                    .iter()
                    .map(|p| phase_exponent(*p))
                    .collect::<Vec<_>>(),
                "compensation_scan": scan_label(compensation.status),
                "arc": [arc.0, arc.1],
                "arc_scan": scan_label(arc_status),
                "crosscheck_match": matches_chain,
                "pass": overlaps_one && matches_chain,
            });
            let summary = format!(
                "{}×{} torus, link assignment {}:\n  compensation overlap {} for all {} group elements ({} scan)\n  arc [{},{}) cross-check {} the boundary-chain table ({} scan)",
                w,
                h,
                compensation.assignment.name(),
                if overlaps_one { "exactly 1" } else { "NOT 1" },
                compensation.overlaps.len(),
                scan_label(compensation.status),
                arc.0,
                arc.1,
                if matches_chain { "matches" } else { "DIFFERS FROM" },
                scan_label(arc_status),
            );
            if overlaps_one && matches_chain {
                Ok(Outcome::pass(report, summary))
            } else {
                Ok(Outcome::fail(report, summary))
            }
        }
    }
}

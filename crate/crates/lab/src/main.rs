use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use symperturb::codegen::{emit_source_with, lower_table, Dialect, DialectRegistry};
use symperturb::lab::{
    oracle_check, run_depth_experiment_sharded, scan_mesh, ExperimentConfig, MeshBivariate, OutputFormat,
};
use symperturb::poly::{format_rational, PolyStats};
use symperturb::predicates::{PredicateKind, SlotPattern};
use symperturb::schemes::SchemeId;
use symperturb::tables::{compute_table, table_stats, Component, EvaluationTable};

#[derive(Parser)]
#[command(name = "symperturb", version, about = "Symbolic perturbation tables, experiments and code emission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an evaluation table and write it as JSON.
    Table {
        #[command(flatten)]
        spec: TableSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print per-row term and operation counts of a table.
    Stats {
        /// A table JSON file; otherwise the table is built from the options.
        #[arg(long, conflicts_with_all = ["predicate", "scheme", "pattern"])]
        table: Option<PathBuf>,
        #[command(flatten)]
        spec: OptionalTableSpec,
    },
    /// Evaluate generated degenerate inputs and report depth statistics.
    DepthExperiment {
        #[arg(long)]
        predicate: PredicateKind,
        #[arg(long)]
        scheme: SchemeId,
        #[arg(short, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
        /// Worker threads; the report does not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Count degenerate configurations in the image of a tetrahedral mesh.
    Scan {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit evaluator source for a table through a dialect template.
    Emit {
        #[arg(long)]
        table: PathBuf,
        /// A registered dialect name or a path to a dialect TOML file.
        #[arg(long, default_value = "cpp")]
        dialect: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the expression IR as JSON.
        #[arg(long)]
        ir: Option<PathBuf>,
    },
    /// Cross-check table evaluation against the numeric epsilon oracle.
    OracleCheck {
        #[arg(short, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct TableSpec {
    #[arg(long)]
    predicate: PredicateKind,
    #[arg(long)]
    scheme: SchemeId,
    /// Comma-separated slot indices, e.g. `0,1,2`; defaults to distinct slots.
    #[arg(long, value_parser = parse_pattern)]
    pattern: Option<SlotPattern>,
    #[arg(long, default_value = "main", value_parser = parse_component)]
    component: Component,
}

#[derive(Args)]
struct OptionalTableSpec {
    #[arg(long, required_unless_present = "table")]
    predicate: Option<PredicateKind>,
    #[arg(long, required_unless_present = "table")]
    scheme: Option<SchemeId>,
    #[arg(long, value_parser = parse_pattern)]
    pattern: Option<SlotPattern>,
    #[arg(long, default_value = "main", value_parser = parse_component)]
    component: Component,
}

fn parse_pattern(s: &str) -> Result<SlotPattern, String> {
    s.split(',')
        .map(|v| v.trim().parse::<u32>().map_err(|e| format!("bad slot index {v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(SlotPattern::new)
}

fn parse_component(s: &str) -> Result<Component, String> {
    match s {
        "main" => Ok(Component::Main),
        "den1" => Ok(Component::Den1),
        "den2" => Ok(Component::Den2),
        _ => Err(format!("unknown component {s:?}; expected main, den1 or den2")),
    }
}

fn build(predicate: PredicateKind, scheme: SchemeId, pattern: Option<SlotPattern>, component: Component) -> Result<EvaluationTable> {
    let pattern = pattern.unwrap_or_else(|| SlotPattern::new((0..predicate.slot_count() as u32).collect::<Vec<_>>()));
    Ok(compute_table(predicate, scheme, &pattern, component)?)
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    let written = out.write_all(text.as_bytes()).and_then(|_| {
        if text.ends_with('\n') {
            Ok(())
        } else {
            out.write_all(b"\n")
        }
    });
    match written {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => print(text),
    }
}

fn load_table(path: &Path) -> Result<EvaluationTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(EvaluationTable::from_json(&text)?)
}

fn dialect(name: &str) -> Result<Dialect> {
    if name.ends_with(".toml") || Path::new(name).is_file() {
        return Ok(Dialect::load(name)?);
    }
    Ok(DialectRegistry::default().get(name)?.clone())
}

#[derive(Serialize)]
struct StatsReport<'a> {
    scheme: SchemeId,
    predicate: PredicateKind,
    component: Component,
    pattern_class: &'a [u32],
    depth: usize,
    terminal: Option<String>,
    rows: Vec<PolyStats>,
}

fn stats_report(t: &EvaluationTable) -> StatsReport<'_> {
    StatsReport {
        scheme: t.scheme,
        predicate: t.predicate,
        component: t.component,
        pattern_class: &t.pattern_class,
        depth: t.depth(),
        terminal: t.terminal.as_ref().map(format_rational),
        rows: table_stats(t).rows,
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Table { spec, out } => {
            let t = build(spec.predicate, spec.scheme, spec.pattern, spec.component)?;
            write_out(out.as_deref(), &t.to_json())?;
        }
        Command::Stats { table, spec } => {
            let t = match table {
                Some(p) => load_table(&p)?,
                None => match (spec.predicate, spec.scheme) {
                    (Some(p), Some(s)) => build(p, s, spec.pattern, spec.component)?,
                    _ => bail!("either --table or both --predicate and --scheme are required"),
                },
            };
            print(&serde_json::to_string_pretty(&stats_report(&t))?)?;
        }
        Command::DepthExperiment {
            predicate,
            scheme,
            n,
            seed,
            json: _,
            csv,
            workers,
        } => {
            if n == 0 {
                bail!("-n must be at least 1");
            }
            let format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
            let cfg = ExperimentConfig {
                predicate,
                scheme,
                n,
                seed,
                format,
            };
            let report = run_depth_experiment_sharded(&cfg, workers)?;
            write_out(None, &report.render(format))?;
        }
        Command::Scan { mesh, samples, seed } => {
            let m = MeshBivariate::load(&mesh).with_context(|| format!("loading {}", mesh.display()))?;
            print(&serde_json::to_string_pretty(&scan_mesh(&m, samples, seed)?)?)?;
        }
        Command::Emit { table, dialect: name, out, ir } => {
            let t = load_table(&table)?;
            let lowered = lower_table(&t);
            if let Some(p) = ir {
                fs::write(&p, lowered.to_json()).with_context(|| format!("writing {}", p.display()))?;
            }
            write_out(out.as_deref(), &emit_source_with(&lowered, &dialect(&name)?)?)?;
        }
        Command::OracleCheck { n, seed } => {
            let report = oracle_check(n, seed);
            print(&serde_json::to_string_pretty(&report)?)?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

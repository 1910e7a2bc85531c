//! Command-line front end.
//!
//! Exit codes: 0 when the model is opaque or the checked property holds, 1 when
//! it is not opaque or the property is refuted, 2 on any input error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ta_opacity::constructions::{augment, build_ctr, build_integral_automaton};
use ta_opacity::fa::{export_dot, Dfa};
use ta_opacity::format::parse_model;
use ta_opacity::model::{format_word, LocId};
use ta_opacity::opacity::{
    idtp_pipeline, irta_pipeline, verify_clto_idtp, verify_clto_irta, Stats,
};
use ta_opacity::oracle::{bounded_opacity_refute, Mode, DEFAULT_DEPTH};
use ta_opacity::reduce::reduce_ctr;
use ta_opacity::regions::build_region_automaton;
use ta_opacity::word::digitize;
use ta_opacity::{OpacitySpec, TimedAutomaton, TimedWord, Verdict};

#[derive(Parser)]
#[command(
    name = "ta-opacity",
    version,
    about = "Opacity verification for timed automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Checks that every resetting transition carries an equality constraint.
    CheckIrta { file: PathBuf },
    /// Decides opacity of a model file.
    Verify {
        procedure: Procedure,
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Include per-stage build times in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Writes an intermediate construction as Graphviz text.
    Dump {
        what: Construction,
        file: PathBuf,
        /// Output path, `-` for standard output.
        #[arg(long)]
        dot: PathBuf,
        /// Pipeline used for `dfa`; defaults to `clto` for integer-reset models
        /// and `clto-idtp` otherwise.
        #[arg(long, value_enum)]
        procedure: Option<Procedure>,
    },
    /// Brute-force cross-checks.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Lists every integer shift of a timed word such as `(a,0.5)(b,1)`.
    Digitize { word: String },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Searches for an observation of bounded length that violates opacity.
    Refute {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Procedure,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Procedure {
    /// Continuous-time observer; integer-reset models only.
    Clto,
    /// Observer with discrete-time precision; any model.
    CltoIdtp,
}

impl Procedure {
    fn name(self) -> &'static str {
        match self {
            Procedure::Clto => "clto",
            Procedure::CltoIdtp => "clto-idtp",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Regions,
    Augment,
    Ctr,
    Reduced,
    Integral,
    Dfa,
}

fn load(path: &Path) -> Result<(TimedAutomaton, OpacitySpec)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (model, spec) =
        parse_model(&text).with_context(|| format!("parsing {}", path.display()))?;
    model.ensure_valid()?;
    spec.validate_against(&model)?;
    Ok((model, spec))
}

fn names(model: &TimedAutomaton, set: &BTreeSet<LocId>) -> Vec<String> {
    set.iter()
        .map(|l| model.location_name(*l).to_string())
        .collect()
}

#[derive(Serialize)]
struct WitnessReport {
    observation: Vec<String>,
    timed_word: Option<String>,
    timing: Option<Vec<(String, String)>>,
    subset: Vec<String>,
    locations: Vec<String>,
    secret_hits: Vec<String>,
    nonsecret_hits: Vec<String>,
}

#[derive(Serialize)]
struct StageReport {
    stage: &'static str,
    states: usize,
    transitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    micros: Option<u128>,
}

#[derive(Serialize)]
struct BoundReport {
    quantity: &'static str,
    actual: u128,
    bound: u128,
}

#[derive(Serialize)]
struct Report {
    procedure: &'static str,
    opaque: bool,
    witness: Option<WitnessReport>,
    stages: Vec<StageReport>,
    bounds: Vec<BoundReport>,
}

fn report(
    model: &TimedAutomaton,
    procedure: Procedure,
    verdict: &Verdict,
    timings: bool,
) -> Report {
    let Stats { stages, bounds } = &verdict.stats;
    Report {
        procedure: procedure.name(),
        opaque: verdict.opaque,
        witness: verdict.witness.as_ref().map(|w| WitnessReport {
            observation: w.observation.iter().map(|l| l.to_string()).collect(),
            timed_word: w.timed.as_ref().map(TimedWord::to_string),
            timing: w
                .phases
                .as_ref()
                .map(|p| p.iter().map(|(s, t)| (s.clone(), t.to_string())).collect()),
            subset: w.members.clone(),
            locations: names(model, &w.locations),
            secret_hits: names(model, &w.secret_hits),
            nonsecret_hits: names(model, &w.nonsecret_hits),
        }),
        stages: stages
            .iter()
            .map(|s| StageReport {
                stage: s.stage,
                states: s.states,
                transitions: s.transitions,
                micros: timings.then_some(s.elapsed.as_micros()),
            })
            .collect(),
        bounds: bounds
            .iter()
            .map(|b| BoundReport {
                quantity: b.quantity,
                actual: b.actual,
                bound: b.bound,
            })
            .collect(),
    }
}

fn print_text(r: &Report) {
    println!(
        "verdict: {} ({})",
        if r.opaque { "OPAQUE" } else { "NOT OPAQUE" },
        r.procedure
    );
    if let Some(w) = &r.witness {
        println!("witness:");
        let obs = if w.observation.is_empty() {
            "ε".to_string()
        } else {
            w.observation.join(" ")
        };
        println!("  observation: {obs}");
        if let Some(t) = &w.timed_word {
            println!("  timed word: {t}");
        }
        if let Some(t) = &w.timing {
            let s: String = t.iter().map(|(e, at)| format!("({e},{at})")).collect();
            println!("  timing: {}", if s.is_empty() { "ε".into() } else { s });
        }
        println!("  subset: {{{}}}", w.subset.join(", "));
        println!("  locations: {}", w.locations.join(", "));
        println!("  secret: {}", w.secret_hits.join(", "));
    }
    println!("stages:");
    for s in &r.stages {
        print!(
            "  {:<10} {:>7} states {:>8} transitions",
            s.stage, s.states, s.transitions
        );
        match s.micros {
            Some(us) => println!(" {us:>10} us"),
            None => println!(),
        }
    }
    println!("bounds:");
    for b in &r.bounds {
        println!("  {}: {} <= {}", b.quantity, b.actual, b.bound);
    }
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn dfa_for(model: &TimedAutomaton, spec: &OpacitySpec, procedure: Procedure) -> Result<Dfa> {
    Ok(match procedure {
        Procedure::Clto => irta_pipeline(model, spec)?.dfa,
        Procedure::CltoIdtp => idtp_pipeline(model, spec)?.dfa,
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CheckIrta { file } => {
            let (model, _) = load(&file)?;
            match model.ensure_integer_resets() {
                Ok(()) => {
                    println!("integer resets: yes");
                    Ok(0)
                }
                Err(e) => {
                    println!("integer resets: no");
                    println!("{e}");
                    Ok(1)
                }
            }
        }
        Command::Verify {
            procedure,
            file,
            format,
            timings,
        } => {
            let (model, spec) = load(&file)?;
            let verdict = match procedure {
                Procedure::Clto => verify_clto_irta(&model, &spec)?,
                Procedure::CltoIdtp => verify_clto_idtp(&model, &spec)?,
            };
            let r = report(&model, procedure, &verdict, timings);
            match format {
                Format::Text => print_text(&r),
                Format::Json => println!("{}", serde_json::to_string_pretty(&r)?),
            }
            Ok(if verdict.opaque { 0 } else { 1 })
        }
        Command::Dump {
            what,
            file,
            dot,
            procedure,
        } => {
            let (model, spec) = load(&file)?;
            let hidden = model.hide_unobservable(&spec)?;
            let text = match what {
                Construction::Regions => {
                    export_dot(&build_region_automaton(&hidden).fa, &spec.secret)
                }
                Construction::Augment => augment(&hidden)?.ta.to_dot(),
                Construction::Ctr => build_ctr(&hidden).ta.to_dot(),
                Construction::Reduced => reduce_ctr(&build_ctr(&hidden)).ctr.ta.to_dot(),
                Construction::Integral => {
                    let reduced = reduce_ctr(&build_ctr(&hidden)).ctr;
                    export_dot(&build_integral_automaton(&reduced.ta).fa, &spec.secret)
                }
                Construction::Dfa => {
                    let procedure = procedure.unwrap_or(if model.check_integer_resets() {
                        Procedure::Clto
                    } else {
                        Procedure::CltoIdtp
                    });
                    let dfa = dfa_for(&model, &spec, procedure)?;
                    export_dot(&dfa.fa, &spec.secret)
                }
            };
            write_out(&dot, &text)?;
            Ok(0)
        }
        Command::Oracle {
            command: OracleCommand::Refute { file, mode, depth },
        } => {
            let (model, spec) = load(&file)?;
            let mode = match mode {
                Procedure::Clto => Mode::CltoIrta,
                Procedure::CltoIdtp => Mode::CltoIdtp,
            };
            match bounded_opacity_refute(&model, &spec, mode, depth)? {
                Some(w) => {
                    println!("refuted at depth {depth}: {}", format_word(&w));
                    Ok(1)
                }
                None => {
                    println!("no violating observation up to depth {depth}");
                    Ok(0)
                }
            }
        }
        Command::Digitize { word } => {
            let w = match TimedWord::parse(&word) {
                Ok(w) => w,
                Err(e) => bail!("invalid timed word: {e}"),
            };
            for d in digitize(&w) {
                println!("{d}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

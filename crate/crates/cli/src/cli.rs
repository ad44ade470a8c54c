//! Command-line driver. Exit codes: 0 when a decision was computed
//! (including a "no"), 1 on usage or input errors, 2 when a solve was
//! declined as infeasible or a search budget ran out.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use smpswap_core::gen::{self, RandomSpec};
use smpswap_core::psm::{self, MatchingTarget, PsmError};
use smpswap_core::repair::{min_repair, RepairError, RepairMethod};
use smpswap_core::stability::{stability_report, deferred_acceptance, unmatched_vertices};
use smpswap_core::{Instance, Side, Subgraph};

use crate::format::{self, ParseError};
use crate::report::{edges_value, subgraph_value, swaps_value, Report, ReportFormat};

/// Environment variable mirroring `--budget-states`.
pub const BUDGET_STATES_ENV: &str = "SMPSWAP_BUDGET_STATES";

#[derive(Parser)]
#[command(
    name = "smpswap",
    version,
    about = "Stable-matching repair by preference swaps",
    disable_help_subcommand = true
)]
struct Args {
    /// Report output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: ReportFormat,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RepairMethodArg {
    Brute,
    Sfm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PsmMethodArg {
    /// Breadth-first search over preference profiles.
    Bfs,
    /// Enumerate target matchings and repair each.
    Enum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Perfect,
    Maximum,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an instance file and report every invariant violation.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Report the blocking edges of a subgraph.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        subgraph: PathBuf,
    },
    /// Run deferred acceptance and report the stable subgraph.
    Da {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "a")]
        side: SideArg,
        /// Also write the subgraph to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a minimum-length swap sequence making the subgraph stable.
    Repair {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        subgraph: PathBuf,
        #[arg(long, value_enum, default_value = "sfm")]
        method: RepairMethodArg,
        /// Write the repaired instance (input with the sequence applied).
        #[arg(long)]
        apply_out: Option<PathBuf>,
    },
    /// Decide whether at most k swaps reach an instance with a perfect
    /// stable matching.
    Psm {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "bfs")]
        method: PsmMethodArg,
        /// Matching family for the enum method.
        #[arg(long, value_enum, default_value = "perfect")]
        target: TargetArg,
        /// Cap on preference profiles visited by bfs.
        #[arg(long)]
        budget_states: Option<usize>,
        /// Cap on matchings enumerated by enum.
        #[arg(long)]
        budget_matchings: Option<usize>,
    },
    /// Write a generated instance file.
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// The 3x3 worked example used in the docs and tests.
    Sample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Path of 2n+2 vertices whose unique stable matching is imperfect.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance.
    Random {
        #[arg(long)]
        na: usize,
        #[arg(long)]
        nb: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        cap_max: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Report(i32, Report),
    /// Raw output for commands whose product is a file body (gen).
    Raw(String),
    /// Output already written to a file.
    Done,
}

struct Failure(String);

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure(e.to_string())
    }
}

pub fn run_cli(args: &[String], out: &mut dyn Write) -> i32 {
    let parsed = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    let start = Instant::now();
    match dispatch(parsed.command) {
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Raw(text)) => {
            let _ = write!(out, "{text}");
            0
        }
        Ok(Outcome::Report(code, mut report)) => {
            report.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
            let _ = write!(out, "{}", report.render(parsed.format));
            code
        }
    }
}

fn read_instance(path: &Path) -> Result<(Instance, Value), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let inst = format::parse_instance(&text)?;
    let input = json!({
        "instance": path.display().to_string(),
        "instance_sha256": digest(&text),
    });
    Ok((inst, input))
}

fn read_subgraph(path: &Path, inst: &Instance, input: &mut Value) -> Result<Subgraph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let s = format::parse_subgraph(&text, inst)?;
    input["subgraph"] = json!(path.display().to_string());
    input["subgraph_sha256"] = json!(digest(&text));
    Ok(s)
}

fn digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn indices_value(set: &std::collections::BTreeSet<usize>) -> Value {
    Value::Array(set.iter().map(|&v| json!(v + 1)).collect())
}

fn dispatch(cmd: Cmd) -> Result<Outcome, Failure> {
    match cmd {
        Cmd::Validate { instance } => {
            let text = fs::read_to_string(&instance)
                .map_err(|e| Failure(format!("{}: {e}", instance.display())))?;
            let parsed = format::parse_instance_lenient(&text)?;
            let violations: Vec<Value> = parsed
                .violations
                .iter()
                .map(|(v, line)| json!({"line": line, "message": v.to_string()}))
                .collect();
            let report = Report::new(
                "validate",
                json!({
                    "instance": instance.display().to_string(),
                    "instance_sha256": digest(&text),
                }),
                json!({
                    "valid": parsed.is_valid(),
                    "violations": violations,
                    "vertices_a": parsed.instance.n_a(),
                    "vertices_b": parsed.instance.n_b(),
                    "edges": parsed.instance.edge_count(),
                }),
                json!({}),
            );
            Ok(Outcome::Report(0, report))
        }
        Cmd::Check { instance, subgraph } => {
            let (inst, mut input) = read_instance(&instance)?;
            let s = read_subgraph(&subgraph, &inst, &mut input)?;
            let sr = stability_report(&inst, &s);
            let side_value = |r: &smpswap_core::stability::SideReason| {
                json!({
                    "under_capacity": r.under_capacity,
                    "prefers_over_matched": r.prefers_over_matched,
                })
            };
            let blocking: Vec<Value> = sr
                .blocking
                .iter()
                .map(|((i, j), reason)| {
                    json!({
                        "a": i + 1,
                        "b": j + 1,
                        "side_a": side_value(&reason.a),
                        "side_b": side_value(&reason.b),
                    })
                })
                .collect();
            let report = Report::new(
                "check",
                input,
                json!({
                    "stable": sr.stable,
                    "blocking_count": sr.blocking.len(),
                    "blocking": blocking,
                }),
                json!({"edges": inst.edge_count(), "subgraph_edges": s.len()}),
            );
            Ok(Outcome::Report(0, report))
        }
        Cmd::Da { instance, side, out } => {
            let (inst, input) = read_instance(&instance)?;
            let side = match side {
                SideArg::A => Side::A,
                SideArg::B => Side::B,
            };
            let s = deferred_acceptance(&inst, side);
            let (ua, ub) = unmatched_vertices(&inst, &s);
            if let Some(path) = &out {
                write_file(path, &format::serialize_subgraph(&s))?;
            }
            let report = Report::new(
                "da",
                input,
                json!({
                    "side": side.to_string(),
                    "matching": subgraph_value(&s),
                    "unmatched_a": indices_value(&ua),
                    "unmatched_b": indices_value(&ub),
                }),
                json!({"matched_edges": s.len()}),
            );
            Ok(Outcome::Report(0, report))
        }
        Cmd::Repair { instance, subgraph, method, apply_out } => {
            let (inst, mut input) = read_instance(&instance)?;
            let s = read_subgraph(&subgraph, &inst, &mut input)?;
            let method_name = match method {
                RepairMethodArg::Brute => "brute",
                RepairMethodArg::Sfm => "sfm",
            };
            let method = match method {
                RepairMethodArg::Brute => RepairMethod::Brute,
                RepairMethodArg::Sfm => RepairMethod::Sfm,
            };
            match min_repair(&inst, &s, method) {
                Err(RepairError::Infeasible { edge }) => {
                    let report = Report::new(
                        "repair",
                        input,
                        json!({
                            "feasible": false,
                            "method": method_name,
                            "infeasible_edge": [edge.0 + 1, edge.1 + 1],
                            "message": RepairError::Infeasible { edge }.to_string(),
                        }),
                        json!({}),
                    );
                    Ok(Outcome::Report(2, report))
                }
                Err(e) => Err(Failure(e.to_string())),
                Ok(r) => {
                    if let Some(path) = &apply_out {
                        let repaired = inst
                            .apply_sequence(&r.sequence)
                            .expect("repair sequences are valid");
                        write_file(path, &format::serialize_instance(&repaired))?;
                    }
                    let report = Report::new(
                        "repair",
                        input,
                        json!({
                            "feasible": true,
                            "method": method_name,
                            "cost": r.cost,
                            "fixed_on_a": edges_value(&r.chosen),
                            "sequence": swaps_value(&r.sequence),
                            "group_costs_a": r.group_costs_a,
                            "group_costs_b": r.group_costs_b,
                            "blocking": {
                                "all": edges_value(&r.analysis.e_b),
                                "fixable_a": edges_value(&r.analysis.e_b_a),
                                "fixable_b": edges_value(&r.analysis.e_b_b),
                                "forced_a": edges_value(&r.analysis.forced_a),
                                "forced_b": edges_value(&r.analysis.forced_b),
                                "free": edges_value(&r.analysis.free),
                            },
                        }),
                        json!({"oracle_calls": r.oracle_calls}),
                    );
                    Ok(Outcome::Report(0, report))
                }
            }
        }
        Cmd::Psm { instance, k, method, target, budget_states, budget_matchings } => {
            let (inst, input) = read_instance(&instance)?;
            let states_budget = match budget_states {
                Some(b) => b,
                None => match std::env::var(BUDGET_STATES_ENV) {
                    Ok(v) => v.parse().map_err(|_| {
                        Failure(format!("{BUDGET_STATES_ENV} must be an integer, got `{v}`"))
                    })?,
                    Err(_) => psm::DEFAULT_STATE_BUDGET,
                },
            };
            let matchings_budget = budget_matchings.unwrap_or(psm::DEFAULT_MATCHING_BUDGET);
            let target = match target {
                TargetArg::Perfect => MatchingTarget::Perfect,
                TargetArg::Maximum => MatchingTarget::Maximum,
            };
            let (method_name, outcome) = match method {
                PsmMethodArg::Bfs => {
                    if target == MatchingTarget::Maximum {
                        return Err(Failure(
                            "the bfs method supports only --target perfect; use --method enum"
                                .into(),
                        ));
                    }
                    ("bfs", psm::psm_bfs(&inst, k, states_budget))
                }
                PsmMethodArg::Enum => (
                    "enum",
                    psm::psm_via_matchings(
                        &inst,
                        k,
                        matchings_budget,
                        RepairMethod::Sfm,
                        target,
                    ),
                ),
            };
            let stats_value = |stats: &psm::PsmStats| {
                json!({
                    "states_expanded": stats.states_expanded,
                    "matchings_enumerated": stats.matchings_enumerated,
                })
            };
            match outcome {
                Err(PsmError::StateBudgetExceeded { stats }) => {
                    let report = Report::new(
                        "psm",
                        input,
                        json!({
                            "method": method_name,
                            "k": k,
                            "decision": Value::Null,
                            "budget_exceeded": "states",
                        }),
                        stats_value(&stats),
                    );
                    Ok(Outcome::Report(2, report))
                }
                Err(PsmError::TooManyMatchings { cap }) => {
                    let report = Report::new(
                        "psm",
                        input,
                        json!({
                            "method": method_name,
                            "k": k,
                            "decision": Value::Null,
                            "budget_exceeded": "matchings",
                            "matching_budget": cap,
                        }),
                        json!({}),
                    );
                    Ok(Outcome::Report(2, report))
                }
                Err(e) => Err(Failure(e.to_string())),
                Ok(r) => {
                    let report = Report::new(
                        "psm",
                        input,
                        json!({
                            "method": method_name,
                            "target": match target {
                                MatchingTarget::Perfect => "perfect",
                                MatchingTarget::Maximum => "maximum",
                            },
                            "k": k,
                            "decision": if r.decision { "yes" } else { "no" },
                            "cost": r.cost,
                            "sequence": r.sequence.as_deref().map(swaps_value),
                            "matching": r.matching.as_ref().map(subgraph_value),
                        }),
                        stats_value(&r.stats),
                    );
                    Ok(Outcome::Report(0, report))
                }
            }
        }
        Cmd::Gen { family } => {
            let (inst, out_path) = match family {
                GenCmd::Sample { out } => (gen::sample_3x3(), out),
                GenCmd::Path { n, out } => {
                    let inst = gen::path_instance(n).map_err(|e| Failure(e.to_string()))?;
                    (inst, out)
                }
                GenCmd::Random { na, nb, density, cap_max, seed, out } => {
                    if !(0.0..=1.0).contains(&density) {
                        return Err(Failure("density must be in [0, 1]".into()));
                    }
                    if cap_max < 1 {
                        return Err(Failure("cap-max must be >= 1".into()));
                    }
                    let inst = gen::random_instance(&RandomSpec {
                        n_a: na,
                        n_b: nb,
                        edge_density: density,
                        cap_max,
                        seed,
                    });
                    (inst, out)
                }
            };
            let text = format::serialize_instance(&inst);
            match out_path {
                Some(path) => {
                    write_file(&path, &text)?;
                    Ok(Outcome::Done)
                }
                None => Ok(Outcome::Raw(text)),
            }
        }
    }
}

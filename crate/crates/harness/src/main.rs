use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use detsched::generators::{generate, BetaSpec, Family, FamilySpec};
use detsched::model::{evaluate, Instance};
use detsched::oracle::{brute_force_capped, lb_fixed, lb_release, Objective, DEFAULT_MAX_BRUTEFORCE_N};
use detsched::pseudomatching::{construct_two_pm, rho_bound_check, weak_bound_check, PmError};
use detsched::rational::{format_rational, parse_rational, Rational};
use detsched::schedulers::{non_interfering, SchedulerChoice};
use detsched_harness::cross::cross_objective_check;
use detsched_harness::experiment::{run_experiment, write_csv, ExperimentConfig};
use detsched_harness::io::{parse_instance, parse_matching, parse_schedule, write_instance, MatchingKind};
use serde_json::json;

#[derive(Parser)]
#[command(name = "detsched", version, about = "Scheduling with uniformly deteriorating jobs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a family.
    Gen(GenArgs),
    /// Run a scheduler on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "best-of-two")]
        algorithm: SchedulerChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force optimum.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "makespan")]
        objective: Objective,
        #[arg(long, default_value_t = DEFAULT_MAX_BRUTEFORCE_N)]
        max_bruteforce_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a schedule; exits with 2 if it is infeasible.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio experiment over a family; writes CSV.
    Experiment(ExperimentArgs),
    /// Check a pseudomatching document, or build the 2-pseudomatchings
    /// for an instance's non-interfering schedule.
    VerifyPm {
        #[arg(long, conflicts_with = "matching", required_unless_present = "matching")]
        instance: Option<PathBuf>,
        #[arg(long)]
        matching: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_BRUTEFORCE_N)]
        max_bruteforce_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the makespan / total-completion relations on an instance.
    CrossCheck {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_BRUTEFORCE_N)]
        max_bruteforce_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    /// Job count, or k for the non-idling and ECTF worst-case families.
    #[arg(long)]
    size: usize,
    #[arg(long, value_parser = rational_arg)]
    beta: Rational,
    #[arg(long, value_parser = rational_arg)]
    scale: Option<Rational>,
    #[arg(long, env = "DETSCHED_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    alpha_max: u64,
    #[arg(long, default_value_t = 10)]
    r_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    sizes: Vec<usize>,
    /// Comma-separated; accepts rationals and 1/(2n), 1/n, n+1, 2n.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    betas: Vec<BetaSpec>,
    #[arg(long = "algorithm", value_delimiter = ',', default_value = "non-idling,non-interfering,best-of-two,ectf")]
    algorithms: Vec<SchedulerChoice>,
    #[arg(long, default_value = "makespan")]
    objective: Objective,
    #[arg(long, env = "DETSCHED_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_BRUTEFORCE_N)]
    max_bruteforce_n: usize,
    #[arg(long, value_parser = rational_arg)]
    scale: Option<Rational>,
    #[arg(long, default_value_t = 10)]
    alpha_max: u64,
    #[arg(long, default_value_t = 10)]
    r_max: u64,
    /// Fill the wall_time_ms column (makes output non-reproducible).
    #[arg(long)]
    record_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure and its exit code: 1 for bad input, 2 for a violated claim.
struct Failure {
    code: u8,
    message: String,
}

fn invalid(e: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn violated(e: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Failure> {
    emit(out, &(serde_json::to_string_pretty(value).expect("json value") + "\n"))
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(a) => {
            let mut spec = FamilySpec::new(a.family, a.size, a.beta)
                .seed(a.seed)
                .bounds(a.alpha_max, a.r_max);
            spec.scale = a.scale;
            let inst = generate(&spec).map_err(invalid)?;
            emit(a.out.as_deref(), &write_instance(&inst))
        }
        Command::Solve {
            instance,
            algorithm,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let s = algorithm.run(&inst);
            let r = evaluate(&inst, &s).map_err(violated)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "algorithm": algorithm.name(),
                    "order": s.order.iter().map(|id| id.0).collect::<Vec<_>>(),
                    "starts": strings(&s.starts),
                    "makespan": format_rational(&r.makespan),
                    "total_completion": format_rational(&r.total_completion),
                }),
            )
        }
        Command::Opt {
            instance,
            objective,
            max_bruteforce_n,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let opt = brute_force_capped(&inst, objective, max_bruteforce_n).map_err(invalid)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "objective": objective.name(),
                    "value": format_rational(&opt.best_value),
                    "order": opt.best_schedule.order.iter().map(|id| id.0).collect::<Vec<_>>(),
                    "starts": strings(&opt.best_schedule.starts),
                    "permutations_examined": opt.permutations_examined,
                    "lb_release": format_rational(&lb_release(&inst)),
                    "lb_fixed": format_rational(&lb_fixed(&inst)),
                }),
            )
        }
        Command::Eval {
            instance,
            schedule,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let s = parse_schedule(&read(&schedule)?, &inst).map_err(|e| {
                let msg = format!("{}: {e}", schedule.display());
                if e.is_infeasible() {
                    violated(msg)
                } else {
                    invalid(msg)
                }
            })?;
            let r = evaluate(&inst, &s).map_err(violated)?;
            let positions: Vec<_> = r
                .positions
                .iter()
                .map(|p| {
                    json!({
                        "job": p.job.0,
                        "start": format_rational(&p.start),
                        "completion": format_rational(&p.completion),
                        "gap": format_rational(&p.gap),
                    })
                })
                .collect();
            emit_json(
                out.as_deref(),
                &json!({
                    "makespan": format_rational(&r.makespan),
                    "total_completion": format_rational(&r.total_completion),
                    "positions": positions,
                }),
            )
        }
        Command::Experiment(a) => {
            let config = ExperimentConfig {
                family: a.family,
                trials: a.trials,
                sizes: a.sizes,
                betas: a.betas,
                seed: a.seed,
                algorithms: a.algorithms,
                objective: a.objective,
                max_bruteforce_n: a.max_bruteforce_n,
                scale: a.scale,
                alpha_max: a.alpha_max,
                r_max: a.r_max,
                record_timing: a.record_timing,
            };
            let rows = run_experiment(&config).map_err(invalid)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).map_err(invalid)?;
            emit(a.out.as_deref(), &String::from_utf8(buf).expect("utf-8 csv"))
        }
        Command::VerifyPm {
            instance,
            matching,
            max_bruteforce_n,
            out,
        } => {
            if let Some(path) = matching {
                let doc = parse_matching(&read(&path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                let check = match &doc.kind {
                    MatchingKind::Rho(rho) => rho_bound_check(&doc.sets, &doc.matching, rho),
                    MatchingKind::Weak => weak_bound_check(&doc.sets, &doc.matching),
                };
                let check = match check {
                    Ok(c) => c,
                    Err(PmError::InvalidPseudomatching(v)) => return Err(violated(format!("not a pseudomatching: {v}"))),
                    Err(e) => return Err(invalid(e)),
                };
                emit_json(
                    out.as_deref(),
                    &json!({
                        "valid": true,
                        "lhs": format_rational(&check.lhs),
                        "rhs": format_rational(&check.rhs),
                        "holds": check.holds,
                    }),
                )?;
                if !check.holds {
                    return Err(violated("bound does not hold"));
                }
                return Ok(());
            }
            let path = instance.expect("clap requires one of the inputs");
            let inst = load_instance(&path)?;
            let opt = brute_force_capped(&inst, Objective::Makespan, max_bruteforce_n).map_err(invalid)?;
            let report = construct_two_pm(&inst, &non_interfering(&inst), &opt.best_schedule).map_err(violated)?;
            let steps: Vec<_> = report
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "k": s.k,
                        "edges": s.matching.edges.iter().map(|e| [e.a, e.o]).collect::<Vec<_>>(),
                        "lhs": format_rational(&s.lhs),
                        "rhs": format_rational(&s.rhs),
                    })
                })
                .collect();
            emit_json(
                out.as_deref(),
                &json!({
                    "last_critical_index": report.last_critical_index,
                    "reduced": report.reduced_instance.is_some(),
                    "ni_order": report.ni_order.iter().map(|id| id.0).collect::<Vec<_>>(),
                    "opt_order": report.opt_order.iter().map(|id| id.0).collect::<Vec<_>>(),
                    "steps": steps,
                }),
            )
        }
        Command::CrossCheck {
            instance,
            max_bruteforce_n,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let report = cross_objective_check(&inst, max_bruteforce_n).map_err(invalid)?;
            let checks: Vec<_> = report
                .checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "lhs": format_rational(&c.lhs),
                        "rhs": format_rational(&c.rhs),
                        "holds": c.holds(),
                    })
                })
                .collect();
            emit_json(
                out.as_deref(),
                &json!({
                    "makespan_opt": format_rational(&report.makespan_opt),
                    "total_completion_opt": format_rational(&report.total_completion_opt),
                    "checks": checks,
                }),
            )?;
            if !report.all_hold() {
                return Err(violated("an inequality does not hold"));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

//! `mefe`: solve, verify, generate, enumerate and bench over MEFE matching
//! instance files.
//!
//! Exit codes for `solve`: 0 = a matching was found, 1 = provably none,
//! 2 = the chosen strategy was not applicable or ran out of budget,
//! 3 = input error. `verify` exits 0 exactly when the matching is MEFE.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mefe::instance::{Instance, Matching};
use mefe::oracle;
use mefe::outcome::{Budgets, SolveOpts, SolverOutcome};
use mefe::polycases::{dispatch, Strategy};
use mefe::rational::Rational;
use mefe::reductions::{
    from_3dpm, from_partition, from_smti33, random_instance, seed_stream, PartitionInput,
    RandomProfile, Smti33Input, SmtiVariant, Structure, ThreeDmInput, TiePolicy,
};
use mefe::verify::verify;

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_STOPPED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mefe",
    about = "Merit-based envy-free egalitarian TA-course matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunFlags {
    /// Solver: auto, brute, degcap, single, tadeg1, cap1, twoval,
    /// constenum, fptn, approx, exist-binval, exist-hr.
    #[arg(long, default_value = "auto")]
    strategy: String,
    /// Approximation slack as a rational in (0,1), e.g. 1/2. Required by
    /// and only meaningful for --strategy approx.
    #[arg(long)]
    epsilon: Option<String>,
    /// Enumeration budget (leaf visits and seat-vector combinations).
    /// Falls back to the MEFE_BUDGET environment variable.
    #[arg(long)]
    budget: Option<u64>,
    /// Worker count for parallelizable searches; any value produces
    /// identical output.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl RunFlags {
    fn opts(&self) -> SolveOpts {
        let defaults = Budgets::default();
        let budget = self.budget.or_else(|| {
            std::env::var("MEFE_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
        });
        SolveOpts {
            budgets: Budgets {
                leaf_visits: budget.unwrap_or(defaults.leaf_visits),
                seat_vectors: budget.unwrap_or(defaults.seat_vectors),
            },
            jobs: self.jobs.max(1),
        }
    }

    fn strategy(&self) -> Result<Strategy, String> {
        let epsilon = match &self.epsilon {
            Some(e) => Some(e.parse::<Rational>().map_err(|e| e.to_string())?),
            None => None,
        };
        if epsilon.is_some() && self.strategy != "approx" {
            return Err("--epsilon is only meaningful with --strategy approx".into());
        }
        Strategy::parse(&self.strategy, epsilon)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and write the matching.
    Solve {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the matching JSON; the report on stdout carries
        /// the assignment either way.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify a matching file against an instance file.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Emit an instance: from a reduction input file or pseudo-random.
    Generate {
        /// Reduction source: partition, smti or 3dpm. Random when omitted.
        #[arg(long)]
        from: Option<String>,
        /// Input JSON for --from.
        #[arg(long)]
        input: Option<PathBuf>,
        /// SMTI valuation variant: grades (4 - rank) or binary.
        #[arg(long, default_value = "grades")]
        smti_variant: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        courses: usize,
        #[arg(long, default_value_t = 6)]
        tas: usize,
        #[arg(long, default_value_t = 2)]
        cap_max: u32,
        #[arg(long, default_value_t = 4)]
        val_max: u64,
        /// none, degcap1, cap1, twoval, binval or allpos.
        #[arg(long, default_value = "none")]
        structure: String,
        /// free, distinct-grades or distinct-grades-utils.
        #[arg(long, default_value = "free")]
        tie_policy: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List every MEFE matching of an instance.
    Enumerate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sweep random instances and report per-strategy agreement with the
    /// brute-force oracle as CSV (or timing-free JSON).
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        courses: usize,
        #[arg(long, default_value_t = 6)]
        tas: usize,
        #[arg(long, default_value_t = 2)]
        cap_max: u32,
        #[arg(long, default_value_t = 4)]
        val_max: u64,
        #[arg(long, default_value = "none")]
        structure: String,
        #[arg(long, default_value = "free")]
        tie_policy: String,
        /// Comma-separated strategy names; defaults to auto.
        #[arg(long, default_value = "auto")]
        strategies: String,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn read_instance(path: &PathBuf) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Instance::from_json(&text)
}

fn write_or_print(output: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, content).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SolveReportWire {
    solver: String,
    verdict: String,
    certified_threshold: Option<Rational>,
    avg_utils: Option<std::collections::BTreeMap<String, Rational>>,
    assignment: Option<std::collections::BTreeMap<String, Option<String>>>,
    reason: Option<String>,
}

fn cmd_solve(
    input: PathBuf,
    output: Option<PathBuf>,
    run: RunFlags,
    format: Format,
) -> Result<u8, String> {
    let instance = read_instance(&input)?;
    let strategy = run.strategy()?;
    let opts = run.opts();
    let dispatched = match dispatch(&instance, strategy, &opts) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("stopped: {e}");
            return Ok(EXIT_STOPPED);
        }
    };

    let (verdict, code) = match &dispatched.outcome {
        SolverOutcome::Yes { .. } => ("yes", EXIT_YES),
        SolverOutcome::No => ("no", EXIT_NO),
        SolverOutcome::NotApplicable { .. } => ("not-applicable", EXIT_STOPPED),
    };

    let mut avg_utils = None;
    let mut assignment_wire = None;
    let mut certified_threshold = None;
    if let SolverOutcome::Yes {
        matching,
        certified,
    } = &dispatched.outcome
    {
        let report = verify(&instance, matching);
        avg_utils = Some(report.avg_utils);
        certified_threshold = Some(*certified);
        assignment_wire = Some(assignment_map(&instance, matching));
        if let Some(path) = &output {
            fs::write(path, matching.to_json(&instance))
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }

    match format {
        Format::Json => {
            let reason = match &dispatched.outcome {
                SolverOutcome::NotApplicable { reason } => Some(reason.clone()),
                _ => None,
            };
            let wire = SolveReportWire {
                solver: dispatched.solver.to_string(),
                verdict: verdict.to_string(),
                certified_threshold,
                avg_utils,
                assignment: assignment_wire,
                reason,
            };
            println!("{}", serde_json::to_string_pretty(&wire).unwrap());
        }
        Format::Text => {
            let mut text = String::new();
            writeln!(text, "solver:  {}", dispatched.solver).unwrap();
            writeln!(text, "verdict: {verdict}").unwrap();
            if let Some(k) = certified_threshold {
                writeln!(text, "certified threshold: {k}").unwrap();
            }
            if let Some(avgs) = &avg_utils {
                for (course, avg) in avgs {
                    writeln!(text, "avg-util {course}: {avg}").unwrap();
                }
            }
            if let Some(assignment) = &assignment_wire {
                for (ta, course) in assignment {
                    match course {
                        Some(c) => writeln!(text, "assign {ta} -> {c}").unwrap(),
                        None => writeln!(text, "assign {ta} -> (unassigned)").unwrap(),
                    }
                }
            }
            if let SolverOutcome::NotApplicable { reason } = &dispatched.outcome {
                writeln!(text, "reason: {reason}").unwrap();
            }
            print!("{text}");
        }
    }
    Ok(code)
}

fn assignment_map(
    instance: &Instance,
    matching: &Matching,
) -> std::collections::BTreeMap<String, Option<String>> {
    (0..instance.n_tas())
        .map(|t| {
            (
                instance.ta(t).id.clone(),
                matching.course_of(t).map(|c| instance.course(c).id.clone()),
            )
        })
        .collect()
}

fn cmd_verify(instance: PathBuf, matching: PathBuf, format: Format) -> Result<u8, String> {
    let inst = read_instance(&instance)?;
    let text = fs::read_to_string(&matching).map_err(|e| format!("{}: {e}", matching.display()))?;
    let mu = Matching::from_json(&inst, &text)?;
    let report = verify(&inst, &mu);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Text => {
            println!("feasible: {}", report.feasible);
            for (course, avg) in &report.avg_utils {
                println!("avg-util {course}: {avg} (k = {})", inst.k());
            }
            for (envier, envied) in &report.envy_pairs {
                println!("envy: {envier} -> {envied}");
            }
            for v in &report.violations {
                println!("violation: {v:?}");
            }
            println!("is-mefe: {}", report.is_mefe);
        }
    }
    Ok(if report.is_mefe { EXIT_YES } else { EXIT_NO })
}

fn cmd_generate(
    from: Option<String>,
    input: Option<PathBuf>,
    smti_variant: String,
    seed: u64,
    courses: usize,
    tas: usize,
    cap_max: u32,
    val_max: u64,
    structure: String,
    tie_policy: String,
    output: Option<PathBuf>,
) -> Result<u8, String> {
    let instance = match from.as_deref() {
        None => {
            let profile = RandomProfile {
                n: courses,
                m: tas,
                cap_max,
                val_max,
                tie_policy: TiePolicy::parse(&tie_policy)?,
                structure: Structure::parse(&structure)?,
            };
            random_instance(seed, &profile).map_err(|e| e.to_string())?
        }
        Some(kind) => {
            let path = input.ok_or("--from requires --input")?;
            let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            match kind {
                "partition" => {
                    let parsed: PartitionInput =
                        serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    from_partition(&parsed).map_err(|e| e.to_string())?
                }
                "smti" => {
                    let parsed: Smti33Input =
                        serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    let variant = match smti_variant.as_str() {
                        "grades" => SmtiVariant::GradeDerived,
                        "binary" => SmtiVariant::Binary,
                        other => return Err(format!("unknown smti variant `{other}`")),
                    };
                    from_smti33(&parsed, variant).map_err(|e| e.to_string())?
                }
                "3dpm" => {
                    let parsed: ThreeDmInput =
                        serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    from_3dpm(&parsed).map_err(|e| e.to_string())?
                }
                other => return Err(format!("unknown reduction `{other}`")),
            }
        }
    };
    write_or_print(&output, &instance.to_json())?;
    Ok(EXIT_YES)
}

fn cmd_enumerate(input: PathBuf, run: RunFlags, format: Format) -> Result<u8, String> {
    let instance = read_instance(&input)?;
    let opts = run.opts();
    let all = match oracle::enumerate_all_mefe_with(&instance, &opts) {
        Ok(all) => all,
        Err(e) => {
            eprintln!("stopped: {e}");
            return Ok(EXIT_STOPPED);
        }
    };
    match format {
        Format::Json => {
            let wire: Vec<_> = all.iter().map(|mu| assignment_map(&instance, mu)).collect();
            println!("{}", serde_json::to_string_pretty(&wire).unwrap());
        }
        Format::Text => {
            println!("{} MEFE matching(s)", all.len());
            for (i, mu) in all.iter().enumerate() {
                let pairs: Vec<String> = (0..instance.n_tas())
                    .filter_map(|t| {
                        mu.course_of(t)
                            .map(|c| format!("{}->{}", instance.ta(t).id, instance.course(c).id))
                    })
                    .collect();
                println!("#{}: {}", i + 1, pairs.join(", "));
            }
        }
    }
    Ok(EXIT_YES)
}

#[derive(Serialize)]
struct BenchRow {
    index: usize,
    strategy: String,
    n: usize,
    m: usize,
    structure: String,
    applicable: bool,
    verdict: String,
    oracle: String,
    agree: bool,
    verified: bool,
    min_avg_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_us: Option<u128>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    seed: u64,
    count: usize,
    courses: usize,
    tas: usize,
    cap_max: u32,
    val_max: u64,
    structure: String,
    tie_policy: String,
    strategies: String,
    epsilon: Option<String>,
    budget: Option<u64>,
    jobs: usize,
    format: Format,
) -> Result<u8, String> {
    let profile = RandomProfile {
        n: courses,
        m: tas,
        cap_max,
        val_max,
        tie_policy: TiePolicy::parse(&tie_policy)?,
        structure: Structure::parse(&structure)?,
    };
    let epsilon = match epsilon {
        Some(e) => Some(e.parse::<Rational>().map_err(|e| e.to_string())?),
        None => None,
    };
    let names: Vec<&str> = strategies.split(',').map(str::trim).collect();
    let parsed: Vec<(String, Strategy)> = names
        .iter()
        .map(|name| Ok((name.to_string(), Strategy::parse(name, epsilon)?)))
        .collect::<Result<_, String>>()?;
    let defaults = Budgets::default();
    let opts = SolveOpts {
        budgets: Budgets {
            leaf_visits: budget.unwrap_or(defaults.leaf_visits),
            seat_vectors: budget.unwrap_or(defaults.seat_vectors),
        },
        jobs: jobs.max(1),
    };

    let mut rows = Vec::new();
    for (index, inst_seed) in seed_stream(seed, count).into_iter().enumerate() {
        let instance = random_instance(inst_seed, &profile).map_err(|e| e.to_string())?;
        let oracle_outcome =
            oracle::solve_bruteforce_with(&instance, &opts).map_err(|e| format!("oracle: {e}"))?;
        for (name, strategy) in &parsed {
            let started = Instant::now();
            let outcome = dispatch(&instance, *strategy, &opts)
                .map(|d| d.outcome)
                .unwrap_or_else(|e| SolverOutcome::NotApplicable {
                    reason: e.to_string(),
                });
            let wall = started.elapsed().as_micros();
            let applicable = !outcome.is_not_applicable();
            let (verified, min_avg_ok) = match outcome.matching() {
                Some(mu) => {
                    let report = verify(&instance, mu);
                    let threshold = match outcome {
                        SolverOutcome::Yes { certified, .. } => certified,
                        _ => instance.k(),
                    };
                    (
                        report.feasible && report.envy_pairs.is_empty(),
                        report.avg_utils.values().all(|a| *a >= threshold),
                    )
                }
                None => (true, true),
            };
            // The approximation and existence strategies answer a relaxed or
            // restricted question; agreement is only meaningful for exact
            // strategies, so a Yes from them still counts via verification.
            let agree = match outcome {
                SolverOutcome::Yes { .. } => oracle_outcome.is_yes() || verified && min_avg_ok,
                SolverOutcome::No => !oracle_outcome.is_yes(),
                SolverOutcome::NotApplicable { .. } => true,
            };
            rows.push(BenchRow {
                index,
                strategy: name.clone(),
                n: instance.n_courses(),
                m: instance.n_tas(),
                structure: structure.clone(),
                applicable,
                verdict: match &outcome {
                    SolverOutcome::Yes { .. } => "yes".into(),
                    SolverOutcome::No => "no".into(),
                    SolverOutcome::NotApplicable { .. } => "not-applicable".into(),
                },
                oracle: if oracle_outcome.is_yes() { "yes" } else { "no" }.into(),
                agree,
                verified,
                min_avg_ok,
                wall_us: match format {
                    Format::Text => Some(wall),
                    Format::Json => None,
                },
            });
        }
    }

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).unwrap()),
        Format::Text => {
            println!(
                "index,strategy,n,m,structure,applicable,verdict,oracle,agree,verified,min_avg_ok,wall_us"
            );
            for r in rows {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.index,
                    r.strategy,
                    r.n,
                    r.m,
                    r.structure,
                    r.applicable,
                    r.verdict,
                    r.oracle,
                    r.agree,
                    r.verified,
                    r.min_avg_ok,
                    r.wall_us.unwrap_or(0)
                );
            }
        }
    }
    Ok(EXIT_YES)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            input,
            output,
            run,
            format,
        } => cmd_solve(input, output, run, format),
        Command::Verify {
            instance,
            matching,
            format,
        } => cmd_verify(instance, matching, format),
        Command::Generate {
            from,
            input,
            smti_variant,
            seed,
            courses,
            tas,
            cap_max,
            val_max,
            structure,
            tie_policy,
            output,
        } => cmd_generate(
            from,
            input,
            smti_variant,
            seed,
            courses,
            tas,
            cap_max,
            val_max,
            structure,
            tie_policy,
            output,
        ),
        Command::Enumerate { input, run, format } => cmd_enumerate(input, run, format),
        Command::Bench {
            seed,
            count,
            courses,
            tas,
            cap_max,
            val_max,
            structure,
            tie_policy,
            strategies,
            epsilon,
            budget,
            jobs,
            format,
        } => cmd_bench(
            seed, count, courses, tas, cap_max, val_max, structure, tie_policy, strategies,
            epsilon, budget, jobs, format,
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

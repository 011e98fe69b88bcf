//! `uel`: command-line front end for uncertain event logs.
//!
//! Exit codes: 0 success, 1 validation diagnostics, 2 resource bound hit,
//! 3 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use uncertain_core::conformance::DEFAULT_MAX_STATES;
use uncertain_core::io::{self, dot, report, Diagnostic, Injection};
use uncertain_core::model::{SupportMass, UncertainLog, UncertainTrace};
use uncertain_core::realizations::{DEFAULT_MAX_REALIZATIONS, DEFAULT_SAMPLES};
use uncertain_core::{
    build_optimized, conformance_bounds, enumerate, enumerate_with_probabilities, filter_udfg,
    to_behavior_net, udfg, ConformanceConfig, DiscoveryConfig, Error, ProbabilityConfig,
    Statistic, Time,
};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_BOUND: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Analyze uncertain event logs (`uel-1` JSON documents).
#[derive(Parser, Debug)]
#[command(name = "uel", version)]
struct Cli {
    /// Probability mass of the interval used as the support of a
    /// density timestamp when ordering events
    #[arg(long, global = true, value_name = "MASS", default_value_t = 0.9999)]
    mass: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a log, printing every diagnostic
    Validate {
        log: PathBuf,
    },
    /// Export the behavior graph of one trace as DOT
    Bgraph {
        log: PathBuf,
        /// Case id of the trace
        #[arg(long = "case", value_name = "ID")]
        case_id: String,
        /// DOT output file, `-` for stdout
        #[arg(long, value_name = "FILE", default_value = "-")]
        dot: PathBuf,
    },
    /// Export the behavior net of one trace as DOT and optionally as net text
    Bnet {
        log: PathBuf,
        #[arg(long = "case", value_name = "ID")]
        case_id: String,
        /// DOT output file, `-` for stdout
        #[arg(long, value_name = "FILE", default_value = "-")]
        dot: PathBuf,
        /// Also write the net in `behaviornet-v1` text form
        #[arg(long, value_name = "FILE")]
        net: Option<PathBuf>,
    },
    /// List the realizations of one trace
    Realize {
        log: PathBuf,
        #[arg(long = "case", value_name = "ID")]
        case_id: String,
        /// Attach a probability to each realization
        #[arg(long, requires = "seed")]
        probs: bool,
        /// Seed of the Monte Carlo sampler
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        /// Monte Carlo samples per ordering estimate
        #[arg(long, value_name = "N", default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Read strong uncertainty as uniform distributions
        #[arg(long)]
        uniform_defaults: bool,
        /// Fail once more than M realizations are found
        #[arg(long, value_name = "M", default_value_t = DEFAULT_MAX_REALIZATIONS)]
        max_count: usize,
        /// Print JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Build the uncertain directly-follows graph of the log
    Discover {
        log: PathBuf,
        /// DOT output file, `-` for stdout
        #[arg(long, value_name = "FILE", default_value = "-")]
        dot: PathBuf,
        /// Also write the bounds as CSV
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Drop activities (and edges, unless --filter-edge is given) whose
        /// statistic is below X
        #[arg(long, value_name = "X")]
        filter_min: Option<f64>,
        /// Edge threshold, defaults to --filter-min
        #[arg(long, value_name = "X")]
        filter_edge: Option<f64>,
        /// Statistic compared against the thresholds
        #[arg(long, value_enum, default_value_t = StatArg::Min)]
        stat: StatArg,
        /// Seed for expected counts; without it only min and max are reported
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        uniform_defaults: bool,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_MAX_REALIZATIONS)]
        max_count: usize,
    },
    /// Alignment cost bounds of every trace against a reference model
    Conform {
        log: PathBuf,
        /// Reference model in `behaviornet-v1` text form
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Restrict to one trace
        #[arg(long = "case", value_name = "ID")]
        case_id: Option<String>,
        /// Seed for expected costs; without it only bounds are reported
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        uniform_defaults: bool,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_MAX_REALIZATIONS)]
        max_count: usize,
        /// Search states allowed per alignment
        #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long)]
        json: bool,
    },
    /// Add synthetic strong uncertainty to the certain attributes of a log
    Inject {
        log: PathBuf,
        /// Chance that a certain timestamp becomes an interval
        #[arg(long, value_name = "R")]
        ts_rate: f64,
        /// Chance that a certain label becomes a label set
        #[arg(long, value_name = "R")]
        act_rate: f64,
        /// Chance that an event becomes indeterminate
        #[arg(long, value_name = "R")]
        ind_rate: f64,
        /// Half width of injected timestamp intervals
        #[arg(long, value_name = "M")]
        magnitude: Time,
        /// Extra labels added to an enlarged label set
        #[arg(long, value_name = "K")]
        k: usize,
        #[arg(long, value_name = "S")]
        seed: u64,
        /// Output file, `-` for stdout
        #[arg(short, long, value_name = "FILE", default_value = "-")]
        output: PathBuf,
    },
    /// Convert a crisp `case,activity,timestamp` CSV into a log
    Import {
        csv: PathBuf,
        #[arg(short, long, value_name = "FILE", default_value = "-")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StatArg {
    Min,
    Max,
    Expected,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::Min => Statistic::Min,
            StatArg::Max => Statistic::Max,
            StatArg::Expected => Statistic::Expected,
        }
    }
}

enum Failure {
    Diagnostics,
    Bound(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_bound() {
            return Failure::Bound(e.to_string());
        }
        match e {
            Error::InvalidParameter(_) | Error::AlphabetTooSmall { .. } => Failure::Usage(e.to_string()),
            other => {
                eprintln!("error: {other}");
                Failure::Diagnostics
            }
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostics) => ExitCode::from(EXIT_DIAGNOSTICS),
        Err(Failure::Bound(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BOUND)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let mass = SupportMass::new(cli.mass)
        .ok_or_else(|| Failure::Usage(format!("--mass must be in (0,1), got {}", cli.mass)))?;
    let prob_cfg = |seed: u64, samples: usize, uniform: bool| {
        ProbabilityConfig::new(seed)
            .with_samples(samples)
            .with_uniform_defaults(uniform)
            .with_support_mass(mass)
    };
    match cli.command {
        Command::Validate { log } => {
            let text = read(&log)?;
            match io::parse(&text) {
                Ok(parsed) => {
                    print_diagnostics(&log, &parsed.warnings);
                    println!(
                        "ok: {} traces, {} events",
                        parsed.log.traces.len(),
                        parsed.log.event_count()
                    );
                    Ok(())
                }
                Err(diags) => {
                    print_diagnostics(&log, &diags);
                    Err(Failure::Diagnostics)
                }
            }
        }
        Command::Bgraph { log, case_id, dot } => {
            let log = load(&log)?;
            let bg = build_optimized(trace(&log, &case_id)?, mass);
            write_out(&dot, &dot::behavior_graph_dot(&bg))
        }
        Command::Bnet { log, case_id, dot, net } => {
            let log = load(&log)?;
            let bnet = to_behavior_net(&build_optimized(trace(&log, &case_id)?, mass));
            write_out(&dot, &dot::petri_net_dot(&bnet, &case_id))?;
            match net {
                Some(path) => write_out(&path, &io::net_to_text(&bnet)),
                None => Ok(()),
            }
        }
        Command::Realize { log, case_id, probs, seed, samples, uniform_defaults, max_count, json } => {
            let log = load(&log)?;
            let t = trace(&log, &case_id)?;
            let rs = match (probs, seed) {
                (true, Some(seed)) => {
                    enumerate_with_probabilities(t, max_count, prob_cfg(seed, samples, uniform_defaults))?
                }
                _ => enumerate(t, max_count, mass)?,
            };
            let out = if json {
                report::realizations_json(&case_id, &rs)
            } else {
                report::realizations_text(&case_id, &rs)
            };
            write_out(Path::new("-"), &out)
        }
        Command::Discover {
            log,
            dot,
            csv,
            filter_min,
            filter_edge,
            stat,
            seed,
            samples,
            uniform_defaults,
            max_count,
        } => {
            if matches!(stat, StatArg::Expected) && seed.is_none() {
                return Err(Failure::Usage("--stat expected requires --seed".into()));
            }
            let log = load(&log)?;
            let cfg = DiscoveryConfig {
                max_realizations: max_count,
                support_mass: mass,
                probability: seed.map(|s| prob_cfg(s, samples, uniform_defaults)),
            };
            let mut u = udfg(&log, &cfg)?;
            if filter_min.is_some() || filter_edge.is_some() {
                let act = filter_min.unwrap_or(0.0);
                u = filter_udfg(&u, act, filter_edge.unwrap_or(act), stat.into());
            }
            write_out(&dot, &dot::udfg_dot(&u))?;
            match csv {
                Some(path) => write_out(&path, &report::udfg_csv(&u)),
                None => Ok(()),
            }
        }
        Command::Conform {
            log,
            model,
            case_id,
            seed,
            samples,
            uniform_defaults,
            max_count,
            max_states,
            json,
        } => {
            let log = load(&log)?;
            let model_text = read(&model)?;
            let net = io::parse_net(&model_text).map_err(|diags| {
                print_diagnostics(&model, &diags);
                Failure::Diagnostics
            })?;
            let cfg = ConformanceConfig {
                max_states,
                max_realizations: max_count,
                support_mass: mass,
                probability: seed.map(|s| prob_cfg(s, samples, uniform_defaults)),
            };
            let traces: Vec<&UncertainTrace> = match &case_id {
                Some(id) => vec![trace(&log, id)?],
                None => log.traces.iter().collect(),
            };
            let bounds = traces
                .into_iter()
                .map(|t| conformance_bounds(t, &net, &cfg))
                .collect::<Result<Vec<_>, Error>>()?;
            let rep = report::ConformanceReport::new(bounds);
            write_out(Path::new("-"), &if json { rep.to_json() } else { rep.to_text() })
        }
        Command::Inject { log, ts_rate, act_rate, ind_rate, magnitude, k, seed, output } => {
            let log = load(&log)?;
            let cfg = Injection {
                timestamp_rate: ts_rate,
                activity_rate: act_rate,
                indeterminacy_rate: ind_rate,
                magnitude,
                extra_labels: k,
                seed,
            };
            let injected = io::inject(&log, &cfg)?;
            write_out(&output, &io::serialize(&injected))
        }
        Command::Import { csv, output } => {
            let file = fs::File::open(&csv)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", csv.display())))?;
            let imported = io::import_crisp(file).map_err(|d| {
                print_diagnostics(&csv, &[d]);
                Failure::Diagnostics
            })?;
            write_out(&output, &io::serialize(&imported.log))?;
            if imported.is_partial() {
                print_diagnostics(&csv, &imported.diagnostics);
                return Err(Failure::Diagnostics);
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses and validates a log; any error diagnostic aborts the command.
fn load(path: &Path) -> Result<UncertainLog, Failure> {
    let text = read(path)?;
    match io::parse(&text) {
        Ok(parsed) => {
            print_diagnostics(path, &parsed.warnings);
            Ok(parsed.log)
        }
        Err(diags) => {
            print_diagnostics(path, &diags);
            Err(Failure::Diagnostics)
        }
    }
}

fn trace<'a>(log: &'a UncertainLog, case_id: &str) -> Result<&'a UncertainTrace, Failure> {
    log.trace(case_id)
        .ok_or_else(|| Failure::Usage(format!("no trace with case id {case_id:?}")))
}

fn print_diagnostics(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn write_out(path: &Path, content: &str) -> CliResult {
    if path == Path::new("-") {
        print!("{content}");
        return Ok(());
    }
    fs::write(path, content).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

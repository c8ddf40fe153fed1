use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netpricing_core::harness::data::{bundled, BUNDLED_PREFIX};
use netpricing_core::harness::export::{read_results_csv, SUMMARY_FILE};
use netpricing_core::harness::runner::mean_trajectory;
use netpricing_core::harness::scenario::{expand_sources, load_scenario_config};
use netpricing_core::harness::{
    export_results, loglog_slope, preset_names, regenerate_report, run_experiment, DEFAULT_MASTER_SEED,
};
use netpricing_core::network::{write_network_csv, NodeFeatures};
use netpricing_core::{Error, ErrorKind, PolicyKind};

#[derive(Parser)]
#[command(name = "netpricing", version, about = "Network-shrunken dynamic pricing simulator")]
struct Cli {
    /// Log verbosity (error, warn, info, debug); overrides RUST_LOG.
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment networks.
    Network {
        #[command(subcommand)]
        action: NetworkCommand,
    },
    /// Run policies on one or more scenarios and export the results.
    Simulate(SimulateArgs),
    /// Fit the tail log-log slope of a seed-averaged regret curve.
    Slope(SlopeArgs),
    /// Regenerate summary.csv and plots from a results directory.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum NetworkCommand {
    /// Build an RBF similarity network from node features.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Feature CSV (id column then numeric columns); `bundled:census_features.csv` is built in.
    #[arg(long)]
    features: String,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated subset of feature columns.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Use the features as given instead of standardizing each column.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Preset name, preset family (e.g. `setup4`), JSON config file, or a comma list of these.
    #[arg(long, required_unless_present = "list")]
    scenario: Option<String>,
    /// Comma-separated policies; defaults to the scenario's list.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<PolicyKind>>,
    /// Replications per policy; defaults to the scenario's count.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Master seed.
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Override the scenario horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Print the preset names and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct SlopeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    policy: PolicyKind,
    /// Trailing fraction of rounds used in the fit.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(level) = &cli.log {
        logger.parse_filters(level);
    }
    logger.init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Numeric => 3,
        ErrorKind::Io => 4,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Network {
            action: NetworkCommand::Build(args),
        } => build_network(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Slope(args) => slope(&args),
        Command::Report { dir } => {
            let table = regenerate_report(&dir)?;
            println!(
                "rewrote {} ({} rows, {} failures) and plots in {}",
                SUMMARY_FILE,
                table.rows.len(),
                table.failures.len(),
                dir.display()
            );
            Ok(())
        }
    }
}

fn build_network(args: &BuildArgs) -> Result<(), Error> {
    let columns = args.columns.as_deref();
    let features = if args.features.starts_with(BUNDLED_PREFIX) {
        let text =
            bundled(&args.features).ok_or_else(|| Error::Config(format!("no bundled file {:?}", args.features)))?;
        NodeFeatures::from_reader(text.as_bytes(), columns, &args.features)?
    } else {
        NodeFeatures::load(Path::new(&args.features), columns)?
    };
    let features = if args.raw { features } else { features.standardized() };
    let network = features.into_network(args.width, args.threshold)?;
    let mut buf = Vec::new();
    write_network_csv(&network, &mut buf).expect("writing to memory");
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(&args.out, buf).map_err(|e| io_error(&args.out, e))?;
    println!(
        "{} segments, omega_min {:.6}, omega_max {:.6}, rho bound (epsilon 0.05) {:.6} -> {}",
        network.len(),
        network.omega_min(),
        network.omega_max(),
        network.rho_upper_bound(0.05),
        args.out.display()
    );
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Error> {
    if args.list {
        let mut out = std::io::stdout().lock();
        for name in preset_names() {
            if writeln!(out, "{name}").is_err() {
                break;
            }
        }
        return Ok(());
    }
    let (Some(sources), Some(out)) = (&args.scenario, &args.out) else {
        return Err(Error::Config("--scenario and --out are required".into()));
    };
    let mut experiments = Vec::new();
    for source in expand_sources(sources)? {
        let mut config = load_scenario_config(&source)?;
        if let Some(h) = args.horizon {
            config.horizon = h;
        }
        let policies = args.policies.clone().unwrap_or_else(|| config.policies.clone());
        let seeds = args.seeds.unwrap_or(config.seeds);
        let scenario = config.resolve()?;
        log::info!("{}: {} seeds x {:?}", scenario.config.name, seeds, policies);
        let experiment = run_experiment(&scenario, &policies, seeds, args.parallel, args.seed)?;
        for policy in &policies {
            if let Some(mean) = experiment.mean_trajectory(*policy) {
                let slope = match loglog_slope(&mean, scenario.config.slope_window) {
                    Ok(fit) => format!("{:.3} (se {:.3})", fit.slope, fit.std_error),
                    Err(_) => "n/a".to_owned(),
                };
                println!(
                    "{} {}: regret {:.1} at T={}, tail slope {}",
                    scenario.config.name,
                    policy,
                    mean.last().copied().unwrap_or(0.0),
                    mean.len(),
                    slope
                );
            }
        }
        let failed = experiment.table.failures.len();
        if failed > 0 {
            eprintln!(
                "{}: {failed} replications failed, see failures.csv",
                scenario.config.name
            );
        }
        experiments.push(experiment);
    }
    export_results(&experiments, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn slope(args: &SlopeArgs) -> Result<(), Error> {
    let trajectories = read_results_csv(&args.input)?;
    let mean = mean_trajectory(
        trajectories
            .iter()
            .filter(|t| t.scenario == args.scenario && t.policy == args.policy),
    )
    .ok_or_else(|| {
        Error::Config(format!(
            "no {} rows for scenario {:?} in {}",
            args.policy,
            args.scenario,
            args.input.display()
        ))
    })?;
    let fit = loglog_slope(&mean, args.window)?;
    println!(
        "slope {:.4} se {:.4} intercept {:.4} points {} excluded {}",
        fit.slope, fit.std_error, fit.intercept, fit.points, fit.excluded
    );
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

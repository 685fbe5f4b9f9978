use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spider_ris::baselines::parse_kinds;
use spider_ris::harness::{
    default_element_values, default_power_values, default_ue_values, dump_channels, oracle_check,
    oracle_scenario, sweep, write_results, SweepKind, SweepSpec, SweepValue,
};
use spider_ris::scenario::ArrayDims;
use spider_ris::{Result, Scenario};

#[derive(Debug, Parser)]
#[command(name = "spider-ris", version, about = "Movable RIS mmWave MIMO rate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate versus transmit power.
    SweepPower(SweepArgs),
    /// Rate versus number of RIS elements.
    SweepElements(SweepArgs),
    /// Rates and optimized RIS positions for several UE positions.
    UeScenarios(SweepArgs),
    /// One Monte Carlo point with the configured parameters.
    SingleRun(SweepArgs),
    /// Compares PSO against exhaustive search on a small instance.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    pso_particles: Option<usize>,
    #[arg(long)]
    pso_iters: Option<usize>,
    /// Seed for search randomness, independent of the channel seed.
    #[arg(long)]
    pso_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated baseline names, or `all`.
    #[arg(long, default_value = "all")]
    baselines: String,
    /// Comma-separated swept values: dBm, element counts (`64` or `8x8`), or
    /// UE positions `x;y;z`.
    #[arg(long)]
    values: Option<String>,
    /// Also write H_TI and H_IR of every trial with the RIS at the platform center.
    #[arg(long)]
    dump_channels: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// RIS elements of the small instance (1 or 2).
    #[arg(long, default_value_t = 2)]
    elements: usize,
    #[arg(long, default_value_t = 16)]
    position_steps: usize,
    #[arg(long, default_value_t = 16)]
    phase_steps: usize,
}

fn load(common: &Common, base: Scenario) -> Result<Scenario> {
    let mut s = match &common.config {
        Some(path) => Scenario::load(path)?,
        None => base,
    };
    if let Some(seed) = common.seed {
        s.config.rng_seed = seed;
    }
    if let Some(t) = common.trials {
        s.config.monte_carlo_trials = t;
    }
    if let Some(z) = common.pso_particles {
        s.config.pso.swarm_size = z;
    }
    if let Some(t) = common.pso_iters {
        s.config.pso.iterations = t;
    }
    s.validated()
}

fn run_sweep(kind: SweepKind, args: &SweepArgs) -> Result<()> {
    let scenario = load(&args.common, Scenario::default())?;
    let values = match &args.values {
        Some(list) => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| SweepValue::parse(kind, t))
            .collect::<Result<Vec<_>>>()?,
        None => match kind {
            SweepKind::Power => default_power_values(),
            SweepKind::Elements => default_element_values(),
            SweepKind::UeScenarios => default_ue_values(),
            SweepKind::Single => vec![SweepValue::Single],
        },
    };
    let mut spec = SweepSpec::new(
        kind,
        values,
        scenario.config.monte_carlo_trials,
        scenario.config.rng_seed,
    );
    spec.baselines = parse_kinds(&args.baselines)?;
    spec.pso_seed = args.common.pso_seed;

    let table = sweep(&spec, &scenario)?;
    let files = write_results(&table, &spec, &scenario, &args.common.out)?;
    for r in &table.results {
        let flag = if r.flagged { "  [flagged]" } else { "" };
        println!(
            "{:>12} {:<26} {:.6e} +/- {:.2e}{flag}",
            r.value.to_string(),
            r.baseline.name(),
            r.mean,
            r.stderr
        );
    }
    if args.dump_channels {
        let dir = args.common.out.join("channels");
        for (i, v) in spec.values.iter().enumerate() {
            let s = v.apply(&scenario);
            dump_channels(&s, spec.seed, spec.trials, &dir, &format!("point{i}_"))?;
        }
        println!("channels: {}", dir.display());
    }
    println!("results: {}", files.csv.display());
    println!("metadata: {}", files.metadata.display());
    println!("plot: {}", files.plot.display());
    Ok(())
}

fn run_oracle(args: &OracleArgs) -> Result<bool> {
    let ris = ArrayDims::new(args.elements, 1);
    let scenario = load(&args.common, oracle_scenario(ris))?;
    let seed = scenario.config.rng_seed;
    let count = args.common.trials.unwrap_or(50) as u64;
    let report = oracle_check(
        &scenario,
        seed..seed + count,
        args.position_steps,
        args.phase_steps,
    )?;
    for r in &report.runs {
        println!(
            "seed {:>4}  pso {:.6e}  oracle {:.6e}  ratio {:.4}",
            r.seed,
            r.pso_rate,
            r.oracle_rate,
            r.ratio()
        );
    }
    let fraction = report.success_fraction();
    let pass = fraction >= 0.9 && report.all_monotone();
    println!(
        "{} of runs reach {:.0}% of the oracle; histories monotone: {}; {}",
        fraction,
        100.0 * report.threshold,
        report.all_monotone(),
        if pass { "PASS" } else { "FAIL" }
    );
    std::fs::create_dir_all(&args.common.out)?;
    let path = args.common.out.join("oracle_check.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    println!("report: {}", path.display());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SweepPower(a) => run_sweep(SweepKind::Power, a).map(|_| true),
        Command::SweepElements(a) => run_sweep(SweepKind::Elements, a).map(|_| true),
        Command::UeScenarios(a) => run_sweep(SweepKind::UeScenarios, a).map(|_| true),
        Command::SingleRun(a) => run_sweep(SweepKind::Single, a).map(|_| true),
        Command::OracleCheck(a) => run_oracle(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

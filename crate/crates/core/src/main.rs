use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsdpso::dispersion::{InitialVelocity, RelocationPolicy};
use dsdpso::harness::{self, format_sci};
use dsdpso::swarm::DispersedUpdate;
use dsdpso::{Algorithm, Error, FunctionId, OptimizerConfig, Result};

#[derive(Parser)]
#[command(name = "dsdpso", version, about = "Particle swarm optimizers with dynamic swarm dispersion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configuration of an experiment file and write CSV results.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Runs per configuration (overrides `runs`).
        #[arg(long)]
        runs: Option<usize>,
        /// Master seed (overrides `master_seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one optimizer once and print the result.
    Single {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        function: FunctionId,
        #[arg(long, default_value_t = 30)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        pop: usize,
        #[arg(long, default_value_t = 3000)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Dispersion period T.
        #[arg(long)]
        period: Option<usize>,
        /// Fraction of the swarm relocated per dispersion.
        #[arg(long)]
        rate: Option<f64>,
        /// External archive capacity.
        #[arg(long)]
        archive: Option<usize>,
        /// low_fitness, idle or hybrid.
        #[arg(long)]
        policy: Option<RelocationPolicy>,
        /// zero, random or previous.
        #[arg(long)]
        init_velocity: Option<InitialVelocity>,
        /// eq1, eq1_low_inertia or eq4.
        #[arg(long)]
        post_regime: Option<DispersedUpdate>,
    },
    /// List the benchmark functions.
    ListFunctions,
}

fn run_batch(config: PathBuf, out: Option<PathBuf>, runs: Option<usize>, seed: Option<u64>) -> Result<()> {
    let mut spec = harness::load_config(&config)?;
    if let Some(out) = out {
        spec.out_dir = out;
    }
    if let Some(runs) = runs {
        spec.runs = runs;
    }
    if let Some(seed) = seed {
        spec.master_seed = seed;
    }
    spec.validate()?;
    let outcome = harness::run_experiment(&spec);
    harness::emit_results(&outcome, &spec.out_dir, spec.master_seed, spec.curves)?;
    print!("{}", harness::summary_csv(&outcome.stats));
    eprintln!("results written to {}", spec.out_dir.display());
    if outcome.failures.is_empty() {
        return Ok(());
    }
    for f in &outcome.failures {
        eprintln!("run {} of [{}] failed: {}", f.run, f.experiment, f.error);
    }
    Err(Error::domain(format!("{} run(s) failed", outcome.failures.len())))
}

fn list_functions() {
    println!("{:<4} {:<28} {:>22} {:>8}  notes", "id", "name", "interval", "optimum");
    for f in FunctionId::ALL {
        let (lo, hi) = f.interval();
        let mut notes = Vec::new();
        if f.is_noisy() {
            notes.push("noisy");
        }
        if f.is_rotated() {
            notes.push("rotated");
        }
        println!(
            "{:<4} {:<28} {:>22} {:>8}  {}",
            f.to_string(),
            f.name(),
            format!("[{lo}, {hi}]"),
            f.optimum(),
            notes.join(", ")
        );
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, runs, seed } => run_batch(config, out, runs, seed),
        Command::Single {
            algo,
            function,
            dim,
            pop,
            iters,
            seed,
            period,
            rate,
            archive,
            policy,
            init_velocity,
            post_regime,
        } => {
            let mut cfg = OptimizerConfig::new(algo, function, dim, seed);
            cfg.swarm_size = pop;
            cfg.max_iter = iters;
            let d = &mut cfg.dispersion;
            d.period = period.unwrap_or(d.period);
            d.rate = rate.unwrap_or(d.rate);
            d.archive_capacity = archive.unwrap_or(d.archive_capacity);
            d.policy = policy.unwrap_or(d.policy);
            d.initial_velocity = init_velocity.unwrap_or(d.initial_velocity);
            d.post_regime = post_regime.unwrap_or(d.post_regime);
            cfg.validate()?;
            let record = dsdpso::run(&cfg)?;
            println!("algo = {algo}");
            println!("function = {function}");
            println!("dim = {dim}");
            println!("seed = {seed}");
            println!("final_best = {}", format_sci(record.final_best));
            println!("evaluations = {}", record.evals_used);
            if algo == Algorithm::Dsdpso {
                println!("dispersions = {}", record.dispersion_events.len());
            }
            Ok(())
        }
        Command::ListFunctions => {
            list_functions();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Argument errors from clap exit with status 2, the same as config errors.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_config() { 2 } else { 1 })
        }
    }
}

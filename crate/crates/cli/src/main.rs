//! `onsort`: run online placement algorithms against input generators and
//! report costs, offline optima, and competitive ratios.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onsort_core::harness::{
    fit_cost_scaling, parse_config, run_experiment, write_csv, ExperimentConfig, MatchReport,
    ADVERSARIES, ALGORITHMS,
};
use onsort_core::oracle::{opt_1d, opt_tsp_exact, opt_tsp_heuristic, opt_uniform, OracleError};
use onsort_core::trace::read_trace;
use onsort_core::uniform::coin_game_max_splits;
use onsort_core::ItemKind;

#[derive(Parser)]
#[command(
    name = "onsort",
    version,
    about = "Measure online placement algorithms against adversarial and random inputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of experiments and print one line per run
    Run(RunArgs),
    /// Run a batch and fit a power law through the per-size median costs
    Scale(RunArgs),
    /// Score a recorded input trace with the offline optimum for its kind
    Oracle {
        /// Trace file as written by the library's trace format
        trace: PathBuf,
    },
    /// Exhaustively search the pile-splitting game for the most splits
    CoinGame {
        /// Number of coins in the starting pile
        #[arg(long)]
        n: u64,
        /// Largest number of piles allowed at once
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm id
    #[arg(long, help = algo_help())]
    algo: Option<String>,
    /// Input generator id
    #[arg(long, help = adversary_help())]
    adversary: Option<String>,
    /// Scoring metric override: abs1d, uniform, or euclidean
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated input sizes
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Independent trials per size
    #[arg(long)]
    trials: Option<usize>,
    /// Base RNG seed; each run derives its own from (n, trial)
    #[arg(long)]
    seed: Option<u64>,
    /// Cell stretch factor for label and probing runs
    #[arg(long)]
    gamma: Option<f64>,
    /// Label alphabet size for label generators
    #[arg(long = "k-types")]
    k_types: Option<usize>,
    /// Point dimension for point runs
    #[arg(long)]
    dim: Option<usize>,
    /// Append CSV rows to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn algo_help() -> String {
    format!("Algorithm id ({})", ALGORITHMS.join(", "))
}

fn adversary_help() -> String {
    format!("Input generator id ({})", ADVERSARIES.join(", "))
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                parse_config(&text).map_err(|e| e.to_string())?
            }
            None => {
                let algo = self.algo.as_deref().ok_or("--algo is required")?;
                let adversary = self.adversary.as_deref().ok_or("--adversary is required")?;
                let ns = self.n.clone().ok_or("--n is required")?;
                ExperimentConfig::new(algo, adversary, ns)
            }
        };
        if let Some(v) = self.algo {
            cfg.algo = v;
        }
        if let Some(v) = self.adversary {
            cfg.adversary = v;
        }
        if let Some(v) = self.metric {
            cfg.metric = Some(v);
        }
        if let Some(v) = self.n {
            cfg.ns = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.k_types {
            cfg.k_types = v;
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.out {
            cfg.out = Some(v);
        }
        Ok(cfg)
    }
}

fn report_line(r: &MatchReport) -> String {
    let ratio = r
        .ratio
        .map(|x| format!("{x:.4}"))
        .unwrap_or_else(|| "-".to_string());
    format!(
        "n={} trial={} seed={} cost={:.6} opt={:.6} ({}) ratio={} switches={} steps={} failed={} wraparound={} ms={:.3}",
        r.n, r.trial, r.seed, r.cost, r.opt, r.opt_kind, ratio, r.switches, r.steps, r.failed,
        r.wraparound, r.ms
    )
}

fn cmd_run(args: RunArgs, fit: bool) -> Result<(), String> {
    let cfg = args.into_config()?;
    let reports = run_experiment(&cfg).map_err(|e| e.to_string())?;
    for r in &reports {
        println!("{}", report_line(r));
    }
    if let Some(path) = &cfg.out {
        write_csv(path, &reports).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        eprintln!("appended {} rows to {}", reports.len(), path.display());
    }
    if fit {
        let fit = fit_cost_scaling(&reports).map_err(|e| e.to_string())?;
        for (n, median) in &fit.medians {
            println!("median n={n} cost={median:.6}");
        }
        println!(
            "slope={:.4} intercept={:.4} r2={:.6}",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
    Ok(())
}

fn cmd_oracle(path: PathBuf) -> Result<(), String> {
    let seq = read_trace(&path).map_err(|e| e.to_string())?;
    let n = seq.items.len();
    let (opt, method) = match seq.kind {
        ItemKind::Real => {
            let values: Vec<f64> = seq.items.iter().filter_map(|i| i.as_real()).collect();
            (opt_1d(&values).map_err(|e| e.to_string())?, "formula")
        }
        ItemKind::Label => {
            let labels: Vec<u64> = seq.items.iter().filter_map(|i| i.as_label()).collect();
            (opt_uniform(&labels).map_err(|e| e.to_string())?, "formula")
        }
        ItemKind::Point(_) => {
            let points: Vec<Vec<f64>> = seq
                .items
                .iter()
                .filter_map(|i| i.as_point().map(|p| p.to_vec()))
                .collect();
            match opt_tsp_exact(&points) {
                Ok(v) => (v, "exact"),
                Err(OracleError::TooManyPoints { .. }) => (
                    opt_tsp_heuristic(&points).map_err(|e| e.to_string())?,
                    "heuristic",
                ),
                Err(e) => return Err(e.to_string()),
            }
        }
    };
    println!("kind={} n={n} opt={opt} method={method}", seq.kind);
    Ok(())
}

fn cmd_coin_game(n: u64, k: usize) -> Result<(), String> {
    let splits = coin_game_max_splits(n, k).map_err(|e| e.to_string())?;
    let bound = k as f64 * (n as f64).log2();
    println!("n={n} k={k} max_splits={splits} split_bound={bound:.4}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, false),
        Command::Scale(args) => cmd_run(args, true),
        Command::Oracle { trace } => cmd_oracle(trace),
        Command::CoinGame { n, k } => cmd_coin_game(n, k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

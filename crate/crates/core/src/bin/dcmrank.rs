use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dcmrank::experiment::commands::{
    cmd_couple, cmd_experiment, cmd_generate, cmd_graph, cmd_rank, cmd_tailcheck, cmd_wbp, WbpKind,
};
use dcmrank::experiment::ExperimentConfig;
use dcmrank::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "dcmrank", version, about = "Configuration-model PageRank simulation and branching-process limits")]
struct Cli {
    /// JSON experiment configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Endogenous,
    RStar,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an extended bi-degree sequence with the IID algorithm.
    Generate {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Pair the stubs of a sequence into a directed multigraph.
    Graph {
        #[arg(long)]
        sequence: PathBuf,
    },
    /// Rank the nodes of a graph by power iteration.
    Rank {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Build a graph together with its coupled thorny branching tree.
    Couple {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Sample the endogenous solution or its root mixture from the limit laws.
    Wbp {
        #[arg(long, value_enum, default_value_t = Kind::RStar)]
        kind: Kind,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Generations to simulate (default: the configured WBP depth).
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Run the full comparison experiment over all configured sizes.
    Experiment {
        /// Rank random nodes of one graph per size instead of fresh graphs.
        #[arg(long)]
        reuse_graph: bool,
    },
    /// Compare the upper tail of the root mixture with the in-degree tail.
    Tailcheck,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    if let Command::Experiment { reuse_graph: true } = cli.command {
        config.reuse_graph = true;
    }
    config.model.validate()?;
    let out = config.output_dir.clone();
    match cli.command {
        Command::Generate { n } => cmd_generate(&config, n, &out),
        Command::Graph { sequence } => cmd_graph(&config, &sequence, &out),
        Command::Rank { sequence, edges } => cmd_rank(&config, &sequence, &edges, &out),
        Command::Couple { sequence, depth } => cmd_couple(&config, &sequence, depth, &out),
        Command::Wbp { kind, samples, generations } => {
            let kind = match kind {
                Kind::Endogenous => WbpKind::Endogenous,
                Kind::RStar => WbpKind::RStar,
            };
            cmd_wbp(&config, kind, samples, generations.unwrap_or(config.wbp_generations), &out)
        }
        Command::Experiment { .. } => {
            config.validate()?;
            cmd_experiment(&config, &out)
        }
        Command::Tailcheck => cmd_tailcheck(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match run(cli) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use beepnet::apps::{AppKind, LeaderElection, MisProtocol};
use beepnet::beepsim::{simulate_noisy, write_transcript_jsonl, SimRecord};
use beepnet::codes::codebook::write_codebook;
use beepnet::collision::choose_cd_params;
use beepnet::congest::{CongestKind, RobustLayer};
use beepnet::experiment::{
    fixed_length_params, read_summary, run_experiment, sweep_report, ExperimentConfig,
    ExperimentError, ExperimentKind,
};
use beepnet::topology::{Topology, TopologySpec};
use beepnet::trials::trial_seed;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beepnet",
    version,
    about = "Experiments on noisy beeping networks"
)]
struct Cli {
    /// TOML experiment config; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Topology spec (clique:16, star:9, path:8, cycle:10, wheel:12, gnp:32:0.2:7, file:<path>); repeatable.
    #[arg(long = "topology", value_name = "SPEC")]
    topologies: Vec<TopologySpec>,
    /// Receiver noise rate; repeatable or comma separated.
    #[arg(long = "epsilon", value_name = "EPS", value_delimiter = ',')]
    epsilons: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "target-failure")]
    target_failure: Option<f64>,
    /// CSV output; a JSON summary is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Collision-detection failure rates.
    Cd {
        #[command(flatten)]
        common: Common,
        /// Fixed code lengths instead of the chosen one; repeatable.
        #[arg(long = "code-length", value_delimiter = ',')]
        code_lengths: Vec<usize>,
        /// Numbers of active nodes; repeatable.
        #[arg(long = "scenario", value_delimiter = ',')]
        scenarios: Vec<usize>,
        /// Write the codebook of the first grid point's code here.
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Fidelity of the noisy simulation against direct execution.
    BeepSim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        protocol: Option<AppKind>,
        /// Write the transcript of trial 0 on the first grid point as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Application verifier pass rates.
    App {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        protocol: Option<AppKind>,
    },
    /// CONGEST protocols over the beeping channel.
    Congest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        protocol: Option<CongestKind>,
        /// Message-exchange string length.
        #[arg(long)]
        k: Option<usize>,
        /// identity or repetition:<k>
        #[arg(long)]
        robust: Option<RobustLayer>,
        /// Neighborhood code lengths; repeatable.
        #[arg(long = "code-length", value_delimiter = ',')]
        code_lengths: Vec<usize>,
    },
    /// Summary table with Wilson intervals, from a config or a saved JSON summary.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// JSON summary written by an earlier run.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn base_config(
    path: Option<&PathBuf>,
    kind: ExperimentKind,
) -> Result<ExperimentConfig, ExperimentError> {
    Ok(match path {
        Some(p) => {
            let mut c = ExperimentConfig::load(p)?;
            c.kind = kind;
            c
        }
        None => ExperimentConfig::new(kind, Vec::new(), vec![0.0]),
    })
}

fn apply(c: &mut ExperimentConfig, common: Common) {
    if !common.topologies.is_empty() {
        c.topologies = common.topologies;
    }
    if !common.epsilons.is_empty() {
        c.epsilons = common.epsilons;
    }
    if let Some(t) = common.trials {
        c.trials = t;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(t) = common.target_failure {
        c.target_failure = t;
    }
    if common.out.is_some() {
        c.out = common.out;
    }
}

fn create(path: &PathBuf) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_transcript(
    config: &ExperimentConfig,
    kind: AppKind,
    path: &PathBuf,
) -> Result<(), Box<dyn std::error::Error>> {
    let topology = config.topologies[0].build()?;
    let eps = config.epsilons[0];
    let seed = trial_seed(config.seed, 0);
    let n = topology.node_count();
    let records: Vec<Vec<SimRecord>> = match kind {
        AppKind::Mis => {
            simulate_noisy(
                &MisProtocol::new(n)?,
                &topology,
                eps,
                config.target_failure,
                seed,
                None,
            )?
            .transcripts
        }
        AppKind::LeaderElection => {
            let p = LeaderElection::new(n, topology.diameter().unwrap_or(n))?;
            simulate_noisy(&p, &topology, eps, config.target_failure, seed, None)?.transcripts
        }
        AppKind::Coloring => {
            let d = topology.max_degree();
            let p = beepnet::apps::ColoringProtocol::new(d + 1, n, d)?;
            simulate_noisy(&p, &topology, eps, config.target_failure, seed, None)?.transcripts
        }
        AppKind::TwoHopColoring => {
            let p = beepnet::apps::TwoHopColoring::new(n, topology.max_degree())?;
            simulate_noisy(&p, &topology, eps, config.target_failure, seed, None)?.transcripts
        }
    };
    let mut w = create(path)?;
    write_transcript_jsonl(&records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_codebook_file(
    config: &ExperimentConfig,
    path: &PathBuf,
) -> Result<(), Box<dyn std::error::Error>> {
    let topology: Topology = config.topologies[0].build()?;
    let eps = config.epsilons[0];
    let params = match config.code_lengths.first() {
        Some(&l) => fixed_length_params(l, eps)?,
        None => choose_cd_params(topology.node_count(), 1, eps, config.target_failure)?,
    };
    let words = params.code().codewords().ok_or("code too large to list")?;
    write_codebook(&words, create(path)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = cli.config.as_ref();
    let config = match cli.command {
        Command::Cd {
            common,
            code_lengths,
            scenarios,
            codebook,
        } => {
            let mut c = base_config(cfg, ExperimentKind::Cd)?;
            apply(&mut c, common);
            if !code_lengths.is_empty() {
                c.code_lengths = code_lengths;
            }
            if !scenarios.is_empty() {
                c.scenarios = scenarios;
            }
            c.validate()?;
            if let Some(path) = codebook {
                write_codebook_file(&c, &path)?;
            }
            c
        }
        Command::BeepSim {
            common,
            protocol,
            transcript,
        } => {
            let mut c = base_config(cfg, ExperimentKind::BeepSim)?;
            apply(&mut c, common);
            if let Some(p) = protocol {
                c.protocol = Some(p.to_string());
            }
            c.validate()?;
            if let Some(path) = transcript {
                let kind: AppKind = c.protocol.as_deref().unwrap_or("mis").parse()?;
                write_transcript(&c, kind, &path)?;
            }
            c
        }
        Command::App { common, protocol } => {
            let mut c = base_config(cfg, ExperimentKind::App)?;
            apply(&mut c, common);
            if let Some(p) = protocol {
                c.protocol = Some(p.to_string());
            }
            c
        }
        Command::Congest {
            common,
            protocol,
            k,
            robust,
            code_lengths,
        } => {
            let mut c = base_config(cfg, ExperimentKind::Congest)?;
            apply(&mut c, common);
            if let Some(p) = protocol {
                c.protocol = Some(p.to_string());
            }
            if let Some(k) = k {
                c.message_bits = k;
            }
            if let Some(r) = robust {
                c.robust = r;
            }
            if !code_lengths.is_empty() {
                c.code_lengths = code_lengths;
            }
            c
        }
        Command::Sweep { common, input } => {
            if let Some(path) = input {
                let result = read_summary(&path)?;
                print!("{}", sweep_report(&result.points));
                return Ok(());
            }
            let path = cfg.ok_or("sweep needs --config or --input")?;
            let mut c = ExperimentConfig::load(path)?;
            apply(&mut c, common);
            c
        }
    };
    let result = run_experiment(&config)?;
    let mut stdout = io::stdout().lock();
    write!(stdout, "{}", sweep_report(&result.points))?;
    if let Some(out) = &config.out {
        writeln!(stdout, "wrote {}", out.display())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

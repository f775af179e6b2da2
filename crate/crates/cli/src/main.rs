use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use circuitbots::engine::io::{format_structure, read_structure};
use circuitbots::engine::Structure;
use circuitbots::exec::ExecMode;
use circuitbots::harness::generators::{gen_parallelogram, gen_random_connected, random_orientations};
use circuitbots::harness::{read_stats, run_experiment, write_stats, ExperimentConfig, ProtocolKind, Summary};
use circuitbots::shapes::{representation, Shape, Transformation};
use circuitbots::usr::recognize_shape;
use circuitbots::grid::GridCoord;

#[derive(Parser)]
#[command(name = "circuitbots", version, about = "Amoebot structures with reconfigurable circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a structure file.
    Gen(GenArgs),
    /// Run an experiment and write its statistics.
    Run(RunArgs),
    /// Recompute the summary of a statistics file.
    Stats {
        file: PathBuf,
    },
    /// Recognize a shape on one structure.
    Usr(UsrArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Pgram,
    Shape,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "random")]
    kind: Kind,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    h: u32,
    #[arg(long, default_value_t = 8)]
    l: u32,
    #[arg(long)]
    shape_file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    sigma: i32,
    /// Rotation in 60° steps for parallelograms and shapes.
    #[arg(long, default_value_t = 0)]
    rotation: u8,
    #[arg(long, default_value_t = 2)]
    pins: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random chiralities as well as random compasses.
    #[arg(long)]
    mixed_chirality: bool,
    /// Output file; standard output if absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    b: Option<u32>,
    /// Polynomial coefficients `c0,c1,…`, constant term first.
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    #[arg(long)]
    shape_file: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<i32>,
    /// Run every trial on this structure file.
    #[arg(long)]
    structure: Option<PathBuf>,
    #[arg(long)]
    k_vals: Option<u32>,
    #[arg(long)]
    pins: Option<usize>,
    #[arg(long)]
    kappa: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    svg_rounds: Vec<u64>,
    /// Replay the configuration stored in a statistics file; other flags
    /// override it.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Statistics file; standard output if absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UsrArgs {
    #[arg(long)]
    shape_file: PathBuf,
    /// Structure file; a representation of the shape if absent.
    #[arg(long)]
    structure: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    sigma: i32,
    #[arg(long, default_value_t = 0)]
    rotation: u8,
    #[arg(long, default_value_t = 2)]
    pins: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_rounds: u64,
}

fn gen(args: GenArgs) -> Result<()> {
    let coords = match args.kind {
        Kind::Random => gen_random_connected(args.n, args.seed),
        Kind::Pgram => gen_parallelogram(args.h, args.l, args.rotation),
        Kind::Shape => {
            let path = args.shape_file.context("--shape-file is required for shapes")?;
            let shape = Shape::read(&path)?;
            representation(&shape, &Transformation::new(GridCoord::ORIGIN, args.rotation, args.sigma))
        }
    };
    let o = random_orientations(coords.len(), args.seed, args.mixed_chirality, true);
    let s = Structure::new(&coords, &o, args.pins, args.seed)?;
    let text = format_structure(&s);
    match args.out {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.replay {
        Some(p) => read_stats(p)?.config,
        None => ExperimentConfig::default(),
    };
    cfg.protocol = args.protocol.parse::<ProtocolKind>()?;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { cfg.$f = v; })* };
    }
    set!(n, h, l, a, b, sigma, k_vals, pins, kappa, trials, seed, max_rounds);
    if args.poly.is_some() {
        cfg.poly = args.poly;
    }
    if let Some(p) = &args.shape_file {
        cfg.shape = Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?);
    }
    if let Some(p) = &args.structure {
        cfg.structure = Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?);
    }
    if args.sequential {
        cfg.exec = ExecMode::Sequential;
    }
    if args.trace.is_some() {
        cfg.trace = args.trace;
    }
    if args.svg.is_some() {
        cfg.svg = args.svg;
        cfg.svg_rounds = args.svg_rounds;
    }
    info!("running {} trials of {}", cfg.trials, cfg.protocol);
    let stats = run_experiment(&cfg)?;
    info!("success rate {:.4}, mean rounds {:.2}", stats.summary.success_rate, stats.summary.mean_rounds);
    match args.out {
        Some(p) => write_stats(&p, &stats)?,
        None => println!("{}", serde_json::to_string_pretty(&stats)?),
    }
    Ok(())
}

fn stats(file: PathBuf) -> Result<()> {
    let stats = read_stats(&file)?;
    let summary = Summary::from_records(&stats.records);
    if summary != stats.summary {
        bail!("stored summary does not match the trial records");
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn usr(args: UsrArgs) -> Result<()> {
    let shape = Shape::read(&args.shape_file)?;
    let s = match &args.structure {
        Some(p) => read_structure(p)?,
        None => {
            let coords = representation(&shape, &Transformation::new(GridCoord::ORIGIN, args.rotation, args.sigma));
            let o = random_orientations(coords.len(), args.seed, false, true);
            Structure::new(&coords, &o, args.pins, args.seed)?
        }
    };
    let report = recognize_shape(s, &shape, args.max_rounds)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CIRCUITBOTS_LOG")).init();
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Stats { file } => stats(file),
        Command::Usr(a) => usr(a),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multigila::config::PipelineConfig;
use multigila::error::Error;
use multigila::pipeline::run_pipeline;

#[derive(Parser)]
#[command(name = "multigila", version, about = "Multilevel force-directed graph layout")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out an edge-list graph and write the requested artifacts.
    Layout(LayoutArgs),
}

#[derive(Args)]
struct LayoutArgs {
    /// Edge list, one `u v` pair per line.
    input: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    coords: Option<PathBuf>,
    /// JSON run report.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Defaults to $MULTIGILA_WORKERS, then 1.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    #[arg(long, value_name = "P")]
    partitions: Option<usize>,
    #[arg(long, value_name = "F")]
    sun_probability: Option<f64>,
    #[arg(long, value_name = "T")]
    coarsen_threshold: Option<usize>,
    #[arg(long, value_name = "on|off")]
    mass_repulsion: Option<String>,
    /// Write placed and refined coordinates of every level here.
    #[arg(long, value_name = "DIR")]
    dump_levels: Option<PathBuf>,
    /// key=value file applied before the flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Extra key=value settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    verbose: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn build_config(args: &LayoutArgs) -> Result<PipelineConfig, Error> {
    let mut cfg = PipelineConfig::from_env()?;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io("read config", format!("{}: {e}", path.display())))?;
        cfg.apply_file_contents(&text)?;
    }
    for pair in &args.set {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got {pair:?}")))?;
        cfg.set(k, v)?;
    }
    if args.input.is_some() {
        cfg.input = args.input.clone();
    }
    let paths = [(&args.svg, &mut cfg.svg), (&args.coords, &mut cfg.coords), (&args.report, &mut cfg.report)];
    for (flag, target) in paths {
        if flag.is_some() {
            *target = flag.clone();
        }
    }
    if args.dump_levels.is_some() {
        cfg.dump_levels = args.dump_levels.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.partitions {
        cfg.partitions = Some(p);
    }
    if let Some(f) = args.sun_probability {
        cfg.sun_probability = f;
    }
    if let Some(t) = args.coarsen_threshold {
        cfg.coarsen_threshold = t;
    }
    if let Some(m) = &args.mass_repulsion {
        cfg.set("mass_repulsion", m)?;
    }
    if args.verbose {
        cfg.verbose = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &LayoutArgs) -> Result<(), Error> {
    let cfg = build_config(args)?;
    if args.print_config {
        print!("{}", cfg.to_config_string());
        return Ok(());
    }
    let out = run_pipeline(&cfg)?;
    let r = &out.report;
    println!(
        "vertices {} edges {} levels {:?} crossings {} cre {:.4} neld {:.4} supersteps {} messages {}",
        out.layout.len(),
        r.edge_count,
        r.levels,
        r.crossings,
        r.cre,
        r.neld,
        r.supersteps,
        r.messages
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Layout(args) = &cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

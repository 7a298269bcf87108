mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathex::MemoryBudget;

/// Region-direct pathomics feature extraction.
#[derive(Debug, Parser)]
#[command(name = "pathex", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the 247-feature table for every annotated object.
    Extract(ExtractArgs),
    /// Time batched extraction against the per-object reference path.
    Bench(BenchArgs),
    /// Compare feature distributions of two tables by histogram distance.
    Compare(CompareArgs),
    /// Query the spatial index of a slide's annotations.
    Inspect(InspectArgs),
    /// Write a seeded synthetic slide with annotations and labels.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "annotations", required = true, multiple = false)]
struct AnnotationArgs {
    /// GeoJSON annotations in slide pixel coordinates.
    #[arg(long)]
    geojson: Option<PathBuf>,
    /// Integer label image, one object per nonzero label.
    #[arg(long)]
    label_mask: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SourceArgs {
    /// Slide image (PNG or TIFF, tiled or striped).
    #[arg(long)]
    slide: PathBuf,
    #[command(flatten)]
    annotations: AnnotationArgs,
    /// JSON map from label to class name, used with --label-mask.
    #[arg(long, requires = "label_mask")]
    classes: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct EngineArgs {
    /// Slab memory budget, e.g. 512MiB; at least 1 MiB.
    #[arg(long, env = "PATHEX_MEMORY_BUDGET", default_value = "1GiB")]
    memory_budget: MemoryBudget,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Batched,
    PerObject,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Batched)]
    mode: ModeArg,
    #[command(flatten)]
    engine: EngineArgs,
    /// Also write the annotations with a `pathomics` property per feature.
    #[arg(long, requires = "geojson")]
    annotated_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    slide: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["label_mask", "synthetic"])]
    geojson: Option<PathBuf>,
    #[arg(long, conflicts_with = "synthetic")]
    label_mask: Option<PathBuf>,
    #[arg(long, requires = "label_mask")]
    classes: Option<PathBuf>,
    /// Generate the input first, e.g. objects=5000,size=8..32,slide=4096x4096,seed=7.
    #[arg(long)]
    synthetic: Option<pathex::SyntheticSpec>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    repeats: u32,
    #[command(flatten)]
    engine: EngineArgs,
    /// Perturb one reference value to exercise the mismatch path.
    #[arg(long, hide = true)]
    inject_mismatch: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    left: PathBuf,
    right: PathBuf,
    /// Comma-separated feature columns.
    #[arg(long, value_delimiter = ',', default_values_t = pathex::compare::DEFAULT_FEATURES.map(String::from))]
    features: Vec<String>,
    #[arg(long, default_value_t = pathex::compare::DEFAULT_BINS as u16, value_parser = clap::value_parser!(u16).range(1..))]
    bins: u16,
    /// Largest accepted L1 distance per feature.
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Query window as x,y,w,h; defaults to the whole slide.
    #[arg(long)]
    window: Option<input::Window>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    objects: usize,
    /// Box edge range as min,max pixels.
    #[arg(long, default_value = "8,32")]
    size_range: input::Pair,
    /// Slide size as width,height.
    #[arg(long, default_value = "2048,2048")]
    slide_size: input::Pair,
    #[arg(long)]
    out_dir: PathBuf,
    /// Write the slide as a tiled TIFF instead of a PNG.
    #[arg(long)]
    tiled: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => commands::extract(a),
        Command::Bench(a) => commands::bench(a),
        Command::Compare(a) => commands::compare(a),
        Command::Inspect(a) => commands::inspect(a),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(message) = &failure.message {
                eprintln!("error: {message}");
            }
            ExitCode::from(failure.code)
        }
    }
}

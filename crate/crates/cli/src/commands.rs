use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pathex::oracle::{compare_tables, oracle_table};
use pathex::synthetic::{ANNOTATIONS, SLIDE_PNG};
use pathex::{
    build_index, extract_all, generate_synthetic_slide, write_back, ExtractOptions, FeatureManifest, FeatureTable,
    Mode, SyntheticSpec,
};
use serde::Serialize;

use crate::input::{load, Annotations};
use crate::{
    AnnotationArgs, BenchArgs, CompareArgs, EngineArgs, ExtractArgs, GenerateArgs, InspectArgs, ModeArg, SourceArgs,
};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_MISMATCH: u8 = 4;
pub const EXIT_TOLERANCE: u8 = 5;
pub const EXIT_PACKING: u8 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: Option<String>,
}

impl Failure {
    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: Some(message.into()),
        }
    }

    fn silent(code: u8) -> Self {
        Failure { code, message: None }
    }
}

impl From<pathex::Error> for Failure {
    fn from(e: pathex::Error) -> Self {
        let code = match e.root() {
            pathex::Error::Packing { .. } => EXIT_PACKING,
            pathex::Error::Budget(_) => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Failure {
            code,
            message: Some(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Removes the listed files unless the command finished.
struct Outputs {
    paths: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new(paths: impl IntoIterator<Item = PathBuf>) -> Self {
        Outputs {
            paths: paths.into_iter().collect(),
            done: false,
        }
    }

    fn keep(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

fn annotations<'a>(a: &'a AnnotationArgs, classes: Option<&'a PathBuf>) -> Annotations<'a> {
    match (&a.geojson, &a.label_mask) {
        (Some(g), _) => Annotations::GeoJson(g),
        (None, Some(path)) => Annotations::LabelMask {
            path,
            classes: classes.map(|c| c.as_path()),
        },
        (None, None) => unreachable!("clap enforces one annotation source"),
    }
}

fn source(s: &SourceArgs) -> Annotations<'_> {
    annotations(&s.annotations, s.classes.as_ref())
}

fn options(engine: &EngineArgs, mode: Mode) -> ExtractOptions {
    ExtractOptions {
        mode,
        budget: engine.memory_budget,
        workers: engine.workers.map(usize::from),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn extract(args: ExtractArgs) -> CmdResult {
    let start = Instant::now();
    let outputs = Outputs::new(
        [Some(args.out.clone()), args.annotated_out.clone()]
            .into_iter()
            .flatten(),
    );
    let loaded = load(&args.source.slide, source(&args.source))?;
    let mode = match args.mode {
        ModeArg::Batched => Mode::Batched,
        ModeArg::PerObject => Mode::PerObject,
    };
    let manifest = FeatureManifest::v1();
    let (table, stats) = extract_all(
        &loaded.regions,
        loaded.slide.as_ref(),
        &manifest,
        &options(&args.engine, mode),
    )?;
    table.write_csv_path(&args.out)?;
    if let (Some(path), Some(set)) = (&args.annotated_out, &loaded.annotations) {
        let index = build_index(&loaded.regions)?;
        write_json(path, &write_back(&index, &table, set)?)?;
    }
    outputs.keep();
    eprintln!(
        "objects={} slabs={} overflow={} wall_ms={:.1}",
        stats.objects,
        stats.slabs,
        stats.overflow,
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct BenchReport {
    objects: usize,
    repeats: u32,
    batched_ms: f64,
    per_object_ms: f64,
    speedup: f64,
}

fn median_ms(mut runs: Vec<Duration>) -> f64 {
    runs.sort();
    let n = runs.len();
    let mid = if n % 2 == 1 {
        runs[n / 2]
    } else {
        (runs[n / 2 - 1] + runs[n / 2]) / 2
    };
    mid.as_secs_f64() * 1e3
}

pub fn bench(args: BenchArgs) -> CmdResult {
    let scratch = tempfile::tempdir()?;
    let (slide, geojson) = match &args.synthetic {
        Some(spec) => {
            write_synthetic(spec, scratch.path(), false)?;
            (scratch.path().join(SLIDE_PNG), Some(scratch.path().join(ANNOTATIONS)))
        }
        None => (args.slide.clone().expect("clap requires --slide"), args.geojson.clone()),
    };
    let ann_args = AnnotationArgs {
        geojson,
        label_mask: args.label_mask.clone(),
    };
    if ann_args.geojson.is_none() && ann_args.label_mask.is_none() {
        return Err(Failure {
            code: EXIT_USAGE,
            message: Some("bench needs --geojson, --label-mask or --synthetic".into()),
        });
    }
    let manifest = FeatureManifest::v1();
    let opts = options(&args.engine, Mode::Batched);
    let out = scratch.path().join("features.csv");

    let mut batched_runs = Vec::new();
    let mut reference_runs = Vec::new();
    let mut objects = 0;
    for round in 0..args.repeats {
        let t = Instant::now();
        let loaded = load(&slide, annotations(&ann_args, args.classes.as_ref()))?;
        let (batched, _) = extract_all(&loaded.regions, loaded.slide.as_ref(), &manifest, &opts)?;
        batched.write_csv_path(&out)?;
        batched_runs.push(t.elapsed());

        let t = Instant::now();
        let loaded = load(&slide, annotations(&ann_args, args.classes.as_ref()))?;
        let mut reference = oracle_table(&loaded.regions, loaded.slide.as_ref(), &manifest)?;
        reference.write_csv_path(&out)?;
        reference_runs.push(t.elapsed());

        if round == 0 {
            objects = batched.rows.len();
            if args.inject_mismatch {
                if let Some(row) = reference.rows.first_mut() {
                    row.values[0] += 1.0;
                }
            }
            let report = compare_tables(&batched, &reference)?;
            if !report.passed {
                println!("{}", report.to_json());
                return Err(Failure {
                    code: EXIT_MISMATCH,
                    message: Some("batched and per-object outputs differ; no timings reported".into()),
                });
            }
        }
        log::info!("bench round {} done", round + 1);
    }
    let (batched_ms, per_object_ms) = (median_ms(batched_runs), median_ms(reference_runs));
    let report = BenchReport {
        objects,
        repeats: args.repeats,
        batched_ms,
        per_object_ms,
        speedup: per_object_ms / batched_ms,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

pub fn compare(args: CompareArgs) -> CmdResult {
    let left = FeatureTable::read_csv_path(&args.left)?;
    let right = FeatureTable::read_csv_path(&args.right)?;
    let report =
        pathex::compare::compare_tables(&left, &right, &args.features, usize::from(args.bins), args.tolerance)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passed {
        Ok(())
    } else {
        Err(Failure::silent(EXIT_TOLERANCE))
    }
}

#[derive(Debug, Serialize)]
struct InspectReport {
    window: [i64; 4],
    ids: Vec<u64>,
    entries: usize,
    height: usize,
    nodes: usize,
}

pub fn inspect(args: InspectArgs) -> CmdResult {
    let loaded = load(&args.source.slide, source(&args.source))?;
    let window = match args.window {
        Some(w) => w.0,
        None => pathex::BoundingBox::from_origin(0, 0, loaded.slide.width() as usize, loaded.slide.height() as usize)?,
    };
    let index = build_index(&loaded.regions)?;
    let stats = index.audit()?;
    let report = InspectReport {
        window: [
            window.min_x,
            window.min_y,
            window.width() as i64,
            window.height() as i64,
        ],
        ids: index.query_window(&window),
        entries: stats.entries,
        height: stats.height,
        nodes: stats.nodes,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn write_synthetic(spec: &SyntheticSpec, dir: &Path, tiled: bool) -> CmdResult {
    let slide = generate_synthetic_slide(spec)?;
    slide.write_to_dir(dir, tiled)?;
    Ok(())
}

pub fn generate(args: GenerateArgs) -> CmdResult {
    let spec = SyntheticSpec {
        seed: args.seed,
        objects: args.objects,
        size_range: (args.size_range.0, args.size_range.1),
        slide_size: (args.slide_size.0, args.slide_size.1),
        ..SyntheticSpec::default()
    };
    spec.validate().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: Some(e.to_string()),
    })?;
    write_synthetic(&spec, &args.out_dir, args.tiled)?;
    eprintln!("objects={} out_dir={}", spec.objects, args.out_dir.display());
    Ok(())
}

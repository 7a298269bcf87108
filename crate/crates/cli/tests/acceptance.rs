//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Tolerances and limits are fixed below.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use pathex::features::features;
use pathex::ingest::{
    load_label_mask, open_slide, parse_geojson, read_class_map, read_label_raster, regions_from_annotations,
};
use pathex::oracle::{compare_tables, oracle_query, oracle_table};
use pathex::synthetic::{ShapeKind, ANNOTATIONS, CLASSES, LABELS, SLIDE_PNG};
use pathex::{
    generate_synthetic_slide, BoundingBox, FeatureManifest, FeatureTable, IndexConfig, IntensityPatch, ObjectMask,
    ObjectRecord, RegionSet, SpatialIndex, SyntheticSpec, MANIFEST_VERSION,
};
use serde_json::Value;

const REL_TOL: f64 = 1e-6;
const ABS_TOL: f64 = 1e-9;
const MODE_LIMIT: Duration = Duration::from_secs(120);
const BENCH_LIMIT: Duration = Duration::from_secs(300);
const MIN_SPEEDUP: f64 = 2.0;
const FEATURES: usize = 247;
const OVERFLOW_BUDGET: &str = "16MiB";
const COMPARE_BINS: &str = "32";
const MIN_COMPARE_OBJECTS: usize = 500;
const ANALYTIC_EPS: f64 = 1e-9;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pathex")
}

fn pathex(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("PATHEX_MEMORY_BUDGET")
        .output()
        .expect("pathex runs")
}

fn ok(out: &Output, what: &str) -> Result<(), String> {
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{what} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn generate(dir: &Path, spec: &SyntheticSpec) -> Result<(), String> {
    generate_synthetic_slide(spec)
        .and_then(|slide| slide.write_to_dir(dir, false))
        .map_err(|e| e.to_string())
}

fn extract(dir: &Path, out: &Path, extra: &[&str]) -> Result<Output, String> {
    let slide = dir.join(SLIDE_PNG);
    let geojson = dir.join(ANNOTATIONS);
    let mut args = vec![
        "extract",
        "--slide",
        s(&slide),
        "--geojson",
        s(&geojson),
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    let output = pathex(&args);
    ok(&output, "extract")?;
    Ok(output)
}

fn read_table(path: &Path) -> Result<FeatureTable, String> {
    FeatureTable::read_csv_path(path).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn mode_equivalence(tmp: &Path) -> Check {
    let start = Instant::now();
    let dir = tmp.join("c1");
    generate(
        &dir,
        &SyntheticSpec {
            seed: 11,
            objects: 300,
            ..SyntheticSpec::default()
        },
    )?;
    let csv = dir.join("batched.csv");
    extract(&dir, &csv, &["--mode", "batched"])?;
    let batched = read_table(&csv)?;

    let slide = open_slide(&dir.join(SLIDE_PNG)).map_err(|e| e.to_string())?;
    let set = parse_geojson(&read(&dir.join(ANNOTATIONS))?).map_err(|e| e.to_string())?;
    let (regions, _) =
        regions_from_annotations(&set, slide.width(), slide.height(), SLIDE_PNG).map_err(|e| e.to_string())?;
    let reference = oracle_table(&regions, slide.as_ref(), &FeatureManifest::v1()).map_err(|e| e.to_string())?;
    let report = compare_tables(&batched, &reference).map_err(|e| e.to_string())?;

    let classes: BTreeSet<&str> = batched.rows.iter().map(|r| r.class_label.as_str()).collect();
    let missing: Vec<_> = ShapeKind::ALL
        .iter()
        .map(|k| k.name())
        .filter(|n| !classes.contains(n))
        .collect();
    ensure(missing.is_empty(), || format!("shape classes absent: {missing:?}"))?;
    let std = batched.column("Intensity_StdIntensity").map_err(|e| e.to_string())?;
    ensure(std.contains(&0.0), || "no constant-intensity object".into())?;
    ensure(batched.rows.len() == 300, || format!("{} rows", batched.rows.len()))?;
    ensure(report.passed, || report.to_json())?;
    let ids = |t: &FeatureTable| t.rows.iter().map(|r| r.object_id).collect::<Vec<_>>();
    ensure(ids(&batched) == ids(&reference), || "object ids differ".into())?;
    let mut worst = 0.0f64;
    for (a, b) in batched.rows.iter().zip(&reference.rows) {
        ensure(a.values.len() == FEATURES && b.values.len() == FEATURES, || {
            "short row".into()
        })?;
        for (j, (&x, &y)) in a.values.iter().zip(&b.values).enumerate() {
            let close = x == y || (x.is_nan() && y.is_nan()) || (x - y).abs() <= (REL_TOL * y.abs()).max(ABS_TOL);
            ensure(close, || format!("object {} feature {j}: {x} vs {y}", a.object_id))?;
            if x != y && x.is_finite() && y.is_finite() {
                worst = worst.max((x - y).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < MODE_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "300 objects x {FEATURES} features agree, max abs diff {worst:.2e}, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn dimensionality(tmp: &Path) -> Check {
    let dir = tmp.join("c2");
    generate(
        &dir,
        &SyntheticSpec {
            seed: 2,
            objects: 100,
            ..SyntheticSpec::default()
        },
    )?;
    let csv = dir.join("f.csv");
    extract(&dir, &csv, &[])?;
    let manifest = FeatureManifest::v1();
    ensure(
        manifest.version == MANIFEST_VERSION && MANIFEST_VERSION == "pathex-247/v1",
        || format!("manifest version {}", manifest.version),
    )?;
    ensure(manifest.len() == FEATURES, || {
        format!("manifest has {} entries", manifest.len())
    })?;

    let bytes = read(&csv)?;
    let text = String::from_utf8_lossy(&bytes);
    let header: Vec<&str> = text.lines().next().unwrap_or_default().split(',').collect();
    let expected: Vec<&str> = ["object_id", "class_label", "center_x", "center_y"]
        .into_iter()
        .chain(manifest.names())
        .collect();
    ensure(header == expected, || "header differs from manifest order".into())?;

    let table = read_table(&csv)?;
    ensure(table.rows.len() == 100, || format!("{} rows", table.rows.len()))?;
    if let Some(r) = table.rows.iter().find(|r| r.values.len() != FEATURES) {
        return Err(format!("object {} has {} values", r.object_id, r.values.len()));
    }
    let mut again = Vec::new();
    table.write_csv(&mut again).map_err(|e| e.to_string())?;
    ensure(again == bytes, || "CSV does not round-trip byte for byte".into())?;
    Ok(format!(
        "{} rows x {FEATURES}, header and CSV round-trip",
        table.rows.len()
    ))
}

fn bench_json(spec: &str) -> Result<Value, String> {
    let out = pathex(&["bench", "--synthetic", spec, "--repeats", "3"]);
    ok(&out, "bench")?;
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn speedup() -> Check {
    let start = Instant::now();
    let small = bench_json("objects=5000,size=8..32,slide=4096x4096,seed=7")?;
    let ratio = small["speedup"].as_f64().ok_or("no speedup field")?;
    let large = bench_json("objects=50,size=256..256,slide=2100x2100,seed=7")?;
    let large_ratio = large["speedup"].as_f64().ok_or("no speedup field")?;
    let elapsed = start.elapsed();
    ensure(ratio >= MIN_SPEEDUP, || {
        format!("small-object speedup {ratio:.2} < {MIN_SPEEDUP}")
    })?;
    ensure(elapsed < BENCH_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "5000 small: speedup {ratio:.2}; 50 large: equivalent, speedup {large_ratio:.2}; {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn memory_routing(tmp: &Path) -> Check {
    let dir = tmp.join("c4");
    let spec = SyntheticSpec {
        seed: 4,
        objects: 3,
        size_range: (2048, 2048),
        slide_size: (6200, 2100),
        shapes: vec![ShapeKind::Rectangle],
        ..SyntheticSpec::default()
    };
    let slide = generate_synthetic_slide(&spec).map_err(|e| e.to_string())?;
    for o in slide.regions.objects() {
        ensure(o.bbox.dims() == (2048, 2048), || {
            format!("object {} box {}", o.object_id, o.bbox)
        })?;
    }
    slide.write_to_dir(&dir, false).map_err(|e| e.to_string())?;
    let csv = dir.join("f.csv");
    let out = extract(&dir, &csv, &["--memory-budget", OVERFLOW_BUDGET])?;
    let summary = String::from_utf8_lossy(&out.stderr);
    ensure(summary.contains("overflow=3"), || {
        format!("summary: {}", summary.trim())
    })?;
    let table = read_table(&csv)?;
    ensure(table.rows.len() == 3, || format!("{} rows", table.rows.len()))?;
    ensure(table.rows.iter().all(|r| r.values.len() == FEATURES), || {
        "short row".into()
    })?;
    Ok(format!(
        "3 objects of 2048x2048 under {OVERFLOW_BUDGET}: {}",
        summary.trim()
    ))
}

fn rtree() -> Check {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let side = 10_000i64;
    let mut random_box = |max: i64| {
        let (w, h) = (rng.random_range(1..=max), rng.random_range(1..=max));
        BoundingBox::from_origin(
            rng.random_range(0..=side - w),
            rng.random_range(0..=side - h),
            w as usize,
            h as usize,
        )
        .expect("positive box")
    };
    let objects = (0..1000u64)
        .map(|i| {
            let b = random_box(200);
            let (w, h) = b.dims();
            ObjectRecord::new(i + 1, "box", b, ObjectMask::from_fn(w, h, |_, _| true).expect("mask")).expect("record")
        })
        .collect();
    let regions = RegionSet::new(side as u32, side as u32, objects, "boxes").map_err(|e| e.to_string())?;
    let index = SpatialIndex::build(&regions, IndexConfig::default()).map_err(|e| e.to_string())?;
    let stats = index.audit().map_err(|e| e.to_string())?;
    ensure(stats.entries == 1000, || {
        format!("audit counted {} entries", stats.entries)
    })?;
    let mut hits = 0;
    for q in 0..1000 {
        let window = random_box(1500);
        let got = index.query_window(&window);
        let want = oracle_query(&regions, &window);
        ensure(got == want, || format!("query {q} {window}: {got:?} vs {want:?}"))?;
        hits += got.len();
    }
    Ok(format!(
        "1000 windows match the scan ({hits} hits), height {}, {} nodes",
        stats.height, stats.nodes
    ))
}

fn distribution(tmp: &Path) -> Check {
    let dir = tmp.join("c6");
    let objects = 600;
    generate(
        &dir,
        &SyntheticSpec {
            seed: 6,
            objects,
            ..SyntheticSpec::default()
        },
    )?;
    let (a, b) = (dir.join("batched.csv"), dir.join("per_object.csv"));
    extract(&dir, &a, &["--mode", "batched"])?;
    extract(&dir, &b, &["--mode", "per-object"])?;
    let out = pathex(&["compare", s(&a), s(&b), "--bins", COMPARE_BINS]);
    ok(&out, "compare")?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rows = read_table(&a)?.rows.len();
    ensure(rows >= MIN_COMPARE_OBJECTS, || format!("only {rows} objects"))?;
    let mut names = Vec::new();
    for f in report["features"].as_array().ok_or("no features in report")? {
        let d = f["l1_distance"].as_f64().ok_or("no distance")?;
        ensure(d == 0.0, || format!("{} L1 = {d}", f["feature"]))?;
        names.push(f["feature"].as_str().unwrap_or_default().to_string());
    }
    let want = [
        "SizeShape_MaxFeretDiameter",
        "SizeShape_Eccentricity",
        "SizeShape_Hu1",
        "Intensity_MeanIntensity",
    ];
    ensure(names == want, || format!("compared {names:?}"))?;
    Ok(format!(
        "{rows} objects, L1 = 0 for all 4 features at {COMPARE_BINS} bins"
    ))
}

struct Analytic {
    values: Vec<f64>,
    manifest: FeatureManifest,
}

impl Analytic {
    fn new(w: usize, h: usize, inside: impl Fn(usize, usize) -> bool, value: impl Fn(usize, usize) -> f32) -> Self {
        let mask = ObjectMask::from_fn(w, h, inside).expect("mask");
        let patch = IntensityPatch::from_fn(w, h, value).expect("patch");
        let bbox = BoundingBox::from_origin(0, 0, w, h).expect("box");
        Analytic {
            values: features(&patch, &mask, &bbox).expect("features"),
            manifest: FeatureManifest::v1(),
        }
    }

    fn get(&self, name: &str) -> f64 {
        self.values[self.manifest.index_of(name).expect("feature name")]
    }

    fn prefixed(&self, prefix: &str) -> Vec<(&str, f64)> {
        self.manifest
            .entries
            .iter()
            .zip(&self.values)
            .filter(|(e, _)| e.name.starts_with(prefix))
            .map(|(e, &v)| (e.name.as_str(), v))
            .collect()
    }
}

fn analytic() -> Check {
    let mut failures = Vec::new();
    let mut check = |label: &str, cond: bool, value: f64| {
        if !cond {
            failures.push(format!("{label} = {value}"));
        }
    };

    let sq = Analytic::new(10, 10, |_, _| true, |x, y| ((x + 3 * y) % 5) as f32 / 5.0);
    check(
        "square Area",
        sq.get("SizeShape_Area") == 100.0,
        sq.get("SizeShape_Area"),
    );
    check(
        "square Perimeter",
        sq.get("SizeShape_Perimeter") == 36.0,
        sq.get("SizeShape_Perimeter"),
    );
    check(
        "square Eccentricity",
        sq.get("SizeShape_Eccentricity") == 0.0,
        sq.get("SizeShape_Eccentricity"),
    );
    let hu1 = sq.get("SizeShape_Hu1");
    check("square Hu1", (hu1 - 0.165).abs() <= ANALYTIC_EPS, hu1);
    let feret = sq.get("SizeShape_MaxFeretDiameter");
    check(
        "square MaxFeret",
        (feret - 9.0 * 2f64.sqrt()).abs() <= ANALYTIC_EPS,
        feret,
    );

    let r = 50i64;
    let n = (2 * r + 1) as usize;
    let disk = Analytic::new(
        n,
        n,
        |x, y| {
            let (dx, dy) = (x as i64 - r, y as i64 - r);
            dx * dx + dy * dy <= r * r
        },
        |_, _| 0.75,
    );
    let ecc = disk.get("SizeShape_Eccentricity");
    check("disk Eccentricity", ecc < 0.05, ecc);
    let ff = disk.get("SizeShape_FormFactor");
    check("disk FormFactor", (0.85..=1.05).contains(&ff), ff);
    // The innermost bin is excluded: it holds too few pixels for its wedges
    // to be balanced on the lattice.
    for (name, v) in disk.prefixed("Distribution_RadialCV_b").into_iter().skip(1) {
        check(&format!("disk {name}"), v < 0.05, v);
    }
    for (name, v) in disk.prefixed("Distribution_ZernikeMag_") {
        if name != "Distribution_ZernikeMag_n0_m0" {
            check(&format!("disk {name}"), v < 0.01, v);
        }
    }

    let flat = Analytic::new(12, 9, |x, y| (x + y) % 7 != 3, |_, _| 0.4);
    for (name, v) in flat.prefixed("Texture_Contrast_") {
        check(&format!("constant {name}"), v == 0.0, v);
    }
    for (name, v) in flat.prefixed("Texture_AngularSecondMoment_") {
        check(&format!("constant {name}"), v == 1.0, v);
    }
    let std = flat.get("Intensity_StdIntensity");
    check("constant Std", std == 0.0, std);
    let md = flat.get("Intensity_MassDisplacement");
    check("constant MassDisplacement", md == 0.0, md);

    for (label, shape) in [("square", &sq), ("disk", &disk), ("constant", &flat)] {
        let total: f64 = shape.prefixed("Distribution_FracAtD_").iter().map(|(_, v)| v).sum();
        check(
            &format!("{label} sum FracAtD"),
            (total - 1.0).abs() <= ANALYTIC_EPS,
            total,
        );
    }

    if failures.is_empty() {
        Ok("square, disk r=50, constant intensity and FracAtD sums hold".into())
    } else {
        Err(failures.join("; "))
    }
}

fn dir_contents(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    entries
        .into_iter()
        .map(|p| Ok((PathBuf::from(p.file_name().expect("file name")), read(&p)?)))
        .collect()
}

fn determinism(tmp: &Path) -> Check {
    let dir = tmp.join("c8");
    generate(
        &dir,
        &SyntheticSpec {
            seed: 8,
            objects: 400,
            ..SyntheticSpec::default()
        },
    )?;
    let mut outputs = Vec::new();
    for workers in ["1", "4", "8"] {
        let csv = dir.join(format!("w{workers}.csv"));
        extract(&dir, &csv, &["--workers", workers])?;
        outputs.push(read(&csv)?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "worker counts produce different CSVs".into()
    })?;

    let (g1, g2) = (tmp.join("c8_gen1"), tmp.join("c8_gen2"));
    for g in [&g1, &g2] {
        let out = pathex(&["generate", "--seed", "8", "--objects", "200", "--out-dir", s(g)]);
        ok(&out, "generate")?;
    }
    let (a, b) = (dir_contents(&g1)?, dir_contents(&g2)?);
    ensure(a.len() == 4 && a == b, || "generate output differs between runs".into())?;
    Ok(format!(
        "workers 1/4/8 identical ({} bytes); generate identical over {} files",
        outputs[0].len(),
        a.len()
    ))
}

fn cross_path(tmp: &Path) -> Check {
    let dir = tmp.join("c9");
    generate(
        &dir,
        &SyntheticSpec {
            seed: 9,
            objects: 250,
            ..SyntheticSpec::default()
        },
    )?;
    let slide = open_slide(&dir.join(SLIDE_PNG)).map_err(|e| e.to_string())?;
    let set = parse_geojson(&read(&dir.join(ANNOTATIONS))?).map_err(|e| e.to_string())?;
    let (from_geojson, _) =
        regions_from_annotations(&set, slide.width(), slide.height(), SLIDE_PNG).map_err(|e| e.to_string())?;
    let raster = read_label_raster(&dir.join(LABELS)).map_err(|e| e.to_string())?;
    let classes = read_class_map(&dir.join(CLASSES)).map_err(|e| e.to_string())?;
    let from_labels = load_label_mask(&raster, Some(&classes), SLIDE_PNG).map_err(|e| e.to_string())?;
    ensure(from_geojson == from_labels, || "region sets differ".into())?;

    let (a, b) = (dir.join("geojson.csv"), dir.join("labels.csv"));
    extract(&dir, &a, &[])?;
    let out = pathex(&[
        "extract",
        "--slide",
        s(&dir.join(SLIDE_PNG)),
        "--label-mask",
        s(&dir.join(LABELS)),
        "--classes",
        s(&dir.join(CLASSES)),
        "--out",
        s(&b),
    ]);
    ok(&out, "extract --label-mask")?;
    ensure(read(&a)? == read(&b)?, || "feature tables differ".into())?;
    Ok(format!(
        "{} regions and tables identical across both paths",
        from_geojson.len()
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let t = tmp.path();
    let criteria: Vec<Criterion> = vec![
        ("mode equivalence", Box::new(|| mode_equivalence(t))),
        ("feature dimensionality", Box::new(|| dimensionality(t))),
        ("speedup", Box::new(speedup)),
        ("memory routing", Box::new(|| memory_routing(t))),
        ("r-tree correctness", Box::new(rtree)),
        ("distribution consistency", Box::new(|| distribution(t))),
        ("analytic sanity", Box::new(analytic)),
        ("determinism", Box::new(|| determinism(t))),
        ("ingestion cross-path", Box::new(|| cross_path(t))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polychord::curve::{CurveMeta, DensityCurve};
use polychord::mc::HistogramMeta;
use serde_json::Value;

fn polychord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polychord"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"));
    p.to_str().unwrap().to_owned()
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(format!("{name}.csv"));
    let input = fixture(name);
    let mut args = vec!["run", "--input", &input, "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (polychord(&args), out)
}

fn read_curve(path: &Path) -> DensityCurve {
    DensityCurve::read_csv(fs::File::open(path).unwrap()).unwrap()
}

fn error_record(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("{e}: {line}"))
}

#[test]
fn help_and_version() {
    assert!(polychord(&["--help"]).status.success());
    assert!(polychord(&["--version"]).status.success());
    assert!(polychord(&["run", "--help"]).status.success());
}

#[test]
fn square_flags_singular_side_length() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_to(dir.path(), "square", &["--engine", "analytic"]);
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("ell,density\n"));
    assert_eq!(text.lines().count(), 513);
    let meta: CurveMeta = serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta.singular, vec![1.0]);
    assert_eq!(meta.points, 512);
    assert!(!read_curve(&csv).grid.contains(&1.0));
}

#[test]
fn concave_input_defaults_to_bounds_and_emits_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let (o, csv) = run_to(dir.path(), "star", &["--grid", "0.1:1.9:50", "--emit-plan", plan.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("ell,density,lower,upper\n"));
    let c = read_curve(&csv);
    assert_eq!(c.grid.len(), 50);
    let (lo, hi) = (c.lower.unwrap(), c.upper.unwrap());
    for i in 0..50 {
        assert!(lo[i] <= c.values[i] && c.values[i] <= hi[i]);
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["engine"]["kind"], "bounds");
    assert_eq!(meta["engine"]["n"], 1000);
    let plan: Value = serde_json::from_str(&fs::read_to_string(plan).unwrap()).unwrap();
    assert!(!plan.as_array().unwrap().is_empty());
}

#[test]
fn dodecagon_pair_gives_same_curve() {
    let dir = tempfile::tempdir().unwrap();
    let (oa, a) = run_to(dir.path(), "dodecagon_a", &[]);
    let (ob, b) = run_to(dir.path(), "dodecagon_b", &[]);
    assert!(oa.status.success() && ob.status.success());
    let (a, b) = (read_curve(&a), read_curve(&b));
    assert_eq!(a.grid, b.grid);
    assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
}

#[test]
fn dodecagon_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_to(dir.path(), "dodecagon_a", &[]);
    assert!(o.status.success());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden/dodecagon_a.csv");
    let (got, want) = (read_curve(&csv), read_curve(&golden));
    assert_eq!(got.grid, want.grid);
    for (g, w) in got.values.iter().zip(&want.values) {
        assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()), "{g} vs {w}");
    }
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [("rhombus", vec![]), ("pentagon", vec!["--grid", "0.2:1.4:40", "--bounds-n", "50"])] {
        let (o, csv) = run_to(dir.path(), name, &extra);
        assert!(o.status.success());
        let bytes = fs::read(&csv).unwrap();
        assert_eq!(read_curve(&csv).to_csv_string().into_bytes(), bytes, "{name}");
    }
}

#[test]
fn normalize_keeps_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (_, raw) = run_to(dir.path(), "right_345", &[]);
    let raw = read_curve(&raw);
    let norm_dir = dir.path().join("n");
    fs::create_dir(&norm_dir).unwrap();
    let (o, norm) = run_to(&norm_dir, "right_345", &["--normalize"]);
    assert!(o.status.success());
    let norm = read_curve(&norm);
    let meta: CurveMeta = serde_json::from_str(&fs::read_to_string(norm_dir.join("right_345.json")).unwrap()).unwrap();
    let total = meta.normalized_by.unwrap();
    assert!((total - 12.0).abs() < 1e-6, "{total}");
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
    assert_eq!(argmax(&raw.values), argmax(&norm.values));
    assert_eq!(raw.grid, norm.grid);
    for (r, n) in raw.values.iter().zip(&norm.values) {
        assert!((r / total - n).abs() < 1e-14);
    }
}

#[test]
fn monte_carlo_histogram_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--engine", "montecarlo", "--mc-lines", "20000", "--seed", "11"];
    let (o1, c1) = run_to(dir.path(), "equilateral", &args);
    let first = fs::read(&c1).unwrap();
    let (o2, c2) = run_to(dir.path(), "equilateral", &args);
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(first, fs::read(&c2).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("ell_lo,ell_hi,mass,stderr\n"));
    assert_eq!(text.lines().count(), 65);
    let meta: HistogramMeta = serde_json::from_str(&fs::read_to_string(c1.with_extension("json")).unwrap()).unwrap();
    assert_eq!((meta.seed, meta.n_lines, meta.bins), (11, 20000, 64));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("x.csv");
    let out = out.to_str().unwrap();
    let write = |name: &str, text: &str| {
        let p = d.join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_owned()
    };
    let garbage = write("garbage.json", "{ not json");
    let bowtie = write("bowtie.json", r#"{"outer": [[0,0],[1,1],[1,0],[0,1]]}"#);
    let square = fixture("square");
    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["run", "--input", "missing.json", "--output", out], 4, "io"),
        (vec!["run", "--input", &garbage, "--output", out], 1, "parse"),
        (vec!["run", "--input", &bowtie, "--output", out], 2, "validate"),
        (vec!["run", "--input", &square, "--grid", "x:y", "--output", out], 1, "parse"),
        (vec!["run", "--input", &square, "--grid", "2:1:5", "--output", out], 2, "validate"),
        (vec!["run", "--input", &square, "--bounds-n", "0", "--engine", "bounds", "--output", out], 2, "validate"),
        (vec!["run", "--input", &square, "--output", "/nonexistent/dir/x.csv"], 4, "io"),
        (vec!["run", "--input", &square, "--engine", "magic", "--output", out], 1, "parse"),
        (vec!["frobnicate"], 1, "parse"),
    ];
    for (args, code, kind) in cases {
        let o = polychord(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let rec = error_record(&o);
        assert_eq!(rec["error"], kind, "{args:?}");
        assert_eq!(rec["code"], code);
        assert!(rec["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn fixtures_subcommand_matches_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = polychord(&["fixtures", "--dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let names = [
        "equilateral",
        "right_345",
        "square",
        "rhombus",
        "dodecagon_a",
        "dodecagon_b",
        "quadrilateral",
        "pentagon",
        "pentagon_asymmetric",
        "star",
        "square_with_hole",
    ];
    for name in names {
        let fresh = fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap();
        assert_eq!(fresh, fs::read_to_string(fixture(name)).unwrap(), "{name}");
    }
}

use super::*;
use clap::CommandFactory;
use serde_json::Value;
use std::path::Path;

fn call(args: &[&str]) -> u8 {
    dispatch(std::iter::once("rips-boundary").chain(args.iter().copied()))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn out_arg(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn clap_definition_is_consistent() {
    Cli::command().debug_assert();
}

#[test]
fn usage_help_and_operational_errors_have_distinct_codes() {
    assert_eq!(call(&["ball", "--preset", "z", "--bogus"]), 64);
    assert_eq!(call(&[]), 64);
    assert_eq!(call(&["--help"]), 0);
    assert_eq!(call(&["--version"]), 0);
    assert_eq!(call(&["ball", "--preset", "nope"]), 3);
    assert_eq!(call(&["ball"]), 3);
}

#[test]
fn ball_report_has_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "z.json");
    assert_eq!(call(&["ball", "--preset", "z", "--radius", "5", "-o", &out]), 0);
    let v = read_json(Path::new(&out));
    assert_eq!(v["schema"], REPORT_SCHEMA);
    assert_eq!(v["command"], "ball");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["result"]["sphere_sizes"], json!([1, 2, 2, 2, 2, 2]));
    assert_eq!(v["config"]["delta"]["delta"], 0);
    assert_eq!(v["config"]["D"], 2);
    assert!(v.get("watermark").is_none());
}

#[test]
fn small_d_needs_force_and_is_watermarked() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "s.json");
    assert_eq!(call(&["ball", "--preset", "surface2", "--delta", "2", "--D", "3", "-o", &out]), 3);
    assert!(!Path::new(&out).exists());
    assert_eq!(call(&["ball", "--preset", "surface2", "--delta", "2", "--D", "3", "--force-d", "-o", &out]), 0);
    let v = read_json(Path::new(&out));
    assert_eq!(v["config"]["conforming"], false);
    assert!(v["watermark"].as_str().unwrap().contains("non-conforming"));
}

#[test]
fn paper_d_follows_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "p.json");
    assert_eq!(call(&["ball", "--preset", "f2", "--radius", "2", "--paper-D", "-o", &out]), 0);
    assert_eq!(read_json(Path::new(&out))["config"]["D"], 1_000_000);
}

#[test]
fn classify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = out_arg(dir.path(), "a.json");
    let b = out_arg(dir.path(), "b.json");
    let args = ["classify", "--preset", "f2", "--n", "1..4", "--D", "1", "--force-d"];
    assert_eq!(call(&[&args[..], &["-o", &a]].concat()), 0);
    assert_eq!(call(&[&args[..], &["-o", &b], &["--sequential"]].concat()), 0);
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["result"]["verdict"], "Cantor-like");
}

#[test]
fn ball_cache_is_written_reused_and_replaced_when_corrupt() {
    let cache = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (out_arg(dir.path(), "a.json"), out_arg(dir.path(), "b.json"));
    let base = ["ball", "--preset", "f2", "--radius", "4", "--cache-dir", cache.path().to_str().unwrap()];
    assert_eq!(call(&[&base[..], &["-o", &a]].concat()), 0);
    let files: Vec<_> = std::fs::read_dir(cache.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let name = files[0].file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("ball-") && name.ends_with("-r4.bin"), "{name}");
    let mut bytes = std::fs::read(&files[0]).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x55;
    std::fs::write(&files[0], &bytes).unwrap();
    assert_eq!(call(&[&base[..], &["-o", &b]].concat()), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // the corrupt file was rebuilt
    assert_ne!(std::fs::read(&files[0]).unwrap(), bytes);
}

#[test]
fn outputs_leave_no_temporary_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "r.json");
    assert_eq!(call(&["sphere", "--preset", "z", "--n", "1..3", "-o", &out]), 0);
    assert_eq!(call(&["sphere", "--preset", "z", "--n", "1..3", "-o", &out]), 0);
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["r.json"]);
    let blocked = out_arg(&dir.path().join("r.json"), "x.json");
    assert_eq!(call(&["sphere", "--preset", "z", "--n", "1", "-o", &blocked]), 3);
    let nested = out_arg(&dir.path().join("sub"), "r.json");
    assert_eq!(call(&["sphere", "--preset", "z", "--n", "1", "-o", &nested]), 0);
    assert!(Path::new(&nested).exists());
}

#[test]
fn exports_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let j = out_arg(dir.path(), "k.json");
    let d = out_arg(dir.path(), "k.dot");
    assert_eq!(call(&["export", "--preset", "f2", "--n", "2", "-o", &j]), 0);
    let v = read_json(Path::new(&j));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 12);
    // D = 2 joins siblings: four triples
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);
    assert_eq!(v["triangles"].as_array().unwrap().len(), 4);
    assert_eq!(call(&["export", "--preset", "f2", "--n", "2", "--format", "dot", "-o", &d]), 0);
    let dot = std::fs::read_to_string(&d).unwrap();
    assert!(dot.starts_with("graph"));
    assert_eq!(dot.matches(" -- ").count(), 12);
    let s = out_arg(dir.path(), "stage.json");
    assert_eq!(call(&["export", "--preset", "f2", "--radius", "6", "--stage", "2", "-o", &s]), 0);
    let v = read_json(Path::new(&s));
    assert_eq!(v["i"], 2);
    assert_eq!(v["base"], "e");
}

#[test]
fn ddag_on_a_tree_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "d.json");
    assert_eq!(call(&["ddag", "--preset", "f2", "--n", "2..3", "--M", "2", "-o", &out]), 1);
    let v = read_json(Path::new(&out));
    assert_eq!(v["status"], "violations");
    assert_eq!(v["result"]["m"], 2);
    let auto = out_arg(dir.path(), "auto.json");
    call(&["ddag", "--preset", "f2", "--n", "2", "--M", "auto", "-o", &auto]);
    assert_eq!(read_json(Path::new(&auto))["result"]["m"], 3);
}

#[test]
fn line_and_tree_pass_the_growth_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "g.json");
    assert_eq!(call(&["growth", "--preset", "z", "--n", "2..5", "--fit-cap", "500", "-o", &out]), 0);
    let v = read_json(Path::new(&out));
    assert!(v["result"]["stats"].as_array().unwrap().iter().all(|s| s["c_fit"] == 0));
    assert_eq!(call(&["imap", "--preset", "z", "--n", "2..4", "-o", &out]), 0);
    // at n = 1 the two points are joined, their images are not; the bounded search cannot say more
    assert_eq!(call(&["imap", "--preset", "z", "--n", "1", "-o", &out]), 2);
}

#[test]
fn horoball_on_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path(), "h.json");
    assert_eq!(call(&["horoball", "--preset", "z", "--radius", "9", "--samples", "2", "-o", &out]), 0);
    let v = read_json(Path::new(&out));
    assert_eq!(v["result"]["nesting_ok"], true);
    assert_eq!(v["result"]["stages"].as_array().unwrap().len(), 3);
}

use std::path::Path;
use std::process::{Command, Output};

use levywalk::io::read_table_file;
use levywalk::wait_first::pdf_wait_first_half;

fn levywalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levywalk")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn density_curve_matches_library_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let run = levywalk(&[
        "density",
        "wait-first",
        "--alpha",
        "0.5",
        "--p",
        "0.1",
        "--t",
        "1",
        "--grid",
        "-1:1:401",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let table = read_table_file(&out).unwrap();
    assert_eq!(table.header, ["x", "pdf", "err"]);
    assert_eq!(table.rows.len(), 401);
    assert_eq!(table.manifest.get("method"), Some("closed-half"));
    for row in &table.rows {
        assert_eq!(row[1], pdf_wait_first_half(0.1, 1.0, row[0]).unwrap());
    }
    let sidecar = std::fs::read_to_string(dir.path().join("curve.csv.manifest.txt")).unwrap();
    assert!(sidecar.contains("wall_time_s="));
    assert!(sidecar.contains("command_line="));
}

#[test]
fn rational_alpha_and_quadrature_method() {
    let run = levywalk(&[
        "density",
        "wait-first",
        "--alpha-rational",
        "1/3",
        "--p",
        "0.25",
        "--grid",
        "-1:1:4",
        "--method",
        "quadrature",
    ]);
    assert_eq!(code(&run), 0);
    let table = levywalk::io::read_table(run.stdout.as_slice()).unwrap();
    assert_eq!(table.manifest.get("alpha"), Some((1.0f64 / 3.0).to_string().as_str()));
    assert!(table.rows.iter().all(|r| r[1] > 0.0 && r[1].is_finite()));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    assert_eq!(code(&levywalk(&["density", "wait-first", "--alpha", "0.5", "--p", "1.0"])), 2);
    assert_eq!(code(&levywalk(&["density", "jump-first", "--alpha", "1.2", "--p", "0.5"])), 2);
    assert_eq!(code(&levywalk(&["density", "wait-first", "--alpha", "2/4", "--p", "0.5"])), 2);
    assert_eq!(
        code(&levywalk(&["density", "wait-first", "--alpha", "0.3", "--p", "0.5", "--method", "closed-half"])),
        2
    );
    assert_eq!(code(&levywalk(&["density", "jump-first", "--alpha", "0.5", "--p", "0.5", "--method", "meijer"])), 2);
    assert_eq!(code(&levywalk(&["density", "wait-first", "--alpha", "0.5", "--p", "0.5", "--rel-tol", "-1"])), 2);
    assert_eq!(code(&levywalk(&["simulate", "wait-first", "--alpha", "0.5", "--p", "0.25", "--samples", "0"])), 2);
    assert_eq!(code(&levywalk(&["simulate", "wait-first", "--alpha", "0.5", "--p", "0.25", "--window", "1:-1"])), 2);
    assert_eq!(code(&levywalk(&["no-such-command"])), 2);
}

#[test]
fn simulation_is_reproducible_and_compares_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &Path| {
        vec![
            "simulate".to_string(),
            "wait-first".into(),
            "--alpha".into(),
            "0.5".into(),
            "--p".into(),
            "0.5".into(),
            "--n".into(),
            "10000".into(),
            "--samples".into(),
            "100000".into(),
            "--seed".into(),
            "7".into(),
            "-o".into(),
            path_str(p).into(),
        ]
    };
    let run = |p: &Path| {
        let a = args(p);
        levywalk(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let cmp = levywalk(&["compare", "--histogram", path_str(&a), "--max-l1", "0.05"]);
    assert_eq!(code(&cmp), 0, "{}", String::from_utf8_lossy(&cmp.stderr));
    let text = String::from_utf8(cmp.stdout).unwrap();
    let json_line = text.lines().last().unwrap();
    let record: serde_json::Value = serde_json::from_str(json_line).unwrap();
    let l1 = record["l1"].as_f64().unwrap();
    assert!(l1 <= 0.05, "{l1}");
    assert!(text.contains(&format!("l1={l1}")));

    let self_cmp = levywalk(&["compare", "--histogram", path_str(&a), "--analytic", path_str(&b)]);
    assert_eq!(code(&self_cmp), 0);
    assert!(String::from_utf8(self_cmp.stdout).unwrap().starts_with("l1=0\n"));

    let strict = levywalk(&["compare", "--histogram", path_str(&a), "--max-l1", "1e-9"]);
    assert_eq!(code(&strict), 1);
}

#[test]
fn mismatched_windows_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let base =
        ["simulate", "jump-first", "--alpha", "0.5", "--p", "0.3", "--samples", "2000", "--n", "100", "--bins", "20"];
    let mut first = base.to_vec();
    first.extend(["-o", path_str(&a)]);
    let mut second = base.to_vec();
    second.extend(["--window", "-2:2", "-o", path_str(&b)]);
    assert_eq!(code(&levywalk(&first)), 0);
    assert_eq!(code(&levywalk(&second)), 0);
    assert_eq!(code(&levywalk(&["compare", "--histogram", path_str(&a), "--analytic", path_str(&b)])), 2);
}

#[test]
fn analytic_curve_as_reference() {
    let dir = tempfile::tempdir().unwrap();
    let (h, c) = (dir.path().join("h.csv"), dir.path().join("c.csv"));
    let sim = levywalk(&[
        "simulate",
        "jump-first",
        "--alpha",
        "0.5",
        "--p",
        "0.25",
        "--samples",
        "50000",
        "--n",
        "10000",
        "--bins",
        "61",
        "-o",
        path_str(&h),
    ]);
    assert_eq!(code(&sim), 0);
    let curve = levywalk(&[
        "density",
        "jump-first",
        "--alpha",
        "0.5",
        "--p",
        "0.25",
        "--grid",
        "-3.2:3.2:6401",
        "-o",
        path_str(&c),
    ]);
    assert_eq!(code(&curve), 0);
    let cmp = levywalk(&["compare", "--histogram", path_str(&h), "--analytic", path_str(&c), "--max-l1", "0.08"]);
    assert_eq!(code(&cmp), 0, "{}", String::from_utf8_lossy(&cmp.stdout));
}

#[test]
fn endpoints_dump_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let (one, four) = (dir.path().join("one.csv"), dir.path().join("four.csv"));
    let args = |p: &Path| {
        [
            "simulate",
            "wait-first",
            "--alpha",
            "0.7",
            "--p",
            "0.4",
            "--samples",
            "500",
            "--n",
            "200",
            "--endpoints",
            "-o",
            path_str(p),
        ]
        .map(str::to_string)
    };
    let run = |threads: &str, p: &Path| {
        Command::new(env!("CARGO_BIN_EXE_levywalk")).args(args(p)).env("LEVYWALK_THREADS", threads).output().unwrap()
    };
    assert_eq!(code(&run("1", &one)), 0);
    assert_eq!(code(&run("4", &four)), 0);
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&four).unwrap());
    let table = read_table_file(&one).unwrap();
    assert_eq!(table.header, ["endpoint"]);
    assert_eq!(table.rows.len(), 500);
    assert!(table.rows.iter().all(|r| r[0].abs() <= 1.0));
    let sidecar = std::fs::read_to_string(dir.path().join("four.csv.manifest.txt")).unwrap();
    assert!(sidecar.contains("threads=4"));
    assert_eq!(code(&run("zero", &one)), 2);
}

#[test]
fn stable_pdf_paths_agree() {
    let series = levywalk(&["stable-pdf", "--alpha", "0.25", "--x", "0.5", "--x", "3", "--method", "series"]);
    let integral = levywalk(&["stable-pdf", "--alpha", "1/4", "--x", "0.5", "--x", "3", "--method", "integral"]);
    assert_eq!(code(&series), 0);
    assert_eq!(code(&integral), 0);
    let s = levywalk::io::read_table(series.stdout.as_slice()).unwrap();
    let i = levywalk::io::read_table(integral.stdout.as_slice()).unwrap();
    for (a, b) in s.rows.iter().zip(&i.rows) {
        assert!((a[1] - b[1]).abs() <= 1e-10 * b[1]);
    }
    let r = levywalk(&["stable-pdf", "--alpha", "0.75", "--x", "0.01", "--method", "series"]);
    assert_eq!(code(&r), 3);
}

#[test]
fn repro_writes_reference_data() {
    let dir = tempfile::tempdir().unwrap();
    let run =
        levywalk(&["repro", "--out-dir", path_str(dir.path()), "--samples", "20000", "--n", "1000", "--skip-meijer"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(dir.path().join("wait_first_a0.5_p0.1_t2.csv").exists());
    assert!(dir.path().join("jump_first_a0.5_p0.05.csv").exists());
    assert!(dir.path().join("wait_first_a1_4_p0.25.csv").exists());
    let summary = std::fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = summary.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r["l1"].as_f64().unwrap() < 0.2));
}

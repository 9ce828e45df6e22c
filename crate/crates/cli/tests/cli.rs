use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pcrps_cli::FlatGrid;
use pcrps_core::GridField;
use tempfile::TempDir;

fn pcrps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcrps"))
        .args(args)
        .env_remove("PC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn grid(
    dir: &TempDir,
    name: &str,
    lats: &[f64],
    lons: &[f64],
    nt: usize,
    f: impl Fn(usize, usize) -> f64,
) -> PathBuf {
    let cells = lats.len() * lons.len();
    let values = (0..nt * cells).map(|i| f(i / cells, i % cells)).collect();
    let field = GridField::new(
        (0..nt as i64).collect(),
        lats.to_vec(),
        lons.to_vec(),
        values,
    )
    .unwrap();
    let p = dir.path().join(name);
    FlatGrid::new(field, "t", "K").write(&p).unwrap();
    p
}

/// Deterministic pseudo-noise in [-1, 1).
fn noise(t: usize, c: usize, salt: u64) -> f64 {
    let mut z = (t as u64) << 20 ^ (c as u64) << 8 ^ salt;
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn truth_value(t: usize, c: usize) -> f64 {
    10.0 + 5.0 * (t as f64 / 9.0 + c as f64).sin() + 2.0 * noise(t, c, 1)
}

#[test]
fn pc_reports_perfect_association() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.csv", "time,x,y\n0,1,10\n1,2,20\n2,3,30\n");
    let o = pcrps(&["pc", "--input", s(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("PC       0\n"), "{out}");
    assert!(out.contains("PCS      1\n"), "{out}");
    for key in ["PC0", "RMSE", "MAE", "QL_0.9", "ACC", "CPA"] {
        assert!(out.contains(key), "{key} missing from {out}");
    }
}

#[test]
fn pc_json_for_reversed_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.csv", "time,x,y\n0,1,2\n1,2,1\n");
    let o = pcrps(&["pc", "--input", s(&input), "--json", "--alpha", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pc"], 0.25);
    assert_eq!(v["pcs"], 0.0);
    assert_eq!(v["alpha"], 0.5);
    assert_eq!(v["cpa"], 0.0);
}

#[test]
fn pc_error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "time,x,y\n0,1,2\n1,oops,3\n");
    let o = pcrps(&["pc", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let empty = write(&dir, "empty.csv", "time,x,y\n0,NA,1\n");
    assert_eq!(pcrps(&["pc", "--input", s(&empty)]).status.code(), Some(3));

    let ok = write(&dir, "ok.csv", "time,x,y\n0,1,2\n");
    assert_eq!(
        pcrps(&["pc", "--input", s(&ok), "--alpha", "1.5"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        pcrps(&["pc", "--input", "/nonexistent/file.csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn grid_eval_identical_fields() {
    let dir = TempDir::new().unwrap();
    let lats = [-30.0, 30.0];
    let lons = [0.0, 180.0];
    let t = grid(&dir, "t.grid", &lats, &lons, 40, truth_value);
    let out = dir.path().join("report.csv");
    let o = pcrps(&[
        "grid-eval",
        "--forecast",
        s(&t),
        "--truth",
        s(&t),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let agg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(agg["aggregate"]["pc"], 0.0);
    assert_eq!(agg["aggregate"]["pcs"], 1.0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("lat,lon,n_used,pc,pc0,pcs\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn grid_eval_weights_and_exclusions() {
    let dir = TempDir::new().unwrap();
    let lats = [0.0, 60.0];
    let lons = [0.0, 10.0];
    // cell 3 (lat 60, lon 10) has no truth at all
    let t = grid(&dir, "t.grid", &lats, &lons, 60, |t, c| {
        if c == 3 {
            f64::NAN
        } else {
            truth_value(t, c)
        }
    });
    let f = grid(&dir, "f.grid", &lats, &lons, 60, |t, c| {
        truth_value(t, c) + 3.0 * noise(t, c, 2)
    });
    let out = dir.path().join("r.csv");
    let agg_path = dir.path().join("agg.json");
    let o = pcrps(&[
        "grid-eval",
        "--forecast",
        s(&f),
        "--truth",
        s(&t),
        "--out",
        s(&out),
        "--aggregate",
        s(&agg_path),
        "--lead-days",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let (mut wsum, mut pc_sum) = (0.0, 0.0);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let lat: f64 = rec[0].parse().unwrap();
        let pc: f64 = rec[3].parse().unwrap();
        let w = lat.to_radians().cos();
        wsum += w;
        pc_sum += w * pc;
        rows += 1;
    }
    assert_eq!(rows, 3);
    let agg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&agg_path).unwrap()).unwrap();
    let got = agg["aggregate"]["pc"].as_f64().unwrap();
    assert!((got - pc_sum / wsum).abs() < 1e-12);
    assert_eq!(agg["lead_days"], 3);
    assert_eq!(agg["excluded"].as_array().unwrap().len(), 1);
    assert_eq!(agg["excluded"][0]["lat"], 60.0);
    assert_eq!(agg["excluded"][0]["lon"], 10.0);
}

#[test]
fn grid_eval_coordinate_mismatch() {
    let dir = TempDir::new().unwrap();
    let a = grid(&dir, "a.grid", &[0.0, 10.0], &[0.0], 5, truth_value);
    let b = grid(&dir, "b.grid", &[0.0, 20.0], &[0.0], 5, truth_value);
    let out = dir.path().join("r.csv");
    let o = pcrps(&[
        "grid-eval",
        "--forecast",
        s(&a),
        "--truth",
        s(&b),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("lat[1]"), "{}", stderr(&o));
}

#[test]
fn grid_eval_skill_against_reference() {
    let dir = TempDir::new().unwrap();
    let lats = [0.0];
    let lons = [0.0, 90.0];
    let t = grid(&dir, "t.grid", &lats, &lons, 80, truth_value);
    let f = grid(&dir, "f.grid", &lats, &lons, 80, |t, c| {
        truth_value(t, c) + noise(t, c, 3)
    });
    let r = grid(&dir, "r.grid", &lats, &lons, 80, |t, c| {
        truth_value(t, c) + 5.0 * noise(t, c, 4)
    });
    let out = dir.path().join("e.csv");
    let o = pcrps(&[
        "grid-eval",
        "--forecast",
        s(&f),
        "--truth",
        s(&t),
        "--out",
        s(&out),
        "--skill-ref",
        s(&r),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let skill = std::fs::read_to_string(out.with_extension("skill.csv")).unwrap();
    let lines: Vec<&str> = skill.lines().collect();
    assert_eq!(lines[0], "lat,lon,pc,pc_ref,skill");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[4] - (1.0 - v[2] / v[3])).abs() < 1e-12);
        assert!(v[4] > 0.0);
    }
}

#[test]
fn truncated_grid_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let t = grid(&dir, "t.grid", &[0.0], &[0.0], 4, truth_value);
    let mut bytes = std::fs::read(&t).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&t, bytes).unwrap();
    let out = dir.path().join("r.csv");
    let o = pcrps(&[
        "grid-eval",
        "--forecast",
        s(&t),
        "--truth",
        s(&t),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flat_grid_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let t = grid(
        &dir,
        "t.grid",
        &[-10.0, 10.0],
        &[5.0, 15.0, 25.0],
        7,
        |t, c| {
            if (t + c) % 5 == 0 {
                f64::NAN
            } else {
                truth_value(t, c)
            }
        },
    );
    let bytes = std::fs::read(&t).unwrap();
    let copy = dir.path().join("copy.grid");
    FlatGrid::read(&t).unwrap().write(&copy).unwrap();
    assert_eq!(std::fs::read(&copy).unwrap(), bytes);
}

fn compare(
    dir: &TempDir,
    a: &Path,
    b: &Path,
    t: &Path,
    out: &str,
    extra: &[&str],
) -> (Output, PathBuf) {
    let out = dir.path().join(out);
    let mut args = vec![
        "compare",
        "--model-a",
        s(a),
        "--model-b",
        s(b),
        "--truth",
        s(t),
        "--lead-days",
        "2",
        "--seed",
        "17",
        "--out",
        s(&out),
    ];
    args.extend_from_slice(extra);
    (pcrps(&args), out)
}

#[test]
fn compare_identical_models_gives_median_one_half() {
    let dir = TempDir::new().unwrap();
    let lats = [0.0, 45.0];
    let lons = [0.0, 90.0];
    let t = grid(&dir, "t.grid", &lats, &lons, 60, truth_value);
    let a = grid(&dir, "a.grid", &lats, &lons, 60, |t, c| {
        truth_value(t, c) + noise(t, c, 5)
    });
    let (o, out) = compare(&dir, &a, &a, &t, "p.csv", &["--permutations", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(out.with_extension("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "model_a,model_b,lead_days,n_cells,min,q1,median,q3,max"
    );
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[3], "4");
    let median: f64 = fields[6].parse().unwrap();
    assert!((median - 0.5).abs() < 0.01, "{median}");
}

#[test]
fn compare_detects_better_model_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let lats = [-20.0, 0.0, 20.0];
    let lons = [0.0, 120.0, 240.0];
    let nt = 300;
    let t = grid(&dir, "t.grid", &lats, &lons, nt, truth_value);
    let a = grid(&dir, "a.grid", &lats, &lons, nt, |t, c| {
        truth_value(t, c) + 0.1 * noise(t, c, 6)
    });
    let b = grid(&dir, "b.grid", &lats, &lons, nt, |t, c| {
        truth_value(t, c) + 4.0 * noise(t, c, 7)
    });
    let (o1, out1) = compare(&dir, &a, &b, &t, "p1.csv", &[]);
    assert!(o1.status.success(), "{}", stderr(&o1));
    let (o2, out2) = compare(&dir, &a, &b, &t, "p2.csv", &["--threads", "1"]);
    assert!(o2.status.success(), "{}", stderr(&o2));
    let first = std::fs::read(&out1).unwrap();
    assert_eq!(first, std::fs::read(&out2).unwrap());

    let mut rdr = csv::Reader::from_reader(first.as_slice());
    let p: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[5].parse().unwrap())
        .collect();
    let clipped = p.iter().filter(|&&v| v == 0.5 / 1000.0).count();
    assert!(clipped as f64 >= 0.95 * p.len() as f64, "{p:?}");
}

#[test]
fn compare_rejects_zero_lead_time() {
    let dir = TempDir::new().unwrap();
    let t = grid(&dir, "t.grid", &[0.0], &[0.0], 10, truth_value);
    let out = dir.path().join("p.csv");
    let o = pcrps(&[
        "compare",
        "--model-a",
        s(&t),
        "--model-b",
        s(&t),
        "--truth",
        s(&t),
        "--lead-days",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn threads_env_and_flag_agree() {
    let dir = TempDir::new().unwrap();
    let lats = [0.0, 30.0, 60.0];
    let lons = [0.0, 90.0];
    let t = grid(&dir, "t.grid", &lats, &lons, 50, truth_value);
    let f = grid(&dir, "f.grid", &lats, &lons, 50, |t, c| {
        truth_value(t, c) + noise(t, c, 8)
    });
    let run = |name: &str, env: Option<&str>, flag: &[&str]| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pcrps"));
        cmd.args([
            "grid-eval",
            "--forecast",
            s(&f),
            "--truth",
            s(&t),
            "--out",
            s(&out),
        ])
        .args(flag);
        match env {
            Some(v) => cmd.env("PC_THREADS", v),
            None => cmd.env_remove("PC_THREADS"),
        };
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", Some("1"), &[]);
    let b = run("b.csv", None, &["--threads", "3"]);
    let c = run("c.csv", Some("2"), &["--threads", "1"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn simulate_smoke_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("table.csv");
    let o = pcrps(&["simulate", "--n", "10", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "model,rmse,mae,ql_0.9,pc,acc,cpa,pcs");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
    let text = std::fs::read_to_string(out.with_extension("txt")).unwrap();
    assert!(text.contains("ChaCha8Rng"));
    assert!(text.contains("seed: 1"));
    assert_eq!(stdout(&o), text);
    let svg = std::fs::read_to_string(out.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() >= 6);
}

#[test]
fn simulate_default_size_has_constant_pc_column() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("table.csv");
    let o = pcrps(&["simulate", "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let pcs: Vec<String> = rdr.records().map(|r| r.unwrap()[4].to_string()).collect();
    assert_eq!(pcs.len(), 4);
    assert!(pcs.iter().all(|p| *p == pcs[0]));
    let pc: f64 = pcs[0].parse().unwrap();
    assert!((pc - 3.52).abs() < 0.15, "{pc}");

    let sq = dir.path().join("sq.csv");
    let o = pcrps(&["simulate", "--seed", "3", "--squared", "--out", s(&sq)]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&sq).unwrap();
    let pc: f64 = rdr.records().next().unwrap().unwrap()[4].parse().unwrap();
    assert!((pc - 118.0).abs() < 10.0, "{pc}");
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(
        pcrps(&["simulate", "--n", "300", "--seed", "8", "--out", s(&a)])
            .status
            .success()
    );
    assert!(
        pcrps(&["simulate", "--n", "300", "--seed", "8", "--out", s(&b)])
            .status
            .success()
    );
    for ext in ["csv", "txt", "svg"] {
        assert_eq!(
            std::fs::read(a.with_extension(ext)).unwrap(),
            std::fs::read(b.with_extension(ext)).unwrap()
        );
    }
}

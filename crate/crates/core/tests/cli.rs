use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hgpart::generate::uniform_seeded;
use hgpart::hgraph::{read_partition, write_hmetis};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn hgpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgpart")).args(args).env("HGPART_WORKERS", "2").output().expect("spawn hgpart")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stats(path: &Path) -> Vec<(String, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn get<'a>(stats: &'a [(String, String)], key: &str) -> &'a str {
    &stats.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn h0_single_run_reaches_the_optimum() {
    let dir = TempDir::new().unwrap();
    let mut parts = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}/h0"));
        let o = hgpart(&["partition", "--hgr", s(&fixture("h0.hgr")), "--k", "2", "--eps", "0", "--mode", "single", "--seed", "1", "--output", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("km1 = 2"));
        let st = stats(&out.with_file_name("h0.stats"));
        assert_eq!(get(&st, "km1"), "2");
        assert_eq!(get(&st, "balanced"), "true");
        let part = read_partition(fs::read_to_string(&out).unwrap().as_bytes(), 4, 2).unwrap();
        // the only optimum at eps 0 is {1,2} | {3,4}
        assert_eq!(part[0], part[1]);
        assert_eq!(part[2], part[3]);
        assert_ne!(part[0], part[2]);
        parts.push(fs::read(&out).unwrap());
    }
    assert_eq!(parts[0], parts[1]);
}

#[test]
fn k_above_n_exits_cleanly_without_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("h0");
    let o = hgpart(&["partition", "--hgr", s(&fixture("h0.hgr")), "--k", "5", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&o.stderr).trim().is_empty());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn corrupt_inputs_are_rejected() {
    for name in ["pin_out_of_range.hgr", "truncated.hgr", "not_a_number.hgr", "duplicate_pin.hgr", "missing.hgr"] {
        let dir = TempDir::new().unwrap();
        let out = dir.path().join("x");
        let o = hgpart(&["partition", "--hgr", s(&fixture(name)), "--k", "2", "--output", s(&out)]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{name}");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "{name}");
    }
}

#[test]
fn weighted_fixture_partitions() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w");
    let o = hgpart(&["partition", "--hgr", s(&fixture("weighted.hgr")), "--k", "2", "--eps", "0.5", "--seed", "3", "--output", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let part = read_partition(fs::read_to_string(&out).unwrap().as_bytes(), 6, 2).unwrap();
    assert_eq!(part.len(), 6);
}

#[test]
fn heavy_node_reports_unbalanced() {
    let dir = TempDir::new().unwrap();
    let hgr = dir.path().join("heavy.hgr");
    // 4 nodes, node 4 outweighs the rest together
    fs::write(&hgr, "3 4 10\n1 2\n2 3\n3 4\n1\n1\n1\n9\n").unwrap();
    let out = dir.path().join("out/heavy");
    let o = hgpart(&["partition", "--hgr", s(&hgr), "--k", "2", "--eps", "0", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(get(&stats(&out.with_file_name("heavy.stats")), "balanced"), "false");
}

fn write_instance(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let h = uniform_seeded(40, 60, 4, false, seed);
    write_hmetis(&h, fs::File::create(&path).unwrap()).unwrap();
    path
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for mode in ["repeated", "evolve"] {
        for e in fs::read_dir(dir.join(mode)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "csv") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn modified(p: &Path) -> std::time::SystemTime {
    fs::metadata(p).unwrap().modified().unwrap()
}

#[test]
fn bench_grid_and_resume() {
    let dir = TempDir::new().unwrap();
    let a = write_instance(dir.path(), "a.hgr", 1);
    let b = write_instance(dir.path(), "b.hgr", 2);
    let out = dir.path().join("grid");
    let args = [
        "bench", "--instances", s(&a), s(&b), "--k", "2", "--seeds", "1,2,3", "--modes", "repeated,evolve", "--generations", "4",
        "--t", "5", "--population", "3", "--out", s(&out),
    ];
    let o = hgpart(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let files = csvs(&out);
    assert_eq!(files.len(), 12);
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().collect();
    assert_eq!(rows[0], "instance,k,seed,mode,km1,cut,imbalance,balanced,status");
    assert_eq!(rows.len(), 13);
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));

    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("instance,seed,elapsed_s,generation,operator,best_km1"));
        let best: Vec<i64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert!(!best.is_empty());
        assert!(best.windows(2).all(|w| w[1] <= w[0]), "{}", f.display());
    }

    // resume: only the deleted cell is recomputed
    let victim = out.join("evolve/a-k2.s2");
    let before: Vec<_> = files.iter().map(|f| (f.clone(), modified(f), fs::read(f).unwrap())).collect();
    let victim_csv = fs::read(victim.with_file_name("a-k2.s2.csv")).unwrap();
    for suffix in ["", ".csv", ".stats"] {
        fs::remove_file(victim.with_file_name(format!("a-k2.s2{suffix}"))).unwrap();
    }
    std::thread::sleep(std::time::Duration::from_millis(20));
    let o = hgpart(&args);
    assert!(o.status.success());
    for (f, t, bytes) in before {
        if f.ends_with("evolve/a-k2.s2.csv") {
            assert!(modified(&f) > t);
            assert_eq!(fs::read(&f).unwrap(), victim_csv);
        } else {
            assert_eq!(modified(&f), t, "{} was rerun", f.display());
            assert_eq!(fs::read(&f).unwrap(), bytes);
        }
    }
    assert_eq!(fs::read_to_string(out.join("results.csv")).unwrap(), results);
}

#[test]
fn bench_with_missing_instance_fails() {
    let dir = TempDir::new().unwrap();
    let o = hgpart(&["bench", "--instances", s(&dir.path().join("nope.hgr")), "--generations", "2", "--out", s(&dir.path().join("g"))]);
    assert_eq!(o.status.code(), Some(1));
}

fn write_csv(path: &Path, rows: &[(&str, u64, f64, i64)]) {
    let mut text = String::from("instance,seed,elapsed_s,generation,operator,best_km1\n");
    for (g, (inst, seed, t, best)) in rows.iter().enumerate() {
        text.push_str(&format!("{inst},{seed},{t:.6},{g},init,{best}\n"));
    }
    fs::write(path, text).unwrap();
}

fn table(path: &Path) -> Vec<(String, f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn aggregate_single_trajectory_is_identity() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("a.csv");
    let raw = [("x", 1, 0.1, 50), ("x", 1, 1.0, 40), ("x", 1, 10.0, 30)];
    write_csv(&csv, &raw);
    let out = dir.path().join("conv.csv");
    let o = hgpart(&["aggregate", "--mode", "convergence", "--input", &format!("A={}", s(&csv)), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out);
    assert!(!rows.is_empty());
    for (alg, t, v) in &rows {
        assert_eq!(alg, "A");
        let expect = raw.iter().filter(|r| r.2 <= *t + 1e-12).map(|r| r.3).min().unwrap();
        assert_eq!(*v, expect as f64, "at t = {t}");
    }
    for r in raw {
        assert!(rows.iter().any(|(_, t, v)| (t - r.2).abs() < 1e-9 && *v == r.3 as f64), "raw point {r:?} missing");
    }
}

#[test]
fn aggregate_geometric_mean_over_instances() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("a.csv");
    write_csv(&csv, &[("x", 1, 1.0, 10), ("y", 1, 1.0, 1000)]);
    let out = dir.path().join("conv.csv");
    let o = hgpart(&["aggregate", "--mode", "convergence", "--input", &format!("A={}", s(&csv)), "--out", s(&out)]);
    assert!(o.status.success());
    let rows = table(&out);
    assert!((rows.last().unwrap().2 - 100.0).abs() < 1e-9);
}

#[test]
fn aggregate_performance_profile() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    // A wins x and y, loses z by a factor 1.5; seeds are averaged first
    write_csv(&a, &[("x", 1, 1.0, 10), ("x", 2, 1.0, 10), ("y", 1, 1.0, 20), ("z", 1, 1.0, 30), ("z", 2, 1.0, 60)]);
    write_csv(&b, &[("x", 1, 1.0, 12), ("y", 1, 1.0, 30), ("z", 1, 1.0, 30)]);
    let out = dir.path().join("perf.csv");
    let o = hgpart(&[
        "aggregate", "--mode", "performance", "--input", &format!("A={}", s(&a)), "--input", &format!("B={}", s(&b)), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out);
    let of = |alg: &str| -> Vec<(f64, f64)> { rows.iter().filter(|r| r.0 == alg).map(|r| (r.1, r.2)).collect() };
    let close = |got: &[(f64, f64)], want: &[(f64, f64)]| {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12)
    };
    assert!(close(&of("A"), &[(1.0, 2.0 / 3.0), (1.5, 1.0)]), "{:?}", of("A"));
    assert!(close(&of("B"), &[(1.0, 1.0 / 3.0), (1.2, 2.0 / 3.0), (1.5, 1.0)]), "{:?}", of("B"));
}

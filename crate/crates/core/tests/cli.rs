use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use topotraffic::io::{parse_bits_rle, parse_edge_list};
use topotraffic::sweep::{emit_csv, parse_sweep_csv, to_csv_string, SWEEP_COLUMNS};

const GOLDEN_GRAPH: &str = include_str!("golden/static_n10_m15_a1_s42.txt");
const TINY_SWEEP: [&str; 12] =
    ["--n", "60", "--alphas", "0,1", "--lambdas", "0.02,0.1", "--seeds", "0..2", "--warmup", "50", "--steps", "300"];

fn topotraffic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topotraffic")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_tiny").join(name)).unwrap()
}

#[test]
fn gen_matches_golden_edge_list() {
    let out = topotraffic(&["gen", "--n", "10", "--edges", "15", "--alpha", "1", "--seed", "42"]);
    assert_eq!(stdout(&out), GOLDEN_GRAPH);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = topotraffic(&["gen", "--n", "10", "--edges", "15", "--alpha", "1", "--seed", "42", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&path).unwrap(), GOLDEN_GRAPH);
}

#[test]
fn gen_giant_component_is_connected() {
    let text = stdout(&topotraffic(&["gen", "--n", "300", "--alpha", "1", "--seed", "3", "--giant"]));
    let (g, _) = parse_edge_list(&text).unwrap();
    assert!(g.is_connected());
    assert!(g.n_vertices() < 300);
}

#[test]
fn load_reads_an_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.txt");
    fs::write(&path, "# N=3\n0 1\n1 2\n").unwrap();
    let text = stdout(&topotraffic(&["load", path.to_str().unwrap()]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("vertex,load"));
    assert_eq!(lines.next(), Some("0,0"));
    assert_eq!(lines.next(), Some("1,2"));
    assert_eq!(lines.next(), Some("2,0"));
    assert!(lines.next().unwrap().starts_with("# mean="));

    let inclusive = stdout(&topotraffic(&["load", "--inclusive", path.to_str().unwrap()]));
    assert!(inclusive.contains("\n1,6\n"));
}

#[test]
fn traffic_modes() {
    let rle = stdout(&topotraffic(&["traffic", "--m1", "1.5", "--m2", "1.5", "--bits", "1000", "--seed", "4"]));
    assert_eq!(parse_bits_rle(&rle).unwrap().len(), 1000);
    let raw = stdout(&topotraffic(&["traffic", "--bits", "50", "--format", "raw"]));
    assert_eq!(raw.lines().count(), 50);
    assert!(raw.lines().all(|l| l == "0" || l == "1"));

    let text = stdout(&topotraffic(&["traffic", "--rate", "--d", "0.5", "--m1", "1.5", "--m2", "1.5"]));
    let (header, row) = text.trim().split_once('\n').unwrap();
    assert_eq!(header, "d,rate");
    let rate: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((0.35..=0.65).contains(&rate));
}

#[test]
fn run_prints_one_metrics_row() {
    let text = stdout(&topotraffic(&["run", "--n", "80", "--alpha", "0.5", "--d", "0.9", "--warmup", "20", "--steps", "200", "--seed", "1"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,gamma,lambda,seed,generated,delivered,mean_delivery_time,in_flight,max_queue");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.5,3,"));
    assert_eq!(text, stdout(&topotraffic(&["run", "--n", "80", "--alpha", "0.5", "--d", "0.9", "--warmup", "20", "--steps", "200", "--seed", "1"])));
}

#[test]
fn tiny_sweep_matches_golden_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep"];
    args.extend(TINY_SWEEP);
    args.extend(["--out", dir.path().to_str().unwrap()]);
    stdout(&topotraffic(&args));
    for name in ["fig12_load.csv", "fig12_load_mean.csv", "fig34_traffic.csv", "fig34_traffic_mean.csv"] {
        assert_eq!(fs::read_to_string(dir.path().join(name)).unwrap(), golden(name), "{name}");
    }
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("plan.conf");
    fs::write(&config, "# tiny plan\nn = 60\nalphas = 0, 0.5\nlambdas = 0.02, 0.1\nseeds = 0..2\nwarmup = 50\nsteps = 300\n").unwrap();
    let out = dir.path().join("out");
    let args = ["sweep", "--config", config.to_str().unwrap(), "--alphas", "0,1", "--out", out.to_str().unwrap()];
    stdout(&topotraffic(&args));
    assert_eq!(fs::read_to_string(out.join("fig34_traffic.csv")).unwrap(), golden("fig34_traffic.csv"));
}

#[test]
fn sweep_csv_round_trips() {
    let records = parse_sweep_csv(&golden("fig34_traffic.csv")).unwrap();
    assert_eq!(records.len(), 8);
    assert_eq!(to_csv_string(&records), golden("fig34_traffic.csv"));
    assert_eq!(golden("fig34_traffic.csv").lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    for r in &records {
        if r.alpha > 0.0 {
            assert_eq!(r.gamma(), 1.0 + 1.0 / r.alpha);
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("again.csv");
    emit_csv(&records, &path).unwrap();
    assert_eq!(parse_sweep_csv(&fs::read_to_string(&path).unwrap()).unwrap(), records);

    let empty = dir.path().join("empty.csv");
    assert!(emit_csv::<topotraffic::sweep::SweepRecord>(&[], &empty).is_err());
    assert!(!empty.exists());
}

#[test]
fn exit_codes() {
    assert_eq!(topotraffic(&["sweep", "--lambdas", "2"]).status.code(), Some(1));
    assert_eq!(topotraffic(&["sweep", "--rho", "1.5"]).status.code(), Some(1));
    assert_eq!(topotraffic(&["gen", "--bogus"]).status.code(), Some(1));
    assert_eq!(topotraffic(&["load", "/nonexistent/graph.txt"]).status.code(), Some(1));
    assert_eq!(topotraffic(&["gen", "--n", "10", "--out", "/nonexistent/dir/g.txt"]).status.code(), Some(2));
    assert_eq!(topotraffic(&["gen", "--n", "4", "--edges", "7"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    fs::write(&config, "n = 100\nunknown_key = 3\n").unwrap();
    let out = topotraffic(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

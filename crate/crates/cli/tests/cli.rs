use std::path::Path;
use std::process::{Command, Output};

fn r13fem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r13fem")).args(args).env_remove("R13FEM_THREADS").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_RING: &str = r#"
case = "ring"
[mesh]
h = 0.4
[elements]
degree_high = 1
degree_low = 1
[stabilization]
delta_p = 0.1
[output]
vtk = "ring.vtk"
[convergence]
h = [0.8, 0.4]
h_ref = 0.2
[[sample]]
p0 = [0.5, 0.0]
p1 = [2.0, 0.0]
n = 11
components = ["theta", "p"]
csv = "axis.csv"
"#;

#[test]
fn solve_writes_vtk_and_csv_into_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ring.toml", SMALL_RING);
    let out = dir.path().join("out");
    let o = r13fem(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let vtk = std::fs::read_to_string(out.join("ring.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile"));
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("x,y,"));
    let text = stdout(&o);
    for key in ["cells", "dofs", "t_a", "t_s", "residual"] {
        assert!(text.contains(key), "{text}");
    }
}

#[test]
fn knudsen_override_and_sample_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ring.toml", SMALL_RING);
    let o = r13fem(&["sample", "--config", &cfg, "--kn", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("axis.csv")).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["s", "x", "y", "theta", "p"]);
    let rows: Vec<Vec<f64>> = rd.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    assert!((rows[10][1] - 2.0).abs() < 1e-15 && (rows[10][0] - 1.5).abs() < 1e-15);
    // Wall temperatures 1 and 2 bracket the profile roughly.
    assert!(rows.iter().all(|r| r[3] > 0.5 && r[3] < 2.5));

    let bad = r13fem(&["solve", "--config", &cfg, "--kn=-1"]);
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("--kn"));
}

#[test]
fn convergence_writes_an_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ring.toml", SMALL_RING);
    let o = r13fem(&["convergence", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("errors.csv")).unwrap();
    let headers: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert!(headers.iter().any(|h| h.contains("theta")), "{headers:?}");
    assert_eq!(rd.records().count(), 2);
    assert!(stdout(&o).contains("L2 rate"));
}

#[test]
fn kn_sweep_finds_the_knudsen_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "channel.toml", "case = \"channel\"\n[mesh]\nh = 0.1\n[sweep]\ncsv = \"j.csv\"\n");
    let o = r13fem(&["kn-sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("minimum at Kn = 0.25"), "{}", stdout(&o));
    let rd = csv::Reader::from_path(dir.path().join("j.csv")).unwrap();
    assert_eq!(rd.into_records().count(), 7);
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "case = \"ring\"\n[physics]\nkn = = 1\n");
    let o = r13fem(&["solve", "--config", &cfg]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("line 3"), "{err}");

    let cfg = write(dir.path(), "bad2.toml", "case = \"ring\"\n[bc.1]\ntheta_w = \"1 +\"\n");
    let err = stderr(&r13fem(&["solve", "--config", &cfg]));
    assert!(err.contains("line 3") && err.contains("theta_w"), "{err}");

    let o = r13fem(&["solve", "--config", "/no/such.toml"]);
    assert!(!o.status.success());
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ring.toml", SMALL_RING);
    let o = Command::new(env!("CARGO_BIN_EXE_r13fem"))
        .args(["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()])
        .env("R13FEM_THREADS", "0")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("R13FEM_THREADS"));
    let o = Command::new(env!("CARGO_BIN_EXE_r13fem"))
        .args(["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()])
        .env("R13FEM_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_and_missing_config_fail() {
    assert!(!r13fem(&["explode"]).status.success());
    assert!(!r13fem(&["solve"]).status.success());
}

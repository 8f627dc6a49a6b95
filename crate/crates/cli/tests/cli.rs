use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slowvar-ns"));
    c.env_remove("RUST_LOG").env("SLOWVAR_NS_THREADS", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn slowvar-ns")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SWEEP: &str = r#"
experiment = "remainder_sweep"
[grid]
n_h = 16
n_v = 8
[ic]
kind = "taylor_green"
profile = "sin"
[time]
dt = 0.02
t_end = 0.1
[sweep]
eps = [0.5, 0.25, 0.125]
"#;

#[test]
fn help_matches_golden() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let golden = include_str!("golden/help.txt");
    assert_eq!(stdout(&o), golden, "--help drifted from tests/golden/help.txt");
}

#[test]
fn unknown_flag_exits_1() {
    let o = run(&["--bogus", "verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--bogus"));
}

#[test]
fn missing_subcommand_exits_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let o = run(&["--quiet", "--config", missing.to_str().unwrap(), "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.toml"), "{}", stderr(&o));
}

#[test]
fn bad_override_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let o = run(&["--quiet", "--config", &cfg, "--set", "grid.n_h=-3", "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--quiet", "--config", &cfg, "--set", "nonsense", "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("KEY=VALUE"), "{}", stderr(&o));
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        r#"
experiment = "decay25d"
[grid]
n_h = 16
n_v = 2
[ic]
kind = "taylor_green"
amplitude = 1e8
[time]
dt = 1.0
t_end = 20.0
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["--quiet", "--config", &cfg, "--out", out.to_str().unwrap(), "run25d"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
}

#[test]
fn quick_verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        r#"
tg_n_h = 16
tg_n_v = 2
tg_dt = 0.01
energy_n_h = 16
energy_n_v = 8
energy_dt = 0.01
t_end = 0.4
seeds = 5
projector_n_h = 8
projector_n_v = 4
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["--quiet", "--config", &cfg, "--out", out.to_str().unwrap(), "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("verify:"), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    for name in ["taylor_green", "energy_identity", "maximum_principle", "lowpass_laws"] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no {name}"));
        assert_eq!(c["passed"], true, "{name}");
    }
}

#[test]
fn sweep_writes_outputs_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let out = dir.path().join("out");
    let args = ["--quiet", "--config", &cfg, "--out", out.to_str().unwrap(), "sweep"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("sweep:"), "{}", stdout(&o));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    for eps in ["0.5", "0.25", "0.125"] {
        assert!(out.join(format!("remainder_eps_{eps}.csv")).exists(), "csv for {eps}");
    }
    let csv = fs::read_to_string(out.join("remainder_eps_0.25.csv")).unwrap();
    assert!(csv.starts_with("t,h_half,grad_h_half_int,force_h_minus_half,force_sq_int"));

    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("manifest.json")).unwrap(), manifest);

    // a changed config refuses to resume into the same directory
    let o = run(&["--quiet", "--config", &cfg, "--set", "time.dt=0.01", "--out", out.to_str().unwrap(), "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("hash mismatch"), "{}", stderr(&o));
}

#[test]
fn set_overrides_config_and_out_overrides_both() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.toml",
        &format!(
            "experiment = \"decay25d\"\nout_dir = \"{}\"\n[grid]\nn_h = 16\nn_v = 4\n[ic]\nkind = \"taylor_green\"\n[time]\ndt = 0.1\nt_end = 0.2\n",
            dir.path().join("from_config").display()
        ),
    );
    let out = dir.path().join("from_flag");
    let o = run(&["--quiet", "--config", &cfg, "--set", "ic.amplitude=2.0", "--out", out.to_str().unwrap(), "norms"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("manifest.json").exists());
    assert!(!dir.path().join("from_config").exists());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["ic"]["amplitude"], 2.0, "{manifest}");
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qthermo_cli::output::{Manifest, RunStatus, Table, MANIFEST_NAME};

fn qthermo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qthermo")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&fs::read(dir.join(MANIFEST_NAME)).unwrap()).unwrap()
}

const OPTIMIZE: &str = r#"
system = { kind = "single_qubit" }
bath = { lambda = 0.05, omega_c = 0.1 }
temperature = 0.2

[solver]
kind = "heom"
depth = 2
n_matsubara = 1
integrator = { kind = "fixed_rk4", dt = 0.1 }

[optimize]
n_particles = 4
iterations = 6
n_segments = 2
t_max = 10.0
n_time_samples = 8
"#;

#[test]
fn thermal_benchmark_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qthermo(&["benchmark-thermal", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = Table::read(&out.join("thermal_benchmark.csv")).unwrap();
    assert_eq!(t.header, ["T", "qsnr_thermal"]);
    assert_eq!(t.get_meta("schema_version"), Some("1"));
    let ts = t.column("T").unwrap();
    let qs = t.column("qsnr_thermal").unwrap();
    assert_eq!(ts.len(), 100);
    for (x, q) in ts.iter().zip(&qs) {
        let y = 0.5 / x;
        assert!((q - y * y / y.cosh().powi(2)).abs() <= 1e-14 * q);
    }
    let m = manifest(&out);
    assert_eq!(m.status, RunStatus::Completed);
    assert_eq!(m.outputs, ["thermal_benchmark.csv"]);
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "system = { kind = \"single_qubit\" }\nbath = { lambda = 0.1, omega_c = 0.1, colour = 1 }\ntemperature = 0.2\n", "bath"),
        ("negative.toml", "system = { kind = \"single_qubit\" }\nbath = { lambda = [0.1, -0.1], omega_c = 0.1 }\ntemperature = 0.2\n", "bath.lambda[1]"),
        ("grid.toml", "system = { kind = \"single_qubit\" }\nbath = { lambda = 0.1, omega_c = 0.1 }\ntemperature = 0.2\n[grid]\nt_max = 10.0\nn_samples = 1\n", "grid.n_samples"),
    ];
    for (name, text, path) in cases {
        let cfg = write(dir.path(), name, text);
        let o = qthermo(&["dynamics", "--config", &cfg, "--out", dir.path().join(name).with_extension("d").to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(path), "{name}: {err}");
    }
    let o = qthermo(&["steady", "--out", dir.path().join("none").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unconverged_steady_state_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "system = { kind = \"single_qubit\" }\ninitial_state = \"plus\"\nbath = { lambda = 0.0, omega_c = 0.1 }\ntemperature = 0.2\n[solver]\nkind = \"heom\"\ndepth = 1\nn_matsubara = 0\n[steady]\nt_max = 100.0\n",
    );
    let out = dir.path().join("run");
    let o = qthermo(&["steady", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let t = Table::read(&out.join("steady.csv")).unwrap();
    assert!(t.column("qsnr_steady").unwrap()[0].is_nan());
    let m = manifest(&out);
    assert_eq!(m.status, RunStatus::Failed);
    assert!(!m.convergence[0].converged);
}

#[test]
fn resume_reproduces_an_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "opt.toml", OPTIMIZE);
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    let resumed = dir.path().join("resumed");
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec!["optimize", "--config", &cfg, "--seed", "11", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = qthermo(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&full, &[]);
    run(&part, &["--stop-after", "3"]);
    let partial = Table::read(&part.join("history.csv")).unwrap();
    assert_eq!(partial.rows.len(), 4);
    assert_eq!(partial.get_meta("complete"), Some("false"));
    let ckpt = part.join("checkpoint.json");
    run(&resumed, &["--resume", ckpt.to_str().unwrap()]);
    for name in ["history.csv", "best_control.csv", "comparison.csv"] {
        assert_eq!(fs::read(full.join(name)).unwrap(), fs::read(resumed.join(name)).unwrap(), "{name}");
    }
    let h = Table::read(&full.join("history.csv")).unwrap().column("best_fitness").unwrap();
    assert!(h.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn resume_mismatch_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "opt.toml", OPTIMIZE);
    let part = dir.path().join("part");
    let o = qthermo(&["optimize", "--config", &cfg, "--seed", "1", "--stop-after", "1", "--out", part.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let ckpt = part.join("checkpoint.json");
    let other = write(dir.path(), "other.toml", &OPTIMIZE.replace("lambda = 0.05", "lambda = 0.06"));
    let o = qthermo(&["optimize", "--config", &other, "--seed", "1", "--resume", ckpt.to_str().unwrap(), "--out", dir.path().join("a").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let o = qthermo(&["optimize", "--config", &cfg, "--seed", "2", "--resume", ckpt.to_str().unwrap(), "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    fs::write(&ckpt, "{ not json").unwrap();
    let o = qthermo(&["optimize", "--config", &cfg, "--seed", "1", "--resume", ckpt.to_str().unwrap(), "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn fixed_step_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dyn.toml",
        r#"
system = { kind = "single_qubit" }
bath = { lambda = [0.01, 0.05], omega_c = 0.1 }
temperature = [0.2, 0.3]
[solver]
kind = "heom"
depth = 3
n_matsubara = 1
integrator = { kind = "fixed_rk4", dt = 0.05 }
[grid]
t_max = 20.0
n_samples = 41
"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = qthermo(&["dynamics", "--config", &cfg, "--workers", "2", "--plot", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let m = manifest(&a);
    assert_eq!(m.outputs.len(), 5);
    for name in &m.outputs {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let t = Table::read(&a.join("dynamics_l0.05_wc0.1_T0.3.csv")).unwrap();
    assert_eq!(t.header, ["t", "sx", "sy", "sz", "qfi", "qsnr"]);
    assert_eq!(t.rows.len(), 41);
    assert_eq!(t.get_meta("n_matsubara"), Some("1"));
    let (q, f) = (t.column("qsnr").unwrap(), t.column("qfi").unwrap());
    for (q, f) in q.iter().zip(&f) {
        assert!((q - 0.09 * f).abs() <= 1e-12 * q.abs().max(1.0));
    }
}

#[test]
fn manifest_precedes_results() {
    // A run that fails on its first point still leaves a manifest behind.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "system = { kind = \"two_qubit\", g = 0.1 }\nbath = { lambda = 0.05, omega_c = 0.1 }\ntemperature = 0.2\n",
    );
    let out = dir.path().join("run");
    let o = qthermo(&["blp", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let m = manifest(&out);
    assert_eq!(m.status, RunStatus::Failed);
    assert!(m.outputs.is_empty());
    assert!(m.error.unwrap().contains("system.kind"));
}

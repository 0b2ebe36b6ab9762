use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use homspace::matexp::expm;
use homspace::spaces::{resolve_space, FieldKind};
use homspace::Matrix;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn homspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homspace")).args(args).output().unwrap()
}

fn config_arg(name: &str) -> String {
    repo().join("data/configs").join(name).display().to_string()
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines
        .map(|l| l.split(',').map(|v| if v.is_empty() { f64::NAN } else { v.parse().unwrap() }).collect())
        .collect();
    (header, data)
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

const OUTPUTS: &str = "[outputs]\ntrajectory = \"t.csv\"\norders = \"o.csv\"\nreport = \"r.json\"\n";

#[test]
fn sphere_rotation_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = homspace(&["run", "--config", &config_arg("sphere_rotation.toml"), "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, data) = rows(&dir.path().join("sphere_rotation.csv"));
    assert_eq!(header, ["step", "time", "x_0_0", "x_1_0", "x_2_0", "orthonormality_defect"]);
    assert_eq!(data.len(), 101);

    let space = resolve_space("sphere:3").unwrap().space;
    let xi = FieldKind::ConstantRotation.constant_generator(space.as_ref(), 1).unwrap().unwrap();
    let x0 = space.initial_point();
    let exact = space.act(&expm(&xi).unwrap(), &x0);
    let last = &data[100];
    assert!((last[1] - 1.0).abs() < 1e-12);
    let got = Matrix::column(&last[2..5]);
    assert!(got.distance(&exact).unwrap() <= 1e-6);
}

#[test]
fn output_is_deterministic_and_full_precision() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = homspace(&["run", "--config", &config_arg("rkmk4_orders.toml"), "--out", &d.path().display().to_string()]);
        assert!(o.status.success());
    }
    let ta = std::fs::read(a.path().join("rkmk4.csv")).unwrap();
    let tb = std::fs::read(b.path().join("rkmk4.csv")).unwrap();
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let second = text.lines().nth(1).unwrap();
    // 17 significant digits round-trip exactly.
    for field in second.split(',').skip(1) {
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn toda_keeps_its_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = homspace(&["run", "--config", &config_arg("toda.toml"), "--out", &dir.path().display().to_string()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, data) = rows(&dir.path().join("toda.csv"));
    assert_eq!(header.last().unwrap(), "spectrum_drift");
    assert!(data.iter().all(|r| *r.last().unwrap() <= 1e-8));
}

#[test]
fn zero_field_gives_a_constant_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "space = \"stiefel:4,2\"\nmethod = \"gauss4\"\nmotion = \"exponential\"\nfield = \"zero\"\nstep = 0.1\nsteps = 5\nseed = 0\n{OUTPUTS}"
        ),
    );
    let o = homspace(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, data) = rows(&dir.path().join("t.csv"));
    for r in &data[1..] {
        assert_eq!(r[2..], data[0][2..]);
    }
}

#[test]
fn orders_table_for_rkmk4() {
    let dir = tempfile::tempdir().unwrap();
    let o = homspace(&["orders", "--config", &config_arg("rkmk4_orders.toml"), "--out", &dir.path().display().to_string()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, data) = rows(&dir.path().join("rkmk4_orders.csv"));
    assert_eq!(header, ["h", "error", "local_slope"]);
    assert_eq!(data.len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rkmk4_orders.json")).unwrap()).unwrap();
    let p = report["observed_order"].as_f64().unwrap();
    assert!((3.75..=4.25).contains(&p), "{p}");
}

#[test]
fn euler_orders_halve_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "space = \"sphere:3\"\nmethod = \"euler_forward\"\nmotion = \"exponential\"\nfield = \"gradient_like\"\nstep = 0.1\nsteps = 1\nseed = 2\n{OUTPUTS}\n[orders]\nfinal_time = 1.0\nh_list = [0.03125, 0.015625, 0.0078125, 0.00390625]\n"
        ),
    );
    let o = homspace(&["orders", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, data) = rows(&dir.path().join("o.csv"));
    for w in data.windows(2) {
        let ratio = w[0][1] / w[1][1];
        assert!((1.7..=2.3).contains(&ratio), "{ratio}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    let p: f64 = stdout.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((0.8..=1.2).contains(&p), "{stdout}");
}

#[test]
fn classify_shipped_bases() {
    let bases = repo().join("data/bases");
    let run = |f: &str| {
        let o = homspace(&["classify", &bases.join(f).display().to_string()]);
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    assert!(run("sphere.toml").contains("reductive ✓ symmetric ✓ flat ✗"));
    assert!(run("sl2_nilpotent.toml").contains("no reductive complement exists"));
    assert!(run("affine_scalings.toml").contains("unique complement"));
}

#[test]
fn acceptance_subset_and_injection() {
    let ok = homspace(&["acceptance", "--only", "1,9"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().count(), 2);
    let bad = homspace(&["acceptance", "--only", "2,3", "--inject-corruption"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
    assert_eq!(homspace(&["acceptance", "--only", "42"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("space = \"blob:3\"\nmethod = \"cf4\"", "space"),
        ("space = \"sphere:3\"\nmethod = \"rk45\"", "method"),
    ];
    for (head, what) in cases {
        let cfg = write_config(
            dir.path(),
            &format!("{head}\nmotion = \"exponential\"\nfield = \"zero\"\nstep = 0.1\nsteps = 2\nseed = 0\n{OUTPUTS}"),
        );
        let o = homspace(&["run", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains(what));
    }
    // Missing mandatory field.
    let cfg = write_config(dir.path(), &format!("space = \"sphere:3\"\nmethod = \"cf4\"\nfield = \"zero\"\nstep = 0.1\nsteps = 2\nseed = 0\n{OUTPUTS}"));
    let o = homspace(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("motion"));
    // orders without an [orders] section.
    let cfg = write_config(dir.path(), &format!("space = \"sphere:3\"\nmethod = \"cf4\"\nmotion = \"exponential\"\nfield = \"zero\"\nstep = 0.1\nsteps = 2\nseed = 0\n{OUTPUTS}"));
    assert_eq!(homspace(&["orders", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(homspace(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn integration_failure_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "space = \"sphere:3\"\nmethod = \"euler_backward\"\nmotion = \"exponential\"\nfield = \"gradient_like\"\nstep = 40.0\nsteps = 3\nseed = 7\n{OUTPUTS}"
        ),
    );
    let o = homspace(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("step "), "{err}");
}

#[test]
fn list_mentions_every_registry() {
    let o = homspace(&["list"]);
    let s = String::from_utf8(o.stdout).unwrap();
    for needle in ["cf4", "gauss4", "cayley", "gradient_like", "stiefel", "cartan_schouten"] {
        assert!(s.contains(needle), "{needle}");
    }
}

use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SPHERE: &str = r#"
[body]
geometry = "sphere"
radius = 0.01

[material]
model = "drude"
sigma = 1000.0

[state]
omega = 1.0

[spectrum]
omega_max = 2.0
points = 8
"#;

const ROTOR: &str = r#"
[rotor]
inertia = 100.0
dt = 0.01
steps = 200
n_traj = 64
drive = 1.0
c_drift = 1.0
k_drift = 5.0
c_diff = 1.0
k_diff = 5.0
record_every = 50
seed = 11
"#;

fn spinrad(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinrad")).args(args).current_dir(cwd).output().expect("run spinrad")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.toml", "");
    let o = spinrad(&["power", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
    let o = spinrad(&["power"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = spinrad(&["nosuchcommand"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", &SPHERE.replace("radius = 0.01", "radius = 0.01\nradus = 1.0"));
    let o = spinrad(&["power", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radus"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "b.toml", &SPHERE.replace("sigma = 1000.0", "sigma = -3.0"));
    let o = spinrad(&["power", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("material.sigma"), "{}", stderr(&o));
}

#[test]
fn step_size_failure_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", &ROTOR.replace("dt = 0.01", "dt = 10.0"));
    let o = spinrad(&["rotor", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("rotor"), "{}", stderr(&o));
}

#[test]
fn outputs_are_deterministic_and_carry_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SPHERE}{ROTOR}");
    let cfg = write_config(dir.path(), "s.toml", &text);
    let hash: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    for out in ["a", "b"] {
        for cmd in ["power", "spectrum", "rotor", "stats"] {
            let o = spinrad(&[cmd, "--config", &cfg, "--out", out, "--threads", "2"], dir.path());
            assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        }
    }
    for f in ["power.json", "spectrum.csv", "trajectories.csv", "density.csv", "rotor_summary.json", "stats.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains(&hash), "{f} lacks the config hash");
        assert!(text.contains(env!("CARGO_PKG_VERSION")), "{f} lacks the version");
        assert!(text.contains("OmegaR_over_c"), "{f} lacks the regime flags");
        assert!(text.contains("adiabaticity"), "{f} lacks the regime flags");
    }
    let csv = fs::read_to_string(dir.path().join("a/spectrum.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("# spinrad"));
    assert!(csv.lines().any(|l| l == "omega,m,extra,pol,N,dP_domega"));

    // a different seed changes the trajectories but not the header hash
    let o = spinrad(&["rotor", "--config", &cfg, "--out", "c", "--seed", "12"], dir.path());
    assert!(o.status.success());
    let a = fs::read_to_string(dir.path().join("a/trajectories.csv")).unwrap();
    let c = fs::read_to_string(dir.path().join("c/trajectories.csv")).unwrap();
    assert_ne!(a, c);
    assert!(c.contains("# seed: 12") && c.contains(&hash));
}

fn json_value(path: &Path, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["result"][key].as_f64().unwrap()
}

#[test]
fn si_power_matches_hand_conversion() {
    // R = 1 um, sigma = 1e15 s^-1 (Gaussian), Omega = 1e12 rad/s: sigma/Omega = 1e3
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "si.toml",
        "[units]\nsystem = \"si\"\n[body]\ngeometry = \"sphere\"\nradius = 1e-6\n\
         [material]\nmodel = \"drude\"\nsigma = 1e15\n[state]\nomega = 1e12\n",
    );
    let o = spinrad(&["power", "--config", &cfg, "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (hbar, c) = (1.054_571_817e-34_f64, 299_792_458.0_f64);
    let (r, w, s) = (1e-6_f64, 1e12_f64, 1e15_f64);
    let pi2 = std::f64::consts::PI.powi(2);
    let p_watts = hbar * r.powi(3) * w.powi(6) / (30.0 * pi2 * c.powi(3) * s);
    let m_newton_metre = hbar * r.powi(3) * w.powi(5) / (20.0 * pi2 * c.powi(3) * s);
    let out = dir.path().join("o/power.json");
    let p = json_value(&out, "P");
    let m = json_value(&out, "M");
    assert!((p / p_watts - 1.0).abs() < 0.02, "P = {p} W vs {p_watts} W");
    assert!((m / m_newton_metre - 1.0).abs() < 0.02, "M = {m} vs {m_newton_metre}");
    // energy balance survives the conversion: Q = Omega M - P in watts
    let q = json_value(&out, "Q");
    assert!((q - (w * m - p)).abs() < 1e-6 * p);

    // the same body with lengths in units of R gives the same physics
    let nat = write_config(
        dir.path(),
        "nat.toml",
        &format!(
            "[body]\ngeometry = \"sphere\"\nradius = 1.0\n[material]\nmodel = \"drude\"\nsigma = {}\n[state]\nomega = {}\n",
            s * r / c,
            w * r / c
        ),
    );
    let o = spinrad(&["power", "--config", &nat, "--out", "n"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let p_nat = json_value(&dir.path().join("n/power.json"), "P");
    let to_watts = hbar * c * c / (r * r);
    assert!((p_nat * to_watts / p - 1.0).abs() < 1e-9);
}

#[test]
fn twobody_sweep_reports_inverse_square_torque() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SPHERE}\n[twobody]\nmodel = \"sphere3d\"\nkernel = \"exact\"\ntest_radius = 0.005\n\
         d_min = 1.0\nd_max = 10.0\npoints = 4\n[twobody.test_material]\nmodel = \"drude\"\nsigma = 100.0\n"
    );
    let cfg = write_config(dir.path(), "t.toml", &text);
    let o = spinrad(&["twobody", "--config", &cfg, "--out", "o", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let slope = json_value(&dir.path().join("o/twobody.json"), "torque_slope");
    assert!((slope + 2.0).abs() < 0.04, "slope {slope}");
}

#[test]
fn verify_prints_the_check_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = spinrad(&["verify", "--out", "v"], dir.path());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).collect();
    assert_eq!(lines.len(), 12, "{text}");
    let first = lines[0];
    assert!(first.starts_with("[PASS]"), "{first}");
    let ratio: f64 = first.split("P ratio ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() <= 0.02, "{first}");
    let all_pass = lines.iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    assert!(dir.path().join("v/verify.json").exists());
}

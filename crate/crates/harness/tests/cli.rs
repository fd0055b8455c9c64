use std::fs;
use std::path::Path;
use std::process::Command;

fn mfrate(args: &[&str], out: &Path) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_mfrate"))
        .args(args)
        .env("MFRATE_OUT_DIR", out)
        .output()
        .unwrap();
    (
        output.status.code().unwrap(),
        String::from_utf8_lossy(&output.stdout).into_owned() + &String::from_utf8_lossy(&output.stderr),
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn identity_suite_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = mfrate(&["identity-suite"], dir.path());
    assert_eq!(code, 0, "{text}");
    let csv = fs::read_to_string(dir.path().join("identities.csv")).unwrap();
    assert!(csv.starts_with("identity,instances,max_deviation,tolerance,pass\n"));
    assert!(!csv.contains(",false"));
}

#[test]
fn mutation_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[identities]\nmutation = 1e-3\n");
    let (code, text) = mfrate(&["--config", &config, "identity-suite"], dir.path());
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL contraction-optimal-lift"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "seed = 3\n[sanov]\nmu = [0.2, 0.3, 0.5]\nn = [5, 10, 20]\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let (code, text) = mfrate(&["--config", &config, "--out", out.to_str().unwrap(), "sanov-check"], dir.path());
        assert_eq!(code, 0, "{text}");
        let (code, text) = mfrate(&["--config", &config, "--out", out.to_str().unwrap(), "simulate"], dir.path());
        assert_eq!(code, 0, "{text}");
    }
    for name in ["sanov.csv", "sanov.svg", "simulate.csv", "simulate.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn format_flag_selects_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = mfrate(&["--format", "csv", "sanov-check"], dir.path());
    assert_eq!(code, 0);
    assert!(dir.path().join("sanov.csv").exists());
    assert!(!dir.path().join("sanov.svg").exists());
}

#[test]
fn config_and_capacity_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[decay]\nn = [40, 20]\n");
    assert_eq!(mfrate(&["--config", &bad, "decay-scan"], dir.path()).0, 2);
    let big = write_config(dir.path(), "[sanov]\nmu = [0.5, 0.5]\nn = [500]\n");
    assert_eq!(mfrate(&["--config", &big, "sanov-check"], dir.path()).0, 2);
    let missing = dir.path().join("absent.toml");
    assert_eq!(mfrate(&["--config", missing.to_str().unwrap(), "rate"], dir.path()).0, 2);
}

#[test]
fn rate_forms_for_each_model() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = mfrate(&["rate"], dir.path());
    assert_eq!(code, 0, "{text}");
    let config = write_config(dir.path(), "[rate]\nmodel = \"ito\"\nshift = 2.0\n");
    let (code, text) = mfrate(&["--config", &config, "rate"], dir.path());
    assert_eq!(code, 0, "{text}");
    let csv = fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!((values[0] - values[1]).abs() < 1e-9, "{csv}");
    let config = write_config(
        dir.path(),
        "[chain]\nfamily = \"voter\"\nq = [0.5, 0.5]\nbase = 0.2\ngain = 0.3\nhorizon = 1\n[rate]\nmodel = \"chain\"\npaths = [[0, 0], [1, 1]]\nweights = [1.0, 1.0]\n",
    );
    let (code, text) = mfrate(&["--config", &config, "rate"], dir.path());
    assert_eq!(code, 0, "{text}");
}

#[test]
fn small_decay_and_lln_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[decay]\nn = [5, 10]\n[lln]\nsystems = [\"iid\", \"ito\"]\nn = [50, 500]\nreplications = 4\nquantiles = 2000\n",
    );
    let (code, text) = mfrate(&["--config", &config, "decay-scan"], dir.path());
    assert_eq!(code, 0, "{text}");
    let (code, text) = mfrate(&["--config", &config, "lln-trend"], dir.path());
    assert_eq!(code, 0, "{text}");
    let svg = fs::read_to_string(dir.path().join("lln.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

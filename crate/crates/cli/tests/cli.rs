use std::fs;
use std::process::{Command, Output};

fn expurg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expurg")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line =
        text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no line starting with {key:?} in\n{text}"));
    line[key.len()..].split_whitespace().next().unwrap().trim_end_matches(',').parse().unwrap()
}

#[test]
fn exponents_family_in_bits() {
    let out = expurg(&["exponents", "--family", "w_eps", "--eps", "0.001", "--rate", "0", "--unit", "bits"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "rate-zero expurgated:") - 1.991807).abs() < 1e-6);
    assert!((field(&text, "expurgated:") - 1.991807).abs() < 1e-6);
    assert!((field(&text, "converse:") - 1.001443).abs() < 1e-6);
}

#[test]
fn exponents_bsc_half_is_zero() {
    let out = expurg(&["exponents", "--family", "bsc", "--eps", "0.5", "--rate", "0"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "expurgated:"), 0.0);
}

#[test]
fn exponents_reject_bad_eps() {
    let out = expurg(&["exponents", "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps out of range"));
}

#[test]
fn exponents_from_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bsc.json");
    fs::write(&path, r#"{"matrix": [[0.9, 0.1], [0.1, 0.9]], "inputs": ["0", "1"], "outputs": ["0", "1"]}"#).unwrap();
    let out = expurg(&["exponents", "--channel", path.to_str().unwrap(), "--rate", "0"]);
    assert!(out.status.success());
    assert!((field(&stdout(&out), "expurgated:") - 0.255413).abs() < 1e-6);
    fs::write(&path, r#"{"matrix": [[0.9, 0.2], [0.1, 0.9]], "inputs": ["0", "1"], "outputs": ["0", "1"]}"#).unwrap();
    let out = expurg(&["exponents", "--channel", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = expurg(&["exponents", "--channel", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn threshold_values() {
    let out = expurg(&["threshold", "--eps", "0.001", "--unit", "bits"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "critical epsilon:") - 0.0149353113291091).abs() < 1e-10);
    assert!((field(&text, "rate threshold:") - 0.1865).abs() < 1e-3);
    let out = expurg(&["threshold", "--eps", "0.02"]);
    assert_eq!(out.status.code(), Some(2));
}

fn parse_dat(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && *l != "x y" && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(expurg(&["figures", "fig1", "--out-dir", d, "--points", "50"]).status.success());
    let out = expurg(&["figures", "fig2", "--out-dir", d, "--eps", "0.001"]);
    assert!(out.status.success());
    assert!((field(&stdout(&out), "crossing:") - 0.1865).abs() < 1e-3);
    for name in ["converse.dat", "ml-expurgated.dat", "random-coding.dat", "mmi-case.dat", "mmi-converse.dat"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with('#'));
        let rows = parse_dat(&text);
        assert!(rows.len() >= 50, "{name}");
        assert!(rows.windows(2).all(|w| w[1].0 > w[0].0), "{name}");
        assert!(rows.iter().all(|(x, y)| x.is_finite() && y.is_finite()), "{name}");
    }
    let fig2 = parse_dat(&fs::read_to_string(dir.path().join("mmi-case.dat")).unwrap());
    assert_eq!(fig2[0].0, 0.0);
    assert!((fig2.last().unwrap().0 - 0.205).abs() < 1e-12);
}

#[test]
fn figures_into_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = expurg(&["figures", "fig1", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn counterexample_demo() {
    let out = expurg(&["counterexample", "--eps", "0.001", "--demo", "--n", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let expected = -(0.4995f64.ln()) + 0.25 * (0.999f64 / 0.001).ln();
    assert!((field(&text, "exponent ceiling at this n:") - expected).abs() < 1e-6);
    assert!(field(&text, "gap (expurgated - converse):") > 0.0);
    assert!(text.contains("y_tilde = abad"));
}

#[test]
fn counterexample_warnings_and_errors() {
    let out = expurg(&["counterexample", "--eps", "0.05", "--demo", "--n", "4"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("separation argument does not apply"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cb.txt");
    fs::write(&path, "01\n10\n").unwrap();
    let out = expurg(&["counterexample", "--codebook", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("M >= 3"));

    fs::write(&path, "0011\n0101\n0001\n").unwrap();
    let out = expurg(&["counterexample", "--codebook", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("constant-composition"));
    assert_eq!(field(&stdout(&out), "codewords:"), 2.0);
}

#[test]
fn simulate_exact_and_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cb.txt");
    fs::write(&path, "0\n1\n").unwrap();
    let cb = path.to_str().unwrap();
    let out = expurg(&["simulate", "--family", "bsc", "--eps", "0.1", "--decoder", "ml", "--codebook", cb]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"exact_enumeration\""));
    assert!((field(&text, "  \"average\":") - 0.1).abs() < 1e-15);

    let out = expurg(&["simulate", "--family", "w_eps", "--eps", "0.001", "--demo", "--n", "4"]);
    let bound = 0.4995f64.powi(4) * 0.001 / 0.999;
    assert!(field(&stdout(&out), "  \"average\":") >= bound);

    let big =
        ["simulate", "--family", "w_eps", "--eps", "0.1", "--demo", "--n", "14", "--samples", "2000", "--seed", "9"];
    let out = expurg(&big);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--monte-carlo"));
    let mut with_mc = big.to_vec();
    with_mc.push("--monte-carlo");
    let a = expurg(&with_mc);
    let b = expurg(&with_mc);
    assert!(a.status.success());
    assert!(stdout(&a).contains("\"monte_carlo\""));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn appendix_verify_values() {
    for (eps, target) in [(0.1, 0.255413), (0.5, 0.0), (0.9, 0.255413)] {
        let out = expurg(&["appendix-verify", "--eps", &eps.to_string(), "--grid", "20"]);
        assert!(out.status.success());
        let text = stdout(&out);
        for key in ["brute force:", "symmetric closed form:", "rate-zero expurgated:"] {
            assert!((field(&text, key) - target).abs() < 5e-3, "eps={eps} {key}");
        }
    }
}

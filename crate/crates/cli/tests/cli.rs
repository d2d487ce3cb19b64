//! Config round-trip and end-to-end binary tests.

use std::process::Command;

use hsystem_cli::config::{CommandName, LambdaArg, RunConfig};
use hsystem_cli::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hsystem"))
}

fn parse(args: &[&str]) -> Result<RunConfig, String> {
    let mut argv = vec!["hsystem"];
    argv.extend_from_slice(args);
    parse_config(argv)
}

#[test]
fn full_scan_config_round_trips() {
    let config = parse(&[
        "scan",
        "--degree",
        "2",
        "--window",
        "-30:30",
        "--grids",
        "500,1000,2000",
        "--maps",
        "rational,stereographic",
        "--csv-dir",
        "/tmp/hsystem-modes",
        "--plot-script",
        "/tmp/hsystem-modes/plot.py",
    ])
    .unwrap();
    let text = toml::to_string(&config).unwrap();
    let back: RunConfig = toml::from_str(&text).unwrap();
    assert_eq!(config, back);
    assert_eq!(config.command, CommandName::Scan);
    assert_eq!(config.window, Some((-30.0, 30.0)));
    assert_eq!(config.grids.as_deref(), Some(&[500, 1000, 2000][..]));
}

#[test]
fn degree_zero_is_rejected() {
    let err = parse(&["energy", "--degree", "0"]).unwrap_err();
    assert!(err.contains("degree"), "{err}");
}

#[test]
fn lambda_coercion_rule() {
    // p/q stays exact for the series engine, becomes a double elsewhere
    let lambda = LambdaArg("7/3".into());
    let r = lambda.as_rational().unwrap();
    assert_eq!(r.to_string(), "7/3");
    let f = lambda.as_f64().unwrap();
    assert!((f - 7.0 / 3.0).abs() < 1e-15);
    // decimals are fine for float consumers, rejected as exact input
    let dec = LambdaArg("2.5".into());
    assert!(dec.as_f64().is_ok());
    assert!(dec.as_rational().is_err());
}

#[test]
fn diagnostics_are_distinct() {
    let unknown_flag = parse(&["energy", "--nope"]).unwrap_err();
    let bad_rational = parse(&["series", "--seed", "a,b,c,d"]).unwrap_err();
    let empty_window = parse(&["scan", "--window", "5:5", "--grids", "500"]).unwrap_err();
    assert!(unknown_flag.contains("--nope"), "{unknown_flag}");
    assert!(bad_rational.contains("rational"), "{bad_rational}");
    assert!(empty_window.contains("window"), "{empty_window}");
    assert_ne!(unknown_flag, bad_rational);
    assert_ne!(bad_rational, empty_window);
}

#[test]
fn series_emits_expected_csv() {
    let out = bin()
        .args([
            "series", "--seed", "0,-2,0,0", "--lambda", "0", "--order", "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n,a_n,b_n"), "{text}");
    assert!(text.contains("\n3,6,0\n"), "missing a3=6:\n{text}");
    assert!(text.contains("\n2,0,4\n"), "missing b2=4:\n{text}");
    assert!(text.contains("\n5,-10,0\n"));
    assert!(text.contains("\n4,0,-8\n"));
}

#[test]
fn energy_degree_three_matches_quantization() {
    let out = bin().args(["energy", "--degree", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rel_line = text
        .lines()
        .find(|l| l.starts_with("relative error:"))
        .expect("relative error line");
    let value: f64 = rel_line
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .expect("numeric");
    assert!(value < 1e-6, "relative error {value}");
}

#[test]
fn identical_configs_give_byte_identical_reports() {
    let args = [
        "scan", "--degree", "2", "--window", "-3:3", "--grids", "200,400", "--maps", "rational",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    // the λ = 0 eigenvalue shows up even at these small grids, and the
    // report carries its version banner
    assert!(text.contains("eigenvalue"), "{text}");
    assert!(text.contains("# version: hsystem-core"), "{text}");
}

#[test]
fn config_file_reproduces_subcommand_output() {
    let dir = std::env::temp_dir().join("hsystem-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let config = parse(&["zeromode", "--degree", "2"]).unwrap();
    let path = dir.join("zeromode.toml");
    std::fs::write(&path, toml::to_string(&config).unwrap()).unwrap();
    let direct = bin().args(["zeromode", "--degree", "2"]).output().unwrap();
    let via_file = bin()
        .args(["--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(direct.status.success() && via_file.status.success());
    assert_eq!(direct.stdout, via_file.stdout);
}

#[test]
fn exit_codes_separate_config_and_numerical_failures() {
    // config error: malformed window
    let out = bin()
        .args(["scan", "--window", "bogus", "--grids", "500"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // numerical-domain error propagated from the kernel: grid too coarse
    let out = bin()
        .args(["spectrum", "--degree", "1", "--grid", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("grid too coarse"), "{err}");
}

#[test]
fn scan_dumps_csvs_and_plot_script() {
    let dir = std::env::temp_dir().join("hsystem-cli-scan-dump");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let script = dir.join("plot.py");
    let out = bin()
        .args([
            "scan",
            "--degree",
            "2",
            "--window",
            "-3:3",
            "--grids",
            "200",
            "--maps",
            "rational",
            "--csv-dir",
            dir.to_str().unwrap(),
            "--plot-script",
            script.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let first = dir.join("mode_000.csv");
    let body = std::fs::read_to_string(first).unwrap();
    assert!(body.starts_with("r,f,g\n"));
    let script_body = std::fs::read_to_string(script).unwrap();
    assert!(script_body.contains("mode_000.csv"));
    // csv doubles round-trip
    let row = body.lines().nth(2).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    let _: f64 = cols[1].parse().unwrap();
}

#[test]
fn shoot_reports_mismatch_norm() {
    let out = bin()
        .args(["shoot", "--degree", "2", "--lambda", "0", "--g0", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let norm_line = text
        .lines()
        .find(|l| l.starts_with("mismatch norm:"))
        .unwrap();
    let value: f64 = norm_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(value < 1e-6, "mismatch {value}");
}

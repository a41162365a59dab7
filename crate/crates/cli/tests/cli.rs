//! End-to-end tests of the `fasrelay` binary: exit codes, CSV schema,
//! determinism, and the documented error messages.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fasrelay")
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn rural_cfg() -> String {
    configs_dir().join("rural.cfg").to_string_lossy().into_owned()
}

fn urban_cfg() -> String {
    configs_dir().join("urban.cfg").to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

/// Writes a derived config to a unique temp file and returns its path.
fn temp_cfg(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("fasrelay-test-{}-{}.cfg", name, std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_bundled(which: &str) -> String {
    std::fs::read_to_string(configs_dir().join(which)).unwrap()
}

#[test]
fn sweep_csv_header_is_golden() {
    let out = run(&[
        "--config", &rural_cfg(),
        "sweep", "--sweep-var", "p2", "--grid=-10,0",
        "--estimators", "mc,closed", "--trials", "2000", "--seed", "9",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# fasrelay-csv v1");
    assert_eq!(lines[1], "# version = 0.1.0");
    let hash = lines[2].strip_prefix("# config_hash = ").expect("hash line");
    assert_eq!(hash.len(), 16);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(lines[3], "# seed = 9");
    // Estimator columns come in canonical order no matter how the flag
    // was spelled.
    assert_eq!(lines[4], "p2_dbm,closed_bler,mc_bler,mc_std_error");
    assert_eq!(lines.len(), 7);
    assert!(lines[5].starts_with("-10,"));
    assert!(lines[6].starts_with("0,"));
}

#[test]
fn reruns_are_byte_identical_and_match_the_out_file() {
    let args = [
        "--config", &rural_cfg(),
        "sweep", "--sweep-var", "p2", "--grid", "5",
        "--estimators", "closed,mc", "--trials", "5000",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let out_path = std::env::temp_dir()
        .join(format!("fasrelay-test-out-{}.csv", std::process::id()));
    let mut with_file: Vec<&str> = args.to_vec();
    let out_str = out_path.to_string_lossy().into_owned();
    with_file.extend_from_slice(&["--out", &out_str]);
    let third = run(&with_file);
    assert_eq!(exit_code(&third), 0);
    assert!(third.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), first.stdout);
    let _ = std::fs::remove_file(&out_path);
}

#[test]
fn bundled_configs_load_to_their_documented_values() {
    let out = run(&["--config", &rural_cfg(), "inspect", "--emit-config"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let canonical = stdout_of(&out);
    assert!(canonical.contains("nakagami.m1 = 7\n"), "{canonical}");
    assert!(canonical.contains("nakagami.m2 = 7\n"));
    assert!(canonical.contains("placement.bs_x = 1000\n"));
    // -100 dBm in the file lands as 1e-13 W.
    assert!(canonical.contains("radio.noise_power_w = 0.0000000000001\n"));
    assert!(canonical.contains("radio.p1_w = 0.01\n"));

    // The canonical form is a fixed point: loading it back emits the
    // same bytes.
    let path = temp_cfg("roundtrip", &canonical);
    let again = run(&["--config", &path, "inspect", "--emit-config"]);
    assert_eq!(exit_code(&again), 0, "{}", stderr_of(&again));
    assert_eq!(stdout_of(&again), canonical);

    let urban = stdout_of(&run(&["--config", &urban_cfg(), "inspect", "--emit-config"]));
    assert!(urban.contains("urban.m_nlos = 1\n"), "{urban}");
    assert!(urban.contains("radio.p1_w = 10\n"));
    assert!(urban.contains("placement.bs_x = 100\n"));
}

#[test]
fn inspect_reports_code_spectrum_and_budget() {
    let out = run(&["--config", &urban_cfg(), "inspect", "--theta", "0.7"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("rate 0.8 bits per channel use"), "{text}");
    assert!(text.contains("n_eff = 2"), "{text}");
    assert!(text.contains("eigenvalues:"), "{text}");
    assert!(text.contains("link budget at theta = 0.7 rad"), "{text}");
    assert!(text.contains("p_los"), "{text}");
}

#[test]
fn validate_passes_where_the_surrogate_bias_is_resolvable() {
    // Saturation (-15 dBm) and the floor region (25 dBm) leave the
    // Monte Carlo reference and the closed form statistically
    // indistinguishable at this trial count.
    let out = run(&[
        "--config", &rural_cfg(),
        "validate", "--grid=-15,25", "--trials", "50000",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("verdict: PASS (2 of 2"), "{}", stdout_of(&out));
}

#[test]
fn validate_flags_the_surrogate_bias_at_the_waterfall() {
    // Mid-waterfall the closed form's piecewise surrogate sits several
    // standard errors from the exact-threshold Monte Carlo at 5e4
    // trials; the verdict must say so and exit 2.
    let m5 = read_bundled("rural.cfg")
        .replace("nakagami.m1 = 7", "nakagami.m1 = 5")
        .replace("nakagami.m2 = 7", "nakagami.m2 = 5");
    let path = temp_cfg("validate-fail", &m5);
    let out = run(&["--config", &path, "validate", "--grid=-2.5", "--trials", "50000"]);
    assert_eq!(exit_code(&out), 2, "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("verdict: FAIL (1 of 1"), "{}", stdout_of(&out));
}

#[test]
fn config_errors_exit_4_and_name_the_offender() {
    // Missing file.
    let out = run(&["--config", "/nonexistent/x.cfg", "validate"]);
    assert_eq!(exit_code(&out), 4);
    assert!(stderr_of(&out).contains("/nonexistent/x.cfg"));

    // No config at all.
    let out = run(&["inspect"]);
    assert_eq!(exit_code(&out), 4);
    assert!(stderr_of(&out).contains("--config"));

    // Invariant violation names the key.
    let bad = read_bundled("rural.cfg").replace("fas.aperture = 0.5", "fas.aperture = -1");
    let path = temp_cfg("bad-aperture", &bad);
    let out = run(&["--config", &path, "inspect"]);
    assert_eq!(exit_code(&out), 4);
    assert!(stderr_of(&out).contains("fas.aperture"), "{}", stderr_of(&out));

    // Unknown estimator is a usage error.
    let out = run(&[
        "--config", &rural_cfg(),
        "sweep", "--sweep-var", "p2", "--grid", "0", "--estimators", "bogus",
    ]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn aperture_sweeps_decorrelate_then_plateau() {
    // Eight ports, urban, hop 2 dominant: widening the aperture up to
    // 3 wavelengths strictly improves the BLER; beyond that the Jakes
    // spectrum re-concentrates slightly and the curve plateaus.
    let cfg = read_bundled("urban.cfg")
        .replace("fas.n_ports = 2", "fas.n_ports = 8")
        .replace("radio.p2_dbm = 10", "radio.p2_dbm = 12");
    let path = temp_cfg("w-sweep", &cfg);
    let out = run(&[
        "--config", &path,
        "sweep", "--sweep-var", "w", "--grid", "0.5,1,2,3,4",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let blers: Vec<f64> = text
        .lines()
        .skip(5)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(blers.len(), 5);
    for pair in blers[..4].windows(2) {
        assert!(pair[1] < pair[0], "expected decreasing BLER, got {blers:?}");
    }
    assert!(blers[4] < 1.5 * blers[3], "plateau overshot: {blers:?}");
    assert!(blers[4] < 0.25 * blers[0], "wide apertures should stay well below 0.5 wavelengths");
}

#[test]
fn port_sweeps_mark_the_causality_cliff() {
    let cfg = read_bundled("rural.cfg").replace("fbl.blocklength = 100", "fbl.blocklength = 200");
    let path = temp_cfg("n-sweep", &cfg);
    let out = run(&[
        "--config", &path,
        "sweep", "--sweep-var", "n", "--grid", "1,4,10", "--estimators", "ee,closed",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().skip(4).collect();
    assert_eq!(lines[0], "n_ports,closed_bler,causality_ok,ee_bits_per_joule");
    assert!(lines[1].starts_with("1,") && lines[1].contains(",true,"));
    assert!(lines[2].starts_with("4,") && lines[2].contains(",true,"));
    // Ten switches of 2 us each no longer fit the 20 us slot.
    assert!(lines[3].starts_with("10,") && lines[3].ends_with(",false,"), "{}", lines[3]);
    let bler = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(bler(lines[2]) < bler(lines[1]), "more ports should lower the BLER");
}

#[test]
fn optimize_reports_the_single_cell_and_writes_the_surface() {
    let out_path = std::env::temp_dir()
        .join(format!("fasrelay-test-surface-{}.csv", std::process::id()));
    let out_str = out_path.to_string_lossy().into_owned();
    let out = run(&[
        "--config", &rural_cfg(),
        "optimize", "--l-grid", "100,100,50", "--z-grid", "100,100,25",
        "--ports", "2,2", "--out", &out_str,
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let report = stdout_of(&out);
    assert!(report.contains("L*  = 100"), "{report}");
    assert!(report.contains("N*  = 2"), "{report}");
    assert!(report.contains("bits per joule"), "{report}");

    let surface = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = surface.lines().collect();
    assert_eq!(lines[0], "# fasrelay-csv v1");
    assert_eq!(lines[4], "blocklength_cu,altitude_m,n_ports,p2_dbm,ee_bits_per_joule");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("100,100,2,"), "{}", lines[5]);
    let _ = std::fs::remove_file(&out_path);
}

#[test]
fn optimize_exits_3_when_the_threshold_is_unreachable() {
    // The first hop floors the rural link near 3e-6, so a 1e-9 target
    // is infeasible at any power.
    let out = run(&[
        "--config", &rural_cfg(),
        "optimize", "--l-grid", "100,100,50", "--z-grid", "100,100,25",
        "--ports", "2,2", "--eps-th", "1e-9",
    ]);
    assert_eq!(exit_code(&out), 3, "{}", stdout_of(&out));
    let report = stdout_of(&out);
    assert!(report.contains("no feasible operating point"), "{report}");
    assert!(report.contains("binding constraint"), "{report}");
}

#[test]
fn the_literal_heading_rule_is_a_distinct_diagnostic() {
    let consistent = stdout_of(&run(&[
        "--config", &rural_cfg(),
        "sweep", "--sweep-var", "p2", "--grid", "0",
    ]));
    let literal = stdout_of(&run(&[
        "--config", &rural_cfg(),
        "--paper-literal-gcq",
        "sweep", "--sweep-var", "p2", "--grid", "0",
    ]));
    let value = |text: &str| {
        text.lines().last().unwrap().split(',').nth(1).unwrap().parse::<f64>().unwrap()
    };
    let (c, l) = (value(&consistent), value(&literal));
    assert!((c - l).abs() > 1e-3 * c, "literal rule should visibly differ: {c} vs {l}");
}

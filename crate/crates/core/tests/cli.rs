use std::process::Command;

use extlab::cli::{
    compute_report, emit_report, exponents_table, parse_config, parse_number, parse_report_json, registry, report_csv,
    report_json, OutputFormat, CSV_HEADER,
};
use extlab::Error;

const KNAPP: &str = "[experiment]\nname = knapp\n\n[parameters]\nd = 1\nq = 5\nr = 5\ns = 0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_extlab"))
}

#[test]
fn minimal_knapp_config_fills_defaults() {
    let cfg = parse_config(KNAPP).unwrap();
    assert_eq!(cfg.plan.ladder, vec![8.0, 16.0, 32.0, 64.0, 128.0]);
    let echo = cfg.echo();
    assert_eq!(echo["B"], "16");
    assert_eq!(echo["C"], "16");
    assert_eq!(echo["seed"], "0");
    assert_eq!(echo["ladder"], "8,16,32,64,128");
    assert_eq!(cfg.formats, vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Plotdata]);
}

#[test]
fn q_below_two_is_rejected_at_its_line() {
    let err = parse_config("[experiment]\nname = knapp\n[parameters]\nq = 1.5\n").unwrap_err();
    assert!(matches!(err, Error::Config { line: 4, .. }), "{err}");
    assert!(err.to_string().contains("q must be ≥ 2"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn endpoint_with_interior_exponents_is_rejected_with_witness() {
    let err = parse_config("[experiment]\nname = endpoint\n[parameters]\nd = 2\nq = 4\nr = 3\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("d/r+1/q") && msg.contains("-0.083333"), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn fractions_classify_exactly() {
    assert_eq!(parse_number("8/3"), Some(8.0 / 3.0));
    assert_eq!(parse_number(" 10/3 "), Some(10.0 / 3.0));
    assert_eq!(parse_number("1/0"), None);
    assert_eq!(parse_number("abc"), None);
    let cfg = parse_config("[experiment]\nname = endpoint\n[parameters]\nd = 2\nq = 4\nr = 8/3\n").unwrap();
    assert_eq!(cfg.plan.r, 8.0 / 3.0);
}

#[test]
fn schema_violations_carry_line_numbers() {
    let cases = [
        ("[experiment]\nname = knapp\n[parameters]\nfoo = 1\n", 4),
        ("[experiment]\nname = knapp\n[parameters]\nalpha = 2\n", 4),
        ("[experiment]\nname = knapp\n[parameters]\nT_ladder = 1, 2, 3, 4\n", 4),
        ("[experiment]\nname = knapp\n[bogus]\n", 3),
        ("name = knapp\n", 1),
        ("[experiment]\nname = knapp\nname = sphere\n", 3),
        ("[experiment]\nname = nothing\n", 2),
        ("[experiment]\nname = knapp\n[parameters]\nlambda_ladder = 8, 4, 16, 32\n", 4),
        ("[experiment]\nname = knapp\n[output]\nformats = csv, pdf\n", 4),
        ("[experiment]\nname = knapp\n[parameters]\nd = 3\n", 4),
    ];
    for (text, line) in cases {
        match parse_config(text) {
            Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("expected a line diagnostic for {text:?}, got {other:?}"),
        }
    }
    assert!(matches!(parse_config("[parameters]\nq = 5\n"), Err(Error::Schema(_))));
}

#[test]
fn every_default_plan_validates() {
    for e in registry() {
        let plan = (e.defaults)(&Default::default());
        assert_eq!(plan.experiment, e.name);
        (e.validate)(&plan).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        let text = format!("[experiment]\nname = {}\n", e.name);
        assert_eq!(parse_config(&text).unwrap().plan, plan);
    }
}

#[test]
fn exponent_table_for_the_endpoint_line() {
    let t = exponents_table(2, 4.0, 8.0 / 3.0, None).unwrap();
    let row = |k: &str| t.lines().find(|l| l.split_whitespace().next() == Some(k)).unwrap().to_string();
    assert!(row("region").ends_with("endpoint_line"));
    assert!(row("s_c").ends_with("0.250000000000000"));
    assert!(row("s_q").ends_with("0.000000000000000"));
    assert!(row("s_c_w").ends_with("0.375000000000000"));
    assert!(row("gamma1").ends_with("0.000000000000000"));
}

#[test]
fn report_files_have_the_documented_shape() {
    let cfg = parse_config(KNAPP).unwrap();
    let report = compute_report(&cfg).unwrap();
    assert!(report.pass);
    assert!((report.fitted - 0.1).abs() < 0.03);

    let csv = report_csv(&report);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], CSV_HEADER);

    let back = parse_report_json(&report_json(&report).unwrap()).unwrap();
    assert_eq!(back.echo, report.echo);
    assert_eq!(back.points, report.points);

    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&report, dir.path(), &cfg.formats).unwrap();
    assert_eq!(files.len(), 4);
    for f in files.iter().filter(|f| f.to_string_lossy().ends_with(".dat")) {
        let xs: Vec<f64> = std::fs::read_to_string(f)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                let cols: Vec<&str> = l.split_whitespace().collect();
                assert_eq!(cols.len(), 2);
                cols[0].parse().unwrap()
            })
            .collect();
        assert_eq!(xs.len(), 5);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn compute_errors_name_the_ladder_point() {
    let text = format!("{KNAPP}lambda_ladder = 8, 16, 32, 4000000\n");
    let err = compute_report(&parse_config(&text).unwrap()).unwrap_err();
    assert!(matches!(err, Error::AtLadderPoint { value, .. } if value == 4e6), "{err}");
    assert!(err.to_string().contains("at ladder value 4000000"), "{err}");
}

#[test]
fn binary_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("knapp.ini");
    let out = dir.path().join("out");
    std::fs::write(&good, format!("{KNAPP}[output]\ndir = {}\n", out.display())).unwrap();
    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, "[experiment]\nname = knapp\n[parameters]\nq = 1.5\n").unwrap();

    let run = bin().args(["run", good.to_str().unwrap()]).env("EXTLAB_THREADS", "1").output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("PASS"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("knapp.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["threads"], 1);
    assert!(json["metadata"]["timestamp"].as_str().unwrap().parse::<u64>().is_ok());
    assert_eq!(std::fs::read_to_string(out.join("knapp.csv")).unwrap().lines().count(), 6);
    let first = std::fs::read(out.join("knapp.csv")).unwrap();
    assert_eq!(bin().args(["run", good.to_str().unwrap()]).status().unwrap().code(), Some(0));
    assert_eq!(std::fs::read(out.join("knapp.csv")).unwrap(), first);

    let v = bin().args(["validate", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stderr).contains("q must be ≥ 2"));
    assert_eq!(bin().args(["validate", good.to_str().unwrap()]).status().unwrap().code(), Some(0));

    let e = bin().args(["exponents", "d=2", "q=4", "r=8/3"]).output().unwrap();
    assert_eq!(e.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&e.stdout).contains("endpoint_line"));
    assert_eq!(bin().args(["exponents", "d=2", "q=4"]).status().unwrap().code(), Some(2));

    let l = bin().arg("list").output().unwrap();
    let text = String::from_utf8_lossy(&l.stdout);
    for e in registry() {
        assert!(text.contains(e.name));
    }
    assert!(text.contains("lambda_ladder") && text.contains("k_ladder"));

    let t = bin().arg("list").env("EXTLAB_THREADS", "zero").status().unwrap();
    assert_eq!(t.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.ini");
    // The truncated norm grows with slope about 0.04, far below a floor of 1/2.
    let text = format!(
        "[experiment]\nname = sphere_constant\n[tolerances]\ntolerance = 1/2\n[output]\ndir = {}\nformats = csv\n",
        dir.path().display()
    );
    std::fs::write(&cfg, text).unwrap();
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swipt_mac_cli::{parse_config, parse_value, Channel, ConfigError};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt-mac"))
        .args(args)
        .output()
        .expect("spawn swipt-mac")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// (r2, r1) rows of a region CSV, skipping comment lines.
fn region_rows(text: &str) -> Vec<(f64, f64)> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect()
}

/// Piecewise-linear r1 of a boundary at `r2`; zero past its end.
fn r1_at(curve: &[(f64, f64)], r2: f64) -> f64 {
    for w in curve.windows(2) {
        let ((a2, a1), (b2, b1)) = (w[0], w[1]);
        if r2 >= a2 && r2 <= b2 {
            return if b2 > a2 {
                a1 + (b1 - a1) * (r2 - a2) / (b2 - a2)
            } else {
                a1.max(b1)
            };
        }
    }
    0.0
}

#[test]
fn region_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bin(&[
            "region",
            "--preset",
            "fig3a",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn empty_region_is_a_comment_and_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "empty.cfg",
        "scenario = classical-simul\ncost = const\nphi0 = 0.025\n",
    );
    let o = bin(&["region", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# empty:")), "{text}");
    assert!(region_rows(&text).is_empty());
}

#[test]
fn decibel_values_are_watts() {
    assert!((parse_value("n_p", "-30dB").unwrap() - 1e-3).abs() < 1e-18);
    assert!((parse_value("beta", "-21dBW").unwrap() - 10f64.powf(-2.1)).abs() < 1e-15);
    assert_eq!(parse_value("p1", "0.5").unwrap(), 0.5);
    let cfg = parse_config(
        "scenario = classical-simul\ncost = exp\nbeta = 0.1\nn_p = -30dB\n",
        None,
    )
    .unwrap();
    let Channel::Classical(p) = cfg.channel else {
        panic!("classical scenario")
    };
    assert!((p.n_p - 1e-3).abs() < 1e-18);
}

#[test]
fn reference_channel_gives_the_documented_a() {
    let cfg = parse_config("", Some("fig3a")).unwrap();
    let Channel::Classical(p) = cfg.channel else {
        panic!("classical scenario")
    };
    assert!((p.a() - 0.0123466).abs() < 1e-6, "a = {}", p.a());
}

#[test]
fn missing_scenario_is_named() {
    let err = parse_config("cost = exp\n", None).unwrap_err();
    assert!(matches!(err, ConfigError::Missing("scenario")));
    assert!(err.to_string().contains("scenario"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "cost = exp\n");
    let o = bin(&["region", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario"));
}

#[test]
fn sic_region_contains_the_simultaneous_region() {
    let dir = tempfile::tempdir().unwrap();
    let simul = write_config(dir.path(), "simul.cfg", "scenario = classical-simul\n");
    let sic = bin(&["region", "--preset", "fig3a"]);
    let sim = bin(&["region", "--preset", "fig3a", "--config", &simul]);
    assert!(sic.status.success() && sim.status.success());
    let sic = region_rows(&String::from_utf8(sic.stdout).unwrap());
    let sim = region_rows(&String::from_utf8(sim.stdout).unwrap());
    assert!(sic.len() > 10 && sim.len() > 10);
    for &(r2, r1) in &sim {
        assert!(
            r1_at(&sic, r2) >= r1 - 1e-9,
            "simultaneous point ({r2}, {r1}) outside the SIC region"
        );
    }
}

#[test]
fn sumrate_sweep_spans_the_grid_and_reports_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.cfg", "rho_points = 11\n");
    let o = bin(&["sumrate", "--preset", "fig4", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[10][0], "1");
    assert_eq!(rows[11][2], "opt");
    let best = rows[..11]
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(rows[11][1].parse::<f64>().unwrap() >= best - 1e-9);
}

#[test]
fn verify_passes_on_the_classical_presets() {
    for preset in ["fig3a", "fig4"] {
        let o = bin(&["verify", "--preset", preset]);
        let text = String::from_utf8_lossy(&o.stdout);
        assert_eq!(o.status.code(), Some(0), "{preset}:\n{text}");
        assert!(text.trim_end().ends_with("PASS"));
    }
}

#[test]
fn needs_a_config_or_preset() {
    let o = bin(&["region"]);
    assert_eq!(o.status.code(), Some(2));
}

use qsg_harness::config::ExperimentConfig;
use qsg_harness::experiments::run_experiment;
use qsg_harness::output::{read_columns, write_outputs};
use qsg_harness::HarnessError;

const XX_SCAN: &str = r#"
id = "xx_small"
model = "xyz"
kind = "entropy_scaling"

[xyz]
jx = 1.0
jy = 1.0
jz = 0.0

[grid]
chi = [4, 6, 8, 10]

[schedule]
chi = [4]
lanczos_tol = 1e-10
energy_tol = 1e-9
entropy_tol = 1e-6
max_steps = 400

[[targets]]
quantity = "central_charge"
value = 1.0
tolerance = 0.5
"#;

const CTM: &str = r#"
id = "ctm"
model = "xyz"
kind = "ctm_asymptotic"

[grid]
beta2_over_8pi = [0.063, 0.2]
l = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9]

[[targets]]
quantity = "slope_relative_error[beta2_over_8pi=0.063]"
value = 0.0
tolerance = 0.05
"#;

#[test]
fn runs_are_reproducible_and_written_with_provenance() {
    let cfg = ExperimentConfig::from_toml(XX_SCAN).unwrap();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert!(a.failures.is_empty(), "{:?}", a.failures);
    assert_eq!(a.quantities.len(), b.quantities.len());
    for (x, y) in a.quantities.iter().zip(&b.quantities) {
        assert_eq!(x.name, y.name);
        assert!((x.value - y.value).abs() <= 1e-12 * x.value.abs().max(1.0), "{} {} {}", x.name, x.value, y.value);
    }
    assert!(a.targets_pass());

    let dir = tempfile::tempdir().unwrap();
    let s = write_outputs(&cfg, &a, dir.path(), 1).unwrap();
    assert!(s.pass);
    assert_eq!(s.provenance.seed, cfg.seed);
    let csv = dir.path().join("xx_small_chi_scan.csv");
    let cols = read_columns(&csv, &["point", "chi", "entropy"]).unwrap();
    assert_eq!(cols[1], vec![4.0, 6.0, 8.0, 10.0]);
    assert!(cols[2].windows(2).all(|w| w[1] > w[0]));
    let text = std::fs::read_to_string(dir.path().join("xx_small_summary.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["provenance"]["experiment"], "xx_small");
    assert!(json["provenance"]["config"].as_str().unwrap().contains("entropy_scaling"));
    // every row carries its experiment id
    let raw = std::fs::read_to_string(&csv).unwrap();
    assert!(raw.lines().skip(1).all(|l| l.starts_with("xx_small,")));
}

#[test]
fn analytic_scan_checks_targets() {
    let cfg = ExperimentConfig::from_toml(CTM).unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert!(out.targets_pass());
    let mut bad = cfg.clone();
    bad.targets[0].tolerance = 0.0;
    bad.targets.push(qsg_harness::config::Target {
        quantity: "no_such_quantity".into(),
        value: 0.0,
        tolerance: 1.0,
        relative: false,
    });
    let out = run_experiment(&bad).unwrap();
    assert!(!out.targets_pass());
}

#[test]
fn bad_points_are_recorded_not_fatal() {
    // β²/8π = 0.5 sits outside the critical path's domain: those points fail, the rest run.
    let text = CTM.replace("beta2_over_8pi = [0.063, 0.2]", "beta2_over_8pi = [0.063, 0.5]");
    let out = run_experiment(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
    assert_eq!(out.failures.len(), 8);
    assert!(out.quantity("slope_relative_error[beta2_over_8pi=0.063]").is_some());
}

#[test]
fn invalid_configs_fail_before_running() {
    let empty = CTM.replace("l = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9]", "l = []");
    assert!(matches!(ExperimentConfig::from_toml(&empty), Err(HarnessError::Config(_))));
    let dup = format!("{CTM}\n[[targets]]\nquantity = \"slope_relative_error[beta2_over_8pi=0.063]\"\nvalue = 0.0\ntolerance = 1.0\n");
    assert!(ExperimentConfig::from_toml(&dup).is_err());
    let wrong_model = XX_SCAN.replace("kind = \"entropy_scaling\"", "kind = \"vertex_scan\"");
    assert!(ExperimentConfig::from_toml(&wrong_model).is_err());
}

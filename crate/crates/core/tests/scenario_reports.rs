use modal_lab::scenarios::{default_config, list_scenarios, run_scenario, run_scenario_scaled, scenario_names, ScenarioConfig};
use modal_lab::Error;

#[test]
fn registry_lists_nine_scenarios_with_parameters() {
    let names = scenario_names();
    assert_eq!(
        names,
        vec![
            "von_neumann_measurement",
            "epr_bohm",
            "bell_check",
            "ghz_mermin",
            "myrvold",
            "quantum_zeno",
            "kochen_specker",
            "pbr",
            "no_communication",
        ]
    );
    for info in list_scenarios() {
        let cfg = default_config(info.name).unwrap();
        for p in &info.parameters {
            assert!(cfg.parameters.contains_key(p.name), "{} lacks {}", info.name, p.name);
        }
    }
}

#[test]
fn default_reports_pass_and_are_reproducible() {
    for name in scenario_names() {
        let cfg = default_config(name).unwrap();
        let a = run_scenario(&cfg, 7).unwrap();
        assert!(a.passed, "{name}: {:?}", a.failed_checks());
        assert!(!a.checks.is_empty());
        assert_eq!(a.to_json(), run_scenario(&cfg, 7).unwrap().to_json());
    }
}

#[test]
fn config_json_round_trips() {
    for name in scenario_names() {
        let cfg = default_config(name).unwrap();
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

#[test]
fn epr_with_equal_axes_is_perfectly_anticorrelated() {
    let cfg = default_config("epr_bohm").unwrap();
    let rep = run_scenario(&cfg, 0).unwrap();
    let c = rep.check("correlation_unperturbed").unwrap();
    assert!((c.value + 1.0).abs() <= 1e-12);
    assert!(rep.passed);
}

#[test]
fn bad_requests_are_rejected() {
    assert!(matches!(
        run_scenario(&ScenarioConfig::new("nope"), 0),
        Err(Error::UnknownScenario(_))
    ));
    let cfg = ScenarioConfig::new("bell_check").with_parameter("bogus", 1.0);
    assert!(matches!(run_scenario(&cfg, 0), Err(Error::Config(_))));
    let cfg = ScenarioConfig::new("bell_check").with_tolerance("no_such_check", 1e-3);
    assert!(matches!(run_scenario(&cfg, 0), Err(Error::Config(_))));
    let cfg = ScenarioConfig::new("epr_bohm").with_parameter("a", serde_json::json!([0.0, 0.0, 0.0]));
    assert!(run_scenario(&cfg, 0).is_err());
    assert!(run_scenario_scaled(&default_config("pbr").unwrap(), 0, 0.0).is_err());
}

#[test]
fn tolerance_overrides_and_scale_are_recorded() {
    let cfg = ScenarioConfig::new("bell_check").with_tolerance("lhs", 1e-4);
    let rep = run_scenario(&cfg, 0).unwrap();
    assert_eq!(rep.check("lhs").unwrap().tolerance, 1e-4);
    let rep = run_scenario_scaled(&cfg, 0, 10.0).unwrap();
    assert!((rep.check("lhs").unwrap().tolerance - 1e-3).abs() < 1e-18);
    assert!((rep.check("rhs").unwrap().tolerance - 1e-8).abs() < 1e-20);
}

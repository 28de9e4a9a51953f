use raqr::config::{load_config, load_with_overrides, table1_preset, Scheme};
use raqr::experiments::{emit_plotdata, run_scenario, ScenarioName, Table};
use raqr::performance::{evaluate, EvaluationOptions};

fn preset_for(name: ScenarioName) -> raqr::config::ConfigSet {
    let overrides: Vec<(String, String)> =
        name.base_overrides().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    load_with_overrides("preset = table1\n", &overrides).unwrap()
}

#[test]
fn every_scenario_round_trips_through_csv() {
    for name in ScenarioName::ALL {
        let table = run_scenario(name, &preset_for(name)).unwrap();
        assert!(!table.rows.is_empty(), "{}", name.name());
        assert!(table.rows.iter().flatten().all(|v| v.is_finite()), "{}", name.name());
        let back = Table::from_csv(&table.to_csv().unwrap()).unwrap();
        assert_eq!(back, table, "{}", name.name());
    }
}

#[test]
fn serialized_preset_drives_the_same_sweep() {
    let cfg = table1_preset();
    let reloaded = load_config(&cfg.serialize()).unwrap();
    let a = run_scenario(ScenarioName::SnrVsDensity, &cfg).unwrap();
    let b = run_scenario(ScenarioName::SnrVsDensity, &reloaded).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_matches_pointwise_evaluation() {
    let cfg = table1_preset();
    let table = run_scenario(ScenarioName::SnrVsDensity, &cfg).unwrap();
    let n0 = table.column("n0_per_cm3").unwrap();
    let psl = table.column("snr_psl_bcod_db").unwrap();
    for i in [0, n0.len() / 2, n0.len() - 1] {
        let point = cfg.with_value("N0", n0[i] * 1e6).unwrap();
        let r = evaluate(&point, Scheme::Bcod, &EvaluationOptions::default()).unwrap();
        assert!((r.snr_psl - psl[i]).abs() < 1e-9, "{} vs {}", r.snr_psl, psl[i]);
    }
}

#[test]
fn plot_files_mirror_table_columns() {
    let dir = tempfile::tempdir().unwrap();
    let table = run_scenario(ScenarioName::RatioVsCell, &table1_preset()).unwrap();
    let files = emit_plotdata("ratio-vs-cell", &table, dir.path()).unwrap();
    assert_eq!(files.len(), table.headers.len() - 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count(), table.rows.len());
}

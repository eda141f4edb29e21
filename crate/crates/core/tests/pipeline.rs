use cavity_budget::config::ScenarioConfig;
use cavity_budget::csvio::{read_spectrum_file, read_table_file};
use cavity_budget::scenario::{
    run_budget, run_isolation, run_quantum_design, run_suspension_tf, trace,
};
use cavity_budget::spectra::cumulative_rms;
use cavity_budget::Unit;

fn paper() -> ScenarioConfig {
    ScenarioConfig::builtin("paper_default").unwrap()
}

#[test]
fn budget_csv_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_budget(&paper()).unwrap();
    run.write(tmp.path()).unwrap();
    let path = tmp.path().join("budget.csv");
    for (name, s) in run
        .budget
        .components()
        .iter()
        .chain(run.budget.references())
    {
        let back = read_spectrum_file(&path, name, Unit::Displacement).unwrap();
        assert_eq!(back.grid().values(), s.grid().values());
        assert_eq!(back.asd(), s.asd(), "{name}");
    }
    let total = read_spectrum_file(&path, "total", Unit::Displacement).unwrap();
    assert_eq!(total.asd(), run.budget.total().asd());

    let cum = read_table_file(&tmp.path().join("budget_cumulative_rms.csv")).unwrap();
    assert_eq!(
        cum.column("total").unwrap(),
        cumulative_rms(run.budget.total()).asd()
    );
}

#[test]
fn every_emitted_csv_parses_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = paper();
    let mut files = run_budget(&cfg)
        .unwrap()
        .write(&tmp.path().join("b"))
        .unwrap();
    files.extend(
        run_suspension_tf(&cfg)
            .unwrap()
            .write(&tmp.path().join("s"))
            .unwrap(),
    );
    files.extend(
        run_isolation(&cfg)
            .unwrap()
            .write(&tmp.path().join("i"))
            .unwrap(),
    );
    files.extend(
        run_quantum_design(&cfg)
            .unwrap()
            .write(&tmp.path().join("q"))
            .unwrap(),
    );
    for f in files
        .iter()
        .filter(|f| f.extension().is_some_and(|e| e == "csv"))
    {
        let text = std::fs::read_to_string(f).unwrap();
        if f.file_name().unwrap().to_string_lossy().contains("modes") {
            assert!(text.starts_with("frequency_hz,q,dominant_stage"));
            continue;
        }
        let t = read_table_file(f).unwrap();
        let rows = t.rows();
        for (i, line) in text.lines().skip(1).enumerate() {
            for (j, cell) in line.split(',').enumerate() {
                assert_eq!(
                    cell.parse::<f64>().unwrap().to_bits(),
                    t.columns[j][i].to_bits()
                );
            }
        }
        assert_eq!(rows, cfg.grid.points);
    }
}

#[test]
fn manifest_names_every_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_budget(&paper()).unwrap();
    run.write(tmp.path()).unwrap();
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    let traces: Vec<&str> = m["files"][0]["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let header = read_table_file(&tmp.path().join("budget.csv"))
        .unwrap()
        .header;
    assert_eq!(&header[1..], &traces[..]);
    assert!(traces.contains(&trace::INTENSITY_ISS_OFF));
    assert_eq!(m["files"][0]["x"]["log"], true);
}

#[test]
fn cavity_seismic_follows_platform_suppression() {
    // the seismic trace in the budget must be the isolated one
    let cfg = paper();
    let iso = run_isolation(&cfg).unwrap();
    let budget = run_budget(&cfg).unwrap();
    assert_eq!(
        budget.budget.get(trace::SEISMIC).unwrap().asd(),
        iso.cavity_active.asd()
    );
    let payload_gain = iso.summary.passive_band_rms_m / iso.summary.active_band_rms_m;
    let cavity_gain = iso.summary.cavity_passive_rms_m / iso.summary.cavity_active_rms_m;
    assert!(
        payload_gain > 5.0 && cavity_gain > 5.0,
        "{payload_gain} {cavity_gain}"
    );
}

#[test]
fn cryo_projection_lowers_thermal_noise() {
    let warm = run_budget(&paper()).unwrap();
    let cold = run_budget(&ScenarioConfig::builtin("cryo_projection").unwrap()).unwrap();
    let w = warm.budget.get(trace::THERMAL).unwrap();
    let c = cold.budget.get(trace::THERMAL).unwrap();
    assert!(w.asd().iter().zip(c.asd()).all(|(w, c)| c < w));
}

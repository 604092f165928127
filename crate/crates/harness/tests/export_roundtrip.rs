mod common;

use std::fs;

use common::small_config;
use persnet_harness::config::Mode;
use persnet_harness::export::{export_results, ExportFormat, ResultSet};
use persnet_harness::optimize::run_optimize;
use persnet_harness::scale::run_scalability;
use persnet_harness::simulate::run_simulation;
use persnet_harness::HarnessError;

fn simulation() -> ResultSet {
    let mut cfg = small_config();
    cfg.simulation.modes = vec![Mode::Npn, Mode::Fpn];
    ResultSet::Simulation(run_simulation(&cfg, None).unwrap())
}

#[test]
fn json_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    for results in [simulation(), ResultSet::Optimize(run_optimize(&small_config(), None).unwrap())] {
        let files = export_results(&results, ExportFormat::Json, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(ResultSet::load(&files[0]).unwrap(), results);
    }
}

#[test]
fn five_window_plotdata_has_five_rows_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let files = export_results(&simulation(), ExportFormat::Plotdata, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for expected in ["saved_npn.dat", "saved_fpn.dat", "satisfaction_fpn.dat", "satisfaction_npn.dat"] {
        assert!(names.iter().any(|n| n == expected), "{expected} missing from {names:?}");
    }
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# window_start_s\t"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 5, "{}", f.display());
        assert!(rows.iter().all(|r| r.split('\t').count() == 2 && r.split('\t').all(|v| v.parse::<f64>().is_ok())));
    }
}

#[test]
fn csv_tables_have_headers_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let results = simulation();
    let files = export_results(&results, ExportFormat::Csv, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    let hash = match &results {
        ResultSet::Simulation(r) => r.config_hash.clone(),
        _ => unreachable!(),
    };
    for f in files {
        let mut reader = csv::Reader::from_path(&f).unwrap();
        let header = reader.headers().unwrap().clone();
        assert_eq!(&header[0], "config_hash");
        assert_eq!(&header[1], "seed");
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.len() == header.len() && r[0] == hash && &r[1] == "11"));
    }
}

#[test]
fn scalability_exports_one_series_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.experiment.algorithms = vec!["nsga2".into(), "emoea".into()];
    let results = ResultSet::Scalability(run_scalability(&cfg, None).unwrap());
    let files = export_results(&results, ExportFormat::Plotdata, dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    let users = fs::read_to_string(dir.path().join("hv_vs_users_nsga2.dat")).unwrap();
    assert_eq!(users.lines().count(), 1 + cfg.scalability.users.len());
}

#[test]
fn empty_and_unwritable_targets_fail() {
    let mut cfg = small_config();
    cfg.simulation.modes = vec![Mode::Npn];
    let mut report = run_simulation(&cfg, None).unwrap();
    report.windows.clear();
    let dir = tempfile::tempdir().unwrap();
    let empty = ResultSet::Simulation(report);
    assert!(matches!(export_results(&empty, ExportFormat::Csv, dir.path()), Err(HarnessError::Empty(_))));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = export_results(&simulation(), ExportFormat::Csv, &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, HarnessError::Io(_)));
    assert!("xlsx".parse::<ExportFormat>().is_err());
}

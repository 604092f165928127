//! Generated datasets and configuration files survive a trip through disk.

use persnet::netmodel::NetworkConfig;
use persnet::satisfaction::{dataset_hash, generate_dataset, ingest_csv, write_csv, zot_level, Persona};

#[test]
fn dataset_csv_roundtrip_preserves_samples_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let data = generate_dataset(&Persona::working_professional(4, 3), 200, 1).unwrap();
    write_csv(&data, &path).unwrap();
    let back = ingest_csv(&path).unwrap();
    assert!(back.skipped.is_empty(), "{:?}", back.skipped);
    assert_eq!(back.samples, data);
    assert_eq!(dataset_hash(&back.samples), dataset_hash(&data));
    for s in &data {
        assert_eq!(s.satisfaction, zot_level(&s.context, s.delta as f64));
    }
}

#[test]
fn network_config_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.toml");
    let cfg = NetworkConfig::default().with_num_users(6).unwrap();
    std::fs::write(&path, toml::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(NetworkConfig::from_file(&path).unwrap(), cfg);
    std::fs::write(&path, "num_rbs = 0\n").unwrap();
    assert!(NetworkConfig::from_file(&path).is_err());
}

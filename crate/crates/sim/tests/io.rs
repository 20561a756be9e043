use powergame::io::{
    load_codebook, load_json, load_realization, load_scenario, save_codebook, save_json, save_realization,
    save_scenario,
};
use powergame::Error;
use powergame_core::{CodeBook, Realization, Scenario};

#[test]
fn realization_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    for (users, seed) in [(1, 0), (16, 7), (48, u64::MAX)] {
        let r = Realization::generate(users, 32, seed, 5e-16).unwrap();
        let path = dir.path().join(format!("r{users}.json"));
        save_realization(&path, &r).unwrap();
        let back = load_realization(&path).unwrap();
        assert_eq!(back, r);
        for (a, b) in back.scenario.gains.iter().flatten().zip(r.scenario.gains.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // Saving again gives the same bytes.
        let again = dir.path().join("again.json");
        save_realization(&again, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn scenario_and_codebook_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::generate(12, 3, 5e-16).unwrap();
    let c = CodeBook::generate(12, 32, 3).unwrap();
    save_scenario(&dir.path().join("s.json"), &s).unwrap();
    save_codebook(&dir.path().join("c.json"), &c).unwrap();
    assert_eq!(load_scenario(&dir.path().join("s.json")).unwrap(), s);
    let back = load_codebook(&dir.path().join("c.json")).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.rho(2, 5), c.rho(2, 5));
}

#[test]
fn mismatched_realization_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let r = Realization::generate(4, 32, 1, 5e-16).unwrap();
    let mut value: serde_json::Value = serde_json::to_value(&r).unwrap();
    let extra = CodeBook::generate(5, 32, 1).unwrap();
    value["codes"] = serde_json::to_value(&extra).unwrap();
    let path = dir.path().join("bad.json");
    save_json(&path, &value).unwrap();
    assert!(matches!(load_realization(&path), Err(Error::InvalidSpec(_))));
}

#[test]
fn missing_and_malformed_files_report_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert!(matches!(load_realization(&missing), Err(Error::Io { .. })));
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{ not json").unwrap();
    match load_json::<Scenario>(&junk) {
        Err(Error::Json { path, .. }) => assert_eq!(path, junk),
        other => panic!("{other:?}"),
    }
}

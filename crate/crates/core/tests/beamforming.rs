use sparse_lowrank::beamforming::{
    exhaustive_active_set_search, group_sparse_beamforming, network_power, user_admission, AdmissionInstance,
    BeamformingSettings, CranGenerator, CranInstance,
};

#[test]
fn gsbf_matches_or_trails_the_oracle() {
    let settings = BeamformingSettings::default();
    for seed in 0..3 {
        let inst = CranGenerator { rrhs: 3, users: 2, ..Default::default() }.generate(seed);
        let gsbf = group_sparse_beamforming(&inst, &settings).unwrap();
        let oracle = exhaustive_active_set_search(&inst, &settings).unwrap();
        let best = oracle.best.expect("generated instances are feasible");
        assert!(gsbf.solution.is_feasible());
        assert!(gsbf.solution.network_power >= best.network_power - 1e-6);
        let recomputed = network_power(&inst, &gsbf.solution).unwrap();
        assert!((recomputed - gsbf.solution.network_power).abs() < 1e-6 * (1.0 + recomputed));
    }
}

#[test]
fn instance_text_roundtrip() {
    let inst = CranGenerator::default().generate(3);
    let back = CranInstance::from_text(&inst.to_text()).unwrap();
    assert_eq!(back.to_text(), inst.to_text());
}

#[test]
fn admission_serves_a_feasible_subset() {
    // At 5 dB this network cannot serve all four users.
    let inst = CranGenerator { rrhs: 2, users: 4, sinr_db: 5.0, ..Default::default() }.generate(8);
    let res = user_admission(&AdmissionInstance::new(inst).unwrap(), &BeamformingSettings::default()).unwrap();
    assert!(res.solution.is_feasible());
    assert!(!res.admitted.is_empty() && res.admitted.len() < 4);
    assert!(res.admitted.windows(2).all(|w| w[0] < w[1]));
    for &k in &res.removed {
        assert!(!res.admitted.contains(&k));
    }
    // Users with a clearly positive slack are never admitted.
    for (k, &z) in res.violations.iter().enumerate() {
        if z > 1e-3 {
            assert!(!res.admitted.contains(&k));
        }
    }
}

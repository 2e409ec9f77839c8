use std::sync::Arc;

use calabi_core::analysis::{check_hutchings_disk, disk_atlas};
use calabi_core::embedding::{calabi_of_fa, embed};
use calabi_core::{
    find_periodic_orbits, fixtures, invariants, ActionField, AreaMap, MapSpec, SearchParams, Status,
};

fn field(spec: &MapSpec, tol: f64) -> ActionField {
    ActionField::new(Arc::new(spec.map.clone()), spec.map.chart.standard_form(), spec.normalization, tol).unwrap()
}

#[test]
fn fixtures_round_trip_through_toml() {
    for (name, _) in fixtures::ALL {
        let spec = fixtures::load(name).unwrap().unwrap();
        let again = MapSpec::parse(&spec.to_toml()).unwrap();
        assert_eq!(spec.map_hash(), again.map_hash(), "{name}");
        assert_eq!(spec.tasks, again.tasks, "{name}");
    }
}

#[test]
fn wide_twist_invariants() {
    let spec = fixtures::load("wide_twist").unwrap().unwrap();
    let r = invariants(&field(&spec, 1e-11), 1e-11).unwrap();
    assert!((r.theta0 + 0.75).abs() < 1e-12 && (r.theta1 - 1.25).abs() < 1e-12);
    assert!((r.flux.unwrap() - 0.5).abs() < 1e-12);
    // mean of x²/2 + 3/4 over [-1, 1] x [0, 1], normalized to total area 1
    assert!((r.calabi - (1.0 / 6.0 + 0.75)).abs() < 1e-9);
}

#[test]
fn disk_bump_twists_center_is_fixed() {
    let spec = fixtures::load("disk_bump_twists").unwrap().unwrap();
    let g = field(&spec, 1e-9);
    let atlas = find_periodic_orbits(&g, &SearchParams { k_max: 4, grid: 12, m_range: None }).unwrap().orbits;
    assert!(atlas.iter().all(|o| o.k == 1 || o.k == 4), "{:?}", atlas.iter().map(|o| o.k).collect::<Vec<_>>());
    assert!(atlas.iter().any(|o| o.k == 4 && o.continuum));
}

#[test]
fn twist_embedding_feeds_the_disk_check() {
    let spec = fixtures::load("twist").unwrap().unwrap();
    let map: Arc<dyn AreaMap> = Arc::new(spec.map.clone());
    let g = field(&spec, 1e-11);
    let atlas = find_periodic_orbits(&g, &SearchParams { k_max: 4, grid: 16, m_range: None }).unwrap().orbits;
    let dm = embed(map, 1.0).unwrap();
    let disk = disk_atlas(&dm, &atlas, 1e-10).unwrap();
    assert_eq!(disk.len(), atlas.len() + 1);
    let cal = calabi_of_fa(&dm, 1e-10).unwrap().direct;
    let v = check_hutchings_disk(cal, dm.boundary.theta_upper, &disk, 1e-6);
    assert_ne!(v.status, Status::NoWitnessAtDepth, "{v:?}");
    assert!(v.recheck(&disk));
}

use std::path::{Path, PathBuf};

use lwr_junction::network::RoadProfile;
use lwr_junction::scenario::{run_scenario, ScenarioConfig, Scheme};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn traces(dir: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(dir.join("traces.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(2).map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn shipped_scenarios_validate() {
    for entry in std::fs::read_dir(scenario("")).unwrap() {
        let path = entry.unwrap().path();
        let config = ScenarioConfig::from_path(&path).unwrap();
        assert!(config.validate().unwrap().is_empty(), "{}", path.display());
        assert_eq!(ScenarioConfig::from_toml_str(&config.to_toml_string()).unwrap(), config);
    }
}

#[test]
fn empty_roads_give_zero_traces() {
    let mut config = ScenarioConfig::from_path(&scenario("table1.toml")).unwrap();
    for road in &mut config.roads {
        road.initial = RoadProfile::constant(0.0);
    }
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&config, dir.path()).unwrap();
    let rows = traces(dir.path());
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn runs_are_byte_for_byte_reproducible() {
    let mut config = ScenarioConfig::from_path(&scenario("congested.toml")).unwrap();
    config.solver.t_end = 0.05;
    for scheme in [Scheme::Godunov, Scheme::Bgk] {
        config.solver.scheme = scheme;
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_scenario(&config, a.path()).unwrap();
        run_scenario(&config, b.path()).unwrap();
        for file in ["traces.csv", "fields.csv", "report.json"] {
            let read = |d: &Path| std::fs::read(d.join(file)).unwrap();
            assert_eq!(read(a.path()), read(b.path()), "{file} differs for {scheme:?}");
        }
    }
}

#[test]
fn godunov_junction_cells_approach_the_riemann_traces() {
    let mut config = ScenarioConfig::from_path(&scenario("table1.toml")).unwrap();
    config.solver.scheme = Scheme::Godunov;
    config.output.fields = false;
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&config, dir.path()).unwrap();
    let rows = traces(dir.path());
    let last = &rows[rows.len() - 4..];
    let want = [[0.25, 0.5], [0.25, 0.5], [0.1875, 0.75], [0.1875, 0.25]];
    for (row, w) in last.iter().zip(want) {
        assert!((row[0] - w[0]).abs() <= 1e-12 && (row[1] - w[1]).abs() <= 1e-12, "{row:?}");
    }
}

#[test]
fn merge_gives_the_main_road_priority() {
    let config = ScenarioConfig::from_path(&scenario("merge.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&config, dir.path()).unwrap();
    let flux: Vec<f64> = run.traces.iter().map(|t| t.2).collect();
    // the main road keeps its free-flow demand, the ramp takes what is left
    assert!((flux[0] - 0.7).abs() <= 1e-12);
    assert!((flux[0] + flux[1] - flux[2]).abs() <= 1e-12);
    assert!((flux[2] - 1.0).abs() <= 1e-12);
}

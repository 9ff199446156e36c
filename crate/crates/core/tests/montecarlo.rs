use ookbcc::channel::registry_entry;
use ookbcc::montecarlo::{run_point, run_sweep};
use ookbcc::{Scenario, Technique};

fn f9_scenario(symbols: u64) -> Scenario {
    let mut s = Scenario::with_nodes(vec![registry_entry("f9").unwrap()]);
    s.seed = 42;
    s.n_data_symbols = symbols;
    s
}

#[test]
fn frozen_regression_point() {
    let s = f9_scenario(100_000);
    let p = run_point(&s, 10.0, Technique::Deviation).unwrap();
    assert_eq!(p.symbol_count, 100_000);
    assert_eq!(p.n_t, 50);
    assert_eq!(p.error_count, 50);
    assert_eq!(p.ber, 5e-4);
}

#[test]
fn run_point_matches_the_sweep() {
    let mut s = f9_scenario(20_000);
    s.power_sweep_dbm = vec![0.0];
    let sweep = run_sweep(&s).unwrap();
    for t in Technique::ALL {
        let single = run_point(&s, 0.0, t).unwrap();
        let from_sweep = sweep.points.iter().find(|p| p.technique == t).unwrap();
        assert_eq!(&single, from_sweep);
    }
}

#[test]
fn more_power_means_fewer_errors() {
    let mut s = f9_scenario(50_000);
    s.power_sweep_dbm = vec![-10.0, 30.0];
    let r = run_sweep(&s).unwrap();
    assert!(r.failures.is_empty());
    for t in Technique::ALL {
        let at = |dbm: f64| {
            r.points
                .iter()
                .find(|p| p.technique == t && p.tx_power_dbm == dbm)
                .unwrap()
                .ber
        };
        assert!(at(30.0) < at(-10.0), "{t}: {} vs {}", at(30.0), at(-10.0));
    }
}

#[test]
fn coherent_baseline_is_best() {
    let mut s = Scenario::with_nodes(
        ["f1", "f5", "f9"]
            .into_iter()
            .map(|n| registry_entry(n).unwrap())
            .collect(),
    );
    s.seed = 3;
    s.n_data_symbols = 100_000;
    s.power_sweep_dbm = vec![-10.0, 0.0];
    let r = run_sweep(&s).unwrap();
    for &dbm in &s.power_sweep_dbm {
        let row = |t: Technique| {
            r.points
                .iter()
                .find(|p| p.technique == t && p.tx_power_dbm == dbm)
                .unwrap()
        };
        let mrc = row(Technique::Mrc);
        for t in Technique::NONCOHERENT {
            let other = row(t);
            assert!(
                mrc.ber <= other.ber + 2.0 * other.ci95.max(mrc.ci95),
                "{t} at {dbm} dBm"
            );
        }
    }
}

#[test]
fn point_seeds_are_respected() {
    let mut a = f9_scenario(20_000);
    a.power_sweep_dbm = vec![-6.0];
    let mut b = a.clone();
    b.seed = 43;
    let first = run_sweep(&a).unwrap();
    assert_eq!(first, run_sweep(&a).unwrap());
    assert_ne!(first, run_sweep(&b).unwrap());
}

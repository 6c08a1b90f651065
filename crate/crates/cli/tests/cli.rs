use std::path::Path;
use std::process::{Command, Output};

fn qheat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qheat"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn validate_quick_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = qheat(dir.path(), &["validate", "--level", "quick", "--out", "summary.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = rows(&dir.path().join("summary.csv"));
    assert_eq!(r[0], ["check", "status", "value", "tolerance", "detail"]);
    assert!(r[1..].iter().all(|row| row.len() == 5 && row[1] == "PASS"));
}

#[test]
fn corrupted_rate_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = qheat(dir.path(), &["validate", "--set", "p=-1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("engine parameters"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qheat(dir.path(), &["sweep", "--set", "bogus=1"])), 2);
    assert_eq!(code(&qheat(dir.path(), &["sweep", "--set", "sweep.axis=g", "--set", "sweep.start=1"])), 2);
    assert_eq!(
        code(&qheat(dir.path(), &["sweep", "--set", "sweep.axis=g", "--set", "sweep.start=1", "--set", "sweep.stop=2", "--set", "sweep.count=0"])),
        2
    );
    assert_eq!(code(&qheat(dir.path(), &["sweep", "--config", "missing.cfg"])), 2);
    assert_eq!(code(&qheat(dir.path(), &["flywheel-mc", "--set", "trials=0"])), 2);
    assert_eq!(code(&qheat(dir.path(), &["sweep", "--preset", "fig9"])), 2);
}

#[test]
fn single_point_sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# one reset-engine point\nmodel = 2qe-reset\ng = 0.5   # coupling\n\nsweep.axis = g_over_p\nsweep.start = 0.5\nsweep.stop = 0.5\n",
    )
    .unwrap();
    let o = qheat(dir.path(), &["sweep", "--config", "run.cfg", "--set", "sweep.count=1", "--out", "one.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("one.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0].len(), r[1].len());
    assert_eq!(r[1][0], "g_over_p");
    let dev: f64 = r[1][12].parse().unwrap();
    assert!(dev < 5e-3);
}

#[test]
fn numerical_abort_flushes_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = qheat(
        dir.path(),
        &["sweep", "--set", "window.n_min=-6", "--set", "window.n_max=6", "--out", "leak.csv", "--jobs", "1"],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("leak.csv"));
    assert_eq!(r.last().unwrap()[0], "FAILED");
    assert_eq!(r.last().unwrap().len(), r[0].len());
}

#[test]
fn fig5_preset_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = qheat(dir.path(), &["sweep", "--preset", "fig5"]);
    assert_eq!(code(&o), 0);
    let r = rows(&dir.path().join("fig5.csv"));
    assert_eq!(r[0], ["axis", "value", "p0", "tur_coherent", "tur_fock", "tur_ct"]);
    assert_eq!(r.len(), 101);
    for row in &r[1..] {
        let v: Vec<f64> = row[1..].iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[2] - 3.0 * v[3]).abs() < 1e-9 * v[2]);
        assert!(v[3] <= v[4]);
    }
}

#[test]
fn flywheel_mc_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = qheat(
            dir.path(),
            &["flywheel-mc", "--set", "trials=10", "--set", "cycles=100", "--set", "checkpoints=10,100", "--seed", "5", "--out", name],
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let r = rows(&dir.path().join("a.csv"));
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| row.len() == r[0].len()));
    assert_eq!(r[1][0], "10");
    assert_eq!(r[2][0], "100");
}

use std::path::PathBuf;
use std::process::{Command, Output};

use ookbcc::report::{read_csv, CSV_HEADER};

fn ookbcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ookbcc"))
        .args(args)
        .env_remove("OOKBCC_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn preset_runs_are_byte_identical() {
    let args = ["run", "--preset", "fig4", "--seed", "7", "--symbols", "4000"];
    let first = stdout(&ookbcc(&args));
    assert_eq!(first, stdout(&ookbcc(&args)));
    assert_eq!(first.lines().next(), Some(CSV_HEADER));
    // 26 powers times 4 techniques
    assert_eq!(first.lines().count(), 1 + 26 * 4);
}

#[test]
fn job_count_does_not_change_output() {
    let base = ["run", "--preset", "fig6", "--seed", "11", "--symbols", "3000"];
    let one = stdout(&ookbcc(&[&base[..], &["--jobs", "1"]].concat()));
    let many = stdout(&ookbcc(&[&base[..], &["--jobs", "5"]].concat()));
    assert_eq!(one, many);

    let from_env = Command::new(env!("CARGO_BIN_EXE_ookbcc"))
        .args(base)
        .env("OOKBCC_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(one, stdout(&from_env));
}

#[test]
fn registry_lists_nine_channels() {
    let text = stdout(&ookbcc(&["registry"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,family,parameters,condition");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[2], "f2,burr,scale=9.32e-7 c=38.8 k=0.552,strong");
    assert_eq!(lines[8], "f8,weibull,scale=1.01e-6 shape=4.05,weak");
}

#[test]
fn odd_training_length_is_a_config_error() {
    let path = scratch("odd_n_t.toml");
    std::fs::write(&path, "n_t = 51\npower_sweep_dbm = [0.0]\n\n[[nodes]]\nname = \"f9\"\n").unwrap();
    let out = ookbcc(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`n_t`"));
}

#[test]
fn unknown_keys_and_presets_are_rejected() {
    let path = scratch("unknown_key.toml");
    std::fs::write(&path, "n_t = 50\nsnr = 3\n\n[[nodes]]\nname = \"f9\"\n").unwrap();
    let out = ookbcc(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`snr`"));

    let out = ookbcc(&["preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`preset`"));

    let out = ookbcc(&["run", "--preset", "fig4", "--jobs", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn printed_preset_runs_like_the_preset() {
    let toml = stdout(&ookbcc(&["preset", "fig5-strong"]));
    let path = scratch("fig5_strong.toml");
    std::fs::write(&path, toml).unwrap();
    let from_file = stdout(&ookbcc(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--symbols",
        "2000",
    ]));
    let from_preset = stdout(&ookbcc(&["run", "--preset", "fig5-strong", "--symbols", "2000"]));
    assert_eq!(from_file, from_preset);
}

#[test]
fn out_file_round_trips() {
    let path = scratch("fig7.csv");
    let _ = std::fs::remove_file(&path);
    let out = ookbcc(&[
        "run",
        "--preset",
        "fig7",
        "--symbols",
        "2000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let points = read_csv(text.as_bytes()).unwrap();
    assert_eq!(points.len(), 7 * 3);
    let mut rewritten = Vec::new();
    ookbcc::report::write_csv(&points, &mut rewritten).unwrap();
    assert_eq!(String::from_utf8(rewritten).unwrap(), text);
    for p in &points {
        assert_eq!(p.tx_power_dbm, 10.0);
        assert_eq!(p.symbol_count, 2000);
        assert_eq!(p.ber, p.error_count as f64 / 2000.0);
    }
}

#[test]
fn per_node_preset_labels_each_block() {
    let text = stdout(&ookbcc(&["run", "--preset", "fig3", "--symbols", "1000"]));
    for k in 1..=9 {
        assert!(text.contains(&format!("# node: f{k}\n")));
    }
    assert_eq!(read_csv(text.as_bytes()).unwrap().len(), 9 * 26);
}

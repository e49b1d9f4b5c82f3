use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use taskrisk::synthetic::CompositeFixture;
use taskrisk::RunManifest;

const SEED: u64 = 20240;

fn taskrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taskrisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(dir: &Path) -> PathBuf {
    CompositeFixture::generate(SEED).write(dir, SEED).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_full_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("bundle");
    let o = taskrisk(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "manifest.json",
        "adequacy.txt",
        "scree.csv",
        "loadings.csv",
        "scores.csv",
        "kscan.csv",
        "clusters.csv",
        "vulnerability.csv",
        "trends.csv",
        "scree.svg",
        "kscan.svg",
        "vulnerable_list.tsv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert!(m.complete);
    assert_eq!(m.summary.k, Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("run complete"));
}

#[test]
fn missing_input_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    fs::remove_file(dir.path().join("employment.csv")).unwrap();
    let out = dir.path().join("bundle");
    let o = taskrisk(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());
    assert!(stderr(&o).contains("employment.csv"));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let text = fs::read_to_string(&config).unwrap().replacen('{', "{\n  \"sead\": 1,", 1);
    fs::write(&config, text).unwrap();
    let o = taskrisk(&["run", "--config", arg(&config), "--out", arg(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sead"), "{}", stderr(&o));
}

#[test]
fn singular_correlation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let path = dir.path().join("attributes.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    let copies: Vec<String> = text
        .lines()
        .filter(|l| l.contains(",B.4,"))
        .map(|l| l.replace(",B.4,", ",B.5,"))
        .collect();
    for l in copies {
        text.push_str(&l);
        text.push('\n');
    }
    fs::write(&path, text).unwrap();
    let catalog = dir.path().join("catalog.tsv");
    let mut cat = fs::read_to_string(&catalog).unwrap();
    cat.push_str("B.5\tbottleneck\tDuplicate skill\n");
    fs::write(&catalog, cat).unwrap();
    let out = dir.path().join("bundle");
    let o = taskrisk(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert!(!m.complete);
    assert!(m.error.is_some());
}

#[test]
fn partial_reruns_reuse_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("bundle");
    let c = arg(&config);
    let o = arg(&out);
    assert!(taskrisk(&["run", "--config", c, "--out", o]).status.success());
    let scores = fs::read(out.join("scores.csv")).unwrap();
    let trends = fs::read(out.join("trends.csv")).unwrap();

    for stage in ["cluster", "classify", "trends", "plot"] {
        let r = taskrisk(&[stage, "--config", c, "--out", o]);
        assert!(r.status.success(), "{stage}: {}", stderr(&r));
        assert!(out.join(format!("manifest-{stage}.json")).is_file());
    }
    assert_eq!(fs::read(out.join("scores.csv")).unwrap(), scores);
    assert_eq!(fs::read(out.join("trends.csv")).unwrap(), trends);
    let m = RunManifest::read(&out.join("manifest-trends.json")).unwrap();
    assert!(m.complete);
    assert!(RunManifest::read(&out.join("manifest.json")).unwrap().complete);
}

#[test]
fn plot_without_tables_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("empty");
    let o = taskrisk(&["plot", "--config", arg(&config), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("bundle");
    let o = taskrisk(&["factors", "--config", arg(&config), "--out", arg(&out), "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = RunManifest::read(&out.join("manifest-factors.json")).unwrap();
    assert_eq!(m.config["seed"], 7);
}

#[test]
fn missing_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let text = fs::read_to_string(&config).unwrap().replace(&format!("\"seed\": {SEED},"), "");
    fs::write(&config, text).unwrap();
    let o = taskrisk(&["factors", "--config", arg(&config), "--out", arg(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

//! Byte-level checks of the file formats against the files in `tests/golden`.
//! Set `UPDATE_GOLDEN=1` to rewrite them.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use qfc_ramsey::config::load_config;
use qfc_ramsey::experiments::{rabi_scan, ScanMode};
use qfc_ramsey::photon::{g2_experiment, TimeTagStream};

fn golden(name: &str, actual: &[u8]) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the golden file");
}

fn sample_tags() -> TimeTagStream {
    let cfg = load_config("paper-cryo").unwrap();
    let (_, tags) = g2_experiment(&cfg.source.unwrap(), &cfg.detector, 1e-2, 1.0, 400, cfg.g2.window, 5).unwrap();
    tags
}

#[test]
fn time_tags_tsv() {
    let tags = sample_tags();
    let mut buf = Vec::new();
    tags.write_tsv(&mut buf).unwrap();
    golden("tags.tsv", &buf);
    assert_eq!(TimeTagStream::read_tsv(BufReader::new(&buf[..])).unwrap(), tags);
}

#[test]
fn time_tags_csv() {
    let tags = sample_tags();
    let mut buf = Vec::new();
    tags.write_csv(&mut buf).unwrap();
    golden("tags.csv", &buf);
    assert_eq!(TimeTagStream::read_csv(&buf[..]).unwrap(), tags);
}

#[test]
fn scan_csv() {
    let cfg = load_config("fig4").unwrap();
    let powers: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let scan = rabi_scan(
        &powers,
        &cfg.fwm,
        &cfg.quad,
        &cfg.fiber,
        cfg.temp,
        None,
        &ScanMode::Analytic,
    )
    .unwrap();
    let mut buf = Vec::new();
    scan.write_csv(&mut buf, Some("0123456789abcdef")).unwrap();
    golden("rabi_scan.csv", &buf);
}

//! Helpers shared by the integration test targets.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod stub;

use std::path::PathBuf;

use visq_core::snapshot::{load_snapshot_file, PageSnapshot};

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn fixture(rel: &str) -> PageSnapshot {
    load_snapshot_file(fixture_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every standalone snapshot fixture plus every page of every fixture site.
pub fn all_fixture_snapshots() -> Vec<(String, PageSnapshot)> {
    let mut out = Vec::new();
    let root = fixture_path("");
    let mut dirs = vec![root.clone()];
    while let Some(dir) = dirs.pop() {
        let mut entries: Vec<_> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                if p.file_name().is_some_and(|n| n != "webdriver") {
                    dirs.push(p);
                }
                continue;
            }
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let skip = ["manifest.json", "normalization.json", "articles.json"];
            if p.extension().is_some_and(|e| e == "json") && !skip.contains(&name.as_str()) {
                let rel = p
                    .strip_prefix(&root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                let snap = load_snapshot_file(&p).unwrap_or_else(|e| panic!("{rel}: {e}"));
                out.push((rel, snap));
            }
        }
    }
    out
}

/// One pass/fail line per acceptance criterion.
pub fn report(criterion: &str, result: &Result<(), String>) {
    match result {
        Ok(()) => println!("ACCEPTANCE PASS {criterion}"),
        Err(why) => println!("ACCEPTANCE FAIL {criterion}: {why}"),
    }
}

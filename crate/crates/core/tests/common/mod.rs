#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use slaiot_core::vocabulary::VocabularyRegistry;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn registry() -> VocabularyRegistry {
    VocabularyRegistry::builtin()
}

/// `(file name, contents)` of every file in `fixtures/<dir>` with the given
/// suffix, sorted by name.
pub fn read_dir(dir: &str, suffix: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(fixtures().join(dir))
        .unwrap_or_else(|e| panic!("fixtures/{dir}: {e}"))
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub fn corpus() -> Vec<(String, String)> {
    read_dir("corpus", ".slaiot")
}

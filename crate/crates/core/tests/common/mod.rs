#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Numeric rows of a headed CSV file.
pub fn read_rows(name: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(data_path(name)).unwrap();
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|x| x.trim().parse().unwrap()).collect())
        .collect()
}

/// `name,value[,value...]` rows keyed by name.
pub fn named_values(name: &str) -> HashMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(data_path(name)).unwrap();
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split(',');
            let key = it.next().unwrap().to_string();
            (key, it.map(|x| x.trim().parse().unwrap()).collect())
        })
        .collect()
}

// SPDX-License-Identifier: MIT OR Apache-2.0

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub fn kscpd(args: &[&str], threads: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kscpd"));
    cmd.args(args).current_dir(dir).env_remove("KSCPD_THREADS");
    if let Some(t) = threads {
        cmd.env("KSCPD_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

pub fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn stderr_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

/// Drops every `wall_time_ms` key, recursively.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Drops the `wall_time_ms` column.
pub fn strip_timing_csv(text: &str) -> String {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "wall_time_ms").expect("timing column");
    let mut w = csv::Writer::from_writer(Vec::new());
    let keep = |r: &csv::StringRecord| -> Vec<String> {
        r.iter().enumerate().filter(|(i, _)| *i != col).map(|(_, f)| f.to_owned()).collect()
    };
    w.write_record(keep(&header)).unwrap();
    for r in rdr.records() {
        w.write_record(keep(&r.unwrap())).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Strips timing from a JSON document and re-serialises it, so that two
/// runs can be compared byte for byte.
pub fn json_without_timing(text: &[u8]) -> String {
    let mut v: Value = serde_json::from_slice(text).unwrap();
    strip_timing(&mut v);
    serde_json::to_string_pretty(&v).unwrap()
}

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "adiabatic_counting.h"

int main(void) {
    uint64_t marked[] = {1, 5, 9, 12, 13};
    AqcDatabase *db = NULL;
    AqcRun *run = NULL;
    uint64_t num = 0, den = 0;
    if (aqc_database_new(4, marked, 5, &db) != AQC_STATUS_OK) return 1;
    AqcCountingOptions opts = aqc_counting_options_default(4);
    opts.seed = 11;
    if (aqc_run_counting(db, &opts, &run) != AQC_STATUS_OK) return 2;
    if (aqc_run_alpha_hat(run, &num, &den) != AQC_STATUS_OK) return 3;
    printf("%llu/%llu\n", (unsigned long long)num, (unsigned long long)den);
    char *json = aqc_run_to_json(run);
    if (json == NULL) return 4;
    aqc_string_free(json);
    aqc_run_free(run);
    if (aqc_database_new(4, marked, 5, NULL) != AQC_STATUS_NULL_POINTER) return 5;
    if (aqc_last_error_message() == NULL) return 6;
    aqc_database_free(db);
    return 0;
}
"#;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(header_dir().join("adiabatic_counting.h")).unwrap();
    for name in [
        "typedef struct AqcDatabase AqcDatabase",
        "typedef struct AqcRun AqcRun",
        "AQC_STATUS_GUARD_EXCEEDED",
        "aqc_run_counting",
        "aqc_overlap_report",
        "aqc_last_error_message",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_compiles_against_header() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

// links the static library from a prior `cargo build` built alongside this test into a small C program
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libadiabatic_counting_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: build the workspace first to produce {}",
            lib.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header_dir())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5/16");
}

//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "access_time.h"

int main(void) {
    AtChain *chain = NULL;
    if (at_chain_new("{\"family\":\"path\",\"n\":10}", &chain) != AT_OK) {
        fprintf(stderr, "%s\n", at_last_error_message());
        return 1;
    }
    size_t n = at_chain_size(chain);
    double mu[11] = {0}, nu[11] = {0};
    mu[0] = 1.0;
    nu[10] = 1.0;
    double value = 0.0;
    size_t argmax = 0;
    if (at_access_time(chain, mu, nu, n, &value, &argmax) != AT_OK || fabs(value - 100.0) > 1e-9 || argmax != 10) {
        return 2;
    }
    AtFamilyReport report;
    if (at_family_report(chain, mu, nu, n, &report) != AT_OK || report.erratum_flag != -1) {
        return 3;
    }
    AtSimSummary sim;
    if (at_simulate(chain, mu, nu, n, 2000, 1, &sim) != AT_OK || sim.samples != 2000) {
        return 4;
    }
    at_chain_free(chain);
    if (at_chain_new("{\"family\":\"path\"}", &chain) != AT_INVALID_SPEC || chain != NULL) {
        return 5;
    }
    printf("%.1f\n", value);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // The test binary lives in <target>/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/access_time.h")).unwrap();
    for name in [
        "at_chain_new",
        "at_chain_free",
        "at_chain_size",
        "at_access_time",
        "at_access_time_spec",
        "at_hitting_matrix",
        "at_stationary",
        "at_max_hitting",
        "at_tav",
        "at_family_report",
        "at_simulate",
        "at_last_error_message",
        "at_version",
        "typedef struct AtChain AtChain",
        "AT_BUFFER_TOO_SMALL = 8",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let lib = target_dir().join("libaccess_time_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "100.0");
}

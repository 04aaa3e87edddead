//! Compile and run a C program against the generated header and the static
//! library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "rdcheck.h"

int main(void) {
    RdConstants c;
    if (rd_free_space_constants(2, 1.0, 0.0, &c) != RD_STATUS_OK) return 1;
    if (fabs(c.b4 - 3.141592653589793) > 1e-10) return 2;

    double u[4];
    if (rd_quad_equilibrium(2.0, 2.0, 2.0, u) != RD_STATUS_OK) return 3;
    if (u[0] != 1.0 || u[3] != 1.0) return 4;

    if (rd_free_space_constants(1, -1.0, 0.0, &c) != RD_STATUS_DOMAIN) return 5;
    const char *msg = rd_last_error_message();
    if (msg == NULL || strstr(msg, "diffusion") == NULL) return 6;

    RdModel *m = NULL;
    const char *json = "{\"name\": \"skew-lotka-volterra\", \"diffusion\": [1, 1],"
                       " \"interaction\": [[0, 1], [-1, 0]], \"tau\": [1, 1]}";
    if (rd_model_from_json(json, &m) != RD_STATUS_OK) return 7;
    double w[2] = {2.0, 3.0}, f[2];
    if (rd_model_eval(m, w, 2, 0.0, f) != RD_STATUS_OK) return 8;
    if (fabs(f[0] + f[1] + 5.0) > 1e-12) return 9;
    rd_model_free(m);

    printf("ok %s\n", rd_version());
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("librdcheck_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

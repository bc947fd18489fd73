use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "henon.h"

int main(void) {
    const char *json = "{\"factors\":[{\"poly\":[\"1/2\",\"0\",\"1\"],\"delta\":\"1/2\"}]}";
    HenonMapHandle *h = NULL;
    if (henon_map_from_json(json, &h) != HENON_STATUS_OK) return 10;
    uint64_t d = 0;
    if (henon_map_degree(h, &d) != HENON_STATUS_OK || d != 2) return 11;
    double q[4] = {1.0, 0.0, 1.0, 0.0}, out[4];
    if (henon_map_eval(h, HENON_DIRECTION_PLUS, q, out) != HENON_STATUS_OK) return 12;
    if (out[0] != 1.0 || out[2] != 1.0) return 13;
    char *s = NULL;
    if (henon_height_json(h, "1,1", 1e-8, &s) != HENON_STATUS_OK) return 14;
    printf("%s\n", s);
    henon_string_free(s);
    if (henon_map_from_json("{", &h) != HENON_STATUS_INVALID_INPUT) return 15;
    if (strlen(henon_last_error()) == 0) return 16;
    return 0;
}
"#;

fn artifact_dir() -> PathBuf {
    // CARGO_TARGET_TMPDIR is <target>/tmp; the library sits in <target>/<profile>
    // or its deps/ when built only as a test dependency.
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf();
    ["debug", "debug/deps", "release", "release/deps"]
        .iter()
        .map(|p| target.join(p))
        .find(|d| d.join("libhenon_ffi.a").exists())
        .expect("static library was built")
}

#[test]
fn c_program_links_against_header() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    let exe = tmp.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(artifact_dir().join("libhenon_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["h_plus"], 0.0);
}

//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "dihedral_cutoff.h"

int main(void) {
    DcGeneratorSet *gs = NULL;
    DcDist *d = NULL;
    double tv = -1.0, t0 = 0.0;
    DcRegime regime;
    if (dc_gens_sample(101, 6, 4, true, 1000, &gs) != DC_STATUS_OK) return 1;
    if (dc_evolve(gs, 50.0, 0.0, 0, &d) != DC_STATUS_OK) return 2;
    if (dc_dist_tv(d, &tv) != DC_STATUS_OK) return 3;
    if (dc_cutoff_time(0, 202, &t0, &regime) != DC_STATUS_DOMAIN) return 4;
    if (dc_last_error() == NULL) return 5;
    printf("%.17g\n", tv);
    dc_dist_free(d);
    dc_gens_free(gs);
    return 0;
}
"#;

fn target_profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(header_dir.join("dihedral_cutoff.h")).unwrap();
    for f in [
        "dc_last_error",
        "dc_gens_sample",
        "dc_gens_from_json",
        "dc_gens_to_json",
        "dc_gens_free",
        "dc_evolve",
        "dc_dist_tv",
        "dc_dist_collision",
        "dc_dist_copy_probs",
        "dc_dist_free",
        "dc_cutoff_time",
        "dc_entropic_time",
        "dc_srw_entropy",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }

    let lib = target_profile_dir().join("libdihedral_cutoff_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = work.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let tv: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((0.0..0.05).contains(&tv), "{tv}");
}

use std::path::{Path, PathBuf};
use std::process::Command;

/// `target/<profile>`, found from this test binary's `deps` directory.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sqfree.h")).unwrap();
    for name in [
        "sqf_last_error",
        "sqf_gamma",
        "sqf_sigma_product",
        "sqf_sigma_sum",
        "sqf_lambda",
        "sqf_roots_new",
        "sqf_roots_free",
        "sqf_sieve_new",
        "sqf_sieve_free",
        "sqf_construct_preimage",
        "sqf_kloosterman",
        "sqf_theta",
        "sqf_prehod",
        "typedef struct SqfRootSet SqfRootSet;",
        "SQF_STATUS_NULL_POINTER = 7",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_cdylib() {
    let dir = profile_dir();
    let lib = dir.join("libsqfree_ffi.so");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library at {}", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("sqfree_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&dir)
        .arg("-lsqfree_ffi")
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).env("LD_LIBRARY_PATH", &dir).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}

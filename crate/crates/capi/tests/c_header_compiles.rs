//! Compile and run the C example against the generated header and the
//! static library; skips when no C compiler is installed.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_demo_builds_and_runs() {
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok());
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping");
        return;
    };

    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/oneway.h");
    assert!(header.exists(), "cbindgen header missing at {}", header.display());

    // `cargo test` compiles the rlib only; refresh the staticlib artifact
    // for the profile this test runs under.
    let mut lib_dir = PathBuf::from(std::env::current_exe().expect("test binary path"));
    lib_dir.pop();
    if lib_dir.ends_with("deps") {
        lib_dir.pop();
    }
    let release = lib_dir.ends_with("release");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut build = Command::new(cargo);
    build.args(["build", "-p", "oneway-capi"]);
    if release {
        build.arg("--release");
    }
    let built = build.output().expect("cargo build for staticlib");
    assert!(
        built.status.success(),
        "staticlib build failed:\n{}",
        String::from_utf8_lossy(&built.stderr)
    );
    let lib = lib_dir.join("liboneway_capi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let out = std::env::temp_dir().join(format!("oneway_capi_demo_{}", std::process::id()));
    let compile = Command::new(cc)
        .arg("-O1")
        .arg(manifest.join("examples/demo.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .output()
        .expect("compiler invocation");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&out).output().expect("demo runs");
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "demo exit: {:?}\n{stdout}", run.status);
    assert!(stdout.contains("ok"), "unexpected demo output:\n{stdout}");
    let _ = std::fs::remove_file(&out);
}

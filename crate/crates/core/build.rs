use std::process::Command;

fn main() {
    // lapack-sys only declares the FFI surface; link the system OpenBLAS
    // (which bundles LAPACK) here so downstream binaries resolve it.
    if let Ok(out) = Command::new("pkg-config").args(["--libs", "openblas"]).output() {
        if out.status.success() {
            for tok in String::from_utf8_lossy(&out.stdout).split_whitespace() {
                if let Some(path) = tok.strip_prefix("-L") {
                    println!("cargo:rustc-link-search=native={path}");
                }
            }
        }
    }
    println!("cargo:rustc-link-lib=dylib=openblas");
}

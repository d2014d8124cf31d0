use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");

    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("esfcheck.h");
    bindings.write_to_file(&out);
    // keep the checked-in copy current when the source tree is writable
    bindings.write_to_file(crate_dir.join("include").join("esfcheck.h"));
}

use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("read cbindgen.toml");
    let bindings = cbindgen::generate_with_config(&crate_dir, config).expect("generate C header");
    let mut header = Vec::new();
    bindings.write(&mut header);

    // Rewriting an unchanged header would retrigger dependent builds.
    let path = crate_dir.join("include").join("fedfuse.h");
    if fs::read(&path).ok().as_deref() != Some(header.as_slice()) {
        fs::create_dir_all(path.parent().unwrap()).expect("create include/");
        fs::write(&path, header).expect("write include/fedfuse.h");
    }
}

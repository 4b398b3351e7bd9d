fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir");
    let header = std::path::Path::new(&crate_dir)
        .join("include")
        .join("prodmod.h");
    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("PRODMOD_H".into());
    config.cpp_compat = true;
    config.header = Some("/* C interface for the prodmod decision engine. */".into());
    config.enumeration.prefix_with_name = true;
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation")
        .write_to_file(header);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
